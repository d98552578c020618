//! Wire formats: population/config JSON schemas, trace CSV, report JSON.
//!
//! Rationals are decimal-free strings ("5", "-7/2"); plain JSON integers are
//! accepted on input. A window is `[lo, hi]` with `null` for an unbounded
//! end, or the string `"empty"`. Emission is canonical: loading and
//! re-emitting a document yields identical bytes.

use crate::competition::{
    CompetitionConfig, CompetitionUser, LambdaSpec, MultiFairLimitReport, MultiQuotientReport,
    MultiTrace, PlatformSpec,
};
use crate::dynamics::{FairLimitReport, Trace};
use crate::error::{Error, Result};
use crate::extensions::{FreqPopulation, FreqUser, Shock};
use crate::lcc::LccResult;
use crate::model::{Population, Stack, StackedPopulation, ThresholdSpec, UserPrefs, Window};
use crate::policy::WindowSearchReport;
use crate::quotient::QuotientFairLimitReport;
use crate::rational::Rational;
use crate::schedule::Schedule;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeSet;
use std::fmt::Write as _;

impl Serialize for Window {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Window::Empty => serializer.serialize_str("empty"),
            Window::Span { lo, hi } => {
                let pair = [
                    lo.as_ref().map(|r| r.to_string()),
                    hi.as_ref().map(|r| r.to_string()),
                ];
                pair.serialize(serializer)
            }
        }
    }
}

impl<'de> Deserialize<'de> for Window {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Tag(String),
            Pair([Option<Rational>; 2]),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Tag(s) if s == "empty" => Ok(Window::Empty),
            Raw::Tag(s) => Err(D::Error::custom(format!(
                "unknown window tag {s:?}; expected \"empty\" or [lo, hi]"
            ))),
            Raw::Pair([lo, hi]) => {
                if let (Some(l), Some(h)) = (lo, hi) {
                    if l > h {
                        return Err(D::Error::custom("window lower bound exceeds upper bound"));
                    }
                }
                Ok(Window::Span { lo, hi })
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct UserDoc {
    l: Rational,
    p: Rational,
    r: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<Rational>,
}

impl UserDoc {
    fn from_prefs(u: &UserPrefs) -> UserDoc {
        let (theta, b, lambda) = match u.threshold {
            ThresholdSpec::Direct(t) => (Some(t), None, None),
            ThresholdSpec::FromDisutility { b, lambda } => (None, Some(b), Some(lambda)),
        };
        UserDoc {
            l: u.left,
            p: u.speech,
            r: u.right,
            theta,
            b,
            lambda,
        }
    }

    fn into_prefs(self) -> Result<UserPrefs> {
        let threshold = match (self.theta, self.b, self.lambda) {
            (Some(t), None, None) => ThresholdSpec::Direct(t),
            (None, Some(b), Some(lambda)) => ThresholdSpec::FromDisutility { b, lambda },
            _ => {
                return Err(Error::precondition(
                    "user needs either \"theta\" or both \"b\" and \"lambda\"",
                ))
            }
        };
        Ok(UserPrefs::new(self.l, self.p, self.r, threshold))
    }
}

#[derive(Serialize, Deserialize)]
struct PopulationDoc {
    users: Vec<UserDoc>,
    initial_adopters: Vec<usize>,
}

pub fn population_to_json(pop: &Population) -> String {
    let doc = PopulationDoc {
        users: pop.users.iter().map(UserDoc::from_prefs).collect(),
        initial_adopters: pop.initial_adopters.iter().copied().collect(),
    };
    serde_json::to_string_pretty(&doc).expect("population serialization cannot fail")
}

pub fn population_from_json(s: &str) -> Result<Population> {
    let doc: PopulationDoc = serde_json::from_str(s)?;
    let users = doc
        .users
        .into_iter()
        .map(UserDoc::into_prefs)
        .collect::<Result<Vec<_>>>()?;
    Population::new(users, doc.initial_adopters).validated()
}

#[derive(Serialize, Deserialize)]
struct StackDoc {
    user: UserDoc,
    count: usize,
    initial_on: usize,
}

#[derive(Serialize, Deserialize)]
struct StackedDoc {
    stacks: Vec<StackDoc>,
}

pub fn stacked_to_json(sp: &StackedPopulation) -> String {
    let doc = StackedDoc {
        stacks: sp
            .stacks
            .iter()
            .map(|s| StackDoc {
                user: UserDoc::from_prefs(&s.user),
                count: s.count,
                initial_on: s.initial_on,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("stack serialization cannot fail")
}

pub fn stacked_from_json(s: &str) -> Result<StackedPopulation> {
    let doc: StackedDoc = serde_json::from_str(s)?;
    let stacks = doc
        .stacks
        .into_iter()
        .map(|d| {
            Ok(Stack {
                user: d.user.into_prefs()?,
                count: d.count,
                initial_on: d.initial_on,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sp = StackedPopulation { stacks };
    let v = sp.validate();
    if !v.is_empty() {
        return Err(Error::Invalid(v));
    }
    Ok(sp)
}

#[derive(Serialize, Deserialize)]
struct PlatformDoc {
    window: Window,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_per_user: Option<Vec<Rational>>,
}

#[derive(Serialize, Deserialize)]
struct CompetitionDoc {
    users: Vec<UserDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidths: Option<Vec<String>>,
    platforms: Vec<PlatformDoc>,
    initial_assignment: Vec<Option<usize>>,
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    normalized: bool,
}

fn default_true() -> bool {
    true
}

#[allow(clippy::trivially_copy_pass_by_ref)]
fn is_true(b: &bool) -> bool {
    *b
}

pub fn competition_to_json(cfg: &CompetitionConfig) -> String {
    let doc = CompetitionDoc {
        users: cfg.users.iter().map(|u| UserDoc::from_prefs(&u.prefs)).collect(),
        bandwidths: Some(
            cfg.users
                .iter()
                .map(|u| match u.bandwidth {
                    None => "inf".to_string(),
                    Some(g) => g.to_string(),
                })
                .collect(),
        ),
        platforms: cfg
            .platforms
            .iter()
            .map(|p| match &p.lambda {
                LambdaSpec::Uniform(l) => PlatformDoc {
                    window: p.window,
                    lambda: Some(*l),
                    lambda_per_user: None,
                },
                LambdaSpec::PerUser(v) => PlatformDoc {
                    window: p.window,
                    lambda: None,
                    lambda_per_user: Some(v.clone()),
                },
            })
            .collect(),
        initial_assignment: cfg.initial_assignment.clone(),
        normalized: cfg.normalized,
    };
    serde_json::to_string_pretty(&doc).expect("config serialization cannot fail")
}

pub fn competition_from_json(s: &str) -> Result<CompetitionConfig> {
    let doc: CompetitionDoc = serde_json::from_str(s)?;
    let n = doc.users.len();
    let bandwidths: Vec<Option<Rational>> = match doc.bandwidths {
        None => vec![None; n],
        Some(list) => {
            if list.len() != n {
                return Err(Error::precondition(
                    "bandwidths must list one entry per user",
                ));
            }
            list.iter()
                .map(|s| -> Result<Option<Rational>> {
                    if s == "inf" {
                        Ok(None)
                    } else {
                        Ok(Some(s.parse::<Rational>().map_err(|e| {
                            Error::precondition(e.to_string())
                        })?))
                    }
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let users = doc
        .users
        .into_iter()
        .zip(bandwidths)
        .map(|(u, bw)| {
            Ok(CompetitionUser {
                prefs: u.into_prefs()?,
                bandwidth: bw,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let platforms = doc
        .platforms
        .into_iter()
        .map(|p| {
            let lambda = match (p.lambda, p.lambda_per_user) {
                (Some(l), None) => LambdaSpec::Uniform(l),
                (None, Some(v)) => LambdaSpec::PerUser(v),
                _ => {
                    return Err(Error::precondition(
                        "platform needs either \"lambda\" or \"lambda_per_user\"",
                    ))
                }
            };
            Ok(PlatformSpec {
                window: p.window,
                lambda,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let cfg = CompetitionConfig {
        users,
        platforms,
        initial_assignment: doc.initial_assignment,
        normalized: doc.normalized,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize, Deserialize)]
struct FreqUserDoc {
    #[serde(flatten)]
    user: UserDoc,
    f: u32,
}

#[derive(Serialize, Deserialize)]
struct FreqDoc {
    users: Vec<FreqUserDoc>,
    initial_adopters: Vec<usize>,
}

pub fn freq_to_json(fp: &FreqPopulation) -> String {
    let doc = FreqDoc {
        users: fp
            .users
            .iter()
            .map(|u| FreqUserDoc {
                user: UserDoc::from_prefs(&u.prefs),
                f: u.frequency,
            })
            .collect(),
        initial_adopters: fp.initial_adopters.iter().copied().collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serialization cannot fail")
}

pub fn freq_from_json(s: &str) -> Result<FreqPopulation> {
    let doc: FreqDoc = serde_json::from_str(s)?;
    let users = doc
        .users
        .into_iter()
        .map(|d| {
            Ok(FreqUser {
                prefs: d.user.into_prefs()?,
                frequency: d.f,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FreqPopulation {
        users,
        initial_adopters: doc.initial_adopters.into_iter().collect(),
    })
}

/// Any of the three input document kinds, detected by their top-level keys.
pub enum InputDoc {
    Flat(Population),
    Stacked(StackedPopulation),
    Competition(CompetitionConfig),
}

pub fn input_from_json(s: &str) -> Result<InputDoc> {
    let probe: serde_json::Value = serde_json::from_str(s)?;
    if probe.get("stacks").is_some() {
        Ok(InputDoc::Stacked(stacked_from_json(s)?))
    } else if probe.get("platforms").is_some() {
        Ok(InputDoc::Competition(competition_from_json(s)?))
    } else {
        Ok(InputDoc::Flat(population_from_json(s)?))
    }
}

/// Trace CSV: `t,phase,actor,action,size`, with forced phase-change removals
/// interleaved as `banned` rows before the scheduled move of the same step.
pub fn trace_to_csv(trace: &Trace) -> String {
    let mut out = String::from("t,phase,actor,action,size\n");
    let mut ev = trace.evictions.iter().peekable();
    for step in &trace.steps {
        while let Some(e) = ev.peek() {
            if e.t <= step.t {
                let e = ev.next().unwrap();
                let _ = writeln!(out, "{},{},{},banned,{}", e.t, e.phase, e.user, e.size_after);
            } else {
                break;
            }
        }
        let action = match step.action {
            crate::dynamics::Action::Join => "join",
            crate::dynamics::Action::Leave => "leave",
            crate::dynamics::Action::Stay => "stay",
            crate::dynamics::Action::Banned => "banned",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            step.t,
            step.phase,
            step.actor,
            action,
            step.state.len()
        );
    }
    out
}

#[derive(Serialize)]
struct TraceStepDoc<'a> {
    t: u64,
    phase: usize,
    actor: usize,
    action: crate::dynamics::Action,
    size: usize,
    state: &'a BTreeSet<usize>,
}

#[derive(Serialize)]
struct EvictionDoc {
    t: u64,
    phase: usize,
    user: usize,
    size: usize,
}

pub fn trace_to_json(trace: &Trace) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        steps: Vec<TraceStepDoc<'a>>,
        evictions: Vec<EvictionDoc>,
    }
    let doc = Doc {
        steps: trace
            .steps
            .iter()
            .map(|s| TraceStepDoc {
                t: s.t,
                phase: s.phase,
                actor: s.actor,
                action: s.action,
                size: s.state.len(),
                state: &s.state,
            })
            .collect(),
        evictions: trace
            .evictions
            .iter()
            .map(|e| EvictionDoc {
                t: e.t,
                phase: e.phase,
                user: e.user,
                size: e.size_after,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serialization cannot fail")
}

/// Multi-platform trace CSV: `t,actor,from,to,total,size_p0,size_p1,...`.
pub fn multi_trace_to_csv(trace: &MultiTrace, num_platforms: usize) -> String {
    let mut header = String::from("t,actor,from,to,total");
    for j in 0..num_platforms {
        let _ = write!(header, ",size_p{j}");
    }
    header.push('\n');
    let mut out = header;
    for step in &trace.steps {
        let sizes = crate::competition::sizes_of(&step.state, num_platforms);
        let total: usize = sizes.iter().sum();
        let loc = |x: &Option<usize>| x.map(|j| j.to_string()).unwrap_or_else(|| "-".into());
        let _ = write!(
            out,
            "{},{},{},{},{}",
            step.t,
            step.actor,
            loc(&step.from),
            loc(&step.to),
            total
        );
        for s in sizes {
            let _ = write!(out, ",{s}");
        }
        out.push('\n');
    }
    out
}

fn schedule_doc(s: &Schedule) -> serde_json::Value {
    serde_json::to_value(s).expect("schedule serialization cannot fail")
}

pub fn fair_limit_report_to_json(report: &FairLimitReport) -> String {
    let doc = serde_json::json!({
        "min_size": report.min_size,
        "witness": schedule_doc(&report.witness),
        "num_fair_closed_sccs": report.num_fair_closed_sccs,
        "equilibria": report.equilibria.iter().map(|e| e.iter().collect::<Vec<_>>()).collect::<Vec<_>>(),
    });
    serde_json::to_string_pretty(&doc).expect("serialization cannot fail")
}

pub fn quotient_report_to_json(report: &QuotientFairLimitReport) -> String {
    let doc = serde_json::json!({
        "min_size": report.min_size,
        "witness": schedule_doc(&report.witness),
        "num_fair_closed_sccs": report.num_fair_closed_sccs,
        "equilibria": report.equilibria,
    });
    serde_json::to_string_pretty(&doc).expect("serialization cannot fail")
}

pub fn lcc_result_to_json(res: &LccResult, window: Option<&Window>) -> String {
    let mut doc = serde_json::json!({
        "method": res.method,
        "size": res.size,
        "members": res.members.iter().collect::<Vec<_>>(),
    });
    if let Some(w) = window {
        doc["window"] = serde_json::to_value(w).unwrap();
    }
    serde_json::to_string_pretty(&doc).expect("serialization cannot fail")
}

pub fn window_search_report_to_json(report: &WindowSearchReport) -> String {
    let doc = serde_json::json!({
        "best_window": report.best_window,
        "objective_value": report.objective_value,
        "per_candidate": report
            .per_candidate
            .iter()
            .map(|(w, v)| serde_json::json!({ "window": w, "value": v }))
            .collect::<Vec<_>>(),
    });
    serde_json::to_string_pretty(&doc).expect("serialization cannot fail")
}

pub fn multi_report_to_json(report: &MultiFairLimitReport) -> String {
    let doc = serde_json::json!({
        "per_platform_min_sizes": report.per_platform_min_sizes,
        "min_total_size": report.min_total_size,
        "num_fair_closed_sccs": report.num_fair_closed_sccs,
        "equilibria": report.equilibria,
        "witness": schedule_doc(&report.witness),
    });
    serde_json::to_string_pretty(&doc).expect("serialization cannot fail")
}

pub fn multi_quotient_report_to_json(report: &MultiQuotientReport) -> String {
    let doc = serde_json::json!({
        "per_platform_min_sizes": report.per_platform_min_sizes,
        "min_total_size": report.min_total_size,
        "num_fair_closed_sccs": report.num_fair_closed_sccs,
        "equilibria": report.equilibria,
        "witness": schedule_doc(&report.witness),
    });
    serde_json::to_string_pretty(&doc).expect("serialization cannot fail")
}

pub fn shock_to_json(shock: &Shock) -> serde_json::Value {
    serde_json::json!({
        "remove": shock.remove.iter().collect::<Vec<_>>(),
        "add": shock.add.iter().map(UserDoc::from_prefs).map(|d| serde_json::to_value(d).unwrap()).collect::<Vec<_>>(),
    })
}
