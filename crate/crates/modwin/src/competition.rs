//! Competition between platforms for bandwidth-limited users.
//!
//! Each platform sets a window and offers per-user personalization. Users
//! consume up to their bandwidth worth of content; a platform's value to a
//! user scales the per-item average by the amount consumed, so plain total
//! utility emerges when bandwidth exceeds platform size and proportion-based
//! choice emerges when it doesn't. Users move, one at a time, to the
//! highest-value eligible platform (or to none); ties prefer any platform
//! over none, then the current location, then the lowest platform index,
//! which makes the single-platform case reduce exactly to the one-platform
//! dynamics.

use crate::dynamics::EngineCaps;
use crate::error::{Error, Result};
use crate::fairgraph::{self, TransitionSystem};
use crate::model::{compatible, ThresholdSpec, UserPrefs, Window};
use crate::quotient::{individualize_witness, StackWorld};
use crate::rational::Rational;
use crate::schedule::Schedule;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompetitionUser {
    pub prefs: UserPrefs,
    /// None means unbounded bandwidth.
    pub bandwidth: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LambdaSpec {
    Uniform(Rational),
    PerUser(Vec<Rational>),
}

impl LambdaSpec {
    fn for_user(&self, i: usize) -> Rational {
        match self {
            LambdaSpec::Uniform(l) => *l,
            LambdaSpec::PerUser(v) => v[i],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlatformSpec {
    pub window: Window,
    pub lambda: LambdaSpec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompetitionConfig {
    pub users: Vec<CompetitionUser>,
    pub platforms: Vec<PlatformSpec>,
    /// Starting platform per user (None = off every platform).
    pub initial_assignment: Vec<Option<usize>>,
    /// Scale the per-item average by consumed volume (default). The raw
    /// volume-times-sum variant is kept for sensitivity checks.
    pub normalized: bool,
}

/// Assignment of each user to a platform or to none.
pub type MultiState = Vec<Option<usize>>;

impl CompetitionConfig {
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_platforms(&self) -> usize {
        self.platforms.len()
    }

    pub fn eligible(&self, i: usize, j: usize) -> bool {
        self.platforms[j].window.contains(self.users[i].prefs.speech)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.users.len();
        if self.initial_assignment.len() != n {
            return Err(Error::precondition(
                "initial assignment must cover every user",
            ));
        }
        for (i, u) in self.users.iter().enumerate() {
            match u.prefs.threshold {
                ThresholdSpec::FromDisutility { b, lambda } => {
                    if !b.is_positive() {
                        return Err(Error::precondition(format!(
                            "user {i}: disutility b must be positive"
                        )));
                    }
                    let _ = lambda;
                }
                _ => {
                    return Err(Error::precondition(format!(
                        "user {i}: competition requires disutility-derived thresholds"
                    )))
                }
            }
            if let Some(g) = u.bandwidth {
                if !g.is_positive() {
                    return Err(Error::precondition(format!(
                        "user {i}: bandwidth must be positive"
                    )));
                }
            }
        }
        for (j, p) in self.platforms.iter().enumerate() {
            match &p.lambda {
                LambdaSpec::Uniform(l) => {
                    if *l < Rational::zero() || *l > Rational::one() {
                        return Err(Error::precondition(format!(
                            "platform {j}: lambda outside [0, 1]"
                        )));
                    }
                }
                LambdaSpec::PerUser(v) => {
                    if v.len() != n {
                        return Err(Error::precondition(format!(
                            "platform {j}: per-user lambda list must cover every user"
                        )));
                    }
                    if v.iter().any(|l| *l < Rational::zero() || *l > Rational::one()) {
                        return Err(Error::precondition(format!(
                            "platform {j}: lambda outside [0, 1]"
                        )));
                    }
                }
            }
        }
        for (i, a) in self.initial_assignment.iter().enumerate() {
            if let Some(j) = a {
                if *j >= self.platforms.len() {
                    return Err(Error::precondition(format!(
                        "user {i}: initial platform {j} does not exist"
                    )));
                }
                if !self.eligible(i, *j) {
                    return Err(Error::precondition(format!(
                        "user {i}: initially assigned to a platform that bans them"
                    )));
                }
            }
        }
        Ok(())
    }

    fn b_of(&self, i: usize) -> Rational {
        match self.users[i].prefs.threshold {
            ThresholdSpec::FromDisutility { b, .. } => b,
            _ => unreachable!("validated configs have disutility thresholds"),
        }
    }
}

/// Compatible/incompatible counts of platform j's members, excluding `i`.
fn member_split(i: usize, j: usize, state: &MultiState, cfg: &CompetitionConfig) -> (i128, i128) {
    let me = &cfg.users[i].prefs;
    let mut c = 0i128;
    let mut d = 0i128;
    for (u, a) in state.iter().enumerate() {
        if u == i || *a != Some(j) {
            continue;
        }
        if compatible(me, cfg.users[u].prefs.speech) {
            c += 1;
        } else {
            d += 1;
        }
    }
    (c, d)
}

fn value_from_counts(
    cfg: &CompetitionConfig,
    i: usize,
    j: usize,
    c: i128,
    d: i128,
) -> Rational {
    let total = c + d;
    if total == 0 {
        return Rational::zero();
    }
    let spread = Rational::int(c) - cfg.platforms[j].lambda.for_user(i) * cfg.b_of(i) * Rational::int(d);
    let consumed = match cfg.users[i].bandwidth {
        None => Rational::int(total),
        Some(g) => g.min(Rational::int(total)),
    };
    if cfg.normalized {
        consumed / Rational::int(total) * spread
    } else {
        consumed * spread
    }
}

/// Value user `i` derives from platform `j` in the given assignment, self
/// excluded. The outside option (no platform) is worth 0.
pub fn platform_value(
    i: usize,
    j: usize,
    state: &MultiState,
    cfg: &CompetitionConfig,
) -> Result<Rational> {
    if !cfg.eligible(i, j) {
        return Err(Error::precondition(format!(
            "user {i} is banned from platform {j}"
        )));
    }
    let (c, d) = member_split(i, j, state, cfg);
    Ok(value_from_counts(cfg, i, j, c, d))
}

/// Deterministic move of user `i`: to the argmax of platform value over
/// eligible platforms and the outside option.
pub fn multi_step(state: &MultiState, i: usize, cfg: &CompetitionConfig) -> MultiState {
    let current = state[i];
    // (value, is_platform, is_current, -index); lexicographic max.
    let mut best_dest: Option<usize> = None;
    let mut best_key = (Rational::zero(), 0u8, u8::from(current.is_none()), i64::MIN);
    for j in 0..cfg.num_platforms() {
        if !cfg.eligible(i, j) {
            continue;
        }
        let (c, d) = member_split(i, j, state, cfg);
        let v = value_from_counts(cfg, i, j, c, d);
        let key = (v, 1u8, u8::from(current == Some(j)), -(j as i64));
        if key > best_key {
            best_key = key;
            best_dest = Some(j);
        }
    }
    let mut next = state.clone();
    next[i] = best_dest;
    next
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiTraceStep {
    pub t: u64,
    pub actor: usize,
    pub from: Option<usize>,
    pub to: Option<usize>,
    pub state: MultiState,
}

#[derive(Clone, Debug, Default)]
pub struct MultiTrace {
    pub steps: Vec<MultiTraceStep>,
}

impl MultiTrace {
    pub fn final_state(&self) -> Option<&MultiState> {
        self.steps.last().map(|s| &s.state)
    }

    pub fn platform_sizes(&self, num_platforms: usize) -> Vec<Vec<usize>> {
        self.steps
            .iter()
            .map(|s| sizes_of(&s.state, num_platforms))
            .collect()
    }
}

pub fn sizes_of(state: &MultiState, num_platforms: usize) -> Vec<usize> {
    let mut sizes = vec![0usize; num_platforms];
    for a in state.iter().flatten() {
        sizes[*a] += 1;
    }
    sizes
}

pub fn multi_simulate(
    cfg: &CompetitionConfig,
    schedule: &Schedule,
    horizon: u64,
) -> Result<MultiTrace> {
    if horizon == 0 {
        return Err(Error::precondition("horizon must be at least 1"));
    }
    cfg.validate()?;
    schedule.validate(cfg.num_users())?;
    let mut trace = MultiTrace::default();
    if cfg.num_users() == 0 {
        return Ok(trace);
    }
    let mut state = cfg.initial_assignment.clone();
    let mut actors = schedule.actors(cfg.num_users());
    for t in 1..=horizon {
        let i = actors.next().expect("nonempty population always schedules");
        let from = state[i];
        state = multi_step(&state, i, cfg);
        trace.steps.push(MultiTraceStep {
            t,
            actor: i,
            from,
            to: state[i],
            state: state.clone(),
        });
    }
    Ok(trace)
}

/// No user stands to gain by changing their position.
pub fn multi_is_stable(state: &MultiState, cfg: &CompetitionConfig) -> bool {
    (0..cfg.num_users()).all(|i| multi_step(state, i, cfg)[i] == state[i])
}

/// Sum of raw on-platform utilities (per-item spread, no bandwidth scaling).
/// With unbounded bandwidth, mutual compatibilities and homogeneous
/// disutility this never decreases along the dynamics and strictly increases
/// whenever an assignment changes.
pub fn multi_potential(state: &MultiState, cfg: &CompetitionConfig) -> Rational {
    let mut total = Rational::zero();
    for (i, a) in state.iter().enumerate() {
        if let Some(j) = a {
            let (c, d) = member_split(i, *j, state, cfg);
            total += Rational::int(c)
                - cfg.platforms[*j].lambda.for_user(i) * cfg.b_of(i) * Rational::int(d);
        }
    }
    total
}

/// Fair-limit report for competition: per-platform floors over every
/// reachable fair-closed SCC, stable assignments, and a witness schedule.
#[derive(Clone, Debug)]
pub struct MultiFairLimitReport {
    /// For each platform, the minimum size over all fair-closed SCC states.
    pub per_platform_min_sizes: Vec<usize>,
    /// Minimum total assigned users over fair-closed SCC states.
    pub min_total_size: usize,
    pub num_fair_closed_sccs: usize,
    pub equilibria: Vec<MultiState>,
    pub witness: Schedule,
    pub fair_states: Vec<MultiState>,
}

const NOWHERE: u8 = u8::MAX;

struct MultiFlatSystem<'a> {
    cfg: &'a CompetitionConfig,
}

impl MultiFlatSystem<'_> {
    fn decode(&self, s: &[u8]) -> MultiState {
        s.iter()
            .map(|&x| if x == NOWHERE { None } else { Some(x as usize) })
            .collect()
    }
}

impl TransitionSystem for MultiFlatSystem<'_> {
    type State = Vec<u8>;

    fn initial(&self) -> Vec<u8> {
        self.cfg
            .initial_assignment
            .iter()
            .map(|a| a.map(|j| j as u8).unwrap_or(NOWHERE))
            .collect()
    }

    fn num_actions(&self) -> usize {
        self.cfg.num_users()
    }

    fn applicable(&self, _s: &Vec<u8>, _a: usize) -> bool {
        true
    }

    fn apply(&self, s: &Vec<u8>, a: usize) -> Vec<u8> {
        let state = self.decode(s);
        let next = multi_step(&state, a, self.cfg);
        next.iter()
            .map(|x| x.map(|j| j as u8).unwrap_or(NOWHERE))
            .collect()
    }

    fn metric(&self, s: &Vec<u8>) -> usize {
        s.iter().filter(|&&x| x != NOWHERE).count()
    }
}

/// Exact fair-limit analysis over assignments. State count is
/// (platforms+1)^users; use the quotient variant for stacked configs.
pub fn multi_fair_limit(cfg: &CompetitionConfig, caps: &EngineCaps) -> Result<MultiFairLimitReport> {
    cfg.validate()?;
    let k = cfg.num_platforms();
    if cfg.num_users() == 0 {
        return Ok(MultiFairLimitReport {
            per_platform_min_sizes: vec![0; k],
            min_total_size: 0,
            num_fair_closed_sccs: 1,
            equilibria: vec![Vec::new()],
            witness: Schedule::Scripted {
                prefix: Vec::new(),
                cycle: Vec::new(),
            },
            fair_states: vec![Vec::new()],
        })
    }
    let sys = MultiFlatSystem { cfg };
    let g = fairgraph::explore(&sys, caps.state_cap)?;
    let analysis = fairgraph::analyze(&sys, &g);

    let anchor = analysis.min_state;
    let prefix = fairgraph::action_path(&g, &analysis.scc_of, 0, anchor, None)
        .expect("anchor reachable by construction");
    let mut cycle = fairgraph::fair_tour(&sys, &g, &analysis.scc_of, anchor);
    if cycle.is_empty() {
        cycle = (0..cfg.num_users()).collect();
    }

    let fair_state_ids = analysis.fair_closed_states();
    let fair_states: Vec<MultiState> = fair_state_ids
        .iter()
        .map(|&s| sys.decode(&g.states[s as usize]))
        .collect();
    let per_platform_min_sizes = (0..k)
        .map(|j| {
            fair_states
                .iter()
                .map(|st| st.iter().filter(|a| **a == Some(j)).count())
                .min()
                .unwrap_or(0)
        })
        .collect();
    let equilibria: Vec<MultiState> = analysis
        .stable_states
        .iter()
        .filter(|&&s| analysis.is_fair_closed(analysis.scc_of[s as usize]))
        .map(|&s| sys.decode(&g.states[s as usize]))
        .collect();

    Ok(MultiFairLimitReport {
        per_platform_min_sizes,
        min_total_size: analysis.min_metric,
        num_fair_closed_sccs: analysis.fair_closed.len(),
        equilibria,
        witness: Schedule::Scripted { prefix, cycle },
        fair_states,
    })
}

/// Stacked form of a competition config: identical users (prefs, bandwidth)
/// grouped with counts, each stack starting on one platform or off.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompetitionStack {
    pub user: CompetitionUser,
    pub count: usize,
    pub initial_platform: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StackedCompetitionConfig {
    pub stacks: Vec<CompetitionStack>,
    /// Per-user personalization would break stack symmetry; uniform only.
    pub platforms: Vec<PlatformSpec>,
    pub normalized: bool,
}

impl StackedCompetitionConfig {
    pub fn total_users(&self) -> usize {
        self.stacks.iter().map(|s| s.count).sum()
    }

    pub fn expand(&self) -> CompetitionConfig {
        let mut users = Vec::new();
        let mut initial = Vec::new();
        for s in &self.stacks {
            for _ in 0..s.count {
                users.push(s.user.clone());
                initial.push(s.initial_platform);
            }
        }
        CompetitionConfig {
            users,
            platforms: self.platforms.clone(),
            initial_assignment: initial,
            normalized: self.normalized,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (j, p) in self.platforms.iter().enumerate() {
            if !matches!(p.lambda, LambdaSpec::Uniform(_)) {
                return Err(Error::precondition(format!(
                    "platform {j}: stacked configs need uniform lambda"
                )));
            }
        }
        for (k, s) in self.stacks.iter().enumerate() {
            if s.count == 0 {
                return Err(Error::precondition(format!("stack {k}: count must be >= 1")));
            }
        }
        self.expand().validate()
    }
}

/// Quotient over stacks for competition: a state holds, per stack, the count
/// of members at each location (platforms, then the outside option).
struct MultiQuotientSystem<'a> {
    scfg: &'a StackedCompetitionConfig,
    num_locs: usize,
    counts: Vec<usize>,
    compat: Vec<Vec<bool>>,
    eligible: Vec<Vec<bool>>,
    b: Vec<Rational>,
    gamma: Vec<Option<Rational>>,
    lambda: Vec<Rational>,
}

impl<'a> MultiQuotientSystem<'a> {
    fn new(scfg: &'a StackedCompetitionConfig) -> Result<Self> {
        scfg.validate()?;
        let ks = scfg.stacks.len();
        let kp = scfg.platforms.len();
        let compat = (0..ks)
            .map(|a| {
                (0..ks)
                    .map(|b| {
                        compatible(&scfg.stacks[a].user.prefs, scfg.stacks[b].user.prefs.speech)
                    })
                    .collect()
            })
            .collect();
        let eligible = (0..ks)
            .map(|k| {
                (0..kp)
                    .map(|j| scfg.platforms[j].window.contains(scfg.stacks[k].user.prefs.speech))
                    .collect()
            })
            .collect();
        let b = scfg
            .stacks
            .iter()
            .map(|s| match s.user.prefs.threshold {
                ThresholdSpec::FromDisutility { b, .. } => b,
                _ => unreachable!("validated"),
            })
            .collect();
        let lambda = scfg
            .platforms
            .iter()
            .map(|p| match &p.lambda {
                LambdaSpec::Uniform(l) => *l,
                _ => unreachable!("validated"),
            })
            .collect();
        Ok(MultiQuotientSystem {
            scfg,
            num_locs: kp + 1,
            counts: scfg.stacks.iter().map(|s| s.count).collect(),
            compat,
            eligible,
            b,
            gamma: scfg.stacks.iter().map(|s| s.user.bandwidth).collect(),
            lambda,
        })
    }

    fn off_loc(&self) -> usize {
        self.num_locs - 1
    }

    fn count_at(&self, s: &[u16], k: usize, loc: usize) -> usize {
        s[k * self.num_locs + loc] as usize
    }

    /// Destination of one member of stack k currently at `loc`.
    fn destination(&self, s: &[u16], k: usize, loc: usize) -> usize {
        let kp = self.scfg.platforms.len();
        let mut best_loc = self.off_loc();
        let mut best_key = (
            Rational::zero(),
            0u8,
            u8::from(loc == self.off_loc()),
            i64::MIN,
        );
        for j in 0..kp {
            if !self.eligible[k][j] {
                continue;
            }
            let mut members = 0i128;
            let mut c = 0i128;
            for s2 in 0..self.scfg.stacks.len() {
                let m = self.count_at(s, s2, j) as i128;
                members += m;
                if self.compat[k][s2] {
                    c += m;
                }
            }
            if loc == j {
                members -= 1;
                c -= 1; // own stack is always self-compatible
            }
            let d = members - c;
            let v = if members == 0 {
                Rational::zero()
            } else {
                let spread = Rational::int(c) - self.lambda[j] * self.b[k] * Rational::int(d);
                let consumed = match self.gamma[k] {
                    None => Rational::int(members),
                    Some(g) => g.min(Rational::int(members)),
                };
                if self.scfg.normalized {
                    consumed / Rational::int(members) * spread
                } else {
                    consumed * spread
                }
            };
            let key = (v, 1u8, u8::from(loc == j), -(j as i64));
            if key > best_key {
                best_key = key;
                best_loc = j;
            }
        }
        best_loc
    }

    fn act(&self, s: &[u16], k: usize, loc: usize) -> Option<Vec<u16>> {
        if self.count_at(s, k, loc) == 0 {
            return None;
        }
        let dest = self.destination(s, k, loc);
        let mut next = s.to_vec();
        if dest != loc {
            next[k * self.num_locs + loc] -= 1;
            next[k * self.num_locs + dest] += 1;
        }
        Some(next)
    }
}

impl TransitionSystem for MultiQuotientSystem<'_> {
    type State = Vec<u16>;

    fn initial(&self) -> Vec<u16> {
        let mut s = vec![0u16; self.scfg.stacks.len() * self.num_locs];
        for (k, st) in self.scfg.stacks.iter().enumerate() {
            let loc = st.initial_platform.unwrap_or(self.off_loc());
            s[k * self.num_locs + loc] = st.count as u16;
        }
        s
    }

    fn num_actions(&self) -> usize {
        self.scfg.stacks.len() * self.num_locs
    }

    fn applicable(&self, s: &Vec<u16>, action: usize) -> bool {
        s[action] > 0
    }

    fn apply(&self, s: &Vec<u16>, action: usize) -> Vec<u16> {
        let (k, loc) = (action / self.num_locs, action % self.num_locs);
        self.act(s, k, loc).unwrap_or_else(|| s.clone())
    }

    fn metric(&self, s: &Vec<u16>) -> usize {
        // Total assigned users (anywhere but the outside option).
        let mut total = 0usize;
        for k in 0..self.scfg.stacks.len() {
            for j in 0..self.off_loc() {
                total += self.count_at(s, k, j);
            }
        }
        total
    }
}

/// Per-stack-per-location counts of a quotient state.
pub type MultiQuotientState = Vec<Vec<usize>>;

#[derive(Clone, Debug)]
pub struct MultiQuotientReport {
    pub per_platform_min_sizes: Vec<usize>,
    pub min_total_size: usize,
    pub num_fair_closed_sccs: usize,
    /// Stable states as per-stack location counts.
    pub equilibria: Vec<MultiQuotientState>,
    pub witness: Schedule,
    pub fair_states: Vec<MultiQuotientState>,
}

pub fn multi_fair_limit_quotient(
    scfg: &StackedCompetitionConfig,
    caps: &EngineCaps,
) -> Result<MultiQuotientReport> {
    let sys = MultiQuotientSystem::new(scfg)?;
    let kp = scfg.platforms.len();
    if scfg.stacks.is_empty() {
        return Ok(MultiQuotientReport {
            per_platform_min_sizes: vec![0; kp],
            min_total_size: 0,
            num_fair_closed_sccs: 1,
            equilibria: vec![Vec::new()],
            witness: Schedule::Scripted {
                prefix: Vec::new(),
                cycle: Vec::new(),
            },
            fair_states: vec![Vec::new()],
        });
    }
    let g = fairgraph::explore(&sys, caps.state_cap)?;
    let analysis = fairgraph::analyze(&sys, &g);

    let anchor = analysis.min_state;
    let prefix_q = fairgraph::action_path(&g, &analysis.scc_of, 0, anchor, None)
        .expect("anchor reachable by construction");
    let cycle_q = fairgraph::fair_tour(&sys, &g, &analysis.scc_of, anchor);

    let world = StackWorld::for_single(&crate::model::StackedPopulation {
        stacks: scfg
            .stacks
            .iter()
            .map(|s| crate::model::Stack::new(s.user.prefs, s.count, 0))
            .collect(),
    });
    let initial_locs: Vec<usize> = {
        let mut locs = Vec::with_capacity(scfg.total_users());
        for s in &scfg.stacks {
            let loc = s.initial_platform.unwrap_or(kp);
            locs.extend(std::iter::repeat_n(loc, s.count));
        }
        locs
    };
    let act = |counts: &[Vec<usize>], k: usize, loc: usize| -> Option<usize> {
        let mut state = vec![0u16; scfg.stacks.len() * sys.num_locs];
        for (s2, row) in counts.iter().enumerate() {
            for (l, &m) in row.iter().enumerate() {
                state[s2 * sys.num_locs + l] = m as u16;
            }
        }
        if sys.count_at(&state, k, loc) == 0 {
            return None;
        }
        Some(sys.destination(&state, k, loc))
    };
    let to_qaction = |a: usize| (a / sys.num_locs, a % sys.num_locs);
    let (prefix, cycle) = individualize_witness(
        &world,
        sys.num_locs,
        initial_locs,
        &act,
        &prefix_q.iter().map(|&a| to_qaction(a)).collect::<Vec<_>>(),
        &cycle_q.iter().map(|&a| to_qaction(a)).collect::<Vec<_>>(),
    )?;

    let decode = |s: &Vec<u16>| -> MultiQuotientState {
        (0..scfg.stacks.len())
            .map(|k| (0..sys.num_locs).map(|l| sys.count_at(s, k, l)).collect())
            .collect()
    };
    let fair_state_ids = analysis.fair_closed_states();
    let fair_states: Vec<MultiQuotientState> = fair_state_ids
        .iter()
        .map(|&s| decode(&g.states[s as usize]))
        .collect();
    let per_platform_min_sizes = (0..kp)
        .map(|j| {
            fair_states
                .iter()
                .map(|st| st.iter().map(|row| row[j]).sum::<usize>())
                .min()
                .unwrap_or(0)
        })
        .collect();
    let equilibria: Vec<MultiQuotientState> = analysis
        .stable_states
        .iter()
        .filter(|&&s| analysis.is_fair_closed(analysis.scc_of[s as usize]))
        .map(|&s| decode(&g.states[s as usize]))
        .collect();

    Ok(MultiQuotientReport {
        per_platform_min_sizes,
        min_total_size: analysis.min_metric,
        num_fair_closed_sccs: analysis.fair_closed.len(),
        equilibria,
        witness: Schedule::Scripted { prefix, cycle },
        fair_states,
    })
}

/// Every stable assignment over the whole quotient state space, for
/// certifying the absence of equilibria in cycling constructions.
pub fn multi_all_stable_states(scfg: &StackedCompetitionConfig) -> Result<Vec<MultiQuotientState>> {
    let sys = MultiQuotientSystem::new(scfg)?;
    let ks = scfg.stacks.len();
    let mut out = Vec::new();
    // Enumerate distributions of each stack over locations.
    let mut state: Vec<u16> = sys.initial();
    fn enumerate(
        sys: &MultiQuotientSystem<'_>,
        k: usize,
        state: &mut Vec<u16>,
        out: &mut Vec<MultiQuotientState>,
    ) {
        let ks = sys.scfg.stacks.len();
        if k == ks {
            let stable = (0..sys.num_actions())
                .all(|a| !sys.applicable(state, a) || sys.apply(state, a) == *state);
            if stable {
                out.push(
                    (0..ks)
                        .map(|k2| {
                            (0..sys.num_locs)
                                .map(|l| sys.count_at(state, k2, l))
                                .collect()
                        })
                        .collect(),
                );
            }
            return;
        }
        // All ways to split stack k's count over num_locs locations.
        fn split(
            sys: &MultiQuotientSystem<'_>,
            k: usize,
            loc: usize,
            left: usize,
            state: &mut Vec<u16>,
            out: &mut Vec<MultiQuotientState>,
        ) {
            if loc == sys.num_locs - 1 {
                state[k * sys.num_locs + loc] = left as u16;
                enumerate(sys, k + 1, state, out);
                return;
            }
            for take in 0..=left {
                state[k * sys.num_locs + loc] = take as u16;
                split(sys, k, loc + 1, left - take, state, out);
            }
        }
        split(sys, k, 0, sys.counts[k], state, out);
    }
    for x in state.iter_mut() {
        *x = 0;
    }
    enumerate(&sys, 0, &mut state, &mut out);
    let _ = ks;
    Ok(out)
}
