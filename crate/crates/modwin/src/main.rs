//! Batch front-end: load populations or configs, run the engines, emit
//! machine-readable reports. Stdout carries only the report; human summaries
//! go to stderr. Exit codes: 0 success, 2 validation/input failure, 3 engine
//! cap exceeded.

use clap::{Args, Parser, Subcommand};
use modwin::competition::{
    multi_fair_limit, multi_fair_limit_quotient, multi_simulate, CompetitionConfig,
    StackedCompetitionConfig,
};
use modwin::dynamics::{
    fair_limit_min_with, simulate, EngineCaps, PolicySchedule,
};
use modwin::error::Error;
use modwin::extensions::{expand_frequencies, shock_space, ShockGrid};
use modwin::io;
use modwin::lcc::{
    anchored_size, core_window, lcc_exact, lcc_one_sided, lcc_theta_one, mutually_compatible_core,
    sample_window,
};
use modwin::policy::{
    best_guaranteed_window, best_guaranteed_window_quotient, best_ideological_window,
    best_ideological_window_quotient, candidate_windows, platform_utility, report_from_candidates,
    IdeologicalPlatform,
};
use modwin::quotient::fair_limit_min_quotient_with;
use modwin::scenarios::{self, Generated, ScenarioSpec};
use modwin::schedule::Schedule;
use modwin::{Population, Rational, StackedPopulation, Window};
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "modwin", version, about = "Moderation-window community analysis")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit a generated scenario as JSON.
    Scenario {
        name: String,
        #[command(flatten)]
        params: ScenarioParams,
        /// Output path (stdout when omitted).
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Largest compatible community.
    Lcc {
        #[command(flatten)]
        input: InputArgs,
        /// exact | theta-one | core | one-sided
        #[arg(long, default_value = "exact")]
        method: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact worst-case-over-fair-schedules community size under a window.
    FairLimit {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        caps: CapArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the switching dynamics and emit the trace.
    Simulate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// round-robin | seeded | blocks
        #[arg(long, default_value = "round-robin")]
        schedule: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        horizon: u64,
        /// json | csv
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan all candidate windows for the best one.
    WindowOpt {
        #[command(flatten)]
        input: InputArgs,
        /// size | ideological
        #[arg(long, default_value = "size")]
        objective: String,
        /// Platform preference interval (ideological objective).
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        platform_interval: Option<Vec<String>>,
        /// Platform disutility per member outside its interval.
        #[arg(long)]
        d: Option<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        caps: CapArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sampled-core window: draw m users, return their core window.
    SampleWindow {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multi-platform fair limit or simulation.
    Compete {
        #[command(flatten)]
        input: InputArgs,
        /// Simulate instead of analyzing the fair limit.
        #[arg(long)]
        simulate: bool,
        /// round-robin | seeded | blocks:1,2,3 (stack order for block turns)
        #[arg(long, default_value = "round-robin")]
        schedule: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 400)]
        horizon: u64,
        /// json | csv (simulation only)
        #[arg(long, default_value = "json")]
        format: String,
        #[command(flatten)]
        caps: CapArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst-case community size under population shocks of size <= k.
    Robust {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        caps: CapArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce a variable-frequency population to constant frequency.
    FreqExpand {
        /// Input variable-frequency population JSON.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ScenarioParams {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// Central stack size (incumbency).
    #[arg(long)]
    m: Option<usize>,
    /// Side singleton count (incumbency).
    #[arg(long)]
    u: Option<usize>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    lam: Option<String>,
    #[arg(long)]
    lam_prime: Option<String>,
    /// Seed for seeded scenario generators.
    #[arg(long = "scenario-seed", default_value_t = 0)]
    scenario_seed: u64,
}

#[derive(Args)]
struct InputArgs {
    /// Input JSON path (population, stacks, or competition config).
    #[arg(long, conflicts_with = "scenario")]
    input: Option<PathBuf>,
    /// Scenario name (see `scenario --help` for the list).
    #[arg(long)]
    scenario: Option<String>,
    #[command(flatten)]
    params: ScenarioParams,
}

#[derive(Args)]
struct WindowArgs {
    /// Window endpoints; "-inf"/"inf" for unbounded sides. Omit for no
    /// moderation.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    window: Option<Vec<String>>,
}

#[derive(Args)]
struct CapArgs {
    /// Explored-state cap (also via MODWIN_STATE_CAP).
    #[arg(long)]
    state_cap: Option<usize>,
    /// Eligible-user cap for the flat engine.
    #[arg(long)]
    max_eligible: Option<usize>,
}

impl CapArgs {
    fn caps(&self) -> EngineCaps {
        let mut caps = EngineCaps::from_env();
        if let Some(c) = self.state_cap {
            caps.state_cap = c.max(1);
        }
        if let Some(c) = self.max_eligible {
            caps.flat_max_eligible = c;
        }
        caps
    }
}

enum Input {
    Flat(Population),
    Stacked(StackedPopulation),
    Competition(CompetitionConfig),
    StackedCompetition(StackedCompetitionConfig),
}

fn parse_rational(s: &str) -> Result<Rational, Error> {
    s.parse::<Rational>()
        .map_err(|e| Error::precondition(e.to_string()))
}

fn parse_window(args: &WindowArgs) -> Result<Window, Error> {
    match &args.window {
        None => Ok(Window::all()),
        Some(pair) => {
            let bound = |s: &str| -> Result<Option<Rational>, Error> {
                match s {
                    "-inf" | "inf" | "+inf" => Ok(None),
                    other => Ok(Some(parse_rational(other)?)),
                }
            };
            let lo = bound(&pair[0])?;
            let hi = bound(&pair[1])?;
            if let (Some(l), Some(h)) = (lo, hi) {
                if l > h {
                    return Err(Error::precondition("window lower bound exceeds upper bound"));
                }
            }
            Ok(Window::Span { lo, hi })
        }
    }
}

fn scenario_spec(name: &str, p: &ScenarioParams) -> Result<ScenarioSpec, Error> {
    let need_n = || {
        p.n.ok_or_else(|| Error::precondition(format!("scenario {name} needs --n")))
    };
    let theta = |default: Option<Rational>| -> Result<Rational, Error> {
        match (&p.theta, default) {
            (Some(s), _) => parse_rational(s),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(Error::precondition(format!("scenario {name} needs --theta"))),
        }
    };
    Ok(match name {
        "five-user" => ScenarioSpec::FiveUser,
        "trolls" => ScenarioSpec::Trolls {
            n: need_n()?,
            theta: theta(Some(Rational::new(1, 2)))?,
        },
        "ideological" => ScenarioSpec::Ideological { n: need_n()? },
        "personalization-gap" => {
            let b = parse_rational(p.b.as_deref().unwrap_or("1"))?;
            let lam = parse_rational(p.lam.as_deref().unwrap_or("1"))?;
            let lam_prime = parse_rational(p.lam_prime.as_deref().unwrap_or("3/5"))?;
            ScenarioSpec::PersonalizationGap {
                b,
                lambda: lam,
                lambda_prime: lam_prime,
            }
        }
        "insurgency" => ScenarioSpec::Insurgency {
            n: need_n()?,
            epsilon: parse_rational(p.epsilon.as_deref().unwrap_or("1/10"))?,
        },
        "incumbency" => ScenarioSpec::Incumbency {
            m: p.m.ok_or_else(|| Error::precondition("incumbency needs --m"))?,
            u: p.u.unwrap_or(3),
        },
        "cycling-single" => ScenarioSpec::CyclingSingle { n: need_n()? },
        "cycling-multi" => ScenarioSpec::CyclingMulti { n: need_n()? },
        "robust-family" => ScenarioSpec::RobustFamily {
            n: need_n()?,
            theta: theta(None)?,
        },
        "adversaries-example" => ScenarioSpec::AdversariesExample,
        "theta-upper-bound" => ScenarioSpec::ThetaUpperBound {
            theta: theta(None)?,
            n: need_n()?,
        },
        "one-sided-random" => ScenarioSpec::OneSidedRandom {
            n: need_n()?,
            theta: theta(Some(Rational::new(1, 2)))?,
            seed: p.scenario_seed,
        },
        "mutual-random" => ScenarioSpec::MutualRandom {
            n: need_n()?,
            b: parse_rational(p.b.as_deref().unwrap_or("1"))?,
            lambda: parse_rational(p.lam.as_deref().unwrap_or("1"))?,
            seed: p.scenario_seed,
        },
        other => {
            return Err(Error::precondition(format!(
                "unknown scenario {other:?}; known: five-user, trolls, ideological, \
                 personalization-gap, insurgency, incumbency, cycling-single, cycling-multi, \
                 robust-family, adversaries-example, theta-upper-bound, one-sided-random, \
                 mutual-random"
            )))
        }
    })
}

fn load_input(args: &InputArgs) -> Result<Input, Error> {
    match (&args.input, &args.scenario) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            Ok(match io::input_from_json(&text)? {
                io::InputDoc::Flat(p) => Input::Flat(p),
                io::InputDoc::Stacked(sp) => Input::Stacked(sp),
                io::InputDoc::Competition(c) => Input::Competition(c),
            })
        }
        (None, Some(name)) => {
            let spec = scenario_spec(name, &args.params)?;
            Ok(match scenarios::generate(&spec)? {
                Generated::Flat(p) => Input::Flat(p),
                Generated::Stacked(sp) => Input::Stacked(sp),
                Generated::Competition(c) => Input::StackedCompetition(c),
            })
        }
        _ => Err(Error::precondition(
            "exactly one input source: --input PATH or --scenario NAME",
        )),
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            if !content.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

/// Deterministic parallel map: results come back in input order no matter
/// how the chunks finish.
fn parallel_map<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 {
        return items.iter().map(&f).collect();
    }
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    let chunk = items.len().div_ceil(jobs);
    std::thread::scope(|scope| {
        for (c, slot_chunk) in slots.chunks_mut(chunk).enumerate() {
            let f = &f;
            let base = c * chunk;
            scope.spawn(move || {
                for (off, slot) in slot_chunk.iter_mut().enumerate() {
                    *slot = Some(f(&items[base + off]));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("all slots filled")).collect()
}

fn schedule_for(name: &str, seed: u64, n: usize, stacks: Option<&[usize]>) -> Result<Schedule, Error> {
    match name {
        "round-robin" => Ok(Schedule::id_order(n)),
        "seeded" => Ok(Schedule::SeededRandom(seed)),
        "blocks" => {
            let counts = stacks.ok_or_else(|| {
                Error::precondition("--schedule blocks needs a stacked input or scenario")
            })?;
            let order: Vec<usize> = (0..counts.len()).collect();
            Ok(scenarios::block_schedule_for_stacks(counts, &order))
        }
        other if other.starts_with("blocks:") => {
            let counts = stacks.ok_or_else(|| {
                Error::precondition("--schedule blocks needs a stacked input or scenario")
            })?;
            let order = other["blocks:".len()..]
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Error::precondition("blocks order must be stack indices"))?;
            if order.iter().any(|&k| k >= counts.len()) {
                return Err(Error::precondition("blocks order names an unknown stack"));
            }
            Ok(scenarios::block_schedule_for_stacks(counts, &order))
        }
        other => Err(Error::precondition(format!(
            "unknown schedule {other:?}; known: round-robin, seeded, blocks[,stack order]"
        ))),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Scenario { name, params, emit: out } => {
            let spec = scenario_spec(&name, &params)?;
            let content = match scenarios::generate(&spec)? {
                Generated::Flat(p) => io::population_to_json(&p),
                Generated::Stacked(sp) => io::stacked_to_json(&sp),
                Generated::Competition(c) => io::competition_to_json(&c.expand()),
            };
            emit(&out, &content)?;
            eprintln!("scenario {name} written");
            Ok(())
        }

        Cmd::Lcc { input, method, out } => {
            let pop = match load_input(&input)? {
                Input::Flat(p) => p,
                Input::Stacked(sp) => sp.expand(),
                _ => return Err(Error::precondition("lcc needs a population input")),
            };
            let (result, window) = match method.as_str() {
                "exact" => (lcc_exact(&pop)?, None),
                "theta-one" => (lcc_theta_one(&pop)?, None),
                "core" => {
                    let core = mutually_compatible_core(&pop);
                    let w = core_window(&pop)?;
                    (core, Some(w))
                }
                "one-sided" => (lcc_one_sided(&pop)?, None),
                other => {
                    return Err(Error::precondition(format!(
                        "unknown method {other:?}; known: exact, theta-one, core, one-sided"
                    )))
                }
            };
            eprintln!("community of {} users via {method}", result.size);
            emit(&out, &io::lcc_result_to_json(&result, window.as_ref()))
        }

        Cmd::FairLimit {
            input,
            window,
            caps,
            out,
        } => {
            let w = parse_window(&window)?;
            let caps = caps.caps();
            match load_input(&input)? {
                Input::Flat(p) => {
                    let report = fair_limit_min_with(&p, &w, &caps)?;
                    eprintln!(
                        "fair limit {} with {} fair-closed SCC(s)",
                        report.min_size, report.num_fair_closed_sccs
                    );
                    emit(&out, &io::fair_limit_report_to_json(&report))
                }
                Input::Stacked(sp) => {
                    let report = fair_limit_min_quotient_with(&sp, &w, &caps)?;
                    eprintln!(
                        "fair limit {} with {} fair-closed SCC(s) (quotient engine)",
                        report.min_size, report.num_fair_closed_sccs
                    );
                    emit(&out, &io::quotient_report_to_json(&report))
                }
                _ => Err(Error::precondition("fair-limit needs a population input")),
            }
        }

        Cmd::Simulate {
            input,
            window,
            schedule,
            seed,
            horizon,
            format,
            out,
        } => {
            let w = parse_window(&window)?;
            let (pop, stack_counts): (Population, Option<Vec<usize>>) = match load_input(&input)? {
                Input::Flat(p) => (p, None),
                Input::Stacked(sp) => {
                    let counts = sp.stacks.iter().map(|s| s.count).collect();
                    (sp.expand(), Some(counts))
                }
                _ => return Err(Error::precondition("simulate needs a population input")),
            };
            let sched = schedule_for(&schedule, seed, pop.len(), stack_counts.as_deref())?;
            let trace = simulate(&pop, &PolicySchedule::Static(w), &sched, horizon)?;
            let content = match format.as_str() {
                "csv" => io::trace_to_csv(&trace),
                "json" => io::trace_to_json(&trace),
                other => {
                    return Err(Error::precondition(format!(
                        "unknown format {other:?}; known: json, csv"
                    )))
                }
            };
            eprintln!(
                "simulated {horizon} steps; final platform size {}",
                trace.final_state().len()
            );
            emit(&out, &content)
        }

        Cmd::WindowOpt {
            input,
            objective,
            platform_interval,
            d,
            jobs,
            caps,
            out,
        } => {
            let caps = caps.caps();
            let platform = || -> Result<IdeologicalPlatform, Error> {
                let interval = match &platform_interval {
                    None => Window::all(),
                    Some(pair) => parse_window(&WindowArgs {
                        window: Some(pair.clone()),
                    })?,
                };
                let d = parse_rational(d.as_deref().unwrap_or("1"))?;
                IdeologicalPlatform::new(interval, d)
            };
            let report = match (load_input(&input)?, objective.as_str()) {
                (Input::Flat(p), "size") => {
                    if jobs > 1 {
                        let cands = candidate_windows(&p);
                        let values = parallel_map(&cands, jobs, |w| {
                            fair_limit_min_with(&p, w, &caps).map(|r| Rational::from(r.min_size))
                        });
                        let mut per = Vec::with_capacity(cands.len());
                        for (w, v) in cands.into_iter().zip(values) {
                            per.push((w, v?));
                        }
                        report_from_candidates(per)
                    } else {
                        best_guaranteed_window(&p, &caps)?
                    }
                }
                (Input::Flat(p), "ideological") => {
                    let plat = platform()?;
                    if jobs > 1 {
                        let cands = candidate_windows(&p);
                        let values = parallel_map(&cands, jobs, |w| {
                            fair_limit_min_with(&p, w, &caps).map(|r| {
                                r.fair_states
                                    .iter()
                                    .map(|s| platform_utility(s, &plat, &p))
                                    .min()
                                    .unwrap_or_else(Rational::zero)
                            })
                        });
                        let mut per = Vec::with_capacity(cands.len());
                        for (w, v) in cands.into_iter().zip(values) {
                            per.push((w, v?));
                        }
                        report_from_candidates(per)
                    } else {
                        best_ideological_window(&p, &plat, &caps)?
                    }
                }
                (Input::Stacked(sp), "size") => best_guaranteed_window_quotient(&sp, &caps)?,
                (Input::Stacked(sp), "ideological") => {
                    best_ideological_window_quotient(&sp, &platform()?, &caps)?
                }
                (_, obj @ ("size" | "ideological")) => {
                    return Err(Error::precondition(format!(
                        "window-opt --objective {obj} needs a population input"
                    )))
                }
                (_, other) => {
                    return Err(Error::precondition(format!(
                        "unknown objective {other:?}; known: size, ideological"
                    )))
                }
            };
            eprintln!(
                "best window {} with objective value {}",
                report.best_window, report.objective_value
            );
            emit(&out, &io::window_search_report_to_json(&report))
        }

        Cmd::SampleWindow { input, m, seed, out } => {
            let pop = match load_input(&input)? {
                Input::Flat(p) => p,
                Input::Stacked(sp) => sp.expand(),
                _ => return Err(Error::precondition("sample-window needs a population input")),
            };
            let w = sample_window(&pop, m, seed)?;
            let anchored = anchored_size(&pop, &w);
            eprintln!("sampled window {w} anchors {anchored} users");
            let doc = serde_json::json!({
                "window": w,
                "anchored_size": anchored,
            });
            emit(&out, &serde_json::to_string_pretty(&doc)?)
        }

        Cmd::Compete {
            input,
            simulate: do_simulate,
            schedule,
            seed,
            horizon,
            format,
            caps,
            out,
        } => {
            let caps = caps.caps();
            let loaded = load_input(&input)?;
            let (flat, stacked): (CompetitionConfig, Option<StackedCompetitionConfig>) =
                match loaded {
                    Input::Competition(c) => (c, None),
                    Input::StackedCompetition(sc) => (sc.expand(), Some(sc)),
                    _ => {
                        return Err(Error::precondition(
                            "compete needs a competition config input",
                        ))
                    }
                };
            if do_simulate {
                let counts: Option<Vec<usize>> = stacked
                    .as_ref()
                    .map(|sc| sc.stacks.iter().map(|s| s.count).collect());
                let sched = schedule_for(&schedule, seed, flat.num_users(), counts.as_deref())?;
                let trace = multi_simulate(&flat, &sched, horizon)?;
                let content = match format.as_str() {
                    "csv" => io::multi_trace_to_csv(&trace, flat.num_platforms()),
                    "json" => {
                        let steps: Vec<_> = trace
                            .steps
                            .iter()
                            .map(|s| {
                                serde_json::json!({
                                    "t": s.t,
                                    "actor": s.actor,
                                    "from": s.from,
                                    "to": s.to,
                                    "sizes": modwin::competition::sizes_of(&s.state, flat.num_platforms()),
                                })
                            })
                            .collect();
                        serde_json::to_string_pretty(&serde_json::json!({ "steps": steps }))?
                    }
                    other => {
                        return Err(Error::precondition(format!(
                            "unknown format {other:?}; known: json, csv"
                        )))
                    }
                };
                eprintln!("simulated {horizon} steps over {} platforms", flat.num_platforms());
                return emit(&out, &content);
            }
            match stacked {
                Some(sc) => {
                    let report = multi_fair_limit_quotient(&sc, &caps)?;
                    eprintln!(
                        "per-platform floors {:?} (quotient engine)",
                        report.per_platform_min_sizes
                    );
                    emit(&out, &io::multi_quotient_report_to_json(&report))
                }
                None => {
                    let report = multi_fair_limit(&flat, &caps)?;
                    eprintln!("per-platform floors {:?}", report.per_platform_min_sizes);
                    emit(&out, &io::multi_report_to_json(&report))
                }
            }
        }

        Cmd::Robust {
            input,
            k,
            window,
            jobs,
            caps,
            out,
        } => {
            let w = parse_window(&window)?;
            let caps = caps.caps();
            let pop = match load_input(&input)? {
                Input::Flat(p) => p,
                Input::Stacked(sp) => sp.expand(),
                _ => return Err(Error::precondition("robust needs a population input")),
            };
            let grid = ShockGrid::canonical(&pop);
            let shocks = shock_space(&pop, k, &grid);
            let sizes = parallel_map(&shocks, jobs, |shock| {
                fair_limit_min_with(&shock.apply(&pop), &w, &caps).map(|r| r.min_size)
            });
            let mut worst: Option<(usize, usize)> = None; // (size, shock index)
            for (i, s) in sizes.iter().enumerate() {
                let s = match s {
                    Ok(v) => *v,
                    Err(e) => {
                        return Err(Error::precondition(format!("shock {i}: {e}")));
                    }
                };
                if worst.is_none_or(|(m, _)| s < m) {
                    worst = Some((s, i));
                }
            }
            let (robust, idx) = worst.expect("shock space never empty");
            eprintln!("{k}-robust size {robust} over {} shocks", shocks.len());
            let doc = serde_json::json!({
                "k": k,
                "window": w,
                "robust_size": robust,
                "num_shocks": shocks.len(),
                "worst_shock": io::shock_to_json(&shocks[idx]),
            });
            emit(&out, &serde_json::to_string_pretty(&doc)?)
        }

        Cmd::FreqExpand { input, out } => {
            let text = std::fs::read_to_string(&input)?;
            let fp = io::freq_from_json(&text)?;
            let pop = expand_frequencies(&fp)?;
            eprintln!(
                "expanded {} users (total frequency {}) into {} constant-frequency users",
                fp.users.len(),
                fp.total_frequency(),
                pop.len()
            );
            emit(&out, &io::population_to_json(&pop))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::TooManyEligible { .. } | Error::StateCapExceeded { .. } => {
                    ExitCode::from(3)
                }
                _ => ExitCode::from(2),
            }
        }
    }
}
