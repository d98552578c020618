//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//! Run with `cargo test -p modwin --test acceptance -- --nocapture` to see
//! the lines and timings.

use modwin::competition::{
    multi_fair_limit_quotient, multi_is_stable, multi_potential, multi_simulate, CompetitionConfig,
    CompetitionStack, CompetitionUser, LambdaSpec, PlatformSpec, StackedCompetitionConfig,
};
use modwin::dynamics::{
    fair_limit_min_with, fair_limit_policy, is_stable, potential, simulate, Action, EngineCaps,
    PolicySchedule,
};
use modwin::extensions::{
    expand_frequencies, lcc_variable_frequency_oracle, reduced_capped_optimum, robust_size,
    robust_trim_count, FreqPopulation, FreqUser,
};
use modwin::lcc::{
    anchored_size, core_window, dynamic_window_one_sided, lcc_exact, lcc_one_sided, lcc_theta_one,
    mutually_compatible_core, sample_window, sampling_bound,
};
use modwin::model::{willing_by_counts, ThresholdSpec, UserPrefs};
use modwin::policy::{
    best_guaranteed_window, best_guaranteed_window_quotient, best_ideological_window_quotient,
    IdeologicalPlatform,
};
use modwin::quotient::{all_stable_states, fair_limit_min_quotient_with};
use modwin::scenarios;
use modwin::schedule::{Schedule, SimRng};
use modwin::{Population, Rational, Stack, StackedPopulation, Window};
use std::collections::BTreeSet;
use std::time::Instant;

fn r(n: i128) -> Rational {
    Rational::int(n)
}

fn caps() -> EngineCaps {
    EngineCaps::default()
}

fn pass(criterion: &str, what: &str, started: Instant) {
    println!(
        "criterion {criterion}: PASS: {what} ({:.2}s)",
        started.elapsed().as_secs_f64()
    );
}

/// Random population on an integer grid with thresholds drawn from `thetas`.
fn random_pop(rng: &mut SimRng, n: usize, thetas: &[Rational]) -> Population {
    let span = 2 * n.max(2) as i128;
    let users = (0..n)
        .map(|_| {
            let p = rng.pick(span as usize) as i128;
            let l = p - rng.pick(4) as i128;
            let rr = p + rng.pick(4) as i128;
            let theta = thetas[rng.pick(thetas.len())];
            UserPrefs::new(r(l), r(p), r(rr), ThresholdSpec::Direct(theta))
        })
        .collect();
    let adopters: Vec<usize> = (0..n).filter(|_| rng.next_u64() % 2 == 0).collect();
    Population::new(users, adopters)
}

fn tail_min(sizes: &[usize]) -> usize {
    *sizes[sizes.len() / 2..].iter().min().unwrap()
}

#[test]
fn c01_five_user_window_recovers_community() {
    let t0 = Instant::now();
    let pop = scenarios::five_user();
    let lcc = lcc_exact(&pop).unwrap();
    assert_eq!(lcc.members.iter().copied().collect::<Vec<_>>(), vec![0, 1, 2]);

    let report = fair_limit_min_with(&pop, &Window::closed(r(2), r(5)), &caps()).unwrap();
    assert_eq!(report.min_size, 3);
    assert_eq!(report.min_size, lcc.size);
    pass("1", "five-user community {0,1,2} and window [2,5] fair limit 3", t0);
}

#[test]
fn c02_threshold_one_scan_matches_oracle() {
    let t0 = Instant::now();
    let mut rng = SimRng::new(0xA1);
    for case in 0..300 {
        let n = 1 + rng.pick(10);
        let pop = random_pop(&mut rng, n, &[Rational::one()]);
        let fast = lcc_theta_one(&pop).unwrap();
        let exact = lcc_exact(&pop).unwrap();
        assert_eq!(fast.size, exact.size, "case {case}: {pop:?}");
    }
    pass("2", "threshold-one scan = exhaustive size on 300 random populations", t0);
}

#[test]
fn c03_core_window_lower_bound() {
    let t0 = Instant::now();
    let thetas = [
        Rational::new(5, 8),
        Rational::new(2, 3),
        Rational::new(3, 4),
        Rational::new(7, 9),
        Rational::new(9, 10),
        Rational::one(),
    ];
    let mut rng = SimRng::new(0xA3);
    for case in 0..200 {
        let n = 1 + rng.pick(12);
        let pop = random_pop(&mut rng, n, &thetas);
        let theta_min = pop.theta_min().unwrap();
        let opt = lcc_exact(&pop).unwrap();
        let core = mutually_compatible_core(&pop);
        let window = core_window(&pop).unwrap();
        let report = fair_limit_min_with(&pop, &window, &caps()).unwrap();

        // Exact rational inequality: fair limit >= (2*theta_min - 1) * opt.
        let bound = (Rational::int(2) * theta_min - Rational::one()) * Rational::from(opt.size);
        assert!(
            Rational::from(report.min_size) >= bound,
            "case {case}: fair {} < bound {bound} (opt {})",
            report.min_size,
            opt.size
        );
        // Core anchoring: every fair-closed state contains the core.
        for state in &report.fair_states {
            for m in &core.members {
                assert!(state.contains(m), "case {case}: core member {m} missing");
            }
        }
    }
    pass(
        "3",
        "core-window fair limit >= (2*theta_min - 1) * opt and core anchoring, 200 populations",
        t0,
    );
}

#[test]
fn c04_upper_bound_construction() {
    let t0 = Instant::now();
    let theta = Rational::new(3, 4);
    // Smallest feasible n for this theta.
    let mut chosen = None;
    for n in (4..=40).step_by(4) {
        if let Ok(sp) = scenarios::theta_upper_bound(theta, n) {
            chosen = Some((n, sp));
            break;
        }
    }
    let (n, sp) = chosen.expect("a feasible instance exists");
    assert_eq!(n, 12);
    let report = best_guaranteed_window_quotient(&sp, &caps()).unwrap();
    let bound = (Rational::int(2) * theta - Rational::one()) * Rational::from(n) + r(2);
    assert!(
        report.objective_value <= bound,
        "best {} exceeds bound {bound}",
        report.objective_value
    );
    pass(
        "4",
        "no window beats (2*theta-1)n + 2 on the peripheral-stack construction (n = 12)",
        t0,
    );
}

#[test]
fn c05_trolls_make_moderation_necessary() {
    let t0 = Instant::now();
    for n in 6..=14 {
        let sp = scenarios::trolls(n, Rational::new(1, 2)).unwrap();
        let unmoderated = fair_limit_min_quotient_with(&sp, &Window::all(), &caps()).unwrap();
        assert_eq!(unmoderated.min_size, 1, "n = {n}");
        let best = best_guaranteed_window_quotient(&sp, &caps()).unwrap();
        assert_eq!(best.objective_value, Rational::from(n - 1), "n = {n}");
        // The multiplicative gap (n-1)/1 grows linearly with n.
    }
    pass(
        "5",
        "unmoderated floor 1 vs best window n-1 across n in 6..=14 (gap linear in n)",
        t0,
    );
}

#[test]
fn c06_cycling_has_no_equilibria() {
    let t0 = Instant::now();
    let sp = scenarios::cycling_single(20).unwrap();
    // Exhaustive over the whole quotient state space.
    let stable = all_stable_states(&sp, &Window::all()).unwrap();
    assert!(stable.is_empty(), "unexpected equilibria: {stable:?}");

    // The group-block schedule never stabilizes over 10^4 steps.
    let pop = sp.expand();
    let counts: Vec<usize> = sp.stacks.iter().map(|s| s.count).collect();
    let schedule = scenarios::block_schedule_for_stacks(&counts, &[0, 1, 2]);
    let trace = simulate(&pop, &PolicySchedule::NoModeration, &schedule, 10_000).unwrap();
    for step in &trace.steps {
        assert!(
            !is_stable(&step.state, &pop, &Window::all()),
            "stabilized at t = {}",
            step.t
        );
    }
    // The middle group oscillates: its on-platform count hits both extremes
    // in the tail of the run.
    let mid_counts: Vec<usize> = trace
        .steps
        .iter()
        .skip(5_000)
        .map(|s| s.state.iter().filter(|&&u| (4..13).contains(&u)).count())
        .collect();
    assert!(mid_counts.contains(&0) && mid_counts.contains(&9));
    pass(
        "6",
        "no stable arrangement exists (exhaustive) and the block schedule oscillates for 10^4 steps",
        t0,
    );
}

#[test]
fn c07_mutual_homogeneous_convergence() {
    let t0 = Instant::now();
    let mut rng = SimRng::new(0xA7);
    let bs = [Rational::one(), Rational::new(3, 2), Rational::new(7, 2)];
    let lams = [Rational::one(), Rational::new(1, 2), Rational::new(3, 4)];
    for case in 0..500 {
        let n = 4 + rng.pick(4);
        let pop = scenarios::mutual_random(
            n,
            bs[rng.pick(bs.len())],
            lams[rng.pick(lams.len())],
            rng.next_u64(),
        );
        for _ in 0..10 {
            let schedule = Schedule::SeededRandom(rng.next_u64());
            let trace =
                simulate(&pop, &PolicySchedule::NoModeration, &schedule, 1_200).unwrap();
            let mut prev_state = modwin::dynamics::initial_state(&pop, &PolicySchedule::NoModeration);
            let mut prev_phi = potential(&prev_state, &pop).unwrap();
            for step in &trace.steps {
                match step.action {
                    Action::Join => {
                        let phi = potential(&step.state, &pop).unwrap();
                        assert!(phi >= prev_phi, "case {case}: potential dropped on a join");
                        prev_phi = phi;
                    }
                    Action::Leave => {
                        let phi = potential(&step.state, &pop).unwrap();
                        assert!(phi > prev_phi, "case {case}: leave without strict increase");
                        prev_phi = phi;
                    }
                    _ => debug_assert_eq!(step.state, prev_state),
                }
                prev_state = step.state.clone();
            }
            assert!(
                is_stable(&prev_state, &pop, &Window::all()),
                "case {case}: run did not reach a stable arrangement"
            );
        }
    }
    pass(
        "7",
        "500 mutual/homogeneous populations x 10 schedules all converge; potential monotone",
        t0,
    );
}

#[test]
fn c08_sampled_windows_meet_the_bound() {
    let t0 = Instant::now();
    let theta = Rational::new(3, 4);
    let n = 1000;
    let sp = scenarios::theta_upper_bound(theta, n).unwrap();
    let pop = sp.expand();

    // The whole population is a compatible community here, so the optimum is
    // exactly n: verify by the willingness arithmetic on stack counts.
    {
        let counts: Vec<usize> = sp.stacks.iter().map(|s| s.count).collect();
        for (k, stack) in sp.stacks.iter().enumerate() {
            let mut compat = 0u64;
            for (j, other) in sp.stacks.iter().enumerate() {
                if modwin::model::compatible(&stack.user, other.user.speech) {
                    compat += counts[j] as u64;
                }
            }
            let _ = k;
            // Exclude self from the compatible side (self always compatible).
            assert!(willing_by_counts(
                compat - 1,
                (n as u64 - 1) - (compat - 1),
                stack.user.theta()
            ));
        }
    }
    let s_opt = n;

    let beta = Rational::new(1, 10);
    let target = (beta
        * (Rational::int(2) * theta - Rational::one())
        * Rational::from(s_opt))
    .floor_int() as usize; // 50
    assert_eq!(target, 50);

    let trials = 200;
    for m in [50usize, 100, 200] {
        let bound = sampling_bound(n, m, theta, s_opt, beta).unwrap();
        let mut successes = 0usize;
        for seed in 0..trials {
            let w = sample_window(&pop, m, seed as u64).unwrap();
            // Every user whose interval covers the sampled window joins and
            // never leaves, so this certifies fair size >= target.
            if anchored_size(&pop, &w) >= target {
                successes += 1;
            }
        }
        let freq = successes as f64 / trials as f64;
        if bound > 0.0 {
            assert!(
                freq >= bound,
                "m = {m}: empirical {freq} below bound {bound}"
            );
        }
        println!("  m = {m}: certified success rate {freq:.3}, bound {bound:.3}");
    }
    pass(
        "8",
        "sampled core windows beat the concentration bound whenever it is positive",
        t0,
    );
}

#[test]
fn c09_ideological_windows() {
    let t0 = Instant::now();
    // Wider than the platform's own interval: admitting the far-left quarter
    // retains the middle half, beating the window-equals-interval policy.
    let sp = scenarios::ideological(20).unwrap();
    let platform = scenarios::ideological_platform(Rational::one()).unwrap();
    let report = best_ideological_window_quotient(&sp, &platform, &caps()).unwrap();
    assert_eq!(report.best_window, Window::closed(r(1), r(4)));
    assert_eq!(report.objective_value, r(10));
    let interval_value = report
        .per_candidate
        .iter()
        .find(|(w, _)| *w == Window::closed(r(2), r(4)))
        .map(|(_, v)| *v)
        .unwrap();
    assert_eq!(interval_value, r(5));
    assert!(report.objective_value > interval_value);

    // Narrower than the platform's interval: an all-tolerant platform still
    // bans the troll.
    let trolls = scenarios::trolls(12, Rational::new(1, 2)).unwrap();
    let tolerant = IdeologicalPlatform::new(Window::all(), Rational::one()).unwrap();
    let report = best_ideological_window_quotient(&trolls, &tolerant, &caps()).unwrap();
    assert_eq!(report.best_window, Window::closed(r(2), r(2)));
    assert_eq!(report.objective_value, r(11));
    pass(
        "9",
        "best ideological window is wider than the interval (value 10 > 5) or narrower (bans the troll)",
        t0,
    );
}

#[test]
fn c10_personalization() {
    let t0 = Instant::now();
    // Better personalization never shrinks the optimum community.
    let mut rng = SimRng::new(0xAA);
    let bs = [Rational::one(), Rational::int(2), Rational::new(7, 2)];
    let lams = [Rational::one(), Rational::new(3, 4), Rational::new(1, 2)];
    let factors = [Rational::new(1, 2), Rational::new(2, 3), Rational::new(1, 4)];
    for case in 0..200 {
        let n = 1 + rng.pick(10);
        let span = 2 * n.max(2) as i128;
        let users: Vec<UserPrefs> = (0..n)
            .map(|_| {
                let p = rng.pick(span as usize) as i128;
                let l = p - rng.pick(4) as i128;
                let rr = p + rng.pick(4) as i128;
                UserPrefs::new(
                    r(l),
                    r(p),
                    r(rr),
                    ThresholdSpec::FromDisutility {
                        b: bs[rng.pick(bs.len())],
                        lambda: lams[rng.pick(lams.len())],
                    },
                )
            })
            .collect();
        let pop = Population::new(users, []);
        let factor = factors[rng.pick(factors.len())];
        let improved = Population::new(
            pop.users
                .iter()
                .map(|u| {
                    let (b, lambda) = match u.threshold {
                        ThresholdSpec::FromDisutility { b, lambda } => (b, lambda * factor),
                        _ => unreachable!(),
                    };
                    UserPrefs::new(u.left, u.speech, u.right, ThresholdSpec::FromDisutility {
                        b,
                        lambda,
                    })
                })
                .collect(),
            [],
        );
        let before = lcc_exact(&pop).unwrap().size;
        let after = lcc_exact(&improved).unwrap().size;
        assert!(after >= before, "case {case}: optimum shrank {before} -> {after}");
    }

    // But the best-window guarantee can strictly drop under better
    // personalization.
    let (base, improved) =
        scenarios::personalization_gap(Rational::one(), Rational::one(), Rational::new(3, 5))
            .unwrap();
    let v_base = best_guaranteed_window_quotient(&base, &caps()).unwrap();
    let v_improved = best_guaranteed_window_quotient(&improved, &caps()).unwrap();
    assert!(
        v_base.objective_value > v_improved.objective_value,
        "expected strict drop: {} vs {}",
        v_base.objective_value,
        v_improved.objective_value
    );
    println!(
        "  best-window guarantee {} (base) vs {} (personalized)",
        v_base.objective_value, v_improved.objective_value
    );
    pass(
        "10",
        "optimum monotone in personalization (200 populations); window guarantee strictly drops on the gap instance",
        t0,
    );
}

#[test]
fn c11_competition_insurgency_and_incumbency() {
    let t0 = Instant::now();
    // Insurgency: the minimizing reachable equilibrium leaves the incumbent
    // with exactly eps*n = 4 users (the entrant absorbs everyone else).
    let scfg = scenarios::insurgency(40, Rational::new(1, 10)).unwrap();
    let report = multi_fair_limit_quotient(&scfg, &caps()).unwrap();
    let eq_p0_sizes: Vec<usize> = report
        .equilibria
        .iter()
        .map(|e| e.iter().map(|row| row[0]).sum())
        .collect();
    let min_eq = *eq_p0_sizes.iter().min().unwrap();
    assert_eq!(min_eq, 4, "equilibrium platform-1 sizes: {eq_p0_sizes:?}");
    // The stripped incumbent is exactly the wide-margin stack; the entrant
    // holds everyone else in that equilibrium.
    let stripped = report
        .equilibria
        .iter()
        .find(|e| e.iter().map(|row| row[0]).sum::<usize>() == 4)
        .unwrap();
    assert_eq!(stripped[0][0], 4);
    assert_eq!(
        stripped.iter().map(|row| row[1]).sum::<usize>(),
        36,
        "entrant holds the rest"
    );

    // Incumbency: with the central mass admitted, all-on-incumbent is stable
    // for every window pair and no structure with fewer incumbent members is
    // reachable.
    let positions: Vec<i128> = (1..=7).collect();
    let mut w1s: Vec<Window> = vec![Window::all()];
    for a in 1..=4i128 {
        for b in 4..=7i128 {
            w1s.push(Window::closed(r(a), r(b)));
        }
    }
    let mut w2s: Vec<Window> = vec![Window::all(), Window::Empty];
    for (ai, &a) in positions.iter().enumerate() {
        for &b in &positions[ai..] {
            w2s.push(Window::closed(r(a), r(b)));
        }
    }
    let mut combos = 0usize;
    for gamma in [Some(Rational::one()), None] {
        for &w1 in &w1s {
            for &w2 in &w2s {
                let cfg = scenarios::incumbency(95, 3, w1, w2, gamma).unwrap();
                let flat = cfg.expand();
                assert!(
                    multi_is_stable(&flat.initial_assignment, &flat),
                    "w1 {w1:?} w2 {w2:?} gamma {gamma:?}: seeding not stable"
                );
                let p0_initial: usize = cfg
                    .stacks
                    .iter()
                    .filter(|s| s.initial_platform == Some(0))
                    .map(|s| s.count)
                    .sum();
                let report = multi_fair_limit_quotient(&cfg, &caps()).unwrap();
                assert_eq!(
                    report.per_platform_min_sizes[0], p0_initial,
                    "w1 {w1:?} w2 {w2:?}: incumbent can be drained"
                );
                combos += 1;
            }
        }
    }
    pass(
        "11",
        &format!(
            "insurgency strips the incumbent to 4; incumbency invulnerable over {combos} window/bandwidth combos"
        ),
        t0,
    );
}

#[test]
fn c12_two_platform_cycling_and_potential() {
    let t0 = Instant::now();
    // Proportion regime (bandwidth 1), block order by stacks 1,2,3,4.
    {
        let cfg = scenarios::cycling_multi(30, Some(Rational::one())).unwrap();
        let counts: Vec<usize> = cfg.stacks.iter().map(|s| s.count).collect();
        let schedule = scenarios::block_schedule_for_stacks(&counts, &[0, 1, 2, 3]);
        let flat = cfg.expand();
        let rep_len: usize = counts.iter().sum();
        let trace = multi_simulate(&flat, &schedule, (rep_len * 60) as u64).unwrap();
        for s in &trace.steps {
            assert!(!multi_is_stable(&s.state, &flat), "stabilized at t = {}", s.t);
        }
        // Exactly periodic in the tail with period two rounds: the masses
        // leave for the entrant in one round and come back in the next.
        let states: Vec<_> = trace.steps.iter().map(|s| s.state.clone()).collect();
        let a = states[rep_len * 40 - 1].clone();
        let b = states[rep_len * 42 - 1].clone();
        assert_eq!(a, b, "proportion regime must cycle with period two rounds");
        assert_ne!(states[rep_len * 40 - 1], states[rep_len * 41 - 1]);
    }
    // Utility regime (unbounded bandwidth), block order 1,2,3,4,2,3.
    {
        let cfg = scenarios::cycling_multi(30, None).unwrap();
        let counts: Vec<usize> = cfg.stacks.iter().map(|s| s.count).collect();
        let schedule = scenarios::block_schedule_for_stacks(&counts, &[0, 1, 2, 3, 1, 2]);
        let flat = cfg.expand();
        let rep_len: usize = [0usize, 1, 2, 3, 1, 2].iter().map(|&k| counts[k]).sum();
        let trace = multi_simulate(&flat, &schedule, (rep_len * 40) as u64).unwrap();
        for s in &trace.steps {
            assert!(!multi_is_stable(&s.state, &flat), "stabilized at t = {}", s.t);
        }
        let states: Vec<_> = trace.steps.iter().map(|s| s.state.clone()).collect();
        let a = states[rep_len * 20 - 1].clone();
        let b = states[rep_len * 21 - 1].clone();
        assert_eq!(a, b, "utility regime must cycle with period one round");
    }

    // Potential on 200 mutual/homogeneous two-platform configs with
    // unbounded bandwidth: never decreases, strictly increases on moves,
    // and the dynamics converge.
    let mut rng = SimRng::new(0xAC);
    for case in 0..200 {
        let n = 4 + rng.pick(4);
        let pop = scenarios::mutual_random(n, Rational::new(3, 2), Rational::one(), rng.next_u64());
        let users: Vec<CompetitionUser> = pop
            .users
            .iter()
            .map(|u| CompetitionUser {
                prefs: *u,
                bandwidth: None,
            })
            .collect();
        let initial: Vec<Option<usize>> = (0..n)
            .map(|_| match rng.pick(3) {
                0 => Some(0),
                1 => Some(1),
                _ => None,
            })
            .collect();
        let cfg = CompetitionConfig {
            users,
            platforms: vec![
                PlatformSpec {
                    window: Window::all(),
                    lambda: LambdaSpec::Uniform(Rational::one()),
                },
                PlatformSpec {
                    window: Window::all(),
                    lambda: LambdaSpec::Uniform(Rational::one()),
                },
            ],
            initial_assignment: initial,
            normalized: true,
        };
        let trace = multi_simulate(&cfg, &Schedule::SeededRandom(rng.next_u64()), 1_500).unwrap();
        let mut phi = multi_potential(&cfg.initial_assignment, &cfg);
        for s in &trace.steps {
            if s.from != s.to {
                let next = multi_potential(&s.state, &cfg);
                // Strict increase whenever the assignment changes away from
                // a platform; never a decrease otherwise.
                if s.from.is_some() {
                    assert!(next > phi, "case {case}: departure without strict increase");
                } else {
                    assert!(next >= phi, "case {case}: potential decreased");
                }
                phi = next;
            }
        }
        assert!(
            multi_is_stable(&trace.steps.last().unwrap().state, &cfg),
            "case {case}: did not converge"
        );
    }
    pass(
        "12",
        "two-platform cycling persists in both bandwidth regimes; multi potential monotone on 200 configs",
        t0,
    );
}

#[test]
fn c13_shock_robustness() {
    let t0 = Instant::now();
    let engine = caps();

    // The nine-user example: fragile unmoderated, robust once trimmed.
    let pop = scenarios::adversaries_example();
    let (worst, _) = robust_size(&pop, &Window::all(), 1, &engine).unwrap();
    assert_eq!(worst, 1);
    let (worst, _) = robust_size(&pop, &Window::closed(r(1), r(7)), 1, &engine).unwrap();
    assert_eq!(worst, 6);

    // Canonical family sweep: trimming the prescribed number of greatest
    // speech points withstands any k-shock at cost k.
    let thetas = [Rational::new(1, 3), Rational::new(1, 2), Rational::new(2, 3)];
    let mut swept = 0usize;
    for &theta in &thetas {
        for (n, k) in [(8usize, 1usize), (10, 1), (12, 1), (8, 2), (9, 2)] {
            let t = robust_trim_count(theta, k).unwrap();
            let max_trim = ((Rational::one() - theta) * Rational::from(n - 1)).floor_int() as usize + 1;
            if t > max_trim || t >= n {
                continue; // family too small for this trim, per its own constraint
            }
            let fam = scenarios::robust_family(n, theta).unwrap();
            let kept = n - t;
            let window = Window::closed(r(1), r(kept as i128));
            let (size, shock) = robust_size(&fam, &window, k, &engine).unwrap();
            assert!(
                size >= kept - k,
                "theta {theta} n {n} k {k}: robust size {size} < {} (shock {shock:?})",
                kept - k
            );
            swept += 1;
        }
    }
    assert!(swept >= 10, "sweep degenerated ({swept} combos)");

    // Core-window robustness on random populations with theta_min > 1/2:
    // at most k anchored users can be lost to a k-shock.
    let mut rng = SimRng::new(0xAD);
    let thetas = [Rational::new(2, 3), Rational::new(3, 4), Rational::new(7, 9)];
    let mut checked = 0usize;
    for case in 0..60 {
        let k = if case % 3 == 0 { 2 } else { 1 };
        let n = if k == 2 { 4 + rng.pick(4) } else { 4 + rng.pick(7) };
        let theta = thetas[rng.pick(thetas.len())];
        let pop = random_pop(&mut rng, n, &[theta]);
        let opt = lcc_exact(&pop).unwrap().size;
        let window = core_window(&pop).unwrap();
        let (size, shock) = robust_size(&pop, &window, k, &engine).unwrap();
        let bound = (Rational::int(2) * theta - Rational::one()) * Rational::from(opt)
            - Rational::from(k);
        assert!(
            Rational::from(size) >= bound,
            "case {case}: robust {size} < {bound} (shock {shock:?})"
        );
        checked += 1;
    }
    assert_eq!(checked, 60);
    pass(
        "13",
        "9-user example exact (1 and 6); trim sweep withstands k-shocks; core window loses at most k",
        t0,
    );
}

#[test]
fn c14_one_sided_dynamic_windows() {
    let t0 = Instant::now();
    let engine = caps();
    let thetas = [
        Rational::new(1, 3),
        Rational::new(1, 2),
        Rational::new(2, 3),
        Rational::new(3, 4),
    ];
    let mut static_fell_short = 0usize;
    let mut rng = SimRng::new(0xAE);
    for case in 0..200 {
        let n = 1 + rng.pick(10);
        let theta = thetas[rng.pick(thetas.len())];
        let pop = scenarios::one_sided_random(n, theta, rng.next_u64()).unwrap();
        let scan = lcc_one_sided(&pop).unwrap();
        let exact = lcc_exact(&pop).unwrap();
        assert_eq!(scan.size, exact.size, "case {case}: {pop:?}");

        let plan = dynamic_window_one_sided(&pop).unwrap();
        let report = fair_limit_policy(&pop, &plan.to_policy(), &engine).unwrap();
        assert_eq!(
            report.min_size, exact.size,
            "case {case}: dynamic plan fell short: {plan:?}"
        );
        if case % 20 == 0 && !pop.is_empty() {
            // The witness drives the phase machinery too: simulating it under
            // the plan attains the optimum exactly.
            let trace = simulate(&pop, &plan.to_policy(), &report.witness, 2_000).unwrap();
            assert_eq!(tail_min(&trace.sizes()), exact.size, "case {case}");
        }

        let best_static = best_guaranteed_window(&pop, &engine).unwrap();
        if best_static.objective_value < Rational::from(exact.size) {
            static_fell_short += 1;
        }
    }
    assert!(
        static_fell_short > 0,
        "expected at least one population where every static window falls short"
    );
    pass(
        "14",
        &format!(
            "one-sided scan = oracle and dynamic plan attains it on 200 populations; static windows fell short on {static_fell_short}"
        ),
        t0,
    );
}

#[test]
fn c15_frequency_reduction() {
    let t0 = Instant::now();
    let thetas = [
        Rational::zero(),
        Rational::new(1, 4),
        Rational::new(1, 2),
        Rational::new(2, 3),
    ];
    let mut rng = SimRng::new(0xAF);
    let mut cross_checked = 0usize;
    let mut mismatch: Option<(FreqPopulation, u64, usize)> = None;
    for _case in 0..400 {
        let n = 2 + rng.pick(3);
        let users: Vec<FreqUser> = (0..n)
            .map(|_| {
                let p = rng.pick(5) as i128;
                let l = p - rng.pick(3) as i128;
                let rr = p + rng.pick(3) as i128;
                FreqUser {
                    prefs: UserPrefs::new(
                        r(l),
                        r(p),
                        r(rr),
                        ThresholdSpec::Direct(thetas[rng.pick(thetas.len())]),
                    ),
                    frequency: 1 + rng.pick(3) as u32,
                }
            })
            .collect();
        let fp = FreqPopulation {
            users,
            initial_adopters: BTreeSet::new(),
        };
        let Ok(expanded) = expand_frequencies(&fp) else {
            continue;
        };
        if expanded.len() > 20 {
            continue;
        }
        let exact = lcc_exact(&expanded).unwrap();

        // Part (a): the reduced model evaluated directly on (subset, caps)
        // pairs equals the materialized expansion, exactly.
        let direct = reduced_capped_optimum(&fp).unwrap();
        assert_eq!(direct as usize, exact.size, "materialization mismatch: {fp:?}");
        cross_checked += 1;

        // Part (b): the capped variable-frequency optimum vs the expansion.
        let oracle = lcc_variable_frequency_oracle(&fp).unwrap();
        if oracle as usize != exact.size && mismatch.is_none() {
            mismatch = Some((fp.clone(), oracle, exact.size));
        }
    }
    assert!(cross_checked > 150, "suite degenerated: {cross_checked}");
    println!(
        "criterion 15a: PASS: reduced-model cross-check exact on {cross_checked} instances"
    );
    if let Some((fp, oracle, expanded)) = mismatch {
        println!(
            "criterion 15b: FAIL: capped variable-frequency optimum {oracle} != expanded community {expanded}"
        );
        println!("  instance: {fp:?}");
        panic!(
            "the literal frequency-reduction equality is unattainable: the copy expansion's \
             raised thresholds are calibrated for full stacks, so capped (partial-stack) \
             communities diverge from the native capped optimum; see the frozen counterexample \
             test and the project notes ({:.2}s)",
            t0.elapsed().as_secs_f64()
        );
    }
    pass("15", "frequency-reduction equality on the oracle suite", t0);
}

#[test]
fn c16_engine_cross_validation() {
    let t0 = Instant::now();
    let engine = caps();
    let mut rng = SimRng::new(0xB0);

    // Quotient vs flat agreement on stacked fixtures with <= 12 eligible.
    let mut fixtures: Vec<StackedPopulation> = vec![
        scenarios::theta_upper_bound(Rational::new(3, 4), 12).unwrap(),
        scenarios::ideological(8).unwrap(),
        scenarios::trolls(10, Rational::new(1, 2)).unwrap(),
    ];
    let thetas = [
        Rational::new(1, 3),
        Rational::new(1, 2),
        Rational::new(2, 3),
        Rational::one(),
    ];
    for _ in 0..50 {
        let num_stacks = 2 + rng.pick(3);
        let mut total = 0usize;
        let mut stacks = Vec::new();
        for _ in 0..num_stacks {
            let count = 1 + rng.pick(4);
            if total + count > 12 {
                break;
            }
            total += count;
            let p = rng.pick(8) as i128;
            let l = p - rng.pick(4) as i128;
            let rr = p + rng.pick(4) as i128;
            let theta = thetas[rng.pick(thetas.len())];
            let initial_on = rng.pick(count + 1);
            stacks.push(Stack::new(
                UserPrefs::new(r(l), r(p), r(rr), ThresholdSpec::Direct(theta)),
                count,
                initial_on,
            ));
        }
        if !stacks.is_empty() {
            fixtures.push(StackedPopulation { stacks });
        }
    }

    let mut agreement_checks = 0usize;
    let mut witness_checks = 0usize;
    let mut sim_checks = 0usize;
    for sp in &fixtures {
        let flat = sp.expand();
        let speeches: Vec<Rational> = flat.users.iter().map(|u| u.speech).collect();
        let lo = *speeches.iter().min().unwrap();
        let hi = *speeches.iter().max().unwrap();
        let windows = [Window::all(), Window::closed(lo, hi), Window::closed(lo, lo)];
        for w in windows {
            let q = fair_limit_min_quotient_with(sp, &w, &engine).unwrap();
            let f = fair_limit_min_with(&flat, &w, &engine).unwrap();
            assert_eq!(q.min_size, f.min_size, "engines disagree on {sp:?} {w:?}");
            agreement_checks += 1;

            // Both witnesses attain the reported floor when simulated.
            for witness in [&q.witness, &f.witness] {
                let trace =
                    simulate(&flat, &PolicySchedule::Static(w), witness, 3_000).unwrap();
                assert_eq!(
                    tail_min(&trace.sizes()),
                    q.min_size,
                    "witness misses the floor on {sp:?} {w:?}"
                );
                witness_checks += 1;
            }

            // Random fair schedules never undercut the reported floor.
            for _ in 0..7 {
                let trace = simulate(
                    &flat,
                    &PolicySchedule::Static(w),
                    &Schedule::SeededRandom(rng.next_u64()),
                    800,
                )
                .unwrap();
                assert!(
                    tail_min(&trace.sizes()) >= q.min_size,
                    "schedule undercut the floor on {sp:?} {w:?}"
                );
                sim_checks += 1;
            }
        }
    }
    assert!(sim_checks >= 1000, "need at least 1000 schedule checks, got {sim_checks}");
    pass(
        "16",
        &format!(
            "quotient = flat on {agreement_checks} fixture/window pairs; {witness_checks} witnesses attain their floor; {sim_checks} random schedules never undercut"
        ),
        t0,
    );
}
