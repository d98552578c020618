//! Window enumeration and optimization.
//!
//! Window membership depends only on which speech points fall inside, so the
//! closed spans between distinct speech values (plus the empty window) are an
//! exhaustive candidate set. Objectives are worst-case over the fair-limit
//! behavior: the guaranteed size for neutral platforms, or the worst
//! fair-limit platform utility for platforms with their own speech interval.

use crate::dynamics::{fair_limit_min_with, EngineCaps};
use crate::error::{Error, Result};
use crate::model::{Population, StackedPopulation, Window};
use crate::quotient::fair_limit_min_quotient_with;
use crate::rational::Rational;
use std::collections::BTreeSet;

/// A platform with its own speech preferences: utility 1 per on-platform
/// user inside the interval, minus d per on-platform user outside it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdeologicalPlatform {
    pub interval: Window,
    pub d: Rational,
}

impl IdeologicalPlatform {
    pub fn new(interval: Window, d: Rational) -> Result<Self> {
        if !d.is_positive() {
            return Err(Error::precondition("platform disutility d must be positive"));
        }
        Ok(IdeologicalPlatform { interval, d })
    }
}

/// Outcome of a window scan. The best window is the argmax over
/// per-candidate values; ties break toward narrower, then leftmost windows.
#[derive(Clone, Debug)]
pub struct WindowSearchReport {
    pub best_window: Window,
    pub objective_value: Rational,
    pub per_candidate: Vec<(Window, Rational)>,
}

/// All closed spans between distinct speech values, plus the empty window.
/// O(n^2) candidates; any other window admits the same user set as one of
/// these.
pub fn candidate_windows(pop: &Population) -> Vec<Window> {
    let mut values: Vec<Rational> = pop.users.iter().map(|u| u.speech).collect();
    values.sort();
    values.dedup();
    let mut out = vec![Window::Empty];
    for a in 0..values.len() {
        for b in a..values.len() {
            out.push(Window::closed(values[a], values[b]));
        }
    }
    out
}

fn candidate_windows_stacked(sp: &StackedPopulation) -> Vec<Window> {
    let flat = Population::new(sp.stacks.iter().map(|s| s.user).collect(), []);
    candidate_windows(&flat)
}

/// Tie-break rank: narrower first (empty narrowest), then leftmost.
fn window_rank(w: &Window) -> (u8, Rational, Rational) {
    match w {
        Window::Empty => (0, Rational::zero(), Rational::zero()),
        Window::Span {
            lo: Some(l),
            hi: Some(h),
        } => (1, *h - *l, *l),
        // Candidate scans only produce bounded or empty windows; unbounded
        // ones sort last among ties.
        Window::Span { lo: Some(l), .. } => (2, Rational::zero(), *l),
        Window::Span { .. } => (3, Rational::zero(), Rational::zero()),
    }
}

fn pick_best(per_candidate: &[(Window, Rational)]) -> (Window, Rational) {
    let mut best: Option<(Window, Rational)> = None;
    for (w, v) in per_candidate {
        let replace = match &best {
            None => true,
            Some((bw, bv)) => v > bv || (v == bv && window_rank(w) < window_rank(bw)),
        };
        if replace {
            best = Some((*w, *v));
        }
    }
    best.expect("candidate list is never empty")
}

/// Assemble a report from externally computed per-candidate values (used by
/// the CLI's parallel evaluation); applies the standard tie-breaks.
pub fn report_from_candidates(per_candidate: Vec<(Window, Rational)>) -> WindowSearchReport {
    let (best_window, objective_value) = pick_best(&per_candidate);
    WindowSearchReport {
        best_window,
        objective_value,
        per_candidate,
    }
}

/// Argmax of the guaranteed (fair-limit) size over candidate windows.
pub fn best_guaranteed_window(pop: &Population, caps: &EngineCaps) -> Result<WindowSearchReport> {
    let mut per_candidate = Vec::new();
    for w in candidate_windows(pop) {
        let report = fair_limit_min_with(pop, &w, caps)?;
        per_candidate.push((w, Rational::from(report.min_size)));
    }
    let (best_window, objective_value) = pick_best(&per_candidate);
    Ok(WindowSearchReport {
        best_window,
        objective_value,
        per_candidate,
    })
}

/// Quotient-engine variant for stacked populations.
pub fn best_guaranteed_window_quotient(
    sp: &StackedPopulation,
    caps: &EngineCaps,
) -> Result<WindowSearchReport> {
    let mut per_candidate = Vec::new();
    for w in candidate_windows_stacked(sp) {
        let report = fair_limit_min_quotient_with(sp, &w, caps)?;
        per_candidate.push((w, Rational::from(report.min_size)));
    }
    let (best_window, objective_value) = pick_best(&per_candidate);
    Ok(WindowSearchReport {
        best_window,
        objective_value,
        per_candidate,
    })
}

/// Platform utility of an arrangement: +1 per member inside the platform's
/// interval, -d per member outside it.
pub fn platform_utility(
    state: &BTreeSet<usize>,
    platform: &IdeologicalPlatform,
    pop: &Population,
) -> Rational {
    let mut total = Rational::zero();
    for &i in state {
        if platform.interval.contains(pop.users[i].speech) {
            total += Rational::one();
        } else {
            total -= platform.d;
        }
    }
    total
}

fn platform_utility_counts(
    counts: &[usize],
    platform: &IdeologicalPlatform,
    sp: &StackedPopulation,
) -> Rational {
    let mut total = Rational::zero();
    for (k, &m) in counts.iter().enumerate() {
        let per = if platform.interval.contains(sp.stacks[k].user.speech) {
            Rational::one()
        } else {
            -platform.d
        };
        total += per * Rational::from(m);
    }
    total
}

/// Argmax over candidate windows of the worst-case fair-limit platform
/// utility: the minimum of `platform_utility` over every state of every
/// reachable fair-closed SCC.
pub fn best_ideological_window(
    pop: &Population,
    platform: &IdeologicalPlatform,
    caps: &EngineCaps,
) -> Result<WindowSearchReport> {
    let mut per_candidate = Vec::new();
    for w in candidate_windows(pop) {
        let report = fair_limit_min_with(pop, &w, caps)?;
        let value = report
            .fair_states
            .iter()
            .map(|s| platform_utility(s, platform, pop))
            .min()
            .unwrap_or_else(Rational::zero);
        per_candidate.push((w, value));
    }
    let (best_window, objective_value) = pick_best(&per_candidate);
    Ok(WindowSearchReport {
        best_window,
        objective_value,
        per_candidate,
    })
}

/// Quotient-engine variant for stacked populations.
pub fn best_ideological_window_quotient(
    sp: &StackedPopulation,
    platform: &IdeologicalPlatform,
    caps: &EngineCaps,
) -> Result<WindowSearchReport> {
    let mut per_candidate = Vec::new();
    for w in candidate_windows_stacked(sp) {
        let report = fair_limit_min_quotient_with(sp, &w, caps)?;
        let value = report
            .fair_states
            .iter()
            .map(|counts| platform_utility_counts(counts, platform, sp))
            .min()
            .unwrap_or_else(Rational::zero);
        per_candidate.push((w, value));
    }
    let (best_window, objective_value) = pick_best(&per_candidate);
    Ok(WindowSearchReport {
        best_window,
        objective_value,
        per_candidate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ThresholdSpec, UserPrefs};

    fn r(n: i128) -> Rational {
        Rational::int(n)
    }

    fn du(l: i128, p: i128, rr: i128, theta: Rational) -> UserPrefs {
        UserPrefs::new(r(l), r(p), r(rr), ThresholdSpec::Direct(theta))
    }

    fn five_user() -> Population {
        let one = Rational::one();
        Population::new(
            vec![
                du(2, 4, 6, one),
                du(2, 5, 5, one),
                du(1, 2, 5, one),
                du(2, 6, 6, one),
                du(2, 3, 3, one),
            ],
            [],
        )
    }

    #[test]
    fn candidate_counts() {
        let one = Rational::one();
        let single = Population::new(vec![du(0, 1, 2, one)], []);
        assert_eq!(candidate_windows(&single).len(), 2);

        let three = Population::new(
            vec![du(0, 1, 9, one), du(0, 2, 9, one), du(0, 3, 9, one)],
            [],
        );
        assert_eq!(candidate_windows(&three).len(), 7);

        assert_eq!(candidate_windows(&five_user()).len(), 16);
    }

    #[test]
    fn five_user_best_window() {
        let report = best_guaranteed_window(&five_user(), &EngineCaps::default()).unwrap();
        assert_eq!(report.best_window, Window::closed(r(2), r(5)));
        assert_eq!(report.objective_value, r(3));
        // The reported best really is the max of the candidate list.
        let max = report.per_candidate.iter().map(|(_, v)| *v).max().unwrap();
        assert_eq!(report.objective_value, max);
    }

    #[test]
    fn troll_population_prefers_narrow_window() {
        // Nine identical users plus one wide-interval troll speaking where
        // nobody listens.
        let th = Rational::new(1, 2);
        let mut users: Vec<UserPrefs> = (0..9).map(|_| du(1, 2, 3, th)).collect();
        users.push(du(0, 10, 10, th));
        let pop = Population::new(users, []);

        let report = best_guaranteed_window(&pop, &EngineCaps::default()).unwrap();
        assert_eq!(report.best_window, Window::closed(r(2), r(2)));
        assert_eq!(report.objective_value, r(9));

        // Widening past the troll strictly decreases the objective.
        let wide = report
            .per_candidate
            .iter()
            .find(|(w, _)| *w == Window::closed(r(2), r(10)))
            .unwrap();
        assert!(wide.1 < report.objective_value);

        // An ideological platform with an unbounded interval still moderates:
        // its best window excludes the troll.
        let platform =
            IdeologicalPlatform::new(Window::all(), Rational::one()).unwrap();
        let ideo = best_ideological_window(&pop, &platform, &EngineCaps::default()).unwrap();
        assert_eq!(ideo.best_window, Window::closed(r(2), r(2)));
        assert_eq!(ideo.objective_value, r(9));
    }

    #[test]
    fn platform_utility_signs() {
        let pop = five_user();
        let platform =
            IdeologicalPlatform::new(Window::closed(r(2), r(4)), Rational::one()).unwrap();
        let state: BTreeSet<usize> = [0, 1, 2].into_iter().collect();
        // Speech 4 and 2 inside, speech 5 outside.
        assert_eq!(platform_utility(&state, &platform, &pop), r(1));
        assert_eq!(
            platform_utility(&BTreeSet::new(), &platform, &pop),
            Rational::zero()
        );
    }

    #[test]
    fn disjoint_platform_interval_prefers_empty_window() {
        let th = Rational::new(1, 2);
        let pop = Population::new(vec![du(0, 1, 2, th); 4], []);
        let platform =
            IdeologicalPlatform::new(Window::closed(r(50), r(60)), Rational::one()).unwrap();
        let report = best_ideological_window(&pop, &platform, &EngineCaps::default()).unwrap();
        assert_eq!(report.best_window, Window::Empty);
        assert_eq!(report.objective_value, Rational::zero());
    }

    #[test]
    fn d_must_be_positive() {
        assert!(IdeologicalPlatform::new(Window::all(), Rational::zero()).is_err());
    }

    /// With threshold 1 everywhere, the best window recovers the full
    /// optimum, and the core window alone already achieves it.
    #[test]
    fn theta_one_windows_recover_the_optimum() {
        use crate::dynamics::fair_limit_min_with;
        use crate::lcc::{core_window, lcc_exact};
        use crate::schedule::SimRng;

        let mut rng = SimRng::new(33);
        let caps = EngineCaps::default();
        for _ in 0..40 {
            let n = 1 + rng.pick(8);
            let users: Vec<UserPrefs> = (0..n)
                .map(|_| {
                    let p = rng.pick(2 * n.max(2)) as i128;
                    let l = p - rng.pick(4) as i128;
                    let rr = p + rng.pick(4) as i128;
                    du(l, p, rr, Rational::one())
                })
                .collect();
            let pop = Population::new(users, []);
            let opt = lcc_exact(&pop).unwrap().size;
            let best = best_guaranteed_window(&pop, &caps).unwrap();
            assert_eq!(best.objective_value, Rational::from(opt));
            let fair = fair_limit_min_with(&pop, &core_window(&pop).unwrap(), &caps).unwrap();
            assert_eq!(fair.min_size, opt);
        }
    }
}
