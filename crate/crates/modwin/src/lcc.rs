//! Largest-compatible-community computations and window constructions with
//! guarantees, each pairable with the exhaustive oracle.
//!
//! A compatible community is a set where every member is willing with respect
//! to the others. The exhaustive search is the ground truth at small n; the
//! polynomial constructions (threshold-one pair scan, mutually compatible
//! core, one-sided working sets) are validated against it.

use crate::error::{Error, Result};
use crate::model::{compatible, willing, Population, UserPrefs, Window};
#[cfg(test)]
use crate::model::ThresholdSpec;
use crate::rational::Rational;
use crate::schedule::SimRng;
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LccMethod {
    BruteForce,
    ThetaOne,
    Core,
    OneSided,
}

/// A compatible community and how it was found. Construction checks the
/// membership invariant: every member is willing within the set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LccResult {
    pub members: BTreeSet<usize>,
    pub size: usize,
    pub method: LccMethod,
}

impl LccResult {
    fn checked(members: BTreeSet<usize>, method: LccMethod, pop: &Population) -> Self {
        for &i in &members {
            assert!(
                willing(i, &members, pop),
                "community invariant violated: member {i} unwilling"
            );
        }
        LccResult {
            size: members.len(),
            members,
            method,
        }
    }
}

pub const LCC_EXACT_CAP: usize = 20;

/// Exhaustive maximum compatible community. Ties break toward the
/// lexicographically smallest member set.
pub fn lcc_exact(pop: &Population) -> Result<LccResult> {
    let n = pop.len();
    if n > LCC_EXACT_CAP {
        return Err(Error::precondition(format!(
            "exhaustive community search capped at {LCC_EXACT_CAP} users, got {n}"
        )));
    }
    if n == 0 {
        return Ok(LccResult::checked(
            BTreeSet::new(),
            LccMethod::BruteForce,
            pop,
        ));
    }

    let compat_masks: Vec<u32> = (0..n)
        .map(|i| {
            let mut m = 0u32;
            for j in 0..n {
                if j != i && compatible(&pop.users[i], pop.users[j].speech) {
                    m |= 1 << j;
                }
            }
            m
        })
        .collect();
    let theta: Vec<(i128, i128)> = pop
        .users
        .iter()
        .map(|u| {
            let t = u.theta();
            (t.numer(), t.denom())
        })
        .collect();

    let feasible = |mask: u32| -> bool {
        let size = mask.count_ones() as i128;
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let c = (compat_masks[i] & mask).count_ones() as i128;
            let (num, den) = theta[i];
            if size > 1 && c * den < num * (size - 1) {
                return false;
            }
        }
        true
    };

    let mut best_mask = 0u32;
    let mut best_size = 0u32;
    for mask in 1u32..(1u32 << n) {
        let size = mask.count_ones();
        if size < best_size {
            continue;
        }
        if !feasible(mask) {
            continue;
        }
        if size > best_size || lex_members(mask) < lex_members(best_mask) {
            best_mask = mask;
            best_size = size;
        }
    }
    Ok(LccResult::checked(
        mask_to_set(best_mask),
        LccMethod::BruteForce,
        pop,
    ))
}

fn lex_members(mask: u32) -> Vec<usize> {
    mask_to_set(mask).into_iter().collect()
}

fn mask_to_set(mask: u32) -> BTreeSet<usize> {
    (0..32).filter(|&i| mask & (1 << i) != 0).collect()
}

/// Largest pairwise mutually compatible set via the extreme-speech pair scan.
/// Every pairwise mutually compatible set has its members' intervals covering
/// the span between its extreme speech points, so scanning candidate extreme
/// pairs (plus singletons) is exhaustive. Users with identical geometry are
/// interchangeable, so the scan runs over distinct (interval, speech) groups:
/// O(g^3) for g distinct shapes, which keeps stacked populations cheap.
fn largest_pairwise_mutual(pop: &Population) -> BTreeSet<usize> {
    if pop.is_empty() {
        return BTreeSet::new();
    }
    let mut by_shape: std::collections::BTreeMap<(Rational, Rational, Rational), Vec<usize>> =
        std::collections::BTreeMap::new();
    for (i, u) in pop.users.iter().enumerate() {
        by_shape.entry((u.speech, u.left, u.right)).or_default().push(i);
    }
    // Groups ordered by (speech, smallest id).
    let mut groups: Vec<(UserPrefs, Vec<usize>)> = by_shape
        .into_values()
        .map(|ids| (pop.users[ids[0]], ids))
        .collect();
    groups.sort_by_key(|(u, ids)| (u.speech, ids[0]));
    let g = groups.len();

    let mutual = |a: usize, b: usize| -> bool {
        compatible(&groups[a].0, groups[b].0.speech) && compatible(&groups[b].0, groups[a].0.speech)
    };

    let mut best: BTreeSet<usize> = groups[0].1.iter().copied().collect();
    for a in 0..g {
        for b in a..g {
            if a != b && !mutual(a, b) {
                continue;
            }
            let mut set: BTreeSet<usize> = BTreeSet::new();
            set.extend(groups[a].1.iter().copied());
            set.extend(groups[b].1.iter().copied());
            for (w, group) in groups.iter().enumerate().take(b).skip(a + 1) {
                if mutual(w, a) && mutual(w, b) {
                    set.extend(group.1.iter().copied());
                }
            }
            if better(&set, &best) {
                best = set;
            }
        }
    }
    best
}

fn better(candidate: &BTreeSet<usize>, incumbent: &BTreeSet<usize>) -> bool {
    candidate.len() > incumbent.len()
        || (candidate.len() == incumbent.len() && candidate.iter().lt(incumbent.iter()))
}

/// The community scan specialized to threshold-one populations, where it is
/// exact: with threshold 1 a compatible community is exactly a pairwise
/// mutually compatible set.
pub fn lcc_theta_one(pop: &Population) -> Result<LccResult> {
    for (i, u) in pop.users.iter().enumerate() {
        if u.theta() != Rational::one() {
            return Err(Error::precondition(format!(
                "threshold-one scan requires every threshold to be 1 (user {i} differs)"
            )));
        }
    }
    Ok(LccResult::checked(
        largest_pairwise_mutual(pop),
        LccMethod::ThetaOne,
        pop,
    ))
}

/// Largest set of pairwise mutually compatible users, no threshold
/// precondition. When the minimum threshold exceeds 1/2 its size is at least
/// (2*theta_min - 1) times the exact community size.
pub fn mutually_compatible_core(pop: &Population) -> LccResult {
    LccResult::checked(largest_pairwise_mutual(pop), LccMethod::Core, pop)
}

/// The window spanning the core's speech points. Everyone in the core covers
/// this window, so they join and never leave regardless of switching order.
pub fn core_window(pop: &Population) -> Result<Window> {
    let core = mutually_compatible_core(pop);
    let speeches: Vec<Rational> = core.members.iter().map(|&i| pop.users[i].speech).collect();
    match (speeches.iter().min(), speeches.iter().max()) {
        (Some(&lo), Some(&hi)) => Ok(Window::closed(lo, hi)),
        _ => Err(Error::precondition("core window of an empty population")),
    }
}

fn one_sided_preconditions(pop: &Population) -> Result<Rational> {
    if pop.is_empty() {
        return Err(Error::precondition("one-sided scan needs at least one user"));
    }
    let l0 = pop.users[0].left;
    let theta = pop.users[0].theta();
    for (i, u) in pop.users.iter().enumerate() {
        if u.left != l0 {
            return Err(Error::precondition(format!(
                "one-sided scan requires equal left endpoints (user {i} differs)"
            )));
        }
        if u.theta() != theta {
            return Err(Error::precondition(format!(
                "one-sided scan requires equal thresholds (user {i} differs)"
            )));
        }
    }
    Ok(theta)
}

/// The pieces of the one-sided working set for anchor j: the longer-interval
/// users compatible with j, and the beyond-interval users that may be added.
struct OneSidedPieces {
    anchor: usize,
    inside: Vec<usize>,
    added: Vec<usize>,
}

fn one_sided_pieces(pop: &Population, theta: Rational, j: usize) -> OneSidedPieces {
    let n = pop.len();
    let rj = pop.users[j].right;
    // Interval length ties are ordered by id so "longer" is a strict total
    // order; an all-identical population then forms one chain.
    let longer = |i: usize| (pop.users[i].right, i) > (rj, j);
    let inside: Vec<usize> = (0..n)
        .filter(|&i| i != j && pop.users[i].speech <= rj && longer(i))
        .collect();
    let mut beyond: Vec<usize> = (0..n).filter(|&i| pop.users[i].speech > rj).collect();
    beyond.sort_by_key(|&i| (pop.users[i].speech, i));
    let t_allowed = if theta.is_zero() {
        beyond.len()
    } else {
        let cap = Rational::from(inside.len()) * (Rational::one() - theta) / theta;
        (cap.floor_int().max(0) as usize).min(beyond.len())
    };
    beyond.truncate(t_allowed);
    OneSidedPieces {
        anchor: j,
        inside,
        added: beyond,
    }
}

/// Largest compatible community when all intervals share their left endpoint
/// and thresholds are equal: anchor on each user in turn, take everyone
/// compatible with the anchor that tolerates at least as much, and fill with
/// as many beyond-interval users as the anchor's threshold allows (smallest
/// speech first).
pub fn lcc_one_sided(pop: &Population) -> Result<LccResult> {
    let theta = one_sided_preconditions(pop)?;
    let mut best: Option<BTreeSet<usize>> = None;
    for j in 0..pop.len() {
        let pieces = one_sided_pieces(pop, theta, j);
        let mut set: BTreeSet<usize> = [pieces.anchor].into_iter().collect();
        set.extend(pieces.inside);
        set.extend(pieces.added);
        if best.as_ref().is_none_or(|b| better(&set, b)) {
            best = Some(set);
        }
    }
    Ok(LccResult::checked(
        best.unwrap_or_default(),
        LccMethod::OneSided,
        pop,
    ))
}

/// A two-phase window plan: open only the anchor group, and once it is all on
/// the platform, widen to the full working set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicWindowPlan {
    pub phase1: Window,
    /// Users whose joint presence triggers the widening.
    pub anchor_group: BTreeSet<usize>,
    pub phase2: Window,
}

impl DynamicWindowPlan {
    pub fn to_policy(&self) -> crate::dynamics::PolicySchedule {
        crate::dynamics::PolicySchedule::Phased(vec![
            (
                self.phase1,
                crate::dynamics::AdvanceCondition::Contains(self.anchor_group.clone()),
            ),
            (self.phase2, crate::dynamics::AdvanceCondition::Never),
        ])
    }
}

/// The dynamic window plan recovering the full one-sided community: phase 1
/// spans the anchor group (whose members like everything that window can
/// admit, so they all arrive), phase 2 widens to span the working set.
pub fn dynamic_window_one_sided(pop: &Population) -> Result<DynamicWindowPlan> {
    let theta = one_sided_preconditions(pop)?;
    let best = lcc_one_sided(pop)?;
    // The winning working set's anchor is its member whose interval ends
    // first (ties by id), matching the ordering used by the scan.
    let anchor = *best
        .members
        .iter()
        .min_by_key(|&&i| (pop.users[i].right, i))
        .expect("nonempty by precondition");
    let pieces = one_sided_pieces(pop, theta, anchor);
    let mut anchor_group: BTreeSet<usize> = [anchor].into_iter().collect();
    anchor_group.extend(pieces.inside.iter().copied());

    let span = |ids: &BTreeSet<usize>| -> Window {
        let lo = ids.iter().map(|&i| pop.users[i].speech).min().unwrap();
        let hi = ids.iter().map(|&i| pop.users[i].speech).max().unwrap();
        Window::closed(lo, hi)
    };
    let phase1 = span(&anchor_group);
    let mut working = anchor_group.clone();
    working.extend(pieces.added.iter().copied());
    let phase2 = span(&working);
    Ok(DynamicWindowPlan {
        phase1,
        anchor_group,
        phase2,
    })
}

/// Sample m users without replacement (seeded) and return the core window of
/// the sample.
pub fn sample_window(pop: &Population, m: usize, seed: u64) -> Result<Window> {
    let n = pop.len();
    if m == 0 || m > n {
        return Err(Error::precondition(format!(
            "sample size must be in 1..={n}, got {m}"
        )));
    }
    let mut rng = SimRng::new(seed);
    let ids = rng.sample_without_replacement(n, m);
    let sample = Population::new(ids.iter().map(|&i| pop.users[i]).collect(), []);
    core_window(&sample)
}

/// Success-probability lower bound for the sampled window: the chance that
/// it guarantees at least a beta fraction of the (2*theta_min - 1)-scaled
/// optimum. May be negative (vacuous); returned as-is.
pub fn sampling_bound(
    n: usize,
    m: usize,
    theta_min: Rational,
    s_opt: usize,
    beta: Rational,
) -> Result<f64> {
    if theta_min <= Rational::new(1, 2) {
        return Err(Error::precondition("sampling bound needs theta_min > 1/2"));
    }
    if beta <= Rational::zero() || beta >= Rational::one() {
        return Err(Error::precondition("beta must lie strictly between 0 and 1"));
    }
    let margin = (theta_min - Rational::new(1, 2)).to_f64()
        * (s_opt as f64 / n as f64)
        * (Rational::one() - beta).to_f64();
    Ok(1.0 - (n as f64) * (-(m as f64) * margin * margin).exp())
}

/// Number of users with speech inside the window whose interval covers the
/// whole window. They join and never leave under any fair schedule, so this
/// is a certified lower bound on the window's fair limit.
pub fn anchored_size(pop: &Population, window: &Window) -> usize {
    let covers = |u: &UserPrefs| match *window {
        Window::Empty => false,
        Window::Span { lo, hi } => {
            lo.is_some_and(|l| u.left <= l) && hi.is_some_and(|h| h <= u.right)
        }
    };
    pop.users
        .iter()
        .filter(|u| window.contains(u.speech) && covers(u))
        .count()
}
