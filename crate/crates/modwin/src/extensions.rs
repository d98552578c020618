//! Robustness to population shocks and heterogeneous speech frequencies.
//!
//! A shock adds or removes at most k users after the window is fixed. The
//! added users range over a canonical adversarial grid: one speech point per
//! region the existing interval endpoints induce, with either a full-line
//! interval or the surrounding cell, and thresholds drawn from the existing
//! values plus the extremes. The k-robust size is the worst fair limit over
//! every shocked population. The grid is a finite under-approximation of the
//! unbounded adversary; it contains the troll and cell shapes that drive the
//! worst cascades.
//!
//! Variable speech frequencies reduce to a constant-frequency population by
//! replacing each user with f_j identical copies whose threshold grows by
//! (f_j - 1)/(f - 1), compensating the utility a user would appear to gain
//! from their own stack.

use crate::dynamics::{fair_limit_min_with, EngineCaps};
use crate::error::{Error, Result};
use crate::model::{compatible, Population, ThresholdSpec, UserPrefs, Window};
use crate::rational::Rational;
use std::collections::BTreeSet;

/// One population shock: remove existing users, add new ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Shock {
    pub remove: BTreeSet<usize>,
    pub add: Vec<UserPrefs>,
}

impl Shock {
    pub fn magnitude(&self) -> usize {
        self.remove.len() + self.add.len()
    }

    /// Apply to a population: removed users vanish (also from the adopters,
    /// with ids compacted), added users start off the platform.
    pub fn apply(&self, pop: &Population) -> Population {
        let mut users = Vec::new();
        let mut remap = vec![usize::MAX; pop.len()];
        for (i, u) in pop.users.iter().enumerate() {
            if !self.remove.contains(&i) {
                remap[i] = users.len();
                users.push(*u);
            }
        }
        let adopters: BTreeSet<usize> = pop
            .initial_adopters
            .iter()
            .filter(|i| !self.remove.contains(i))
            .map(|&i| remap[i])
            .collect();
        users.extend(self.add.iter().copied());
        Population {
            users,
            initial_adopters: adopters,
        }
    }
}

/// The finite adversary class for added users.
#[derive(Clone, Debug)]
pub struct ShockGrid {
    /// Candidate (cell left, speech, cell right) triples.
    pub points: Vec<(Rational, Rational, Rational)>,
    pub thetas: Vec<Rational>,
}

impl ShockGrid {
    /// Grid induced by the population's interval endpoints: every endpoint
    /// value, every midpoint between consecutive values, and one point past
    /// each extreme. Thresholds are the distinct existing values plus 0
    /// and 1.
    pub fn canonical(pop: &Population) -> ShockGrid {
        let mut cuts: Vec<Rational> = Vec::new();
        for u in &pop.users {
            cuts.push(u.left);
            cuts.push(u.right);
        }
        cuts.sort();
        cuts.dedup();

        let mut points = Vec::new();
        if cuts.is_empty() {
            points.push((Rational::zero(), Rational::zero(), Rational::zero()));
        } else {
            let first = cuts[0];
            let last = cuts[cuts.len() - 1];
            let below = first - Rational::one();
            let above = last + Rational::one();
            points.push((below, below, below));
            points.push((above, above, above));
            for (i, &c) in cuts.iter().enumerate() {
                points.push((c, c, c));
                if i + 1 < cuts.len() {
                    let mid = (c + cuts[i + 1]) / Rational::int(2);
                    points.push((cuts[i], mid, cuts[i + 1]));
                }
            }
        }

        let mut thetas: Vec<Rational> = pop.users.iter().map(|u| u.theta()).collect();
        thetas.push(Rational::zero());
        thetas.push(Rational::one());
        thetas.sort();
        thetas.dedup();

        ShockGrid { points, thetas }
    }

    /// Users the grid can add: at each point, a full-line consumer (the
    /// troll shape) and a cell-bound consumer, for each threshold.
    pub fn candidates(&self) -> Vec<UserPrefs> {
        let mut out = Vec::new();
        let span = self
            .points
            .iter()
            .fold(None::<(Rational, Rational)>, |acc, &(_, p, _)| match acc {
                None => Some((p, p)),
                Some((lo, hi)) => Some((lo.min(p), hi.max(p))),
            });
        let (lo, hi) = span.unwrap_or((Rational::zero(), Rational::zero()));
        for &(cl, p, cr) in &self.points {
            for &theta in &self.thetas {
                let spec = ThresholdSpec::Direct(theta);
                out.push(UserPrefs::new(lo.min(cl), p, hi.max(cr), spec));
                out.push(UserPrefs::new(cl, p, cr, spec));
            }
        }
        out.dedup();
        out
    }
}

/// Every shock of magnitude at most k: removal subsets, grid additions, and
/// mixed combinations.
pub fn shock_space(pop: &Population, k: usize, grid: &ShockGrid) -> Vec<Shock> {
    let candidates = grid.candidates();
    let removals = subsets_up_to(pop.len(), k);
    let additions = multisets_up_to(candidates.len(), k);

    let mut shocks = Vec::new();
    for rem in &removals {
        for add in &additions {
            if rem.len() + add.len() > k {
                continue;
            }
            shocks.push(Shock {
                remove: rem.iter().copied().collect(),
                add: add.iter().map(|&c| candidates[c]).collect(),
            });
        }
    }
    shocks
}

fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for s in &layer {
            let start = s.last().map(|&x| x + 1).unwrap_or(0);
            for x in start..n {
                let mut t = s.clone();
                t.push(x);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn multisets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for s in &layer {
            let start = s.last().copied().unwrap_or(0);
            for x in start..n {
                let mut t = s.clone();
                t.push(x);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Worst fair limit over every shock of magnitude at most k, with a shock
/// achieving it.
pub fn robust_size(
    pop: &Population,
    window: &Window,
    k: usize,
    caps: &EngineCaps,
) -> Result<(usize, Shock)> {
    let grid = ShockGrid::canonical(pop);
    let mut worst: Option<(usize, Shock)> = None;
    for shock in shock_space(pop, k, &grid) {
        let shocked = shock.apply(pop);
        let report = fair_limit_min_with(&shocked, window, caps)?;
        if worst.as_ref().is_none_or(|(m, _)| report.min_size < *m) {
            worst = Some((report.min_size, shock));
        }
    }
    Ok(worst.expect("shock space contains at least the empty shock"))
}

/// How many greatest-speech users the canonical robust family must drop to
/// withstand any k-shock: ceil(k * max{(1-theta)/theta, 1}).
pub fn robust_trim_count(theta: Rational, k: usize) -> Result<usize> {
    if !theta.is_positive() || theta >= Rational::one() {
        return Err(Error::precondition(
            "trim count needs theta strictly inside (0, 1)",
        ));
    }
    let ratio = (Rational::one() - theta) / theta;
    let factor = ratio.max(Rational::one());
    Ok((Rational::from(k) * factor).ceil_int() as usize)
}

/// A user with an integer speech frequency.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FreqUser {
    pub prefs: UserPrefs,
    pub frequency: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreqPopulation {
    pub users: Vec<FreqUser>,
    pub initial_adopters: BTreeSet<usize>,
}

impl FreqPopulation {
    pub fn total_frequency(&self) -> u64 {
        self.users.iter().map(|u| u.frequency as u64).sum()
    }
}

/// Reduce a variable-frequency population to constant frequency: each user
/// becomes f_j identical copies with threshold raised by (f_j - 1)/(f - 1).
/// Errors when a raised threshold would exceed 1 (the user's own volume
/// dominates the rest too much for the reduction to apply).
pub fn expand_frequencies(fp: &FreqPopulation) -> Result<Population> {
    let f = fp.total_frequency();
    if f < 2 {
        return Err(Error::precondition(
            "frequency expansion needs total frequency >= 2",
        ));
    }
    for (i, u) in fp.users.iter().enumerate() {
        if u.frequency == 0 {
            return Err(Error::precondition(format!(
                "user {i}: frequency must be >= 1"
            )));
        }
    }
    let mut users = Vec::new();
    let mut adopters = BTreeSet::new();
    for (i, u) in fp.users.iter().enumerate() {
        let bump = Rational::new(u.frequency as i128 - 1, f as i128 - 1);
        let theta = u.prefs.theta() + bump;
        if theta > Rational::one() {
            return Err(Error::infeasible(format!(
                "user {i}: frequency too dominant for reduction (raised threshold {theta} > 1)"
            )));
        }
        for _ in 0..u.frequency {
            let id = users.len();
            users.push(UserPrefs::new(
                u.prefs.left,
                u.prefs.speech,
                u.prefs.right,
                ThresholdSpec::Direct(theta),
            ));
            if fp.initial_adopters.contains(&i) {
                adopters.insert(id);
            }
        }
    }
    Ok(Population {
        users,
        initial_adopters: adopters,
    })
}

pub const FREQ_ORACLE_USER_CAP: usize = 6;
pub const FREQ_ORACLE_FREQ_CAP: u32 = 3;

/// Exhaustive optimum over member subsets and per-member speech caps
/// 1..=f_j, scored by total capped speech volume. A member is satisfied when
/// the capped speech of compatible others is at least a theta fraction of
/// all others' capped speech, exactly.
pub fn lcc_variable_frequency_oracle(fp: &FreqPopulation) -> Result<u64> {
    let n = fp.users.len();
    if n > FREQ_ORACLE_USER_CAP {
        return Err(Error::precondition(format!(
            "frequency oracle capped at {FREQ_ORACLE_USER_CAP} users"
        )));
    }
    if fp.users.iter().any(|u| u.frequency > FREQ_ORACLE_FREQ_CAP) {
        return Err(Error::precondition(format!(
            "frequency oracle capped at frequency {FREQ_ORACLE_FREQ_CAP}"
        )));
    }
    let mut best_volume = 0u64;
    let mut caps = vec![0u32; n]; // 0 = not a member
    scan(fp, 0, &mut caps, &mut best_volume);
    return Ok(best_volume);

    fn scan(fp: &FreqPopulation, i: usize, caps: &mut Vec<u32>, best_volume: &mut u64) {
        if i == fp.users.len() {
            if feasible(fp, caps) {
                let volume: u64 = caps.iter().map(|&g| g as u64).sum();
                if volume > *best_volume {
                    *best_volume = volume;
                }
            }
            return;
        }
        for g in 0..=fp.users[i].frequency {
            caps[i] = g;
            scan(fp, i + 1, caps, best_volume);
        }
        caps[i] = 0;
    }

    fn feasible(fp: &FreqPopulation, caps: &[u32]) -> bool {
        let total: i128 = caps.iter().map(|&g| g as i128).sum();
        for (j, &gj) in caps.iter().enumerate() {
            if gj == 0 {
                continue;
            }
            // A member consumes everyone's capped speech but their own; at
            // unit frequencies this is exactly the plain willingness test.
            let pool = total - gj as i128;
            if pool == 0 {
                continue;
            }
            let mut compat_vol = 0i128;
            for (k, &gk) in caps.iter().enumerate() {
                if k != j && gk > 0 && compatible(&fp.users[j].prefs, fp.users[k].prefs.speech) {
                    compat_vol += gk as i128;
                }
            }
            let theta = fp.users[j].prefs.theta();
            if Rational::int(compat_vol) * Rational::int(theta.denom())
                < Rational::int(theta.numer()) * Rational::int(pool)
            {
                return false;
            }
        }
        true
    }
}

/// The reduced model's optimum computed directly on (subset, caps) pairs
/// without materializing copies: a member's capped stack contributes its
/// remaining units as compatible consumption out of a pool of all capped
/// speech minus one unit, against the raised threshold. This must equal
/// `lcc_exact(expand_frequencies(fp))` exactly: it is the same model walked
/// through different arithmetic, and cross-checks the expansion.
pub fn reduced_capped_optimum(fp: &FreqPopulation) -> Result<u64> {
    let n = fp.users.len();
    if n > FREQ_ORACLE_USER_CAP {
        return Err(Error::precondition(format!(
            "frequency oracle capped at {FREQ_ORACLE_USER_CAP} users"
        )));
    }
    let f = fp.total_frequency();
    if f < 2 {
        return Err(Error::precondition("needs total frequency >= 2"));
    }
    let mut best = 0u64;
    let mut caps = vec![0u32; n];
    scan(fp, 0, &mut caps, &mut best, f);
    return Ok(best);

    fn scan(fp: &FreqPopulation, i: usize, caps: &mut Vec<u32>, best: &mut u64, f: u64) {
        if i == fp.users.len() {
            if feasible_reduced(fp, caps, f) {
                let volume: u64 = caps.iter().map(|&g| g as u64).sum();
                if volume > *best {
                    *best = volume;
                }
            }
            return;
        }
        for g in 0..=fp.users[i].frequency {
            caps[i] = g;
            scan(fp, i + 1, caps, best, f);
        }
        caps[i] = 0;
    }

    fn feasible_reduced(fp: &FreqPopulation, caps: &[u32], f: u64) -> bool {
        let total: i128 = caps.iter().map(|&g| g as i128).sum();
        let pool = total - 1;
        for (j, &gj) in caps.iter().enumerate() {
            if gj == 0 {
                continue;
            }
            if pool == 0 {
                continue;
            }
            let mut compat_vol = gj as i128 - 1; // remaining own units
            for (k, &gk) in caps.iter().enumerate() {
                if k != j && gk > 0 && compatible(&fp.users[j].prefs, fp.users[k].prefs.speech) {
                    compat_vol += gk as i128;
                }
            }
            let need = fp.users[j].prefs.theta()
                + Rational::new(fp.users[j].frequency as i128 - 1, f as i128 - 1);
            if Rational::int(compat_vol) * Rational::int(need.denom())
                < Rational::int(need.numer()) * Rational::int(pool)
            {
                return false;
            }
        }
        true
    }
}
