//! Exact fair-limit analysis over per-stack counts.
//!
//! Populations built from stacks of identical users admit a quotient of the
//! flat state space: a state is the vector of on-platform counts per stack,
//! and an action is (stack, side): an on-platform or off-platform member of
//! that stack acts. Willingness depends only on counts, so the quotient is
//! exact, and it reaches population sizes far beyond the flat engine.
//!
//! Fairness in the quotient: an SCC is fair-closed when every (stack, side)
//! pair inhabited somewhere in the SCC can fire somewhere in the SCC without
//! leaving it. Witness schedules name individual users, so the quotient tour
//! is individualized by a least-recently-acted picker per (stack, side) and
//! cut at a recurrence of the flat configuration, which makes the scripted
//! cycle exactly periodic.

use crate::dynamics::EngineCaps;
use crate::error::{Error, Result};
use crate::fairgraph::{self, TransitionSystem};
use crate::model::{compatible, StackedPopulation, Window};
use crate::schedule::Schedule;
use std::collections::HashMap;

/// Fair-limit result for a stacked population. Counts are per stack.
#[derive(Clone, Debug)]
pub struct QuotientFairLimitReport {
    pub min_size: usize,
    /// Witness schedule over the ids of the expanded flat population.
    pub witness: Schedule,
    pub num_fair_closed_sccs: usize,
    /// Stable count vectors (singleton fair-closed SCCs).
    pub equilibria: Vec<Vec<usize>>,
    /// Count vectors of every reachable fair-closed SCC state.
    pub fair_states: Vec<Vec<usize>>,
}

const ON: usize = 0;
const OFF: usize = 1;

struct QuotientSystem<'a> {
    stacked: &'a StackedPopulation,
    counts: Vec<usize>,
    compat: Vec<Vec<bool>>,
    theta: Vec<(i128, i128)>,
    banned: Vec<bool>,
}

impl<'a> QuotientSystem<'a> {
    fn new(stacked: &'a StackedPopulation, window: &Window) -> Result<Self> {
        let v = stacked.validate();
        if !v.is_empty() {
            return Err(Error::Invalid(v));
        }
        let k = stacked.stacks.len();
        let counts: Vec<usize> = stacked.stacks.iter().map(|s| s.count).collect();
        let compat: Vec<Vec<bool>> = (0..k)
            .map(|a| {
                (0..k)
                    .map(|b| compatible(&stacked.stacks[a].user, stacked.stacks[b].user.speech))
                    .collect()
            })
            .collect();
        let theta: Vec<(i128, i128)> = stacked
            .stacks
            .iter()
            .map(|s| {
                let th = s.user.theta();
                (th.numer(), th.denom())
            })
            .collect();
        let banned: Vec<bool> = stacked
            .stacks
            .iter()
            .map(|s| !window.contains(s.user.speech))
            .collect();
        Ok(QuotientSystem {
            stacked,
            counts,
            compat,
            theta,
            banned,
        })
    }

    fn willing(&self, k: usize, compat_count: i128, total_others: i128) -> bool {
        if total_others == 0 {
            return true;
        }
        let (num, den) = self.theta[k];
        compat_count * den >= num * total_others
    }

    /// Transition of one member of stack `k` on `side`; `None` when the side
    /// is uninhabited. `state[k]` counts on-platform members.
    fn act(&self, state: &[u16], k: usize, side: usize) -> Option<Vec<u16>> {
        let m = state[k] as usize;
        let total: i128 = state.iter().map(|&x| x as i128).sum();
        let compat_on: i128 = state
            .iter()
            .enumerate()
            .filter(|(j, _)| self.compat[k][*j])
            .map(|(_, &x)| x as i128)
            .sum();
        match side {
            ON => {
                if m == 0 {
                    return None;
                }
                let mut next = state.to_vec();
                if self.banned[k] || !self.willing(k, compat_on - 1, total - 1) {
                    next[k] -= 1;
                }
                Some(next)
            }
            OFF => {
                if m >= self.counts[k] {
                    return None;
                }
                let mut next = state.to_vec();
                if !self.banned[k] && self.willing(k, compat_on, total) {
                    next[k] += 1;
                }
                Some(next)
            }
            _ => unreachable!("single-platform sides are on/off"),
        }
    }
}

impl TransitionSystem for QuotientSystem<'_> {
    type State = Vec<u16>;

    fn initial(&self) -> Vec<u16> {
        self.stacked
            .stacks
            .iter()
            .enumerate()
            .map(|(k, s)| if self.banned[k] { 0 } else { s.initial_on as u16 })
            .collect()
    }

    fn num_actions(&self) -> usize {
        2 * self.stacked.stacks.len()
    }

    fn applicable(&self, s: &Vec<u16>, action: usize) -> bool {
        let (k, side) = (action / 2, action % 2);
        match side {
            ON => s[k] > 0,
            _ => (s[k] as usize) < self.counts[k],
        }
    }

    fn apply(&self, s: &Vec<u16>, action: usize) -> Vec<u16> {
        let (k, side) = (action / 2, action % 2);
        self.act(s, k, side).unwrap_or_else(|| s.clone())
    }

    fn metric(&self, s: &Vec<u16>) -> usize {
        s.iter().map(|&x| x as usize).sum()
    }
}

/// Whether a count vector is a stable arrangement under the window.
pub fn is_stable_quotient(
    stacked: &StackedPopulation,
    state: &[usize],
    window: &Window,
) -> Result<bool> {
    let sys = QuotientSystem::new(stacked, window)?;
    let s: Vec<u16> = state.iter().map(|&x| x as u16).collect();
    for a in 0..sys.num_actions() {
        if sys.applicable(&s, a) && sys.apply(&s, a) != s {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact fair-limit of a stacked population under a static window, with a
/// witness schedule over the expanded population's user ids.
pub fn fair_limit_min_quotient(
    stacked: &StackedPopulation,
    window: &Window,
) -> Result<QuotientFairLimitReport> {
    fair_limit_min_quotient_with(stacked, window, &EngineCaps::default())
}

pub fn fair_limit_min_quotient_with(
    stacked: &StackedPopulation,
    window: &Window,
    caps: &EngineCaps,
) -> Result<QuotientFairLimitReport> {
    let sys = QuotientSystem::new(stacked, window)?;
    if stacked.stacks.is_empty() {
        return Ok(QuotientFairLimitReport {
            min_size: 0,
            witness: Schedule::Scripted {
                prefix: Vec::new(),
                cycle: Vec::new(),
            },
            num_fair_closed_sccs: 1,
            equilibria: vec![Vec::new()],
            fair_states: vec![Vec::new()],
        });
    }
    let g = fairgraph::explore(&sys, caps.state_cap)?;
    let analysis = fairgraph::analyze(&sys, &g);

    let anchor = analysis.min_state;
    let prefix_q = fairgraph::action_path(&g, &analysis.scc_of, 0, anchor, None)
        .expect("anchor reachable by construction");
    let cycle_q = fairgraph::fair_tour(&sys, &g, &analysis.scc_of, anchor);

    let world = StackWorld::for_single(stacked);
    let initial_locs = single_initial_locs(stacked, &sys);
    let act = |counts: &[Vec<usize>], k: usize, side: usize| -> Option<usize> {
        let state: Vec<u16> = counts.iter().map(|c| c[ON] as u16).collect();
        let next = sys.act(&state, k, side)?;
        Some(if next[k] as usize == counts[k][ON] {
            side // no change: the actor stays on its side
        } else if side == ON {
            OFF
        } else {
            ON
        })
    };
    let to_qaction = |a: usize| (a / 2, a % 2);
    let (prefix, cycle) = individualize_witness(
        &world,
        2,
        initial_locs,
        &act,
        &prefix_q.iter().map(|&a| to_qaction(a)).collect::<Vec<_>>(),
        &cycle_q.iter().map(|&a| to_qaction(a)).collect::<Vec<_>>(),
    )?;

    let counts_of = |s: &Vec<u16>| s.iter().map(|&x| x as usize).collect::<Vec<usize>>();
    let equilibria: Vec<Vec<usize>> = analysis
        .stable_states
        .iter()
        .filter(|&&s| analysis.is_fair_closed(analysis.scc_of[s as usize]))
        .map(|&s| counts_of(&g.states[s as usize]))
        .collect();
    let fair_states: Vec<Vec<usize>> = analysis
        .fair_closed_states()
        .iter()
        .map(|&s| counts_of(&g.states[s as usize]))
        .collect();

    Ok(QuotientFairLimitReport {
        min_size: analysis.min_metric,
        witness: Schedule::Scripted { prefix, cycle },
        num_fair_closed_sccs: analysis.fair_closed.len(),
        equilibria,
        fair_states,
    })
}

/// Enumerate the whole quotient state space (not just reachable states) and
/// report which are stable. Used to certify the absence of equilibria.
pub fn all_stable_states(stacked: &StackedPopulation, window: &Window) -> Result<Vec<Vec<usize>>> {
    let sys = QuotientSystem::new(stacked, window)?;
    let k = stacked.stacks.len();
    let mut out = Vec::new();
    let mut state: Vec<u16> = vec![0; k];
    loop {
        let stable = (0..sys.num_actions())
            .all(|a| !sys.applicable(&state, a) || sys.apply(&state, a) == state);
        if stable {
            out.push(state.iter().map(|&x| x as usize).collect());
        }
        // Mixed-radix increment over 0..=count per stack.
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(out);
            }
            if (state[pos] as usize) < sys.counts[pos] {
                state[pos] += 1;
                break;
            }
            state[pos] = 0;
            pos += 1;
        }
    }
}

/// Destination of the acting member: (per-stack location counts, stack,
/// source location) -> new location.
pub(crate) type ActFn<'a> = dyn Fn(&[Vec<usize>], usize, usize) -> Option<usize> + 'a;

/// Membership bookkeeping shared by quotient witness individualization.
pub(crate) struct StackWorld {
    /// Expanded user ids per stack.
    pub members: Vec<Vec<usize>>,
    pub num_users: usize,
}

impl StackWorld {
    pub(crate) fn for_single(stacked: &StackedPopulation) -> Self {
        let mut members = Vec::with_capacity(stacked.stacks.len());
        let mut next = 0usize;
        for s in &stacked.stacks {
            members.push((next..next + s.count).collect());
            next += s.count;
        }
        StackWorld {
            members,
            num_users: next,
        }
    }
}

fn single_initial_locs(stacked: &StackedPopulation, sys: &QuotientSystem<'_>) -> Vec<usize> {
    let mut locs = Vec::with_capacity(stacked.total_users());
    for (k, s) in stacked.stacks.iter().enumerate() {
        for j in 0..s.count {
            let on = !sys.banned[k] && j < s.initial_on;
            locs.push(if on { ON } else { OFF });
        }
    }
    locs
}

/// Turn a quotient action walk into a concrete user-id schedule.
///
/// The member acting for (stack, side) is the least-recently-acted member of
/// that stack currently on that side. The cycle walk is repeated until the
/// flat configuration recurs with every user having acted in between; the
/// segment between the two equal configurations then replays exactly
/// periodically, which is what a scripted schedule needs.
pub(crate) fn individualize_witness(
    world: &StackWorld,
    num_locs: usize,
    initial_locs: Vec<usize>,
    act: &ActFn<'_>,
    prefix_q: &[(usize, usize)],
    cycle_q: &[(usize, usize)],
) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = world.num_users;
    let mut locs = initial_locs;
    let mut last_acted = vec![0u64; n];
    let mut clock = 0u64;

    let counts_of = |locs: &[usize]| -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0usize; num_locs]; world.members.len()];
        for (k, ms) in world.members.iter().enumerate() {
            for &u in ms {
                counts[k][locs[u]] += 1;
            }
        }
        counts
    };

    let run_one = |locs: &mut Vec<usize>,
                       last_acted: &mut Vec<u64>,
                       clock: &mut u64,
                       (k, side): (usize, usize)|
     -> Result<usize> {
        let u = world.members[k]
            .iter()
            .copied()
            .filter(|&u| locs[u] == side)
            .min_by_key(|&u| (last_acted[u], u))
            .ok_or_else(|| Error::precondition("witness tour scheduled an uninhabited side"))?;
        let counts = counts_of(locs);
        let dest = act(&counts, k, side)
            .ok_or_else(|| Error::precondition("witness tour scheduled an inapplicable action"))?;
        locs[u] = dest;
        *clock += 1;
        last_acted[u] = *clock;
        Ok(u)
    };

    let mut prefix_ids = Vec::with_capacity(prefix_q.len());
    for &qa in prefix_q {
        prefix_ids.push(run_one(&mut locs, &mut last_acted, &mut clock, qa)?);
    }

    if n == 0 {
        return Ok((prefix_ids, Vec::new()));
    }
    if cycle_q.is_empty() {
        // Anchor is stable: every member's action is a stay, in any order.
        return Ok((prefix_ids, (0..n).collect()));
    }

    let mut ids: Vec<usize> = Vec::new();
    let mut boundaries: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    const MAX_REPS: usize = 100_000;
    for _rep in 0..MAX_REPS {
        if let Some(positions) = boundaries.get(&locs) {
            for &p in positions {
                let segment = &ids[p..];
                let mut seen = vec![false; n];
                for &u in segment {
                    seen[u] = true;
                }
                if seen.iter().all(|&s| s) {
                    let mut pre = prefix_ids;
                    pre.extend_from_slice(&ids[..p]);
                    return Ok((pre, segment.to_vec()));
                }
            }
        }
        boundaries.entry(locs.clone()).or_default().push(ids.len());
        for &qa in cycle_q {
            ids.push(run_one(&mut locs, &mut last_acted, &mut clock, qa)?);
        }
    }
    Err(Error::precondition(
        "witness individualization did not close into a covering cycle",
    ))
}
