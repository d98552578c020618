//! Generic fair-limit analysis over deterministic transition systems.
//!
//! The guaranteed community size under a policy is the minimum, over all
//! starvation-free schedules, of the limiting minimum platform size. For a
//! deterministic per-action transition graph that infinite quantifier has a
//! finite characterization: the set of states a fair run visits infinitely
//! often is strongly connected and must let every action fire without leaving
//! it. Call an SCC `C` *fair-closed* when for every action that is applicable
//! somewhere in `C` there is a state of `C` where firing it stays in `C`.
//! Then the fair limit equals the minimum state metric over all reachable
//! fair-closed SCCs, and a witness schedule is a path to the minimizing SCC
//! followed by a closed tour inside it that fires every action.
//!
//! Engines instantiate this with different state kinds: subsets of eligible
//! users (flat), per-stack counts (quotient), platform assignments (multi).

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::hash::Hash;

/// A deterministic transition system with finitely many actions per state.
///
/// `apply` must be total: for inapplicable actions it returns the state
/// unchanged (a self-loop), so fairness obligations stay well-defined.
pub trait TransitionSystem {
    type State: Clone + Eq + Hash;

    fn initial(&self) -> Self::State;
    fn num_actions(&self) -> usize;
    /// Whether the action can be scheduled at all in this state (for flat
    /// engines every action is always applicable; for quotient engines a
    /// stack side with no members is not).
    fn applicable(&self, s: &Self::State, action: usize) -> bool;
    fn apply(&self, s: &Self::State, action: usize) -> Self::State;
    /// The metric minimized over fair-closed SCCs (platform size).
    fn metric(&self, s: &Self::State) -> usize;
}

/// The reachable transition graph of a system, explored breadth-first.
pub struct Explored<S> {
    pub states: Vec<S>,
    pub index: HashMap<S, u32>,
    /// succ[state][action] = successor state id.
    pub succ: Vec<Vec<u32>>,
    pub num_actions: usize,
}

pub fn explore<T: TransitionSystem>(sys: &T, state_cap: usize) -> Result<Explored<T::State>> {
    let num_actions = sys.num_actions();
    let mut states = Vec::new();
    let mut index: HashMap<T::State, u32> = HashMap::new();
    let mut succ: Vec<Vec<u32>> = Vec::new();

    let init = sys.initial();
    index.insert(init.clone(), 0);
    states.push(init);

    let mut frontier = 0usize;
    while frontier < states.len() {
        let s = states[frontier].clone();
        let mut row = Vec::with_capacity(num_actions);
        for a in 0..num_actions {
            let t = sys.apply(&s, a);
            let id = match index.get(&t) {
                Some(&id) => id,
                None => {
                    let id = states.len() as u32;
                    if states.len() >= state_cap {
                        return Err(Error::StateCapExceeded { cap: state_cap });
                    }
                    index.insert(t.clone(), id);
                    states.push(t);
                    id
                }
            };
            row.push(id);
        }
        succ.push(row);
        frontier += 1;
    }

    Ok(Explored {
        states,
        index,
        succ,
        num_actions,
    })
}

/// Strongly connected components by iterative Tarjan; `scc_of[state]` gives
/// the component id.
pub fn sccs<S>(g: &Explored<S>) -> Vec<u32> {
    let n = g.states.len();
    let mut scc_of = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut disc = vec![u32::MAX; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut next_disc = 0u32;
    let mut next_scc = 0u32;

    // Explicit DFS stack: (node, next action index to expand).
    let mut dfs: Vec<(u32, usize)> = Vec::new();

    for start in 0..n as u32 {
        if disc[start as usize] != u32::MAX {
            continue;
        }
        dfs.push((start, 0));
        disc[start as usize] = next_disc;
        low[start as usize] = next_disc;
        next_disc += 1;
        stack.push(start);
        on_stack[start as usize] = true;

        while let Some(&(v, ai)) = dfs.last() {
            if ai < g.num_actions {
                dfs.last_mut().unwrap().1 += 1;
                let w = g.succ[v as usize][ai];
                if disc[w as usize] == u32::MAX {
                    disc[w as usize] = next_disc;
                    low[w as usize] = next_disc;
                    next_disc += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    dfs.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(disc[w as usize]);
                }
            } else {
                dfs.pop();
                if let Some(&(parent, _)) = dfs.last() {
                    low[parent as usize] = low[parent as usize].min(low[v as usize]);
                }
                if low[v as usize] == disc[v as usize] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w as usize] = false;
                        scc_of[w as usize] = next_scc;
                        if w == v {
                            break;
                        }
                    }
                    next_scc += 1;
                }
            }
        }
    }
    scc_of
}

/// Analysis of a single explored system: fair-closed SCCs, the minimizing
/// state, and stable (all-self-loop) states.
pub struct FairAnalysis {
    pub scc_of: Vec<u32>,
    pub num_sccs: usize,
    /// Component ids that are fair-closed.
    pub fair_closed: Vec<u32>,
    /// Minimum metric over states of reachable fair-closed SCCs, with the
    /// minimizing state id (deterministic: smallest state id among minima).
    pub min_metric: usize,
    pub min_state: u32,
    /// States where every applicable action self-loops.
    pub stable_states: Vec<u32>,
}

pub fn analyze<T: TransitionSystem>(sys: &T, g: &Explored<T::State>) -> FairAnalysis {
    let scc_of = sccs(g);
    let num_sccs = scc_of.iter().map(|&c| c as usize + 1).max().unwrap_or(0);

    // Group states by SCC.
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); num_sccs];
    for (s, &c) in scc_of.iter().enumerate() {
        members[c as usize].push(s as u32);
    }

    let mut fair_closed = Vec::new();
    let mut min_metric = usize::MAX;
    let mut min_state = 0u32;

    for (c, states) in members.iter().enumerate() {
        let c = c as u32;
        let mut ok = true;
        for a in 0..g.num_actions {
            let mut obligated = false;
            let mut satisfied = false;
            for &s in states {
                if sys.applicable(&g.states[s as usize], a) {
                    obligated = true;
                    if scc_of[g.succ[s as usize][a] as usize] == c {
                        satisfied = true;
                        break;
                    }
                }
            }
            if obligated && !satisfied {
                ok = false;
                break;
            }
        }
        if ok {
            fair_closed.push(c);
            for &s in states {
                let m = sys.metric(&g.states[s as usize]);
                if m < min_metric || (m == min_metric && s < min_state) {
                    min_metric = m;
                    min_state = s;
                }
            }
        }
    }

    let mut stable_states = Vec::new();
    for s in 0..g.states.len() as u32 {
        let all_self = (0..g.num_actions).all(|a| {
            !sys.applicable(&g.states[s as usize], a) || g.succ[s as usize][a] == s
        });
        if all_self {
            stable_states.push(s);
        }
    }

    FairAnalysis {
        scc_of,
        num_sccs,
        fair_closed,
        min_metric,
        min_state,
        stable_states,
    }
}

impl FairAnalysis {
    pub fn is_fair_closed(&self, scc: u32) -> bool {
        self.fair_closed.contains(&scc)
    }

    /// All state ids belonging to reachable fair-closed SCCs.
    pub fn fair_closed_states(&self) -> Vec<u32> {
        (0..self.scc_of.len() as u32)
            .filter(|&s| self.is_fair_closed(self.scc_of[s as usize]))
            .collect()
    }
}

/// BFS action path from `from` to `to`, optionally restricted to one SCC.
/// Paths between states of an SCC never leave it, so the restriction is
/// sound for tours.
pub fn action_path<S>(
    g: &Explored<S>,
    scc_of: &[u32],
    from: u32,
    to: u32,
    within: Option<u32>,
) -> Option<Vec<usize>> {
    if from == to {
        return Some(Vec::new());
    }
    let n = g.states.len();
    let mut prev: Vec<Option<(u32, usize)>> = vec![None; n];
    let mut queue = std::collections::VecDeque::new();
    let mut seen = vec![false; n];
    seen[from as usize] = true;
    queue.push_back(from);
    while let Some(v) = queue.pop_front() {
        for a in 0..g.num_actions {
            let w = g.succ[v as usize][a];
            if let Some(c) = within {
                if scc_of[w as usize] != c {
                    continue;
                }
            }
            if !seen[w as usize] {
                seen[w as usize] = true;
                prev[w as usize] = Some((v, a));
                if w == to {
                    let mut path = Vec::new();
                    let mut cur = to;
                    while cur != from {
                        let (p, a) = prev[cur as usize].unwrap();
                        path.push(a);
                        cur = p;
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(w);
            }
        }
    }
    None
}

/// A closed tour of actions anchored at `anchor` inside the fair-closed SCC
/// containing it. The tour fires, for every action with an obligation in the
/// SCC, one transition that stays inside, then returns to the anchor. Actions
/// never applicable in the SCC are skipped.
pub fn fair_tour<T: TransitionSystem>(
    sys: &T,
    g: &Explored<T::State>,
    scc_of: &[u32],
    anchor: u32,
) -> Vec<usize> {
    let c = scc_of[anchor as usize];
    let states_in_c: Vec<u32> = (0..g.states.len() as u32)
        .filter(|&s| scc_of[s as usize] == c)
        .collect();

    let mut tour = Vec::new();
    let mut cur = anchor;
    for a in 0..g.num_actions {
        // Find a state of C where action a fires and stays in C.
        let target = states_in_c.iter().copied().find(|&s| {
            sys.applicable(&g.states[s as usize], a) && scc_of[g.succ[s as usize][a] as usize] == c
        });
        let Some(q) = target else { continue };
        let path =
            action_path(g, scc_of, cur, q, Some(c)).expect("SCC states must be mutually reachable");
        tour.extend(path);
        tour.push(a);
        cur = g.succ[q as usize][a];
    }
    let back =
        action_path(g, scc_of, cur, anchor, Some(c)).expect("SCC states must be mutually reachable");
    tour.extend(back);
    tour
}
