//! Single-platform switching dynamics.
//!
//! Users act one at a time in a schedule. The scheduled user's move is
//! mandatory and deterministic: willing means on the platform, not willing
//! means off; a move that changes nothing is a self-loop. Banned users are
//! force-removed. Policies are either a static window or a sequence of
//! event-triggered phases (the window advances once the platform contains a
//! target set).

use crate::error::{Error, Result};
use crate::fairgraph::{self, TransitionSystem};
use crate::model::{willing, Population, Window};
use crate::rational::Rational;
use crate::schedule::Schedule;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Condition for advancing from a policy phase to the next one, evaluated on
/// the current on-platform set before the scheduled user acts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AdvanceCondition {
    /// Advance once the on-platform set contains every listed user.
    Contains(BTreeSet<usize>),
    Always,
    Never,
}

impl AdvanceCondition {
    fn holds(&self, state: &BTreeSet<usize>) -> bool {
        match self {
            AdvanceCondition::Contains(target) => target.iter().all(|u| state.contains(u)),
            AdvanceCondition::Always => true,
            AdvanceCondition::Never => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolicySchedule {
    NoModeration,
    Static(Window),
    /// Nonempty list of phases; the last phase must carry `Never` so the
    /// final window persists.
    Phased(Vec<(Window, AdvanceCondition)>),
}

impl PolicySchedule {
    pub fn validate(&self) -> Result<()> {
        if let PolicySchedule::Phased(phases) = self {
            if phases.is_empty() {
                return Err(Error::precondition("phased policy needs at least one phase"));
            }
            if phases.last().unwrap().1 != AdvanceCondition::Never {
                return Err(Error::precondition(
                    "last phase must never advance (final window persists)",
                ));
            }
        }
        Ok(())
    }

    pub fn window_at(&self, phase: usize) -> Window {
        match self {
            PolicySchedule::NoModeration => Window::all(),
            PolicySchedule::Static(w) => *w,
            PolicySchedule::Phased(phases) => phases[phase.min(phases.len() - 1)].0,
        }
    }

    pub fn num_phases(&self) -> usize {
        match self {
            PolicySchedule::Phased(phases) => phases.len(),
            _ => 1,
        }
    }

    /// Advance as long as the current phase's condition holds on the state.
    fn advance(&self, mut phase: usize, state: &BTreeSet<usize>) -> usize {
        if let PolicySchedule::Phased(phases) = self {
            while phase + 1 < phases.len() && phases[phase].1.holds(state) {
                phase += 1;
            }
        }
        phase
    }
}

/// Ids of users whose speech the window permits.
pub fn eligible(pop: &Population, window: &Window) -> BTreeSet<usize> {
    pop.users
        .iter()
        .enumerate()
        .filter(|(_, u)| window.contains(u.speech))
        .map(|(i, _)| i)
        .collect()
}

/// One deterministic move: banned users are removed, on-platform users leave
/// exactly when unwilling, off-platform users join exactly when willing.
pub fn step(state: &BTreeSet<usize>, i: usize, window: &Window, pop: &Population) -> BTreeSet<usize> {
    let mut next = state.clone();
    if !window.contains(pop.users[i].speech) {
        next.remove(&i);
        return next;
    }
    if state.contains(&i) {
        if !willing(i, state, pop) {
            next.remove(&i);
        }
    } else if willing(i, state, pop) {
        next.insert(i);
    }
    next
}

/// Initial platform: adopters that survive the first window.
pub fn initial_state(pop: &Population, policy: &PolicySchedule) -> BTreeSet<usize> {
    let w = policy.window_at(0);
    pop.initial_adopters
        .iter()
        .copied()
        .filter(|&i| w.contains(pop.users[i].speech))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Join,
    Leave,
    Stay,
    Banned,
}

/// One scheduled move in a trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub t: u64,
    pub phase: usize,
    pub actor: usize,
    pub action: Action,
    pub state: BTreeSet<usize>,
}

/// A forced removal at a phase change (not a scheduled move).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eviction {
    pub t: u64,
    pub phase: usize,
    pub user: usize,
    /// Platform size right after this removal.
    pub size_after: usize,
}

/// A simulation record: scheduled moves plus forced removals at phase
/// changes, which are logged separately because they are not single moves.
#[derive(Clone, Debug, Default)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub evictions: Vec<Eviction>,
}

impl Trace {
    pub fn final_state(&self) -> BTreeSet<usize> {
        self.steps.last().map(|s| s.state.clone()).unwrap_or_default()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.state.len()).collect()
    }
}

/// Run the dynamics for `horizon` steps.
pub fn simulate(
    pop: &Population,
    policy: &PolicySchedule,
    schedule: &Schedule,
    horizon: u64,
) -> Result<Trace> {
    if horizon == 0 {
        return Err(Error::precondition("horizon must be at least 1"));
    }
    policy.validate()?;
    schedule.validate(pop.len())?;

    let mut trace = Trace::default();
    if pop.is_empty() {
        return Ok(trace);
    }

    let mut state = initial_state(pop, policy);
    let mut phase = 0usize;
    let mut actors = schedule.actors(pop.len());

    for t in 1..=horizon {
        let new_phase = policy.advance(phase, &state);
        if new_phase != phase {
            phase = new_phase;
            let w = policy.window_at(phase);
            let banned: Vec<usize> = state
                .iter()
                .copied()
                .filter(|&i| !w.contains(pop.users[i].speech))
                .collect();
            for i in banned {
                state.remove(&i);
                trace.evictions.push(Eviction {
                    t,
                    phase,
                    user: i,
                    size_after: state.len(),
                });
            }
        }
        let window = policy.window_at(phase);
        let i = actors.next().expect("nonempty population always schedules");
        let was_on = state.contains(&i);
        let next = step(&state, i, &window, pop);
        let is_on = next.contains(&i);
        let action = match (was_on, is_on) {
            _ if !window.contains(pop.users[i].speech) => Action::Banned,
            (false, true) => Action::Join,
            (true, false) => Action::Leave,
            _ => Action::Stay,
        };
        state = next;
        trace.steps.push(TraceStep {
            t,
            phase,
            actor: i,
            action,
            state: state.clone(),
        });
    }
    Ok(trace)
}

/// A stable arrangement: everyone on is willing to stay, every eligible
/// off-platform user would be unwilling to join.
pub fn is_stable(state: &BTreeSet<usize>, pop: &Population, window: &Window) -> bool {
    for &i in state.iter() {
        if !window.contains(pop.users[i].speech) || !willing(i, state, pop) {
            return false;
        }
    }
    for j in 0..pop.len() {
        if state.contains(&j) || !window.contains(pop.users[j].speech) {
            continue;
        }
        if willing(j, state, pop) {
            return false;
        }
    }
    true
}

/// Sum of on-platform utilities. Only meaningful (and only defined) when all
/// users share one disutility-derived threshold, where it acts as a potential
/// for the dynamics: joins never decrease it, leaves strictly increase it.
pub fn potential(state: &BTreeSet<usize>, pop: &Population) -> Result<Rational> {
    let mut weight: Option<(Rational, Rational)> = None;
    for u in &pop.users {
        match u.threshold {
            crate::model::ThresholdSpec::FromDisutility { b, lambda } => match weight {
                None => weight = Some((b, lambda)),
                Some((b0, l0)) => {
                    if b != b0 || lambda != l0 {
                        return Err(Error::precondition(
                            "potential requires homogeneous b and lambda",
                        ));
                    }
                }
            },
            _ => {
                return Err(Error::precondition(
                    "potential requires disutility-derived thresholds",
                ))
            }
        }
    }
    let mut total = Rational::zero();
    for &i in state {
        total += crate::model::utility(i, state, pop)?;
    }
    Ok(total)
}

/// Engine caps. The flat engine walks subsets of the eligible users, so its
/// cap is a user count; quotient and assignment engines cap explored states.
#[derive(Clone, Copy, Debug)]
pub struct EngineCaps {
    pub flat_max_eligible: usize,
    pub state_cap: usize,
}

impl Default for EngineCaps {
    fn default() -> Self {
        EngineCaps {
            flat_max_eligible: 15,
            state_cap: 1_000_000,
        }
    }
}

impl EngineCaps {
    /// Read `MODWIN_STATE_CAP` from the environment, if set, as the state cap.
    pub fn from_env() -> Self {
        let mut caps = EngineCaps::default();
        if let Ok(v) = std::env::var("MODWIN_STATE_CAP") {
            if let Ok(cap) = v.trim().parse::<usize>() {
                caps.state_cap = cap.max(1);
            }
        }
        caps
    }
}

/// The exact worst-case-over-fair-schedules limiting minimum platform size,
/// with a witness schedule attaining it.
#[derive(Clone, Debug, Serialize)]
pub struct FairLimitReport {
    pub min_size: usize,
    pub witness: Schedule,
    pub num_fair_closed_sccs: usize,
    /// Stable arrangements found among reachable states.
    pub equilibria: Vec<BTreeSet<usize>>,
    /// States (user-id sets) of all reachable fair-closed SCCs; every one of
    /// them is visited infinitely often by some fair schedule.
    #[serde(skip)]
    pub fair_states: Vec<BTreeSet<usize>>,
}

/// Flat transition system over subsets of the eligible universe, with the
/// policy phase folded into the state.
struct FlatSystem<'a> {
    pop: &'a Population,
    policy: &'a PolicySchedule,
    /// User ids eligible under at least one phase window.
    universe: Vec<usize>,
    /// compat_mask[u][v-bit] over universe positions: universe[v]'s speech in
    /// universe[u]'s interval.
    compat: Vec<u32>,
    /// theta as (numer, denom) per universe member.
    theta: Vec<(i128, i128)>,
    /// eligibility bitmap per phase.
    phase_eligible: Vec<u32>,
    /// advance targets as masks (None when the target mentions a user outside
    /// the universe, in which case the condition can never hold).
    advance: Vec<PhaseAdvance>,
}

#[derive(Clone, Copy)]
enum PhaseAdvance {
    Contains(u32),
    Unreachable,
    Always,
    Never,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct FlatState {
    phase: u8,
    mask: u32,
}

impl<'a> FlatSystem<'a> {
    fn new(pop: &'a Population, policy: &'a PolicySchedule, caps: &EngineCaps) -> Result<Self> {
        policy.validate()?;
        let phases = policy.num_phases();
        let mut in_universe = vec![false; pop.len()];
        for k in 0..phases {
            let w = policy.window_at(k);
            for (i, u) in pop.users.iter().enumerate() {
                if w.contains(u.speech) {
                    in_universe[i] = true;
                }
            }
        }
        let universe: Vec<usize> = (0..pop.len()).filter(|&i| in_universe[i]).collect();
        if universe.len() > caps.flat_max_eligible {
            return Err(Error::TooManyEligible {
                eligible: universe.len(),
                cap: caps.flat_max_eligible,
            });
        }

        let compat: Vec<u32> = universe
            .iter()
            .map(|&u| {
                let mut m = 0u32;
                for (vpos, &v) in universe.iter().enumerate() {
                    if crate::model::compatible(&pop.users[u], pop.users[v].speech) {
                        m |= 1 << vpos;
                    }
                }
                m
            })
            .collect();
        let theta: Vec<(i128, i128)> = universe
            .iter()
            .map(|&u| {
                let th = pop.users[u].theta();
                (th.numer(), th.denom())
            })
            .collect();
        let phase_eligible: Vec<u32> = (0..phases)
            .map(|k| {
                let w = policy.window_at(k);
                let mut m = 0u32;
                for (vpos, &v) in universe.iter().enumerate() {
                    if w.contains(pop.users[v].speech) {
                        m |= 1 << vpos;
                    }
                }
                m
            })
            .collect();
        let advance: Vec<PhaseAdvance> = match policy {
            PolicySchedule::Phased(list) => list
                .iter()
                .map(|(_, cond)| match cond {
                    AdvanceCondition::Always => PhaseAdvance::Always,
                    AdvanceCondition::Never => PhaseAdvance::Never,
                    AdvanceCondition::Contains(target) => {
                        let mut m = 0u32;
                        for t in target {
                            match universe.iter().position(|&u| u == *t) {
                                Some(pos) => m |= 1 << pos,
                                None => return PhaseAdvance::Unreachable,
                            }
                        }
                        PhaseAdvance::Contains(m)
                    }
                })
                .collect(),
            _ => vec![PhaseAdvance::Never],
        };

        Ok(FlatSystem {
            pop,
            policy,
            universe,
            compat,
            theta,
            phase_eligible,
            advance,
        })
    }

    fn advance_and_evict(&self, s: FlatState) -> FlatState {
        let mut phase = s.phase as usize;
        let phases = self.policy.num_phases();
        loop {
            if phase + 1 >= phases {
                break;
            }
            let go = match self.advance[phase] {
                PhaseAdvance::Always => true,
                PhaseAdvance::Never | PhaseAdvance::Unreachable => false,
                PhaseAdvance::Contains(m) => s.mask & m == m,
            };
            if !go {
                break;
            }
            phase += 1;
        }
        FlatState {
            phase: phase as u8,
            mask: s.mask & self.phase_eligible[phase],
        }
    }

    fn willing_pos(&self, pos: usize, mask: u32) -> bool {
        let others = mask & !(1 << pos);
        let total = others.count_ones() as i128;
        if total == 0 {
            return true;
        }
        let c = (self.compat[pos] & others).count_ones() as i128;
        let (num, den) = self.theta[pos];
        c * den >= num * total
    }

    fn to_user_set(&self, s: FlatState) -> BTreeSet<usize> {
        self.universe
            .iter()
            .enumerate()
            .filter(|(pos, _)| s.mask & (1 << pos) != 0)
            .map(|(_, &u)| u)
            .collect()
    }
}

impl TransitionSystem for FlatSystem<'_> {
    type State = FlatState;

    fn initial(&self) -> FlatState {
        let w0 = self.policy.window_at(0);
        let mut mask = 0u32;
        for (pos, &u) in self.universe.iter().enumerate() {
            if self.pop.initial_adopters.contains(&u) && w0.contains(self.pop.users[u].speech) {
                mask |= 1 << pos;
            }
        }
        FlatState { phase: 0, mask }
    }

    fn num_actions(&self) -> usize {
        // Only universe members can change the state; everyone else
        // self-loops and is appended to witness cycles afterwards.
        self.universe.len()
    }

    fn applicable(&self, _s: &FlatState, _a: usize) -> bool {
        true
    }

    fn apply(&self, s: &FlatState, a: usize) -> FlatState {
        let adv = self.advance_and_evict(*s);
        let bit = 1u32 << a;
        let mask = if self.phase_eligible[adv.phase as usize] & bit == 0 {
            adv.mask & !bit
        } else if adv.mask & bit != 0 {
            if self.willing_pos(a, adv.mask) {
                adv.mask
            } else {
                adv.mask & !bit
            }
        } else if self.willing_pos(a, adv.mask) {
            adv.mask | bit
        } else {
            adv.mask
        };
        FlatState {
            phase: adv.phase,
            mask,
        }
    }

    fn metric(&self, s: &FlatState) -> usize {
        s.mask.count_ones() as usize
    }
}

/// Exact fair-limit analysis of a static window.
pub fn fair_limit_min(pop: &Population, window: &Window) -> Result<FairLimitReport> {
    fair_limit_policy(pop, &PolicySchedule::Static(*window), &EngineCaps::default())
}

pub fn fair_limit_min_with(
    pop: &Population,
    window: &Window,
    caps: &EngineCaps,
) -> Result<FairLimitReport> {
    fair_limit_policy(pop, &PolicySchedule::Static(*window), caps)
}

/// Exact fair-limit analysis of any policy schedule (static or phased).
pub fn fair_limit_policy(
    pop: &Population,
    policy: &PolicySchedule,
    caps: &EngineCaps,
) -> Result<FairLimitReport> {
    if pop.is_empty() {
        return Ok(FairLimitReport {
            min_size: 0,
            witness: Schedule::Scripted {
                prefix: Vec::new(),
                cycle: Vec::new(),
            },
            num_fair_closed_sccs: 1,
            equilibria: vec![BTreeSet::new()],
            fair_states: vec![BTreeSet::new()],
        });
    }

    let sys = FlatSystem::new(pop, policy, caps)?;
    let g = fairgraph::explore(&sys, caps.state_cap)?;
    let analysis = fairgraph::analyze(&sys, &g);

    let anchor = analysis.min_state;
    let prefix_actions = fairgraph::action_path(&g, &analysis.scc_of, 0, anchor, None)
        .expect("anchor is reachable by construction");
    let mut cycle_actions = fairgraph::fair_tour(&sys, &g, &analysis.scc_of, anchor);
    if cycle_actions.is_empty() {
        // Stable anchor: cycling every universe member keeps it fixed.
        cycle_actions = (0..sys.universe.len()).collect();
    }

    let prefix: Vec<usize> = prefix_actions.iter().map(|&a| sys.universe[a]).collect();
    let mut cycle: Vec<usize> = cycle_actions.iter().map(|&a| sys.universe[a]).collect();
    // Users outside the universe never change the state; give them turns so
    // the cycle is starvation-free.
    let in_universe: BTreeSet<usize> = sys.universe.iter().copied().collect();
    for u in 0..pop.len() {
        if !in_universe.contains(&u) {
            cycle.push(u);
        }
    }

    let equilibria: Vec<BTreeSet<usize>> = analysis
        .stable_states
        .iter()
        .filter(|&&s| analysis.is_fair_closed(analysis.scc_of[s as usize]))
        .map(|&s| sys.to_user_set(g.states[s as usize]))
        .collect();
    let fair_states: Vec<BTreeSet<usize>> = analysis
        .fair_closed_states()
        .iter()
        .map(|&s| sys.to_user_set(g.states[s as usize]))
        .collect();

    Ok(FairLimitReport {
        min_size: analysis.min_metric,
        witness: Schedule::Scripted { prefix, cycle },
        num_fair_closed_sccs: analysis.fair_closed.len(),
        equilibria,
        fair_states,
    })
}
