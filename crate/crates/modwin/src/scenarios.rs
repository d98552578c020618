//! Parameterized generators for the worked constructions used by tests and
//! the CLI. Generators are pure: equal parameters (and seeds) give identical
//! outputs, and every generated population validates.

use crate::competition::{
    CompetitionStack, CompetitionUser, LambdaSpec, PlatformSpec, StackedCompetitionConfig,
};
use crate::error::{Error, Result};
use crate::model::{
    Population, Stack, StackedPopulation, ThresholdSpec, UserPrefs, Window,
};
use crate::policy::IdeologicalPlatform;
use crate::rational::Rational;
use crate::schedule::{Schedule, SimRng};
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScenarioSpec {
    /// The five-user population with threshold 1: intervals
    /// [2,6],[2,5],[1,5],[2,6],[2,3], speech 4,5,2,6,3.
    FiveUser,
    /// n-1 identical users plus one wide-interval user whose speech sits
    /// outside everyone else's interval.
    Trolls { n: usize, theta: Rational },
    /// Four quarters at positions 1..4 with threshold 1/5; the leftmost
    /// quarter tolerates everything, each other quarter tolerates itself and
    /// its left neighbor.
    Ideological { n: usize },
    /// Four groups where better personalization admits a destabilizing group.
    PersonalizationGap {
        b: Rational,
        lambda: Rational,
        lambda_prime: Rational,
    },
    /// A large platform vulnerable to an unmoderated entrant.
    Insurgency { n: usize, epsilon: Rational },
    /// A central mass making the incumbent invulnerable: m central users,
    /// u wide-interval singletons on each side.
    Incumbency { m: usize, u: usize },
    /// Three stacks (20%/45%/35%) at threshold 2/3 with no equilibrium.
    CyclingSingle { n: usize },
    /// Four stacks across two platforms that cycle under both bandwidth
    /// regimes (threshold 7/9, b = 7/2).
    CyclingMulti { n: usize },
    /// The canonical shock-robust family: speech i, the first
    /// ceil(theta*(n-1)) users cover [1, ceil(theta*(n-1))+1], the rest
    /// slide; everyone starts on.
    RobustFamily { n: usize, theta: Rational },
    /// Nine users at threshold 1/2 where one departure empties the platform.
    AdversariesExample,
    /// Peripheral one-directional stacks around two covering core stacks;
    /// no window beats (2*theta - 1)*n + 2.
    ThetaUpperBound { theta: Rational, n: usize },
    /// Random population with shared left endpoint 0 and equal threshold;
    /// speech points are distinct.
    OneSidedRandom { n: usize, theta: Rational, seed: u64 },
    /// Random equal-radius population (all compatibilities mutual) with
    /// homogeneous disutility.
    MutualRandom {
        n: usize,
        b: Rational,
        lambda: Rational,
        seed: u64,
    },
}

#[derive(Clone, Debug)]
pub enum Generated {
    Flat(Population),
    Stacked(StackedPopulation),
    Competition(StackedCompetitionConfig),
}

fn r(n: i128) -> Rational {
    Rational::int(n)
}

fn direct(theta: Rational) -> ThresholdSpec {
    ThresholdSpec::Direct(theta)
}

fn user(l: Rational, p: Rational, rr: Rational, t: ThresholdSpec) -> UserPrefs {
    UserPrefs::new(l, p, rr, t)
}

/// Whole number of `x * n`, or an error naming the divisibility requirement.
fn integral_share(x: Rational, n: usize, what: &str) -> Result<usize> {
    let v = x * Rational::from(n);
    if !v.is_integer() || v.is_negative() {
        return Err(Error::infeasible(format!(
            "{what}: {x} of n = {n} is not a nonnegative integer"
        )));
    }
    Ok(v.numer() as usize)
}

pub fn generate(spec: &ScenarioSpec) -> Result<Generated> {
    let out = match spec {
        ScenarioSpec::FiveUser => Generated::Flat(five_user()),
        ScenarioSpec::Trolls { n, theta } => Generated::Stacked(trolls(*n, *theta)?),
        ScenarioSpec::Ideological { n } => Generated::Stacked(ideological(*n)?),
        ScenarioSpec::PersonalizationGap {
            b,
            lambda,
            lambda_prime,
        } => Generated::Stacked(personalization_gap(*b, *lambda, *lambda_prime)?.0),
        ScenarioSpec::Insurgency { n, epsilon } => {
            Generated::Competition(insurgency(*n, *epsilon)?)
        }
        ScenarioSpec::Incumbency { m, u } => {
            Generated::Competition(incumbency(*m, *u, Window::all(), Window::all(), None)?)
        }
        ScenarioSpec::CyclingSingle { n } => Generated::Stacked(cycling_single(*n)?),
        ScenarioSpec::CyclingMulti { n } => Generated::Competition(cycling_multi(*n, None)?),
        ScenarioSpec::RobustFamily { n, theta } => Generated::Flat(robust_family(*n, *theta)?),
        ScenarioSpec::AdversariesExample => Generated::Flat(adversaries_example()),
        ScenarioSpec::ThetaUpperBound { theta, n } => {
            Generated::Stacked(theta_upper_bound(*theta, *n)?)
        }
        ScenarioSpec::OneSidedRandom { n, theta, seed } => {
            Generated::Flat(one_sided_random(*n, *theta, *seed)?)
        }
        ScenarioSpec::MutualRandom {
            n,
            b,
            lambda,
            seed,
        } => Generated::Flat(mutual_random(*n, *b, *lambda, *seed)),
    };
    // Every generator output validates.
    match &out {
        Generated::Flat(p) => {
            let v = p.validate();
            assert!(v.is_empty(), "generator produced invalid population: {v:?}");
        }
        Generated::Stacked(sp) => {
            let v = sp.validate();
            assert!(v.is_empty(), "generator produced invalid stacks: {v:?}");
        }
        Generated::Competition(c) => {
            c.validate()?;
        }
    }
    Ok(out)
}

pub fn five_user() -> Population {
    let t = direct(Rational::one());
    Population::new(
        vec![
            user(r(2), r(4), r(6), t),
            user(r(2), r(5), r(5), t),
            user(r(1), r(2), r(5), t),
            user(r(2), r(6), r(6), t),
            user(r(2), r(3), r(3), t),
        ],
        [],
    )
}

pub fn trolls(n: usize, theta: Rational) -> Result<StackedPopulation> {
    if n < 2 {
        return Err(Error::infeasible("troll construction needs n >= 2"));
    }
    if !theta.is_positive() || theta > Rational::one() {
        return Err(Error::infeasible("troll construction needs theta in (0, 1]"));
    }
    Ok(StackedPopulation {
        stacks: vec![
            Stack::new(user(r(1), r(2), r(3), direct(theta)), n - 1, 0),
            // Tolerates everything, tolerated by no one.
            Stack::new(user(r(0), r(4), r(5), direct(theta)), 1, 0),
        ],
    })
}

pub fn ideological(n: usize) -> Result<StackedPopulation> {
    if n == 0 || !n.is_multiple_of(4) {
        return Err(Error::infeasible(
            "ideological construction needs n divisible by 4",
        ));
    }
    let q = n / 4;
    let th = direct(Rational::new(1, 5));
    Ok(StackedPopulation {
        stacks: vec![
            Stack::new(user(r(1), r(1), r(4), th), q, 0),
            Stack::new(user(r(1), r(2), r(2), th), q, 0),
            Stack::new(user(r(2), r(3), r(3), th), q, 0),
            Stack::new(user(r(3), r(4), r(4), th), q, 0),
        ],
    })
}

/// The platform preferences paired with the ideological population: positive
/// utility on [2,4], disutility d elsewhere.
pub fn ideological_platform(d: Rational) -> Result<IdeologicalPlatform> {
    IdeologicalPlatform::new(Window::closed(r(2), r(4)), d)
}

fn theta_of(b: Rational, lambda: Rational) -> Rational {
    let lb = lambda * b;
    lb / (Rational::one() + lb)
}

/// Search the smallest instance where the less-personalized population keeps
/// a large stable platform while the better-personalized one cannot. Returns
/// (population under lambda, population under lambda_prime).
pub fn personalization_gap(
    b: Rational,
    lambda: Rational,
    lambda_prime: Rational,
) -> Result<(StackedPopulation, StackedPopulation)> {
    if !b.is_positive() {
        return Err(Error::infeasible("b must be positive"));
    }
    if lambda_prime >= lambda || !lambda_prime.is_positive() || lambda > Rational::one() {
        return Err(Error::infeasible(
            "need 0 < lambda_prime < lambda <= 1 (strictly better personalization)",
        ));
    }
    let theta = theta_of(b, lambda);
    let theta_p = theta_of(b, lambda_prime);
    let beta = theta_p / theta;

    for n0 in 4..=600usize {
        let m = Rational::from(n0 - 1);
        // t2 strictly between max{(2 theta - 1) n0 + 1, beta theta (n0-1)}
        // and theta (n0-1).
        let lo2 = ((Rational::int(2) * theta - Rational::one()) * Rational::from(n0)
            + Rational::one())
        .max(beta * theta * m);
        let hi2 = theta * m;
        let Some(t2) = smallest_integer_strictly_between(lo2, hi2) else {
            continue;
        };
        let need = (theta * m).ceil_int() as usize + 1;
        if t2 >= need {
            continue;
        }
        let t1 = need - t2;
        let t4 = ((Rational::one() - theta) * m).floor_int() as usize;
        if t1 == 0 || t4 == 0 || t1 + t2 + t4 != n0 {
            continue;
        }
        // t3 strictly between ((1-beta) ceil(theta n0) + 1)/(beta theta) and
        // floor((1-theta)(n0-1)).
        let lo3 = ((Rational::one() - beta) * Rational::int((theta * Rational::from(n0)).ceil_int())
            + Rational::one())
            / (beta * theta);
        let hi3 = Rational::from(t4);
        let Some(t3) = smallest_integer_strictly_between(lo3, hi3) else {
            continue;
        };

        let build = |lam: Rational| -> StackedPopulation {
            let th = ThresholdSpec::FromDisutility { b, lambda: lam };
            StackedPopulation {
                stacks: vec![
                    Stack::new(user(r(1), r(1), r(2), th), t1, t1),
                    Stack::new(user(r(1), r(2), r(2), th), t2, t2),
                    Stack::new(user(r(2), r(3), r(3), th), t3, 0),
                    Stack::new(user(r(2), r(4), r(4), th), t4, t4),
                ],
            }
        };
        let base = build(lambda);
        let improved = build(lambda_prime);

        // Semantic checks, named after the inequality they verify.
        let n0r = Rational::from(n0);
        let compat_core = Rational::int((theta * m).ceil_int());
        if !(compat_core / m >= theta) {
            return Err(Error::infeasible("seed-compatibility: ceil(theta(n0-1))/(n0-1) >= theta"));
        }
        if !(Rational::from(t2) / n0r < theta) {
            return Err(Error::infeasible("blocked-under-base: t2/n0 < theta"));
        }
        if !(Rational::from(t2) / n0r >= theta_p) {
            return Err(Error::infeasible("joins-under-improved: t2/n0 >= theta_prime"));
        }
        let after = m + Rational::from(t3);
        if !(compat_core / after < theta_p) {
            return Err(Error::infeasible(
                "cascade-under-improved: ceil(theta(n0-1))/(n0-1+t3) < theta_prime",
            ));
        }
        return Ok((base, improved));
    }
    Err(Error::infeasible(
        "no feasible group sizes up to n0 = 600; bring lambda_prime closer to lambda",
    ))
}

fn smallest_integer_strictly_between(lo: Rational, hi: Rational) -> Option<usize> {
    let mut k = lo.floor_int() + 1;
    if Rational::int(k) <= lo {
        k += 1;
    }
    if Rational::int(k) < hi && k > 0 {
        Some(k as usize)
    } else {
        None
    }
}

pub fn insurgency(n: usize, epsilon: Rational) -> Result<StackedCompetitionConfig> {
    if !epsilon.is_positive() || epsilon >= Rational::new(1, 2) {
        return Err(Error::infeasible("insurgency needs 0 < epsilon < 1/2"));
    }
    let t1 = integral_share(epsilon, n, "left-margin share epsilon*n")?;
    let t2 = integral_share(Rational::new(1, 2) - epsilon, n, "(1/2 - epsilon)*n")?;
    let t3 = integral_share(
        (Rational::one() - epsilon) / Rational::int(2),
        n,
        "(1 - epsilon)*n/2",
    )?;
    let t4 = integral_share(epsilon / Rational::int(2), n, "epsilon*n/2")?;
    if t1 + t2 + t3 + t4 != n || t1 == 0 || t4 == 0 {
        return Err(Error::infeasible("insurgency shares must be positive and sum to n"));
    }
    // Threshold 1/2 via b = 1, lambda = 1; bandwidth 1 (proportion regime).
    let th = ThresholdSpec::FromDisutility {
        b: Rational::one(),
        lambda: Rational::one(),
    };
    let cu = |l: i128, p: i128, rr: i128| CompetitionUser {
        prefs: user(r(l), r(p), r(rr), th),
        bandwidth: Some(Rational::one()),
    };
    Ok(StackedCompetitionConfig {
        stacks: vec![
            CompetitionStack {
                user: cu(1, 1, 2),
                count: t1,
                initial_platform: Some(0),
            },
            CompetitionStack {
                user: cu(2, 2, 4),
                count: t2,
                initial_platform: Some(0),
            },
            CompetitionStack {
                user: cu(2, 3, 4),
                count: t3,
                initial_platform: Some(0),
            },
            CompetitionStack {
                user: cu(1, 4, 4),
                count: t4,
                initial_platform: None,
            },
        ],
        platforms: vec![
            PlatformSpec {
                window: Window::closed(r(1), r(3)),
                lambda: LambdaSpec::Uniform(Rational::one()),
            },
            PlatformSpec {
                window: Window::all(),
                lambda: LambdaSpec::Uniform(Rational::one()),
            },
        ],
        normalized: true,
    })
}

/// The incumbency population under the given windows: wide singletons at
/// positions 1..u and u+2..2u+1, an m-stack at u+1 tolerating only itself,
/// threshold (m-1)/(m+2u-1). Users start on platform 0 when eligible; users
/// banned there seed platform 1 when it admits them.
pub fn incumbency(
    m: usize,
    u: usize,
    w1: Window,
    w2: Window,
    gamma: Option<Rational>,
) -> Result<StackedCompetitionConfig> {
    if m < 2 || u == 0 {
        return Err(Error::infeasible("incumbency needs m >= 2 and u >= 1"));
    }
    // theta = (m-1)/(m+2u-1) comes from b = (m-1)/(2u), lambda = 1.
    let b = Rational::new(m as i128 - 1, 2 * u as i128);
    let th = ThresholdSpec::FromDisutility {
        b,
        lambda: Rational::one(),
    };
    let span = 2 * u + 1;
    let mut stacks = Vec::new();
    let mut push = |p: usize, count: usize, own_only: bool| {
        let prefs = if own_only {
            user(r(p as i128), r(p as i128), r(p as i128), th)
        } else {
            user(r(1), r(p as i128), r(span as i128), th)
        };
        let initial = if w1.contains(prefs.speech) {
            Some(0)
        } else if w2.contains(prefs.speech) {
            Some(1)
        } else {
            None
        };
        stacks.push(CompetitionStack {
            user: CompetitionUser {
                prefs,
                bandwidth: gamma,
            },
            count,
            initial_platform: initial,
        });
    };
    for p in 1..=u {
        push(p, 1, false);
    }
    push(u + 1, m, true);
    for p in (u + 2)..=span {
        push(p, 1, false);
    }
    Ok(StackedCompetitionConfig {
        stacks,
        platforms: vec![
            PlatformSpec {
                window: w1,
                lambda: LambdaSpec::Uniform(Rational::one()),
            },
            PlatformSpec {
                window: w2,
                lambda: LambdaSpec::Uniform(Rational::one()),
            },
        ],
        normalized: true,
    })
}

pub fn cycling_single(n: usize) -> Result<StackedPopulation> {
    if n == 0 || !n.is_multiple_of(20) {
        return Err(Error::infeasible(
            "cycling construction needs n divisible by 20",
        ));
    }
    // Threshold 2/3 via b = 2, lambda = 1.
    let th = ThresholdSpec::FromDisutility {
        b: r(2),
        lambda: Rational::one(),
    };
    Ok(StackedPopulation {
        stacks: vec![
            Stack::new(user(r(2), r(2), r(4), th), n / 5, 0),
            Stack::new(user(r(2), r(3), r(3), th), 9 * n / 20, 0),
            Stack::new(user(r(3), r(4), r(4), th), 7 * n / 20, 0),
        ],
    })
}

/// Bandwidth None means unbounded (the plain-utility regime); pass 1 for the
/// proportion regime.
pub fn cycling_multi(n: usize, gamma: Option<Rational>) -> Result<StackedCompetitionConfig> {
    if n == 0 || !n.is_multiple_of(10) {
        return Err(Error::infeasible(
            "two-platform cycling needs n divisible by 10",
        ));
    }
    // Threshold 7/9 via b = 7/2, lambda = 1.
    let th = ThresholdSpec::FromDisutility {
        b: Rational::new(7, 2),
        lambda: Rational::one(),
    };
    let cu = |l: i128, p: i128, rr: i128| CompetitionUser {
        prefs: user(r(l), r(p), r(rr), th),
        bandwidth: gamma,
    };
    Ok(StackedCompetitionConfig {
        stacks: vec![
            CompetitionStack {
                user: cu(1, 1, 4),
                count: n / 10,
                initial_platform: Some(0),
            },
            CompetitionStack {
                user: cu(1, 2, 2),
                count: 6 * n / 10,
                initial_platform: Some(0),
            },
            CompetitionStack {
                user: cu(2, 3, 3),
                count: 2 * n / 10,
                initial_platform: Some(0),
            },
            CompetitionStack {
                user: cu(1, 1, 4),
                count: n / 10,
                initial_platform: Some(1),
            },
        ],
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
        normalized: true,
    })
}

pub fn robust_family(n: usize, theta: Rational) -> Result<Population> {
    if n < 2 {
        return Err(Error::infeasible("robust family needs n >= 2"));
    }
    if !theta.is_positive() || theta >= Rational::one() {
        return Err(Error::infeasible("robust family needs theta in (0, 1)"));
    }
    let h = (theta * Rational::from(n - 1)).ceil_int();
    let mut users = Vec::with_capacity(n);
    for i in 1..=(n as i128) {
        let prefs = if i <= h {
            user(r(1), r(i), r(h + 1), direct(theta))
        } else {
            user(r(i - h), r(i), r(i), direct(theta))
        };
        users.push(prefs);
    }
    Ok(Population::new(users, 0..n))
}

pub fn adversaries_example() -> Population {
    let th = direct(Rational::new(1, 2));
    let mut users = Vec::new();
    for i in 1..=4i128 {
        users.push(user(r(1), r(i), r(5), th));
    }
    for i in 5..=9i128 {
        users.push(user(r(i - 4), r(i), r(i), th));
    }
    Population::new(users, 0..9)
}

pub fn theta_upper_bound(theta: Rational, n: usize) -> Result<StackedPopulation> {
    if theta <= Rational::new(1, 2) || theta >= Rational::one() {
        return Err(Error::infeasible("construction needs 1/2 < theta < 1"));
    }
    let nn = Rational::from(n);
    let core_share = (theta - Rational::new(1, 2)) * nn;
    if !core_share.is_integer() || !core_share.is_positive() {
        return Err(Error::infeasible(
            "(theta - 1/2) * n must be a positive integer",
        ));
    }
    let periph_total = Rational::int(2) * ((Rational::one() - theta) * nn - Rational::one());
    if !periph_total.is_integer() || !periph_total.is_positive() {
        return Err(Error::infeasible(
            "2((1 - theta) n - 1) must be a positive integer",
        ));
    }
    let t = periph_total.numer() as usize;
    let half_k =
        (((Rational::one() - theta) * nn - Rational::one()) / core_share).ceil_int() as usize;
    let k = 2 * half_k.max(1);
    let q_hi = t.div_ceil(k);
    let deficit = k * q_hi - t;

    let core = core_share.numer() as usize + 1;
    let span = k + 2;
    let mut stacks = Vec::new();
    // Leftmost stacks absorb the deficit.
    for j in 1..=(k / 2) {
        let size = if j <= deficit { q_hi - 1 } else { q_hi };
        if size == 0 {
            return Err(Error::infeasible("n too small: empty peripheral stack"));
        }
        stacks.push(Stack::new(
            user(r(j as i128), r(j as i128), r(span as i128), direct(theta)),
            size,
            0,
        ));
    }
    stacks.push(Stack::new(
        user(
            r((k / 2 + 1) as i128),
            r((k / 2 + 1) as i128),
            r(span as i128),
            direct(theta),
        ),
        core,
        0,
    ));
    stacks.push(Stack::new(
        user(r(1), r((k / 2 + 2) as i128), r((k / 2 + 2) as i128), direct(theta)),
        core,
        0,
    ));
    for j in (k / 2 + 3)..=span {
        let idx = j - 2; // peripheral stack index k/2+1..k
        let size = if idx <= deficit { q_hi - 1 } else { q_hi };
        if size == 0 {
            return Err(Error::infeasible("n too small: empty peripheral stack"));
        }
        stacks.push(Stack::new(
            user(r(1), r(j as i128), r(j as i128), direct(theta)),
            size,
            0,
        ));
    }
    // Peripheral stacks must not outweigh the cores in either direction,
    // otherwise extremes could not block the middle.
    let q_lo = if deficit > 0 { q_hi - 1 } else { q_hi };
    let ratio = (Rational::one() - theta) / theta;
    if !(ratio * Rational::from(core) < Rational::from(q_lo)) {
        return Err(Error::infeasible(
            "n too small: (1-theta)/theta * core >= smallest peripheral stack",
        ));
    }
    if !(Rational::from(q_hi) < ratio.recip() * Rational::from(core)) {
        return Err(Error::infeasible(
            "n too small: largest peripheral stack >= theta/(1-theta) * core",
        ));
    }
    let total: usize = stacks.iter().map(|s| s.count).sum();
    assert_eq!(total, n, "stack sizes must add up to n");
    Ok(StackedPopulation { stacks })
}

pub fn one_sided_random(n: usize, theta: Rational, seed: u64) -> Result<Population> {
    if n == 0 {
        return Err(Error::infeasible("need n >= 1"));
    }
    if theta < Rational::zero() || theta > Rational::one() {
        return Err(Error::infeasible("theta must lie in [0, 1]"));
    }
    let mut rng = SimRng::new(seed ^ 0x9a0b);
    // Distinct speech points keep the two-phase window construction sharp:
    // no stragglers share the cut positions.
    let grid = 3 * n.max(2);
    let picks = rng.sample_without_replacement(grid, n);
    let users = picks
        .iter()
        .map(|&v| {
            let p = (v + 1) as i128;
            let ext = rng.pick(2 * n + 1) as i128;
            user(r(0), r(p), r(p + ext), direct(theta))
        })
        .collect();
    Ok(Population::new(users, []))
}

pub fn mutual_random(n: usize, b: Rational, lambda: Rational, seed: u64) -> Population {
    let mut rng = SimRng::new(seed ^ 0x5d1);
    let radius = 1 + rng.pick(3) as i128;
    let th = ThresholdSpec::FromDisutility { b, lambda };
    let mut users = Vec::with_capacity(n);
    let mut adopters = BTreeSet::new();
    for i in 0..n {
        let p = rng.pick(2 * n.max(1)) as i128;
        users.push(user(r(p - radius), r(p), r(p + radius), th));
        if rng.next_u64().is_multiple_of(2) {
            adopters.insert(i);
        }
    }
    Population {
        users,
        initial_adopters: adopters,
    }
}

/// Cyclic schedule that gives each stack's members consecutive turns, in the
/// given stack order (repeating stacks allowed).
pub fn block_schedule_for_stacks(counts: &[usize], stack_order: &[usize]) -> Schedule {
    let mut starts = Vec::with_capacity(counts.len());
    let mut acc = 0usize;
    for &c in counts {
        starts.push(acc);
        acc += c;
    }
    let mut seq = Vec::new();
    for &k in stack_order {
        seq.extend(starts[k]..starts[k] + counts[k]);
    }
    Schedule::Cyclic(seq)
}
