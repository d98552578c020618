//! Domain types and the utility/compatibility primitives.
//!
//! A population is a list of potential users on a one-dimensional content
//! axis. Each user produces content at a single speech point and consumes
//! content from a closed interval around it. A user is willing to be on the
//! platform exactly when the fraction of on-platform speech (excluding their
//! own) that falls inside their interval is at least their participation
//! threshold; equality counts as willing.

use crate::error::{Error, Result};
use crate::rational::Rational;
use std::collections::BTreeSet;
use std::fmt;

/// Participation threshold, either given directly or derived from the
/// per-item disutility `b` and the personalization rate `lambda` as
/// `lambda*b / (1 + lambda*b)`.
///
/// A threshold of exactly 1 is representable only in direct form; raw
/// utilities are undefined there because the implied disutility is unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ThresholdSpec {
    Direct(Rational),
    FromDisutility { b: Rational, lambda: Rational },
}

impl ThresholdSpec {
    /// The threshold value in [0, 1].
    pub fn value(&self) -> Rational {
        match *self {
            ThresholdSpec::Direct(theta) => theta,
            ThresholdSpec::FromDisutility { b, lambda } => {
                let lb = lambda * b;
                lb / (Rational::one() + lb)
            }
        }
    }

    /// The disutility weight `lambda*b` applied to each incompatible item,
    /// when raw utilities are defined. For a direct threshold `theta < 1`
    /// this is the implied weight `theta / (1 - theta)`.
    pub fn disutility_weight(&self) -> Result<Rational> {
        match *self {
            ThresholdSpec::FromDisutility { b, lambda } => Ok(lambda * b),
            ThresholdSpec::Direct(theta) => {
                if theta >= Rational::one() {
                    Err(Error::precondition(
                        "raw utility undefined at threshold 1 (unbounded disutility); use willingness instead",
                    ))
                } else {
                    Ok(theta / (Rational::one() - theta))
                }
            }
        }
    }
}

/// One potential user: consumption interval, speech point, threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UserPrefs {
    pub left: Rational,
    pub right: Rational,
    pub speech: Rational,
    pub threshold: ThresholdSpec,
}

impl UserPrefs {
    pub fn new(left: Rational, speech: Rational, right: Rational, threshold: ThresholdSpec) -> Self {
        UserPrefs {
            left,
            right,
            speech,
            threshold,
        }
    }

    pub fn theta(&self) -> Rational {
        self.threshold.value()
    }
}

/// Closed-interval membership: does `point` fall inside the viewer's
/// consumption interval? Both endpoints are included.
pub fn compatible(viewer: &UserPrefs, point: Rational) -> bool {
    viewer.left <= point && point <= viewer.right
}

/// A moderation window: a closed interval of permitted speech, possibly
/// unbounded on either side, or empty (ban everything).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum Window {
    Empty,
    Span {
        /// None means unbounded below.
        lo: Option<Rational>,
        /// None means unbounded above.
        hi: Option<Rational>,
    },
}

impl Window {
    pub fn all() -> Self {
        Window::Span { lo: None, hi: None }
    }

    pub fn closed(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "window with lo > hi");
        Window::Span {
            lo: Some(lo),
            hi: Some(hi),
        }
    }

    pub fn try_closed(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::precondition("window lower bound exceeds upper bound"));
        }
        Ok(Window::closed(lo, hi))
    }

    pub fn at_least(lo: Rational) -> Self {
        Window::Span {
            lo: Some(lo),
            hi: None,
        }
    }

    pub fn at_most(hi: Rational) -> Self {
        Window::Span {
            lo: None,
            hi: Some(hi),
        }
    }

    pub fn contains(&self, p: Rational) -> bool {
        match self {
            Window::Empty => false,
            Window::Span { lo, hi } => {
                lo.is_none_or(|l| l <= p) && hi.is_none_or(|h| p <= h)
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Window::Empty)
    }
}

impl fmt::Debug for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::Empty => write!(f, "(empty)"),
            Window::Span { lo, hi } => {
                match lo {
                    Some(l) => write!(f, "[{l}, ")?,
                    None => write!(f, "(-inf, ")?,
                }
                match hi {
                    Some(h) => write!(f, "{h}]"),
                    None => write!(f, "+inf)"),
                }
            }
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A population: users indexed 0..n-1, plus the initial adopters already on
/// the platform when a policy takes effect.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Population {
    pub users: Vec<UserPrefs>,
    pub initial_adopters: BTreeSet<usize>,
}

impl Population {
    pub fn new(users: Vec<UserPrefs>, initial_adopters: impl IntoIterator<Item = usize>) -> Self {
        Population {
            users,
            initial_adopters: initial_adopters.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    /// Check every structural invariant, reporting all violations instead of
    /// stopping at the first.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, u) in self.users.iter().enumerate() {
            if u.left > u.right {
                out.push(Violation::IntervalReversed { user: i });
            }
            if !(u.left <= u.speech && u.speech <= u.right) {
                out.push(Violation::SpeechOutsideInterval { user: i });
            }
            match u.threshold {
                ThresholdSpec::Direct(theta) => {
                    if theta < Rational::zero() || theta > Rational::one() {
                        out.push(Violation::ThresholdOutOfRange { user: i });
                    }
                }
                ThresholdSpec::FromDisutility { b, lambda } => {
                    if !b.is_positive() {
                        out.push(Violation::DisutilityNotPositive { user: i });
                    }
                    if lambda < Rational::zero() || lambda > Rational::one() {
                        out.push(Violation::LambdaOutOfRange { user: i });
                    }
                }
            }
        }
        for &a in &self.initial_adopters {
            if a >= self.users.len() {
                out.push(Violation::AdopterOutOfRange { id: a });
            }
        }
        out
    }

    pub fn validated(self) -> Result<Self> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::Invalid(v))
        }
    }

    /// Smallest threshold over all users; None for an empty population.
    pub fn theta_min(&self) -> Option<Rational> {
        self.users.iter().map(|u| u.theta()).min()
    }
}

/// One invariant violation found by validation.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("user {user}: interval endpoints reversed")]
    IntervalReversed { user: usize },
    #[error("user {user}: speech not in interval")]
    SpeechOutsideInterval { user: usize },
    #[error("user {user}: threshold outside [0, 1]")]
    ThresholdOutOfRange { user: usize },
    #[error("user {user}: disutility b must be positive")]
    DisutilityNotPositive { user: usize },
    #[error("user {user}: lambda outside [0, 1]")]
    LambdaOutOfRange { user: usize },
    #[error("adopter out of range: {id}")]
    AdopterOutOfRange { id: usize },
    #[error("stack {stack}: count must be at least 1")]
    StackCountZero { stack: usize },
    #[error("stack {stack}: initial_on exceeds count")]
    InitialOnTooLarge { stack: usize },
}

/// A population given as stacks of identical users with counts. Quotient
/// engines analyze these exactly at sizes where the flat state space is out
/// of reach.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StackedPopulation {
    pub stacks: Vec<Stack>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stack {
    pub user: UserPrefs,
    pub count: usize,
    /// How many members of this stack are initial adopters.
    pub initial_on: usize,
}

impl Stack {
    pub fn new(user: UserPrefs, count: usize, initial_on: usize) -> Self {
        Stack {
            user,
            count,
            initial_on,
        }
    }
}

impl StackedPopulation {
    pub fn total_users(&self) -> usize {
        self.stacks.iter().map(|s| s.count).sum()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (k, s) in self.stacks.iter().enumerate() {
            if s.count == 0 {
                out.push(Violation::StackCountZero { stack: k });
            }
            if s.initial_on > s.count {
                out.push(Violation::InitialOnTooLarge { stack: k });
            }
        }
        let flat_probe = Population::new(
            self.stacks.iter().map(|s| s.user).collect(),
            std::iter::empty(),
        );
        for v in flat_probe.validate() {
            out.push(v);
        }
        out
    }

    /// Expand to a flat population, stack by stack in order. Within a stack
    /// the first `initial_on` members are the adopters.
    pub fn expand(&self) -> Population {
        let mut users = Vec::with_capacity(self.total_users());
        let mut adopters = BTreeSet::new();
        for s in &self.stacks {
            let base = users.len();
            for j in 0..s.count {
                users.push(s.user);
                if j < s.initial_on {
                    adopters.insert(base + j);
                }
            }
        }
        Population {
            users,
            initial_adopters: adopters,
        }
    }

    /// Which stack each expanded user id belongs to.
    pub fn stack_of_user(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.total_users());
        for (k, s) in self.stacks.iter().enumerate() {
            out.extend(std::iter::repeat_n(k, s.count));
        }
        out
    }
}

/// Count compatible/incompatible others, excluding `i` itself.
fn split_others(i: usize, on_platform: &BTreeSet<usize>, pop: &Population) -> (u64, u64) {
    let me = &pop.users[i];
    let mut compat = 0u64;
    let mut incompat = 0u64;
    for &j in on_platform {
        if j == i {
            continue;
        }
        if compatible(me, pop.users[j].speech) {
            compat += 1;
        } else {
            incompat += 1;
        }
    }
    (compat, incompat)
}

/// Raw utility of user `i` against the given on-platform set: +1 per
/// compatible other, minus the disutility weight per incompatible other.
/// Undefined (error) when the threshold is a direct 1.
pub fn utility(i: usize, on_platform: &BTreeSet<usize>, pop: &Population) -> Result<Rational> {
    let w = pop.users[i].threshold.disutility_weight()?;
    let (c, d) = split_others(i, on_platform, pop);
    Ok(Rational::int(c as i128) - w * Rational::int(d as i128))
}

/// Whether user `i` would join or stay given the on-platform set: the
/// compatible fraction of others' speech must be at least their threshold.
/// An empty set of others means zero utility, which counts as willing.
pub fn willing(i: usize, on_platform: &BTreeSet<usize>, pop: &Population) -> bool {
    let (c, d) = split_others(i, on_platform, pop);
    willing_by_counts(c, d, pop.users[i].theta())
}

/// The same decision on raw counts: `c/(c+d) >= theta`, exactly.
pub fn willing_by_counts(compat: u64, incompat: u64, theta: Rational) -> bool {
    let total = compat + incompat;
    if total == 0 {
        return true;
    }
    // c * den >= num * (c + d), avoiding any division.
    Rational::int(compat as i128) * Rational::int(theta.denom())
        >= Rational::int(theta.numer()) * Rational::int(total as i128)
}

/// Mutual compatibility: each speech point lies in the other's interval.
pub fn mutually_compatible(i: usize, j: usize, pop: &Population) -> Result<bool> {
    if i == j {
        return Err(Error::precondition("mutual compatibility needs two distinct users"));
    }
    Ok(compatible(&pop.users[i], pop.users[j].speech)
        && compatible(&pop.users[j], pop.users[i].speech))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn direct(theta: Rational) -> ThresholdSpec {
        ThresholdSpec::Direct(theta)
    }

    fn user(l: i128, p: i128, r: i128, spec: ThresholdSpec) -> UserPrefs {
        UserPrefs::new(Rational::int(l), Rational::int(p), Rational::int(r), spec)
    }

    /// The five-user fixture: intervals [2,6],[2,5],[1,5],[2,6],[2,3] with
    /// speech 4,5,2,6,3 and threshold 1 everywhere.
    pub(crate) fn five_user() -> Population {
        let t = direct(Rational::one());
        Population::new(
            vec![
                user(2, 4, 6, t),
                user(2, 5, 5, t),
                user(1, 2, 5, t),
                user(2, 6, 6, t),
                user(2, 3, 3, t),
            ],
            [],
        )
    }

    #[test]
    fn threshold_values() {
        let half = ThresholdSpec::FromDisutility {
            b: Rational::one(),
            lambda: Rational::one(),
        };
        assert_eq!(half.value(), Rational::new(1, 2));

        let seven_ninths = ThresholdSpec::FromDisutility {
            b: Rational::new(7, 2),
            lambda: Rational::one(),
        };
        assert_eq!(seven_ninths.value(), Rational::new(7, 9));

        let filter_bubble = ThresholdSpec::FromDisutility {
            b: Rational::int(5),
            lambda: Rational::zero(),
        };
        assert_eq!(filter_bubble.value(), Rational::zero());
    }

    #[test]
    fn compatible_is_closed() {
        let u = user(2, 3, 6, direct(Rational::one()));
        assert!(compatible(&u, Rational::int(6)));
        assert!(compatible(&u, Rational::int(2)));
        assert!(!compatible(&u, Rational::new(13, 2)));
        let narrow = user(2, 2, 3, direct(Rational::one()));
        assert!(!compatible(&narrow, Rational::int(4)));
    }

    #[test]
    fn utility_counts_compatible_minus_weighted_incompatible() {
        let me = UserPrefs::new(
            Rational::int(0),
            Rational::int(5),
            Rational::int(10),
            ThresholdSpec::FromDisutility {
                b: Rational::one(),
                lambda: Rational::one(),
            },
        );
        let pop = Population::new(
            vec![
                me,
                user(0, 5, 10, direct(Rational::one())),
                user(0, 20, 30, direct(Rational::one())),
            ],
            [],
        );
        let on: BTreeSet<usize> = [0, 1, 2].into_iter().collect();
        assert_eq!(utility(0, &on, &pop).unwrap(), Rational::zero());
        let alone: BTreeSet<usize> = [0].into_iter().collect();
        assert_eq!(utility(0, &alone, &pop).unwrap(), Rational::zero());
    }

    #[test]
    fn utility_five_user_user3() {
        // User with interval [1,5] and b=1, lambda=1 alongside speech at 4 and 5.
        let mut pop = five_user();
        pop.users[2].threshold = ThresholdSpec::FromDisutility {
            b: Rational::one(),
            lambda: Rational::one(),
        };
        let on: BTreeSet<usize> = [0, 1, 2].into_iter().collect();
        assert_eq!(utility(2, &on, &pop).unwrap(), Rational::int(2));
    }

    #[test]
    fn utility_undefined_at_direct_one() {
        let pop = five_user();
        let on: BTreeSet<usize> = [0, 1].into_iter().collect();
        assert!(utility(0, &on, &pop).is_err());
    }

    #[test]
    fn willing_boundary_cases() {
        let pop = five_user();
        // Empty others: willing.
        assert!(willing(0, &BTreeSet::new(), &pop));
        // User 5 (id 4) vs speech {4, 5, 2}: one compatible of three, theta 1.
        let on: BTreeSet<usize> = [0, 1, 2, 4].into_iter().collect();
        assert!(!willing(4, &on, &pop));
        // Exact threshold equality counts as willing: 19/37 >= 1/2.
        assert!(willing_by_counts(19, 18, Rational::new(1, 2)));
        assert!(!willing_by_counts(18, 19, Rational::new(1, 2)));
    }

    #[test]
    fn mutual_compatibility_five_user() {
        let pop = five_user();
        assert!(mutually_compatible(0, 1, &pop).unwrap());
        assert!(!mutually_compatible(1, 3, &pop).unwrap());
        assert!(mutually_compatible(0, 0, &pop).is_err());
    }

    #[test]
    fn validate_reports_everything() {
        let pop = five_user();
        assert!(pop.validate().is_empty());

        let mut bad = five_user();
        bad.users[0].speech = Rational::int(100);
        bad.initial_adopters.insert(5);
        let v = bad.validate();
        assert!(v.contains(&Violation::SpeechOutsideInterval { user: 0 }));
        assert!(v.contains(&Violation::AdopterOutOfRange { id: 5 }));
    }

    #[test]
    fn stacked_expansion_is_order_preserving() {
        let sp = StackedPopulation {
            stacks: vec![
                Stack::new(user(0, 1, 2, direct(Rational::new(1, 2))), 3, 2),
                Stack::new(user(1, 2, 3, direct(Rational::new(1, 2))), 2, 0),
            ],
        };
        let flat = sp.expand();
        assert_eq!(flat.len(), 5);
        assert_eq!(flat.users[2].speech, Rational::int(1));
        assert_eq!(flat.users[3].speech, Rational::int(2));
        assert_eq!(
            flat.initial_adopters.iter().copied().collect::<Vec<_>>(),
            vec![0, 1]
        );
        assert_eq!(sp.stack_of_user(), vec![0, 0, 0, 1, 1]);
    }

    #[test]
    fn window_membership() {
        let w = Window::closed(Rational::int(2), Rational::int(5));
        assert!(w.contains(Rational::int(2)));
        assert!(w.contains(Rational::int(5)));
        assert!(!w.contains(Rational::int(6)));
        assert!(Window::all().contains(Rational::int(-100)));
        assert!(!Window::Empty.contains(Rational::zero()));
        assert!(Window::at_most(Rational::int(3)).contains(Rational::int(-50)));
    }
}
