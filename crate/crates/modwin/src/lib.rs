//! Exact analysis of moderation windows and the communities they sustain.
//!
//! A population of potential users lives on a one-dimensional content axis;
//! each produces speech at a point and consumes from a closed interval.
//! Platforms pick moderation windows (closed intervals of permitted speech),
//! users join and leave one at a time, and this crate answers, exactly:
//!
//! - what community sizes a window guarantees no matter the switching order
//!   (fair-limit analysis over the full or quotient state space),
//! - how large the best compatible community is, and which windows or
//!   dynamic window plans recover it,
//! - how size-maximizing and ideological platforms should pick windows,
//! - what happens under competition between platforms with bandwidth-limited
//!   users, and
//! - how robust a policy is to small population shocks and to heterogeneous
//!   speech frequencies.
//!
//! Everything decision-relevant is computed in exact rational arithmetic;
//! seeded randomness replays bit-identically.

pub mod competition;
pub mod dynamics;
pub mod error;
pub mod extensions;
pub mod fairgraph;
pub mod io;
pub mod lcc;
pub mod model;
pub mod policy;
pub mod quotient;
pub mod rational;
pub mod scenarios;
pub mod schedule;

pub use error::{Error, Result};
pub use model::{Population, Stack, StackedPopulation, ThresholdSpec, UserPrefs, Window};
pub use rational::Rational;
