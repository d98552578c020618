//! Switching schedules: who gets to act at each time step.
//!
//! All schedules used by the engines are starvation-free: every user recurs
//! within bounded gaps forever. Cyclic and scripted schedules are validated
//! for that; seeded random schedules satisfy it with probability one and
//! replay bit-identically for equal seeds.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// A fixed permutation of all user ids, repeated forever.
    RoundRobin(Vec<usize>),
    /// An arbitrary finite sequence repeated forever; must mention every user.
    Cyclic(Vec<usize>),
    /// A finite prefix followed by a repeated cycle; the cycle must mention
    /// every user.
    Scripted { prefix: Vec<usize>, cycle: Vec<usize> },
    /// Uniform seeded draws, deterministic per seed across platforms.
    SeededRandom(u64),
}

impl Schedule {
    pub fn id_order(n: usize) -> Schedule {
        Schedule::RoundRobin((0..n).collect())
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let covers = |ids: &[usize]| -> bool {
            let mut seen = vec![false; n];
            for &i in ids {
                if i >= n {
                    return false;
                }
                seen[i] = true;
            }
            seen.iter().all(|&s| s)
        };
        match self {
            Schedule::RoundRobin(perm) => {
                if perm.len() != n || !covers(perm) {
                    return Err(Error::precondition(
                        "round-robin schedule must be a permutation of all user ids",
                    ));
                }
            }
            Schedule::Cyclic(seq) => {
                if n > 0 && !covers(seq) {
                    return Err(Error::precondition(
                        "cyclic schedule must mention every user (starvation-freeness)",
                    ));
                }
                if seq.iter().any(|&i| i >= n) {
                    return Err(Error::precondition("schedule mentions unknown user id"));
                }
            }
            Schedule::Scripted { prefix, cycle } => {
                if prefix.iter().any(|&i| i >= n) || cycle.iter().any(|&i| i >= n) {
                    return Err(Error::precondition("schedule mentions unknown user id"));
                }
                if n > 0 && !covers(cycle) {
                    return Err(Error::precondition(
                        "scripted cycle must mention every user (starvation-freeness)",
                    ));
                }
            }
            Schedule::SeededRandom(_) => {}
        }
        Ok(())
    }

    /// Iterator over scheduled actors for t = 1, 2, ...; `None` items never
    /// occur for n > 0. Call `validate` first.
    pub fn actors(&self, n: usize) -> ScheduleIter<'_> {
        ScheduleIter {
            schedule: self,
            n,
            t: 0,
            rng: match self {
                Schedule::SeededRandom(seed) => SimRng::new(*seed),
                _ => SimRng::new(0),
            },
        }
    }
}

pub struct ScheduleIter<'a> {
    schedule: &'a Schedule,
    n: usize,
    t: u64,
    rng: SimRng,
}

impl Iterator for ScheduleIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.n == 0 {
            return None;
        }
        let t = self.t;
        self.t += 1;
        Some(match self.schedule {
            Schedule::RoundRobin(perm) => perm[(t % perm.len() as u64) as usize],
            Schedule::Cyclic(seq) => seq[(t % seq.len() as u64) as usize],
            Schedule::Scripted { prefix, cycle } => {
                if (t as usize) < prefix.len() {
                    prefix[t as usize]
                } else if cycle.is_empty() {
                    // Degenerate but tolerated for n == 0 populations only;
                    // validate() rejects empty cycles otherwise.
                    0
                } else {
                    cycle[(t as usize - prefix.len()) % cycle.len()]
                }
            }
            Schedule::SeededRandom(_) => self.rng.pick(self.n),
        })
    }
}

/// Deterministic xorshift64* generator. Not cryptographic; chosen for stable
/// output across platforms and releases, which the replay guarantees require.
#[derive(Clone, Debug)]
pub struct SimRng {
    state: u64,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        // Zero locks xorshift; remap it.
        let state = if seed == 0 { 0x9E37_79B9_7F4A_7C15 } else { seed };
        SimRng { state }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform draw from 0..n. The modulo bias is irrelevant at these ranges
    /// and keeps the stream layout trivially stable.
    #[inline]
    pub fn pick(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    /// Rational in (0,1) with the given granularity, for test populations.
    pub fn unit_fraction(&mut self, granularity: u64) -> (i128, i128) {
        let d = granularity.max(2);
        let n = 1 + self.next_u64() % (d - 1);
        (n as i128, d as i128)
    }

    /// Sample `m` distinct indices from 0..n by partial Fisher-Yates.
    pub fn sample_without_replacement(&mut self, n: usize, m: usize) -> Vec<usize> {
        assert!(m <= n);
        let mut ids: Vec<usize> = (0..n).collect();
        for k in 0..m {
            let j = k + self.pick(n - k);
            ids.swap(k, j);
        }
        ids.truncate(m);
        ids
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_robin_must_be_permutation() {
        assert!(Schedule::RoundRobin(vec![0, 1, 2]).validate(3).is_ok());
        assert!(Schedule::RoundRobin(vec![0, 1, 1]).validate(3).is_err());
        assert!(Schedule::RoundRobin(vec![0, 1]).validate(3).is_err());
    }

    #[test]
    fn cyclic_must_cover_all_users() {
        assert!(Schedule::Cyclic(vec![0, 2, 1, 0]).validate(3).is_ok());
        assert!(Schedule::Cyclic(vec![0, 1]).validate(3).is_err());
    }

    #[test]
    fn seeded_replay_is_bit_identical() {
        let s = Schedule::SeededRandom(42);
        let a: Vec<usize> = s.actors(7).take(100).collect();
        let b: Vec<usize> = s.actors(7).take(100).collect();
        assert_eq!(a, b);
        let c: Vec<usize> = Schedule::SeededRandom(43).actors(7).take(100).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn scripted_sequence_layout() {
        let s = Schedule::Scripted {
            prefix: vec![2, 0],
            cycle: vec![1, 0, 2],
        };
        let got: Vec<usize> = s.actors(3).take(8).collect();
        assert_eq!(got, vec![2, 0, 1, 0, 2, 1, 0, 2]);
    }

    #[test]
    fn sampling_without_replacement_is_a_subset() {
        let mut rng = SimRng::new(7);
        let s = rng.sample_without_replacement(10, 4);
        assert_eq!(s.len(), 4);
        let mut sorted = s.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 4);
    }
}
