//! A rescaled MOSS learner for gains in `[-1, 1]`.
//!
//! MOSS runs on rewards in `[0, 1]`, so raw gains are mapped through
//! `x -> (x + 1) / 2` before being accumulated. Arm selection maximizes
//!
//! ```text
//! mean_i + sqrt( max(0, ln(T / (K * n_i))) / n_i )
//! ```
//!
//! with unplayed arms selected first in index order.

use crate::Error;

/// MOSS state over `K` arms and a fixed horizon.
#[derive(Debug, Clone)]
pub struct Moss {
    horizon: f64,
    counts: Vec<u64>,
    /// Cumulative rescaled rewards, one per arm; `sums[i]` lies in `[0, n_i]`.
    sums: Vec<f64>,
    /// Cached index values so selection is a plain scan; only the pulled
    /// arm's entry changes per round.
    index: Vec<f64>,
    played: u64,
}

impl Moss {
    /// `arm_count >= 1`; `horizon` is the number of rounds the learner will face.
    pub fn new(arm_count: usize, horizon: u64) -> Self {
        assert!(arm_count >= 1, "need at least one arm");
        Self {
            horizon: horizon as f64,
            counts: vec![0; arm_count],
            sums: vec![0.0; arm_count],
            index: vec![f64::INFINITY; arm_count],
            played: 0,
        }
    }

    pub fn arm_count(&self) -> usize {
        self.counts.len()
    }

    pub fn rounds_played(&self) -> u64 {
        self.played
    }

    /// Next arm to pull: first unplayed arm in index order, otherwise the
    /// argmax of the cached index (ties go to the lowest arm id).
    pub fn select(&self) -> usize {
        if let Some(i) = self.counts.iter().position(|&n| n == 0) {
            return i;
        }
        let mut best = 0usize;
        let mut best_val = self.index[0];
        for (i, &v) in self.index.iter().enumerate().skip(1) {
            if v > best_val {
                best = i;
                best_val = v;
            }
        }
        best
    }

    /// Feeds the raw reward of the last pull of `arm`; must lie in `[-1, 1]`.
    pub fn update(&mut self, arm: usize, raw_reward: f64) -> Result<(), Error> {
        if !(-1.0..=1.0).contains(&raw_reward) {
            return Err(Error::RewardOutOfRange(raw_reward));
        }
        self.counts[arm] += 1;
        self.sums[arm] += (raw_reward + 1.0) / 2.0;
        self.played += 1;
        let n = self.counts[arm] as f64;
        let k = self.counts.len() as f64;
        let bonus = ((self.horizon / (k * n)).ln().max(0.0) / n).sqrt();
        self.index[arm] = self.sums[arm] / n + bonus;
        Ok(())
    }
}
