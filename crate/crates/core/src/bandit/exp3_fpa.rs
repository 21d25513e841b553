//! Exponential-weights learner for transparent feedback on a finite bid set.
//!
//! The learner keeps a weight per grid bid and samples from
//!
//! ```text
//! p_t = (1 - gamma) * w_t / ||w_t||_1 + gamma * dirac(x_max)
//! ```
//!
//! After a round where the competing bid `M_t` was revealed, every grid bid
//! `x >= M_t` receives the importance-weighted reward estimate
//!
//! ```text
//! g(x) = (V_t - x) * I{M_t <= B_t} / sum_{y >= M_t} p_t(y)
//! ```
//!
//! and its weight is multiplied by `exp(gamma * g(x))`. The forced mass on
//! the largest grid point keeps the denominator at least `gamma` whenever
//! the round was won, so `gamma * g` stays in `[-1, 1]`.
//!
//! Weights are stored in the linear domain and rescaled whenever their total
//! leaves a safe range; the running total is refreshed from scratch
//! periodically to cap accumulation drift. Grids grow to tens of thousands
//! of points inside the epoch wrapper, so the per-round work is kept to one
//! pass over the touched suffix.

use rand::Rng;

use crate::auction::Observation;
use crate::Error;

const WSUM_REFRESH_INTERVAL: u32 = 512;
const WSUM_LO: f64 = 1e-120;
const WSUM_HI: f64 = 1e120;

/// Exploration rate tuned for a grid of `grid_size` bids over `horizon`
/// rounds, clamped to `(0, 1/2]` so tiny horizons stay valid.
pub fn gamma_for(grid_size: usize, horizon: u64) -> f64 {
    let k = (grid_size.max(2)) as f64;
    let t = (horizon.max(1)) as f64;
    (k.ln() / ((std::f64::consts::E - 1.0) * t)).sqrt().min(0.5)
}

/// Importance-weighted reward estimates for one observed round, given the
/// sampling distribution `probs` that produced `bid`.
///
/// Returns one estimate per grid point; all zero when the round was lost.
pub fn reward_estimates(
    points: &[f64],
    probs: &[f64],
    valuation: f64,
    competing_bid: f64,
    bid: f64,
) -> Vec<f64> {
    let mut out = vec![0.0; points.len()];
    if bid < competing_bid {
        return out;
    }
    let k = points.partition_point(|&x| x < competing_bid);
    let denom: f64 = probs[k..].iter().sum();
    for (g, &x) in out[k..].iter_mut().zip(&points[k..]) {
        *g = (valuation - x) / denom;
    }
    out
}

/// Exponential-weights state over a sorted grid of candidate bids.
#[derive(Debug, Clone)]
pub struct Exp3Fpa {
    points: Vec<f64>,
    weights: Vec<f64>,
    wsum: f64,
    gamma: f64,
    updates_since_refresh: u32,
}

impl Exp3Fpa {
    /// `points` is any finite subset of `[0, 1]` (sorted and deduplicated
    /// here); `gamma` must lie in `(0, 1)`.
    pub fn new(mut points: Vec<f64>, gamma: f64) -> Result<Self, Error> {
        if points.is_empty() {
            return Err(Error::EmptyInput("bid set"));
        }
        if !(0.0 < gamma && gamma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma {gamma} outside (0, 1)"
            )));
        }
        if points
            .iter()
            .any(|p| !p.is_finite() || !(0.0..=1.0).contains(p))
        {
            return Err(Error::InvalidParameter("bid set must lie in [0,1]".into()));
        }
        points.sort_unstable_by(f64::total_cmp);
        points.dedup();
        let n = points.len();
        Ok(Self {
            points,
            weights: vec![1.0; n],
            wsum: n as f64,
            gamma,
            updates_since_refresh: 0,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Current sampling distribution over the grid.
    pub fn distribution(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        let scale = (1.0 - self.gamma) / total;
        let mut p: Vec<f64> = self.weights.iter().map(|w| w * scale).collect();
        *p.last_mut().unwrap() += self.gamma;
        p
    }

    /// Draws a grid index from the current distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let last = self.points.len() - 1;
        let r: f64 = rng.random();
        if r < self.gamma {
            return last;
        }
        let target = (r - self.gamma) / (1.0 - self.gamma) * self.wsum;
        let mut cum = 0.0;
        for (i, &w) in self.weights.iter().enumerate() {
            cum += w;
            if cum > target {
                return i;
            }
        }
        last
    }

    /// Absorbs the observation of one round in which the learner posted the
    /// grid bid with index `bid_index`.
    ///
    /// Needs the competing bid revealed (transparent feedback or richer);
    /// on a lost round the estimates vanish and the weights stay unchanged.
    pub fn update(&mut self, bid_index: usize, obs: &Observation) -> Result<(), Error> {
        let m = obs.competing_bid.ok_or(Error::FeedbackContract(
            "exponential-weights update needs the competing bid revealed every round",
        ))?;
        if !obs.won {
            return Ok(());
        }
        let v = obs.valuation.ok_or(Error::FeedbackContract(
            "won rounds must reveal the valuation",
        ))?;
        debug_assert!(
            self.points[bid_index] >= m,
            "won round implies bid >= competing bid"
        );
        let k = self.points.partition_point(|&x| x < m);
        let suffix: f64 = self.weights[k..].iter().sum();
        // Denominator of the importance weight: the probability mass at or
        // above the competing bid, at least gamma thanks to the forced mass
        // on the top grid point.
        let denom = (1.0 - self.gamma) * suffix / self.wsum + self.gamma;
        let coef = self.gamma / denom;
        let mut new_suffix = 0.0;
        for (w, &x) in self.weights[k..].iter_mut().zip(&self.points[k..]) {
            // gamma * estimate stays in [-1, 1] because the denominator is
            // at least gamma and |v - x| <= 1.
            *w *= (coef * (v - x)).exp();
            new_suffix += *w;
        }
        self.wsum += new_suffix - suffix;
        self.updates_since_refresh += 1;
        if !(WSUM_LO..=WSUM_HI).contains(&self.wsum) {
            let scale = self.points.len() as f64 / self.wsum;
            for w in &mut self.weights {
                *w *= scale;
            }
            self.wsum = self.weights.iter().sum();
            self.updates_since_refresh = 0;
        } else if self.updates_since_refresh >= WSUM_REFRESH_INTERVAL {
            self.wsum = self.weights.iter().sum();
            self.updates_since_refresh = 0;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::{observe, AuctionRound, FeedbackModel};

    #[test]
    fn singleton_grid_collapses_to_dirac() {
        for gamma in [0.01, 0.3, 0.9] {
            let learner = Exp3Fpa::new(vec![0.4], gamma).unwrap();
            assert_eq!(learner.distribution(), vec![1.0]);
        }
    }

    #[test]
    fn uniform_weights_two_point_distribution() {
        let learner = Exp3Fpa::new(vec![0.2, 0.8], 0.1).unwrap();
        let p = learner.distribution();
        assert!((p[0] - 0.45).abs() < 1e-15);
        assert!((p[1] - 0.55).abs() < 1e-15);
    }

    #[test]
    fn vanishing_gamma_recovers_normalized_weights() {
        let mut learner = Exp3Fpa::new(vec![0.1, 0.5, 0.9], 1e-12).unwrap();
        learner.weights = vec![1.0, 3.0, 4.0];
        learner.wsum = 8.0;
        let p = learner.distribution();
        assert!((p[0] - 0.125).abs() < 1e-9);
        assert!((p[1] - 0.375).abs() < 1e-9);
        assert!((p[2] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn distribution_sums_to_one() {
        let learner = Exp3Fpa::new((0..37).map(|i| i as f64 / 40.0).collect(), 0.2).unwrap();
        let s: f64 = learner.distribution().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn estimate_matches_hand_computation() {
        // Grid {0.2, 0.8}, p = (0.5, 0.5), M = 0.5, B = 0.8, V = 1.
        let g = reward_estimates(&[0.2, 0.8], &[0.5, 0.5], 1.0, 0.5, 0.8);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn lost_round_leaves_weights_unchanged() {
        let mut learner = Exp3Fpa::new(vec![0.2, 0.8], 0.1).unwrap();
        let round = AuctionRound::new(0.7, 0.9);
        let obs = observe(&round, 0.8, FeedbackModel::Transparent).unwrap();
        let before = learner.weights.clone();
        learner.update(1, &obs).unwrap();
        assert_eq!(learner.weights, before);
        let g = reward_estimates(&[0.2, 0.8], &[0.5, 0.5], 0.7, 0.9, 0.8);
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn estimator_unbiased_on_two_point_grid() {
        // Average g(x) over both possible sampled bids, weighted by p,
        // must equal the realized utility u(x) for each grid bid.
        let points = [0.2, 0.8];
        let p = [0.45, 0.55];
        let (v, m) = (1.0, 0.5);
        let mut expected = [0.0f64; 2];
        for (b_idx, &b) in points.iter().enumerate() {
            let g = reward_estimates(&points, &p, v, m, b);
            for x in 0..2 {
                expected[x] += p[b_idx] * g[x];
            }
        }
        for (x, &xb) in points.iter().enumerate() {
            let u = if xb >= m { v - xb } else { 0.0 };
            assert!(
                (expected[x] - u).abs() < 1e-12,
                "x={x} expected {u} got {}",
                expected[x]
            );
        }
    }

    #[test]
    fn update_requires_revealed_competing_bid() {
        let mut learner = Exp3Fpa::new(vec![0.2, 0.8], 0.1).unwrap();
        let round = AuctionRound::new(0.7, 0.5);
        let obs = observe(&round, 0.8, FeedbackModel::Bandit).unwrap();
        assert!(matches!(
            learner.update(1, &obs),
            Err(Error::FeedbackContract(_))
        ));
    }

    #[test]
    fn gamma_formula() {
        // Degenerate grid uses the ln 2 guard and stays in (0, 1/2].
        let g1 = gamma_for(1, 100);
        assert!(g1 > 0.0 && g1 <= 0.5);
        let g = gamma_for(16, 10_000);
        let expect = (16f64.ln() / ((std::f64::consts::E - 1.0) * 1e4)).sqrt();
        assert!((g - expect).abs() < 1e-15);
        assert!((g - 0.0127).abs() < 1e-3);
        // Long horizons drive the rate to zero.
        assert!(gamma_for(16, 1u64 << 40) < 1e-4);
    }

    #[test]
    fn weight_update_applies_to_winning_suffix() {
        let mut learner = Exp3Fpa::new(vec![0.2, 0.6, 0.8], 0.25).unwrap();
        let round = AuctionRound::new(1.0, 0.5);
        let obs = observe(&round, 0.8, FeedbackModel::Transparent).unwrap();
        let p = learner.distribution();
        let denom = p[1] + p[2];
        learner.update(2, &obs).unwrap();
        // Weight of the losing bid 0.2 untouched; the others multiplied by
        // exp(gamma * (v - x) / denom).
        assert_eq!(learner.weights[0], 1.0);
        let e1 = (0.25 * (1.0 - 0.6) / denom).exp();
        let e2 = (0.25 * (1.0 - 0.8) / denom).exp();
        assert!((learner.weights[1] - e1).abs() < 1e-12);
        assert!((learner.weights[2] - e2).abs() < 1e-12);
    }
}
