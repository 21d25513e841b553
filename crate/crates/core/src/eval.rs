//! Regret computation and statistical evaluation utilities.
//!
//! The hindsight benchmark is the best fixed bid for a realized sequence;
//! by piecewise linearity of the cumulative utility it is attained at 0 or
//! at one of the realized competing bids, so the oracle only scans those
//! candidates. The pseudo benchmark instead uses the environment's
//! closed-form expected utilities, which gives a lower-variance regret
//! estimate for the environments that support it.

use crate::auction::{AuctionRound, BidGrid};
use crate::env::{
    expected_utility, expected_utility_at, m_cdf, pseudo_optimal_total, EnvironmentSpec,
};
use crate::Error;

/// Everything the harness records about one run. Rounds are recorded by the
/// harness and never shown to the learner.
#[derive(Debug, Clone, Default)]
pub struct RegretTrace {
    rounds: Vec<AuctionRound>,
    bids: Vec<f64>,
    utilities: Vec<f64>,
    total: f64,
}

impl RegretTrace {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            rounds: Vec::with_capacity(n),
            bids: Vec::with_capacity(n),
            utilities: Vec::with_capacity(n),
            total: 0.0,
        }
    }

    pub fn record(&mut self, round: AuctionRound, bid: f64, utility: f64) {
        self.rounds.push(round);
        self.bids.push(bid);
        self.utilities.push(utility);
        self.total += utility;
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn rounds(&self) -> &[AuctionRound] {
        &self.rounds
    }

    pub fn bids(&self) -> &[f64] {
        &self.bids
    }

    pub fn utilities(&self) -> &[f64] {
        &self.utilities
    }

    /// Cumulative realized utility of the learner.
    pub fn total_utility(&self) -> f64 {
        self.total
    }

    pub fn cumulative_utilities(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.utilities.len());
        let mut acc = 0.0;
        for u in &self.utilities {
            acc += u;
            out.push(acc);
        }
        out
    }
}

/// Which benchmark the regret is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegretMode {
    /// Best fixed bid on the realized sequence.
    Hindsight,
    /// Closed-form expected-utility benchmark.
    Pseudo,
}

/// Best fixed bid for a realized sequence and its cumulative utility.
///
/// On each interval between consecutive distinct competing bids the
/// cumulative utility is linear in the bid with slope `-(#wins) <= 0`, so
/// the supremum over `[0, 1]` is attained at a left endpoint: bid 0 or some
/// realized competing bid. Ties prefer the smallest bid.
pub fn hindsight_best(rounds: &[AuctionRound]) -> Result<(f64, f64), Error> {
    if rounds.is_empty() {
        return Err(Error::EmptyInput("rounds"));
    }
    let mut by_m: Vec<(f64, f64)> = rounds
        .iter()
        .map(|r| (r.competing_bid, r.valuation))
        .collect();
    by_m.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

    let mut best_bid = 0.0;
    // Value of bidding 0: wins exactly the rounds with zero competing bid.
    let mut best_val: f64 = by_m
        .iter()
        .take_while(|(m, _)| *m == 0.0)
        .map(|&(_, v)| v)
        .sum();
    let mut sum_v = 0.0;
    let mut wins = 0usize;
    let mut i = 0;
    while i < by_m.len() {
        let b = by_m[i].0;
        while i < by_m.len() && by_m[i].0 == b {
            sum_v += by_m[i].1;
            wins += 1;
            i += 1;
        }
        let val = sum_v - b * wins as f64;
        if val > best_val {
            best_val = val;
            best_bid = b;
        }
    }
    Ok((best_bid, best_val))
}

/// Hindsight regret of a trace: benchmark minus realized utility. Can be
/// negative on single runs, since the benchmark is per-realization.
pub fn hindsight_regret(trace: &RegretTrace) -> Result<f64, Error> {
    let (_, value) = hindsight_best(trace.rounds())?;
    Ok(value - trace.total_utility())
}

/// Pseudo-regret of a trace against the closed-form benchmark of `spec`:
/// the best fixed bid's cumulative expected utility minus the expected
/// utility of the bids actually posted.
pub fn pseudo_regret(spec: &EnvironmentSpec, trace: &RegretTrace) -> Result<f64, Error> {
    let t = trace.len() as u64;
    let benchmark = pseudo_optimal_total(spec, t)?;
    let mut played = 0.0;
    for (i, &b) in trace.bids().iter().enumerate() {
        played += expected_utility_at(spec, i as u64, b)?;
    }
    Ok(benchmark - played)
}

/// Regret of a trace in the requested mode.
pub fn regret(spec: &EnvironmentSpec, trace: &RegretTrace, mode: RegretMode) -> Result<f64, Error> {
    match mode {
        RegretMode::Hindsight => hindsight_regret(trace),
        RegretMode::Pseudo => pseudo_regret(spec, trace),
    }
}

/// Supremum over subintervals of `[0, 1]` of the gap between the empirical
/// frequency of the samples and the true interval probability under `spec`.
///
/// The spec must have a continuous competing-bid marginal with a closed-form
/// CDF. The supremum over all intervals is attained with endpoints at sample
/// breakpoints (approaching each sample from below or above), including
/// degenerate single-point intervals, so it suffices to track the signed
/// discrepancy at those breakpoints and take the largest ordered difference.
pub fn eps_sample_deviation(samples: &[f64], spec: &EnvironmentSpec) -> Result<f64, Error> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    let n = samples.len() as f64;
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);

    // Signed discrepancy D = empirical - true, evaluated just below and just
    // above each distinct sample. Any interval deviation is a difference
    // D_b - D_a with a <= b in this ordering; virtual endpoints at 0 and 1
    // carry D = 0.
    let mut min_d = 0.0f64;
    let mut max_d = 0.0f64;
    let mut sup = 0.0f64;
    let mut seen = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut mult = 0usize;
        while i < sorted.len() && sorted[i] == x {
            mult += 1;
            i += 1;
        }
        let cdf = m_cdf(spec, x)?;
        let below = seen as f64 / n - cdf;
        seen += mult;
        let above = seen as f64 / n - cdf;
        for d in [below, above] {
            sup = sup.max(d - min_d).max(max_d - d);
            min_d = min_d.min(d);
            max_d = max_d.max(d);
        }
    }
    // Closing virtual endpoint at 1 (D = 0).
    sup = sup.max(-min_d).max(max_d);
    Ok(sup)
}

/// Ordinary least squares fit of log2(regret) against log2(horizon).
#[derive(Debug, Clone)]
pub struct SlopeFit {
    /// The fitted (log2 T, log2 regret) points.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
}

/// Fits a power-law exponent to mean regrets over a set of horizons.
/// Requires at least four horizons and strictly positive regrets.
pub fn slope_estimate(horizons: &[u64], mean_regrets: &[f64]) -> Result<SlopeFit, Error> {
    if horizons.len() != mean_regrets.len() {
        return Err(Error::InvalidParameter(
            "horizon/regret length mismatch".into(),
        ));
    }
    if horizons.len() < 4 {
        return Err(Error::InvalidParameter(
            "slope fit needs at least 4 horizons".into(),
        ));
    }
    if mean_regrets.iter().any(|r| *r <= 0.0 || !r.is_finite()) {
        return Err(Error::InvalidParameter(
            "slope fit needs positive finite regrets (clamp upstream if needed)".into(),
        ));
    }
    let points: Vec<(f64, f64)> = horizons
        .iter()
        .zip(mean_regrets)
        .map(|(&t, &r)| ((t as f64).log2(), r.log2()))
        .collect();
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum::<f64>();
    Ok(SlopeFit {
        slope,
        intercept,
        residual_rms: (ss_res / n).sqrt(),
        points,
    })
}

/// Gap between the best expected utility over `[0, 1]` and the best over the
/// grid, for an i.i.d. spec with closed forms. Under a `sigma`-smooth spec
/// this is at most `3 * mesh_radius / sigma`.
pub fn discretization_gap(spec: &EnvironmentSpec, grid: &BidGrid) -> Result<f64, Error> {
    let best = pseudo_optimal_total(spec, 1)?;
    let mut grid_best = f64::NEG_INFINITY;
    for &x in grid.points() {
        grid_best = grid_best.max(expected_utility(spec, x)?);
    }
    Ok(best - grid_best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Sign;

    fn r(v: f64, m: f64) -> AuctionRound {
        AuctionRound::new(v, m)
    }

    #[test]
    fn hindsight_single_round() {
        let (b, val) = hindsight_best(&[r(1.0, 0.3)]).unwrap();
        assert_eq!(b, 0.3);
        assert!((val - 0.7).abs() < 1e-15);
    }

    #[test]
    fn hindsight_two_rounds_prefers_winning_less() {
        let (b, val) = hindsight_best(&[r(1.0, 0.5), r(0.0, 0.55)]).unwrap();
        assert_eq!(b, 0.5);
        assert!((val - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hindsight_worthless_items() {
        let rounds: Vec<_> = (0..10).map(|i| r(0.0, 0.1 + 0.05 * i as f64)).collect();
        let (b, val) = hindsight_best(&rounds).unwrap();
        assert_eq!((b, val), (0.0, 0.0));
    }

    #[test]
    fn hindsight_empty_errors() {
        assert!(hindsight_best(&[]).is_err());
    }

    #[test]
    fn fixed_best_bid_has_zero_hindsight_regret() {
        let rounds = vec![r(0.9, 0.2), r(0.8, 0.4), r(0.7, 0.3)];
        let (b, _) = hindsight_best(&rounds).unwrap();
        let mut trace = RegretTrace::default();
        for round in &rounds {
            trace.record(*round, b, crate::auction::raw_utility(round, b));
        }
        let reg = hindsight_regret(&trace).unwrap();
        assert!(reg.abs() < 1e-12);
    }

    #[test]
    fn pseudo_regret_of_fixed_zero_bid_on_two_square() {
        let spec = EnvironmentSpec::TwoSquare {
            eps: 0.0,
            sign: Sign::Zero,
        };
        let t = 1280;
        let mut trace = RegretTrace::default();
        for _ in 0..t {
            trace.record(r(0.1, 0.1), 0.0, 0.0);
        }
        let reg = pseudo_regret(&spec, &trace).unwrap();
        assert!((reg - t as f64 / 128.0).abs() < 1e-9);
    }

    #[test]
    fn pseudo_regret_of_tent_peak_is_zero() {
        let spec = EnvironmentSpec::PlateauTent { w: 0.33, eps: 0.03 };
        let mut trace = RegretTrace::default();
        for _ in 0..100 {
            trace.record(r(0.9, 0.2), 0.33, 0.0);
        }
        let reg = pseudo_regret(&spec, &trace).unwrap();
        assert!(reg.abs() < 1e-9);
    }

    #[test]
    fn eps_sample_single_point_has_unit_deviation() {
        let spec = EnvironmentSpec::uniform_square();
        let d = eps_sample_deviation(&[0.37], &spec).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eps_sample_quantile_samples_have_small_deviation() {
        let spec = EnvironmentSpec::uniform_square();
        let n = 1000;
        let samples: Vec<f64> = (1..=n)
            .map(|i| (2 * i - 1) as f64 / (2 * n) as f64)
            .collect();
        let d = eps_sample_deviation(&samples, &spec).unwrap();
        assert!(d <= 1.0 / n as f64 + 1e-12, "deviation {d}");
    }

    #[test]
    fn eps_sample_detects_shifted_mass() {
        // All samples in [0, 1/2] against a uniform reference: the interval
        // [0, 1/2] has empirical mass 1 vs true 1/2.
        let spec = EnvironmentSpec::uniform_square();
        let samples: Vec<f64> = (0..100).map(|i| i as f64 / 200.0).collect();
        let d = eps_sample_deviation(&samples, &spec).unwrap();
        assert!(d >= 0.5 - 1e-9);
    }

    #[test]
    fn slope_exact_power_laws() {
        let horizons: Vec<u64> = (12..=17).map(|e| 1u64 << e).collect();
        let linear: Vec<f64> = horizons.iter().map(|&t| 3.0 * t as f64).collect();
        let fit = slope_estimate(&horizons, &linear).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-9);
        assert!(fit.residual_rms < 1e-9);

        let pow23: Vec<f64> = horizons
            .iter()
            .map(|&t| (t as f64).powf(2.0 / 3.0))
            .collect();
        let fit = slope_estimate(&horizons, &pow23).unwrap();
        assert!((fit.slope - 2.0 / 3.0).abs() < 1e-9);

        let sqrt_log: Vec<f64> = horizons
            .iter()
            .map(|&t| (t as f64).sqrt() * (t as f64).ln())
            .collect();
        let fit = slope_estimate(&horizons, &sqrt_log).unwrap();
        assert!(fit.slope > 0.5 && fit.slope < 0.62, "slope {}", fit.slope);
    }

    #[test]
    fn slope_rejects_bad_input() {
        assert!(slope_estimate(&[1, 2, 3], &[1.0, 2.0, 3.0]).is_err());
        assert!(slope_estimate(&[1, 2, 4, 8], &[1.0, 2.0, 0.0, 3.0]).is_err());
    }

    #[test]
    fn discretization_gap_zero_when_grid_contains_maximizer() {
        let spec = EnvironmentSpec::TwoSquare {
            eps: 0.0,
            sign: Sign::Zero,
        };
        let grid = BidGrid::new(vec![0.0, 1.0 / 16.0, 0.9]).unwrap();
        let gap = discretization_gap(&spec, &grid).unwrap();
        assert!(gap.abs() < 1e-12);

        let plateau_grid = BidGrid::new(vec![0.0, 0.5]).unwrap();
        let gap = discretization_gap(&EnvironmentSpec::Plateau, &plateau_grid).unwrap();
        assert!(gap.abs() < 1e-12);
    }

    #[test]
    fn discretization_gap_uniform_grid_two_square() {
        let spec = EnvironmentSpec::TwoSquare {
            eps: 0.0,
            sign: Sign::Zero,
        };
        let grid = BidGrid::uniform(101);
        let gap = discretization_gap(&spec, &grid).unwrap();
        let expect = 1.0 / 128.0
            - expected_utility(&spec, 0.06)
                .unwrap()
                .max(expected_utility(&spec, 0.07).unwrap())
                .max(expected_utility(&spec, 0.44).unwrap());
        assert!((gap - expect).abs() < 1e-12);
        let sigma = crate::env::smoothness_of(&spec).unwrap();
        assert!(gap <= 3.0 * grid.mesh_radius() / sigma);
    }

    #[test]
    fn cumulative_utilities_are_prefix_sums() {
        let mut trace = RegretTrace::default();
        trace.record(r(0.5, 0.2), 0.3, 0.2);
        trace.record(r(0.9, 0.5), 0.1, 0.0);
        trace.record(r(1.0, 0.3), 0.4, 0.6);
        assert_eq!(trace.cumulative_utilities(), vec![0.2, 0.2, 0.8]);
        assert!((trace.total_utility() - 0.8).abs() < 1e-15);
    }
}
