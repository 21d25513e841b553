//! Statistical validation of the environment samplers against their
//! analytic densities, marginals, and closed-form expected utilities.

use fpa_core::auction::raw_utility;
use fpa_core::env::{expected_utility, m_cdf, Environment, EnvironmentSpec, RectComponent, Sign};
use fpa_core::eval::eps_sample_deviation;

fn draw(spec: EnvironmentSpec, seed: u64, n: usize) -> Vec<fpa_core::auction::AuctionRound> {
    let mut env = Environment::new(spec, seed, n as u64).unwrap();
    (0..n).map(|_| env.next_round()).collect()
}

/// Inverse-square slab sampler: valuation marginal must be uniform on
/// [7/8, 1]. Chi-square over 25 equal-width bins.
#[test]
fn plateau_valuation_marginal_is_uniform() {
    let n = 200_000;
    let rounds = draw(EnvironmentSpec::Plateau, 101, n);
    let bins = 25usize;
    let mut counts = vec![0u64; bins];
    for r in &rounds {
        let z = (r.valuation - 0.875) / 0.125;
        let b = ((z * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let expected = n as f64 / bins as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 99.99% quantile of chi2 with 24 degrees of freedom is ~61.
    assert!(chi2 < 70.0, "chi2 {chi2}");
}

/// The competing-bid marginal of the slab sampler must match the analytic
/// CDF; this exercises the inverse-CDF branch directly.
#[test]
fn plateau_competing_bid_marginal_matches_cdf() {
    let n = 200_000;
    let rounds = draw(EnvironmentSpec::Plateau, 103, n);
    let spec = EnvironmentSpec::Plateau;
    let bins = 35usize;
    let mut counts = vec![0u64; bins];
    let hi = 0.875;
    for r in &rounds {
        let b = (((r.competing_bid / hi) * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let mut chi2 = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        let lo_edge = hi * i as f64 / bins as f64;
        let hi_edge = hi * (i + 1) as f64 / bins as f64;
        let p = m_cdf(&spec, hi_edge).unwrap() - m_cdf(&spec, lo_edge).unwrap();
        let expected = n as f64 * p;
        chi2 += (c as f64 - expected).powi(2) / expected;
    }
    // 99.99% quantile of chi2 with 34 degrees of freedom is ~78.
    assert!(chi2 < 85.0, "chi2 {chi2}");

    // Kolmogorov-style check through the interval-deviation statistic.
    let samples: Vec<f64> = rounds.iter().map(|r| r.competing_bid).collect();
    let dev = eps_sample_deviation(&samples, &spec).unwrap();
    assert!(dev < 0.008, "sup interval deviation {dev}");
}

/// P(M < 1/4 | V = v) = 1/(8(v - 1/4)); checked near v = 1 where it equals
/// ~1/6.
#[test]
fn plateau_conditional_low_branch_probability() {
    let n = 400_000;
    let rounds = draw(EnvironmentSpec::Plateau, 107, n);
    let (mut cond_n, mut cond_low) = (0u64, 0u64);
    for r in &rounds {
        if r.valuation >= 0.99 {
            cond_n += 1;
            cond_low += (r.competing_bid < 0.25) as u64;
        }
    }
    // Average of 1/(8(v-1/4)) over v in [0.99, 1].
    let expect = 100.0 / 8.0 * (0.75f64 / 0.74).ln();
    let freq = cond_low as f64 / cond_n as f64;
    assert!(cond_n > 20_000);
    assert!((freq - expect).abs() < 0.012, "freq {freq} expect {expect}");
}

/// Rejection sampler for the perturbed slab density: rectangle frequencies
/// must match the analytic mass (base plus/minus 16/9 times the area).
#[test]
fn tent_perturbation_rectangle_masses() {
    let (w, eps) = (0.33, 0.03);
    let n = 400_000;
    let rounds = draw(EnvironmentSpec::PlateauTent { w, eps }, 109, n);

    // Base slab mass over [v0,v1] x [m0,m1): integrate (v-m)^-2 dm exactly,
    // then v numerically.
    let base_mass = |v0: f64, v1: f64, m0: f64, m1: f64| -> f64 {
        let steps = 4000;
        let h = (v1 - v0) / steps as f64;
        let inner = |v: f64| 1.0 / (v - m1) - 1.0 / (v - m0);
        let mut s = 0.5 * (inner(v0) + inner(v1));
        for i in 1..steps {
            s += inner(v0 + i as f64 * h);
        }
        s * h
    };
    let area = |v0: f64, v1: f64| (v1 - v0) * eps;
    let cases = [
        // (v-range, m-range, perturbation sign)
        (0.9375, 1.0, w - eps, w, 1.0),  // outer lower: +16/9
        (0.9375, 1.0, w, w + eps, -1.0), // outer upper: -16/9
        (0.875, 0.9375, w - eps, w, -1.0),
        (0.875, 0.9375, w, w + eps, 1.0),
    ];
    for (v0, v1, m0, m1, sgn) in cases {
        let p = base_mass(v0, v1, m0, m1) + sgn * (16.0 / 9.0) * area(v0, v1);
        let count = rounds
            .iter()
            .filter(|r| (v0..v1).contains(&r.valuation) && (m0..m1).contains(&r.competing_bid))
            .count();
        let freq = count as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (freq - p).abs() < 5.0 * se + 1e-5,
            "rect [{v0},{v1}]x[{m0},{m1}): freq {freq} vs {p}"
        );
    }
}

/// Paired Monte-Carlo difference across the tent: the peak beats a bid just
/// outside the tent by eps/144.
#[test]
fn tent_peak_beats_outside_by_expected_margin() {
    let (w, eps) = (0.33, 0.03);
    let spec = EnvironmentSpec::PlateauTent { w, eps };
    let n = 4_000_000;
    let rounds = draw(spec, 113, n);
    let outside = w + 2.0 * eps;
    let (mut sum, mut sumsq) = (0.0f64, 0.0f64);
    for r in &rounds {
        let d = raw_utility(r, w) - raw_utility(r, outside);
        sum += d;
        sumsq += d * d;
    }
    let mean = sum / n as f64;
    let var = (sumsq / n as f64 - mean * mean).max(0.0);
    let se = (var / n as f64).sqrt();
    let target = eps / 144.0;
    assert!(
        (mean - target).abs() < 4.0 * se,
        "paired diff {mean} vs {target} (se {se})"
    );
}

/// Monte-Carlo expected utility matches the closed forms at a spread of
/// bids for every closed-form i.i.d. variant (small-N version of the
/// acceptance check).
#[test]
fn sampler_fidelity_spot_check() {
    let specs = [
        EnvironmentSpec::TwoSquare {
            eps: 0.0,
            sign: Sign::Zero,
        },
        EnvironmentSpec::TwoSquare {
            eps: 0.25,
            sign: Sign::Plus,
        },
        EnvironmentSpec::Plateau,
        EnvironmentSpec::PlateauTent { w: 0.4, eps: 0.05 },
        EnvironmentSpec::RectMixture {
            components: vec![
                RectComponent::new(0.6, (0.5, 1.0), (0.1, 0.4)),
                RectComponent::new(0.4, (0.0, 0.8), (0.3, 0.9)),
            ],
        },
    ];
    let n = 200_000;
    for (i, spec) in specs.iter().enumerate() {
        let rounds = draw(spec.clone(), 200 + i as u64, n);
        for j in 0..10 {
            let b = j as f64 / 9.0;
            let (mut sum, mut sumsq) = (0.0, 0.0);
            for r in &rounds {
                let u = raw_utility(r, b);
                sum += u;
                sumsq += u * u;
            }
            let mean = sum / n as f64;
            let closed = expected_utility(spec, b).unwrap();
            let var = (sumsq / n as f64 - mean * mean).max(0.0);
            let se = (var / n as f64).sqrt();
            assert!(
                (mean - closed).abs() <= 5.0 * se + 1e-9,
                "{}: b={b} mc {mean} closed {closed} se {se}",
                spec.name()
            );
        }
    }
}

/// The two-square tilt moves mass exactly as the closed form says, at a few
/// tilts and both signs.
#[test]
fn two_square_tilt_matches_closed_form() {
    for (eps, sign, seed) in [(0.1, Sign::Plus, 301u64), (0.3, Sign::Minus, 302)] {
        let spec = EnvironmentSpec::TwoSquare { eps, sign };
        let n = 300_000;
        let rounds = draw(spec.clone(), seed, n);
        for b in [1.0 / 16.0, 7.0 / 16.0, 0.6] {
            let mean: f64 = rounds.iter().map(|r| raw_utility(r, b)).sum::<f64>() / n as f64;
            let closed = expected_utility(&spec, b).unwrap();
            assert!((mean - closed).abs() < 0.004, "b={b}: {mean} vs {closed}");
        }
    }
}
