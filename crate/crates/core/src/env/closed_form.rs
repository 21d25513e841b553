//! Closed-form expected utilities, marginal CDFs, and smoothness bounds for
//! the environment variants that admit them.

use super::{EnvironmentSpec, RectComponent, Sign};
use crate::Error;

/// Tent map centered at `u` with radius `r`: `max(1 - |x - u|/r, 0)`.
pub fn tent(center: f64, radius: f64, x: f64) -> f64 {
    if radius <= 0.0 {
        return if x == center { 1.0 } else { 0.0 };
    }
    (1.0 - (x - center).abs() / radius).max(0.0)
}

/// Expected utility of the plateau density: increasing on `[0, 1/4)`, flat
/// at 1/8 on the plateau `[1/4, 3/4)`, then decreasing.
fn plateau_expected(b: f64) -> f64 {
    let ln65 = (6.0f64 / 5.0).ln();
    if b < 0.25 {
        b * (0.5 + (1.0 - 4.0 * b) * ln65)
    } else if b < 0.75 {
        0.125
    } else if b < 0.875 {
        -(4.0 * b * b - 6.0 * b + 17.0 / 8.0)
    } else {
        15.0 / 16.0 - b
    }
}

/// Expected utility of the two-square density with signed tilt `e`.
fn two_square_expected(b: f64, e: f64) -> f64 {
    if b < 0.25 {
        (1.0 + e) * (b / 4.0) * (1.0 - 8.0 * b)
    } else if b < 0.5 {
        -(16.0 * b * b - 14.0 * b + 3.0) / 8.0 + (e / 4.0) * (8.0 * b * b - 11.0 * b + 2.0)
    } else {
        0.5 * (1.0 - 2.0 * b) - 0.375 * e
    }
}

fn component_expected(c: &RectComponent, b: f64) -> f64 {
    let mean_v = 0.5 * (c.v.0 + c.v.1);
    let p_win = if c.m.1 > c.m.0 {
        ((b - c.m.0) / (c.m.1 - c.m.0)).clamp(0.0, 1.0)
    } else if b >= c.m.0 {
        1.0
    } else {
        0.0
    };
    (mean_v - b) * p_win
}

fn mixture_expected(components: &[RectComponent], b: f64) -> f64 {
    components
        .iter()
        .map(|c| c.weight * component_expected(c, b))
        .sum()
}

/// Expected utility of bid `b` under an i.i.d. spec with a closed form.
///
/// Time-varying and atomic variants report [`Error::NoClosedForm`]; use
/// [`expected_utility_at`] for the cyclic mixture.
pub fn expected_utility(spec: &EnvironmentSpec, b: f64) -> Result<f64, Error> {
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::BidOutOfRange(b));
    }
    match spec {
        EnvironmentSpec::Plateau => Ok(plateau_expected(b)),
        EnvironmentSpec::PlateauTent { w, eps } => {
            Ok(plateau_expected(b) + eps / 144.0 * tent(*w, *eps, b))
        }
        EnvironmentSpec::TwoSquare { eps, sign } => Ok(two_square_expected(b, sign.as_f64() * eps)),
        EnvironmentSpec::RectMixture { components } => Ok(mixture_expected(components, b)),
        _ => Err(Error::NoClosedForm),
    }
}

/// Expected utility of bid `b` at round `t` (0-based); equals
/// [`expected_utility`] for every i.i.d. variant.
pub fn expected_utility_at(spec: &EnvironmentSpec, t: u64, b: f64) -> Result<f64, Error> {
    match spec {
        EnvironmentSpec::MixtureCycle { phases } => {
            if !(0.0..=1.0).contains(&b) {
                return Err(Error::BidOutOfRange(b));
            }
            Ok(mixture_expected(
                &phases[(t % phases.len() as u64) as usize],
                b,
            ))
        }
        _ => expected_utility(spec, b),
    }
}

/// Bids worth checking exactly when maximizing the expected utility: known
/// maximizers of the closed forms plus mixture breakpoints and vertices.
pub fn optimal_bid_candidates(spec: &EnvironmentSpec) -> Vec<f64> {
    let mut out = vec![0.0, 1.0];
    match spec {
        EnvironmentSpec::Plateau => out.extend([0.25, 0.5, 0.75]),
        EnvironmentSpec::PlateauTent { w, .. } => out.extend([0.25, 0.5, 0.75, *w]),
        EnvironmentSpec::TwoSquare { .. } => out.extend([1.0 / 16.0, 7.0 / 16.0]),
        EnvironmentSpec::RectMixture { components } => {
            for c in components {
                push_component_candidates(&mut out, c);
            }
        }
        EnvironmentSpec::MixtureCycle { phases } => {
            for phase in phases {
                for c in phase {
                    push_component_candidates(&mut out, c);
                }
            }
        }
        _ => {}
    }
    out
}

fn push_component_candidates(out: &mut Vec<f64>, c: &RectComponent) {
    out.push(c.m.0.clamp(0.0, 1.0));
    out.push(c.m.1.clamp(0.0, 1.0));
    // Vertex of (mean_v - b)(b - m0): the unconstrained quadratic maximizer.
    let vertex = 0.5 * (0.5 * (c.v.0 + c.v.1) + c.m.0);
    out.push(vertex.clamp(c.m.0, c.m.1).clamp(0.0, 1.0));
}

/// Cumulative expected utility of the best fixed bid over `horizon` rounds,
/// maximized over a 10^4-point grid plus the known-maximizer candidates.
pub fn pseudo_optimal_total(spec: &EnvironmentSpec, horizon: u64) -> Result<f64, Error> {
    const GRID: usize = 10_000;
    let mut candidates: Vec<f64> = (0..=GRID).map(|i| i as f64 / GRID as f64).collect();
    candidates.extend(optimal_bid_candidates(spec));
    match spec {
        EnvironmentSpec::MixtureCycle { phases } => {
            let n = phases.len() as u64;
            // Rounds each phase is active over the horizon.
            let counts: Vec<u64> = (0..n)
                .map(|j| horizon / n + u64::from(j < horizon % n))
                .collect();
            let mut best = f64::NEG_INFINITY;
            for &b in &candidates {
                let mut total = 0.0;
                for (phase, &cnt) in phases.iter().zip(&counts) {
                    total += cnt as f64 * mixture_expected(phase, b);
                }
                best = best.max(total);
            }
            Ok(best)
        }
        _ => {
            let mut best = f64::NEG_INFINITY;
            for &b in &candidates {
                best = best.max(expected_utility(spec, b)?);
            }
            Ok(best * horizon as f64)
        }
    }
}

/// Smoothness parameter `sigma = 1 / sup f` of the round distribution, or
/// `None` for variants with atoms.
pub fn smoothness_of(spec: &EnvironmentSpec) -> Option<f64> {
    match spec {
        // Sup of the slab branch (v - m)^-2 at m = v - 1/8.
        EnvironmentSpec::Plateau => Some(1.0 / 64.0),
        EnvironmentSpec::PlateauTent { .. } => Some(1.0 / (64.0 + 16.0 / 9.0)),
        EnvironmentSpec::TwoSquare { eps, sign } => {
            let e = if *sign == Sign::Zero { 0.0 } else { *eps };
            Some(1.0 / (8.0 * (1.0 + e)))
        }
        EnvironmentSpec::RectMixture { components } => {
            mixture_sup_density(components).map(|s| 1.0 / s)
        }
        EnvironmentSpec::MixtureCycle { phases } => {
            let mut worst: f64 = 0.0;
            for p in phases {
                worst = worst.max(mixture_sup_density(p)?);
            }
            Some(1.0 / worst)
        }
        EnvironmentSpec::Needle { .. } | EnvironmentSpec::ShrinkingInterval { .. } => None,
    }
}

/// Sup of the mixture density over the unit square; `None` when a component
/// is degenerate (a point or segment mass has no bounded density).
fn mixture_sup_density(components: &[RectComponent]) -> Option<f64> {
    for c in components {
        if c.weight > 0.0 && (c.v.1 <= c.v.0 || c.m.1 <= c.m.0) {
            return None;
        }
    }
    // Densities are constant on cells of the breakpoint partition; evaluate
    // at cell midpoints.
    let mut vs: Vec<f64> = components.iter().flat_map(|c| [c.v.0, c.v.1]).collect();
    let mut ms: Vec<f64> = components.iter().flat_map(|c| [c.m.0, c.m.1]).collect();
    vs.sort_unstable_by(f64::total_cmp);
    ms.sort_unstable_by(f64::total_cmp);
    let mut sup: f64 = 0.0;
    for vw in vs.windows(2) {
        for mw in ms.windows(2) {
            if vw[1] <= vw[0] || mw[1] <= mw[0] {
                continue;
            }
            let (vmid, mmid) = (0.5 * (vw[0] + vw[1]), 0.5 * (mw[0] + mw[1]));
            let d: f64 = components
                .iter()
                .filter(|c| {
                    c.weight > 0.0
                        && (c.v.0..c.v.1).contains(&vmid)
                        && (c.m.0..c.m.1).contains(&mmid)
                })
                .map(|c| c.weight / ((c.v.1 - c.v.0) * (c.m.1 - c.m.0)))
                .sum();
            sup = sup.max(d);
        }
    }
    Some(sup)
}

/// CDF of the competing-bid marginal, for variants where it is continuous
/// with a closed form. The tent perturbation integrates to zero in every
/// vertical strip, so the plateau and tent variants share one marginal.
pub fn m_cdf(spec: &EnvironmentSpec, x: f64) -> Result<f64, Error> {
    let x = x.clamp(0.0, 1.0);
    match spec {
        EnvironmentSpec::Plateau | EnvironmentSpec::PlateauTent { .. } => Ok(plateau_m_cdf(x)),
        EnvironmentSpec::TwoSquare { eps, sign } => {
            let e = sign.as_f64() * eps;
            let p_low = (1.0 + e) / 2.0;
            Ok(p_low * (4.0 * x).clamp(0.0, 1.0)
                + (1.0 - p_low) * (4.0 * (x - 0.25)).clamp(0.0, 1.0))
        }
        EnvironmentSpec::RectMixture { components } => {
            if components.iter().any(|c| c.m.1 <= c.m.0) {
                return Err(Error::NoClosedForm);
            }
            Ok(components
                .iter()
                .map(|c| c.weight * ((x - c.m.0) / (c.m.1 - c.m.0)).clamp(0.0, 1.0))
                .sum())
        }
        _ => Err(Error::NoClosedForm),
    }
}

fn plateau_m_cdf(m: f64) -> f64 {
    let ln65 = (6.0f64 / 5.0).ln();
    if m < 0.25 {
        4.0 * m * ln65
    } else if m <= 0.75 {
        ((1.0 - m) / (0.875 - m)).ln()
    } else if m <= 0.875 {
        8.0 * m - 6.0 + (8.0 * (1.0 - m)).ln()
    } else {
        1.0
    }
}
