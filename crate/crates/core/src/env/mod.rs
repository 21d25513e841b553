//! Environments generating (valuation, competing bid) sequences.
//!
//! Variants cover generic i.i.d. rectangle mixtures, the smooth hard
//! instances with closed-form expected utilities (a plateau-shaped density,
//! its tent-perturbed version, and a two-square density with a tilt), the
//! needle instance that defeats bandit feedback, a shrinking-interval
//! adversary that defeats everything without smoothness, and a cyclic
//! per-round mixture realizing a smooth adversarial process.
//!
//! Every run is reproducible from the pair (spec, seed).

mod closed_form;

pub use closed_form::{
    expected_utility, expected_utility_at, m_cdf, optimal_bid_candidates, pseudo_optimal_total,
    smoothness_of, tent,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::auction::AuctionRound;
use crate::Error;

/// Default resolution floor for the needle width and the shrinking-interval
/// gap. The exact constructions shrink geometrically past what 64-bit floats
/// can separate; flooring keeps the instances representable while leaving
/// them hard for any learner whose bid set misses the target interval.
pub const RESOLUTION_FLOOR: f64 = 1.0 / (1u64 << 40) as f64;

/// Direction of the tilt applied to the two-square density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    #[serde(alias = "+")]
    Plus,
    #[serde(alias = "-")]
    Minus,
    #[serde(alias = "0")]
    Zero,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
            Sign::Zero => 0.0,
        }
    }
}

/// One component of a rectangle mixture: with probability `weight`, the
/// valuation is uniform on `v` and the competing bid uniform on `m`,
/// independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectComponent {
    pub weight: f64,
    pub v: (f64, f64),
    pub m: (f64, f64),
}

impl RectComponent {
    pub fn new(weight: f64, v: (f64, f64), m: (f64, f64)) -> Self {
        Self { weight, v, m }
    }

    fn validate(&self) -> Result<(), Error> {
        let ok = |(lo, hi): (f64, f64)| (0.0..=1.0).contains(&lo) && lo <= hi && hi <= 1.0;
        if self.weight < 0.0 || !ok(self.v) || !ok(self.m) {
            return Err(Error::InvalidParameter(format!(
                "bad mixture component {self:?}"
            )));
        }
        Ok(())
    }
}

/// Tagged description of a (valuation, competing bid) generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvironmentSpec {
    /// I.i.d. mixture of axis-aligned uniform rectangles.
    RectMixture { components: Vec<RectComponent> },
    /// I.i.d. density with valuations on `[7/8, 1]` and an inverse-square
    /// competing-bid slab; its expected utility has a plateau of maximizers
    /// on `[1/4, 3/4]` of height 1/8.
    Plateau,
    /// The plateau density plus a rectangle perturbation that adds a tent
    /// bump of height `eps/144` to the expected utility, centered at `w`.
    PlateauTent { w: f64, eps: f64 },
    /// Uniform mass 8 on two squares, tilted by `sign * eps`; the expected
    /// utility has two maxima of value 1/128 at 1/16 and 7/16 when untilted.
    TwoSquare { eps: f64, sign: Sign },
    /// A high-value/low-value coin hiding an optimal bid in an interval of
    /// width `eps`; `None` resolves to `max(3^(-2T)/12, RESOLUTION_FLOOR)`
    /// at horizon `T`.
    Needle { eps: Option<f64> },
    /// Oblivious adversary driving a nested interval `[L, U]` that shrinks
    /// by a factor 3 each round until its gap reaches `gap_floor`.
    ShrinkingInterval { gap_floor: f64 },
    /// Smooth adversarial process: round `t` draws from `phases[t % n]`.
    MixtureCycle { phases: Vec<Vec<RectComponent>> },
}

impl EnvironmentSpec {
    /// Uniform draws on the unit square.
    pub fn uniform_square() -> Self {
        EnvironmentSpec::RectMixture {
            components: vec![RectComponent::new(1.0, (0.0, 1.0), (0.0, 1.0))],
        }
    }

    pub fn shrinking_interval() -> Self {
        EnvironmentSpec::ShrinkingInterval {
            gap_floor: RESOLUTION_FLOOR,
        }
    }

    /// Default smooth adversarial cycle: eight sliding uniform rectangles of
    /// density 8 (so the per-round distribution is 1/8-smooth) whose best
    /// bid moves across `[0.3, 0.58]`.
    pub fn default_mixture_cycle() -> Self {
        let phases = (0..8)
            .map(|j| {
                let lo = 0.05 + 0.04 * j as f64;
                vec![RectComponent::new(1.0, (0.5, 1.0), (lo, lo + 0.25))]
            })
            .collect();
        EnvironmentSpec::MixtureCycle { phases }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnvironmentSpec::RectMixture { .. } => "rect_mixture",
            EnvironmentSpec::Plateau => "plateau",
            EnvironmentSpec::PlateauTent { .. } => "plateau_tent",
            EnvironmentSpec::TwoSquare { .. } => "two_square",
            EnvironmentSpec::Needle { .. } => "needle",
            EnvironmentSpec::ShrinkingInterval { .. } => "shrinking_interval",
            EnvironmentSpec::MixtureCycle { .. } => "mixture_cycle",
        }
    }

    /// Whether per-round expected utilities have a closed form (required by
    /// pseudo-regret evaluation).
    pub fn has_closed_form(&self) -> bool {
        !matches!(
            self,
            EnvironmentSpec::Needle { .. } | EnvironmentSpec::ShrinkingInterval { .. }
        )
    }

    pub fn validate(&self) -> Result<(), Error> {
        match self {
            EnvironmentSpec::RectMixture { components } => validate_mixture(components),
            EnvironmentSpec::Plateau => Ok(()),
            EnvironmentSpec::PlateauTent { w, eps } => {
                if *eps < 0.0 || w - eps < 0.25 || w + eps > 0.75 {
                    return Err(Error::InvalidParameter(format!(
                        "tent (w={w}, eps={eps}) outside the admissible band"
                    )));
                }
                Ok(())
            }
            EnvironmentSpec::TwoSquare { eps, sign } => {
                let lim = if *sign == Sign::Zero { 0.0 } else { 0.5 };
                if !(0.0..=0.5).contains(eps) || (*sign != Sign::Zero && *eps <= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "two-square tilt eps={eps} invalid (sign {sign:?}, needs (0, {lim}])"
                    )));
                }
                Ok(())
            }
            EnvironmentSpec::Needle { eps } => {
                if let Some(e) = eps {
                    if !(0.0 < *e && *e < 1.0 / 6.0) {
                        return Err(Error::InvalidParameter(format!(
                            "needle width {e} outside (0, 1/6)"
                        )));
                    }
                }
                Ok(())
            }
            EnvironmentSpec::ShrinkingInterval { gap_floor } => {
                if !(0.0 < *gap_floor && *gap_floor < 1.0 / 6.0) {
                    return Err(Error::InvalidParameter(format!(
                        "gap floor {gap_floor} outside (0, 1/6)"
                    )));
                }
                Ok(())
            }
            EnvironmentSpec::MixtureCycle { phases } => {
                if phases.is_empty() {
                    return Err(Error::EmptyInput("mixture cycle phases"));
                }
                phases.iter().try_for_each(|p| validate_mixture(p))
            }
        }
    }
}

fn validate_mixture(components: &[RectComponent]) -> Result<(), Error> {
    if components.is_empty() {
        return Err(Error::EmptyInput("mixture components"));
    }
    components.iter().try_for_each(RectComponent::validate)?;
    let total: f64 = components.iter().map(|c| c.weight).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "mixture weights sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// Per-variant mutable state.
#[derive(Debug, Clone)]
enum StateKind {
    Iid,
    Needle { b_star: f64, eps: f64 },
    Shrinking { lower: f64, upper: f64, floor: f64 },
    Cycle { t: u64 },
}

/// A seeded, single-owner generator of auction rounds.
#[derive(Debug, Clone)]
pub struct Environment {
    spec: EnvironmentSpec,
    rng: ChaCha8Rng,
    state: StateKind,
}

impl Environment {
    /// Builds the environment from its spec and a 64-bit seed. `horizon` is
    /// only used to resolve the default needle width.
    pub fn new(spec: EnvironmentSpec, seed: u64, horizon: u64) -> Result<Self, Error> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = match &spec {
            EnvironmentSpec::Needle { eps } => {
                let eps = eps.unwrap_or_else(|| default_needle_eps(horizon));
                // The seed bid hides in (1/3, 1/2 - eps).
                let lo = 1.0 / 3.0;
                let hi = 0.5 - eps;
                let b_star = lo + rng.random::<f64>() * (hi - lo);
                StateKind::Needle { b_star, eps }
            }
            EnvironmentSpec::ShrinkingInterval { gap_floor } => StateKind::Shrinking {
                lower: 0.5,
                upper: 2.0 / 3.0,
                floor: *gap_floor,
            },
            EnvironmentSpec::MixtureCycle { .. } => StateKind::Cycle { t: 0 },
            _ => StateKind::Iid,
        };
        Ok(Self { spec, rng, state })
    }

    pub fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    /// The hidden seed bid of a needle instance (test/evaluation use only;
    /// never shown to policies).
    pub fn needle_target(&self) -> Option<(f64, f64)> {
        match &self.state {
            StateKind::Needle { b_star, eps } => Some((*b_star, *eps)),
            _ => None,
        }
    }

    /// Current shrinking-interval bounds (test/evaluation use only).
    pub fn interval(&self) -> Option<(f64, f64)> {
        match &self.state {
            StateKind::Shrinking { lower, upper, .. } => Some((*lower, *upper)),
            _ => None,
        }
    }

    /// Draws the next round and advances the state.
    pub fn next_round(&mut self) -> AuctionRound {
        match (&self.spec, &mut self.state) {
            (EnvironmentSpec::RectMixture { components }, _) => {
                sample_mixture(components, &mut self.rng)
            }
            (EnvironmentSpec::Plateau, _) => sample_plateau(&mut self.rng),
            (EnvironmentSpec::PlateauTent { w, eps }, _) => {
                sample_plateau_tent(*w, *eps, &mut self.rng)
            }
            (EnvironmentSpec::TwoSquare { eps, sign }, _) => {
                sample_two_square(sign.as_f64() * eps, &mut self.rng)
            }
            (EnvironmentSpec::Needle { .. }, StateKind::Needle { b_star, eps }) => {
                if self.rng.random::<f64>() < 0.5 {
                    AuctionRound::new(1.0, *b_star)
                } else {
                    AuctionRound::new(0.0, *b_star + *eps)
                }
            }
            (
                EnvironmentSpec::ShrinkingInterval { .. },
                StateKind::Shrinking {
                    lower,
                    upper,
                    floor,
                },
            ) => {
                let take_lower = self.rng.random::<f64>() < 0.5;
                let (l, u) = shrink_step(*lower, *upper, *floor, take_lower);
                *lower = l;
                *upper = u;
                if self.rng.random::<f64>() < 0.5 {
                    AuctionRound::new(1.0, l)
                } else {
                    AuctionRound::new(0.0, u)
                }
            }
            (EnvironmentSpec::MixtureCycle { phases }, StateKind::Cycle { t }) => {
                let phase = &phases[(*t % phases.len() as u64) as usize];
                *t += 1;
                sample_mixture(phase, &mut self.rng)
            }
            _ => unreachable!("state kind always matches the spec variant"),
        }
    }
}

/// Needle width for horizon `T`: the exact value `3^(-2T)/12` underflows for
/// realistic horizons, so it is floored at [`RESOLUTION_FLOOR`].
pub fn default_needle_eps(horizon: u64) -> f64 {
    let exact = (-2.0 * horizon as f64 * 3f64.ln()).exp() / 12.0;
    exact.max(RESOLUTION_FLOOR)
}

/// One interval update of the shrinking adversary. Either endpoint moves
/// two-thirds of the gap toward the other, so the gap shrinks by a factor 3;
/// once a further shrink would push the gap below `floor`, the interval
/// freezes. Endpoint monotonicity is exact in floating point because the
/// untouched endpoint is left bit-identical.
pub fn shrink_step(lower: f64, upper: f64, floor: f64, take_lower: bool) -> (f64, f64) {
    let delta = upper - lower;
    if delta / 3.0 < floor {
        return (lower, upper);
    }
    let step = 2.0 / 3.0 * delta;
    if take_lower {
        (lower + step, upper)
    } else {
        (lower, upper - step)
    }
}

fn sample_uniform<R: Rng + ?Sized>(range: (f64, f64), rng: &mut R) -> f64 {
    if range.1 > range.0 {
        range.0 + rng.random::<f64>() * (range.1 - range.0)
    } else {
        range.0
    }
}

fn sample_mixture<R: Rng + ?Sized>(components: &[RectComponent], rng: &mut R) -> AuctionRound {
    let mut r: f64 = rng.random();
    let mut chosen = &components[components.len() - 1];
    for c in components {
        if r < c.weight {
            chosen = c;
            break;
        }
        r -= c.weight;
    }
    AuctionRound::new(sample_uniform(chosen.v, rng), sample_uniform(chosen.m, rng))
}

/// Density of the plateau instance at `(v, m)`:
/// `(v-m)^-2` on the slab `1/4 <= m <= v - 1/8`, `4/(v - 1/4)` on `m < 1/4`,
/// both confined to `v` in `[7/8, 1]`.
fn plateau_density(v: f64, m: f64) -> f64 {
    if !(0.875..=1.0).contains(&v) {
        return 0.0;
    }
    if m < 0.25 {
        4.0 / (v - 0.25)
    } else if m <= v - 0.125 {
        let d = v - m;
        1.0 / (d * d)
    } else {
        0.0
    }
}

/// Draws from the plateau density: the valuation marginal is uniform on
/// `[7/8, 1]`; given `V = v`, the competing bid falls in `[0, 1/4)` with
/// probability `c/8` for `c = 1/(v - 1/4)` (uniformly), otherwise on the
/// slab via the inverse CDF `m = v - 1/(c + u(8 - c))`.
fn sample_plateau<R: Rng + ?Sized>(rng: &mut R) -> AuctionRound {
    let v = 0.875 + rng.random::<f64>() * 0.125;
    let c = 1.0 / (v - 0.25);
    let m = if rng.random::<f64>() < c / 8.0 {
        rng.random::<f64>() * 0.25
    } else {
        let u: f64 = rng.random();
        v - 1.0 / (c + u * (8.0 - c))
    };
    AuctionRound::new(v, m)
}

/// Signed perturbation added to the plateau density: `+16/9` on the
/// rectangles that shift utility mass toward `w`, `-16/9` on the two that
/// take it away. Integrates to zero.
fn tent_perturbation(w: f64, eps: f64, v: f64, m: f64) -> f64 {
    const A: f64 = 16.0 / 9.0;
    if eps <= 0.0 || !(0.875..=1.0).contains(&v) {
        return 0.0;
    }
    let outer = v >= 0.9375;
    if m >= w - eps && m < w {
        if outer {
            A
        } else {
            -A
        }
    } else if m >= w && m < w + eps {
        if outer {
            -A
        } else {
            A
        }
    } else {
        0.0
    }
}

/// Rejection sampler for the perturbed density `f + g`. The proposal is the
/// plateau density `f` with envelope constant 2: on the perturbed region
/// `f = (v-m)^-2 >= 16/9` because `v - m <= 3/4` there, hence
/// `f + g <= 2f`. Acceptance probability is 1/2 on average.
fn sample_plateau_tent<R: Rng + ?Sized>(w: f64, eps: f64, rng: &mut R) -> AuctionRound {
    loop {
        let round = sample_plateau(rng);
        let f = plateau_density(round.valuation, round.competing_bid);
        let fp = f + tent_perturbation(w, eps, round.valuation, round.competing_bid);
        if rng.random::<f64>() * (2.0 * f) <= fp {
            return round;
        }
    }
}

/// Draws from the two-square density with signed tilt `e`: a uniform point
/// of the low square `(0, 1/4)^2`, translated by `(3/4, 1/4)` into the high
/// square with probability `(1 - e)/2`.
fn sample_two_square<R: Rng + ?Sized>(e: f64, rng: &mut R) -> AuctionRound {
    let v = rng.random::<f64>() * 0.25;
    let m = rng.random::<f64>() * 0.25;
    if rng.random::<f64>() < (1.0 - e) / 2.0 {
        AuctionRound::new(v + 0.75, m + 0.25)
    } else {
        AuctionRound::new(v, m)
    }
}
