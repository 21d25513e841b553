//! Full bidding strategies assembled from the finite-armed learners, plus
//! the harness that runs a policy against an environment under a feedback
//! model.
//!
//! Every policy emits bids in `[0, 1]` and consumes exactly one observation
//! per round. Policies never read a field their declared feedback model
//! hides: observations are produced by [`crate::auction::observe`] and the
//! runner refuses policy/feedback pairs below the policy's requirement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::auction::{observe, FeedbackModel, Observation};
use crate::bandit::{gamma_for, Exp3Fpa, Moss};
use crate::env::{Environment, EnvironmentSpec};
use crate::eval::RegretTrace;
use crate::Error;

/// Smallest `k` with `k*k >= t`.
pub fn ceil_sqrt(t: u64) -> u64 {
    let mut k = (t as f64).sqrt().ceil() as u64;
    while k > 0 && (k - 1) as u128 * (k - 1) as u128 >= t as u128 {
        k -= 1;
    }
    while (k as u128) * (k as u128) < t as u128 {
        k += 1;
    }
    k
}

/// Smallest `k` with `k^3 >= t`.
pub fn ceil_cbrt(t: u64) -> u64 {
    let mut k = (t as f64).cbrt().ceil() as u64;
    while k > 0 && (k - 1) as u128 * (k - 1) as u128 * (k - 1) as u128 >= t as u128 {
        k -= 1;
    }
    while (k as u128) * (k as u128) * (k as u128) < (t as u128) {
        k += 1;
    }
    k
}

/// `ceil(t^(2/3))`, computed exactly in integers.
pub fn ceil_pow_two_thirds(t: u64) -> u64 {
    let target = (t as u128) * (t as u128);
    let mut k = (t as f64).powf(2.0 / 3.0).ceil() as u64;
    while k > 0 && ((k - 1) as u128).pow(3) >= target {
        k -= 1;
    }
    while (k as u128).pow(3) < target {
        k += 1;
    }
    k
}

/// Selects candidate bids from a batch of observed competing bids.
///
/// With `s = ceil(sqrt(T0))`, the sorted samples are walked in hops: from
/// the last index holding the previous candidate's value, jump `s` positions
/// (capped at `T0`) and take the sample there. The virtual sample `M^(0) = 0`
/// seeds the walk, so the output always starts at 0; an all-zero batch
/// returns just `{0}`. The raw walk can emit a value twice on heavy ties,
/// so the output is deduplicated (which cannot hurt the gap guarantee:
/// duplicates bound an empty interval).
///
/// Guarantees, for `s = ceil(sqrt(T0))`: at most `s + 1` candidates, and
/// fewer than `s` samples strictly between consecutive candidates.
pub fn collect_bids(samples: &[f64]) -> Result<Vec<f64>, Error> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("competing-bid samples"));
    }
    let t0 = samples.len();
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    if sorted[t0 - 1] == 0.0 {
        return Ok(vec![0.0]);
    }
    let step = ceil_sqrt(t0 as u64) as usize;
    // One-based order statistics with the virtual zero at index 0.
    let stat = |j: usize| -> f64 {
        if j == 0 {
            0.0
        } else {
            sorted[j - 1]
        }
    };
    let mut out = vec![0.0];
    let mut j_star = 0usize;
    while stat(j_star + 1) == 0.0 && j_star < t0 {
        j_star += 1;
    }
    loop {
        let j_i = (j_star + step).min(t0);
        let x_i = stat(j_i);
        out.push(x_i);
        if j_i == t0 {
            break;
        }
        j_star = j_i;
        while j_star < t0 && stat(j_star + 1) == x_i {
            j_star += 1;
        }
    }
    out.dedup();
    Ok(out)
}

/// Which bidding strategy to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicySpec {
    /// Two phases: collect competing bids with dummy zero bids for
    /// `ceil(T^(2/3))` rounds, then run MOSS over the collected candidates.
    Coba,
    /// Epoch-doubling wrapper: each epoch restarts an exponential-weights
    /// learner on the grid of all competing bids observed so far (plus 0).
    #[serde(rename = "wtfpa")]
    WtFpa,
    /// MOSS on a uniform grid with mesh `T^(-1/3)`.
    DiscretizedBandit,
    /// Exponential-weights learner on a uniform grid of `ceil(sqrt(T)) + 1`
    /// bids.
    DiscretizedTransparent,
    /// Always posts the same bid.
    FixedBid { bid: f64 },
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Coba => "coba",
            PolicySpec::WtFpa => "wtfpa",
            PolicySpec::DiscretizedBandit => "discretized_bandit",
            PolicySpec::DiscretizedTransparent => "discretized_transparent",
            PolicySpec::FixedBid { .. } => "fixed_bid",
        }
    }

    /// Least informative feedback the policy can run under.
    pub fn min_feedback(&self) -> FeedbackModel {
        match self {
            // Phase 1 needs the competing bid revealed on lost rounds.
            PolicySpec::Coba => FeedbackModel::SemiTransparent,
            PolicySpec::WtFpa | PolicySpec::DiscretizedTransparent => FeedbackModel::Transparent,
            PolicySpec::DiscretizedBandit | PolicySpec::FixedBid { .. } => FeedbackModel::Bandit,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if let PolicySpec::FixedBid { bid } = self {
            if !(0.0..=1.0).contains(bid) {
                return Err(Error::BidOutOfRange(*bid));
            }
        }
        Ok(())
    }
}

/// Instantiated policy state machine.
#[derive(Debug, Clone)]
pub enum Policy {
    Coba(Coba),
    WtFpa(WtFpa),
    Discretized(Discretized),
    Fixed(f64),
}

impl Policy {
    pub fn new(spec: &PolicySpec, horizon: u64) -> Result<Self, Error> {
        spec.validate()?;
        if horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be positive".into()));
        }
        Ok(match spec {
            PolicySpec::Coba => Policy::Coba(Coba::new(horizon)),
            PolicySpec::WtFpa => Policy::WtFpa(WtFpa::new(horizon)?),
            PolicySpec::DiscretizedBandit => {
                let points = uniform_points(ceil_cbrt(horizon) as usize + 1);
                Policy::Discretized(Discretized::bandit(points, horizon))
            }
            PolicySpec::DiscretizedTransparent => {
                let points = uniform_points(ceil_sqrt(horizon) as usize + 1);
                Policy::Discretized(Discretized::transparent(points, horizon)?)
            }
            PolicySpec::FixedBid { bid } => Policy::Fixed(*bid),
        })
    }

    pub fn next_bid<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        match self {
            Policy::Coba(p) => p.next_bid(),
            Policy::WtFpa(p) => p.next_bid(rng),
            Policy::Discretized(p) => p.next_bid(rng),
            Policy::Fixed(b) => *b,
        }
    }

    pub fn absorb(&mut self, bid: f64, obs: &Observation) -> Result<(), Error> {
        match self {
            Policy::Coba(p) => p.absorb(bid, obs),
            Policy::WtFpa(p) => p.absorb(obs),
            Policy::Discretized(p) => p.absorb(bid, obs),
            Policy::Fixed(_) => Ok(()),
        }
    }
}

fn uniform_points(n: usize) -> Vec<f64> {
    let k = (n - 1).max(1) as f64;
    (0..n).map(|j| j as f64 / k).collect()
}

/// Collecting-bandit policy: dummy-bid collection phase, then MOSS over the
/// collected candidate bids for the remaining rounds.
#[derive(Debug, Clone)]
pub struct Coba {
    horizon: u64,
    t0: u64,
    rounds_done: u64,
    seen: Vec<f64>,
    arms: Vec<f64>,
    moss: Option<Moss>,
    last_arm: usize,
}

impl Coba {
    fn new(horizon: u64) -> Self {
        let t0 = ceil_pow_two_thirds(horizon).min(horizon);
        Self {
            horizon,
            t0,
            rounds_done: 0,
            seen: Vec::with_capacity(t0 as usize),
            arms: Vec::new(),
            moss: None,
            last_arm: 0,
        }
    }

    pub fn collection_rounds(&self) -> u64 {
        self.t0
    }

    pub fn candidate_bids(&self) -> &[f64] {
        &self.arms
    }

    fn next_bid(&mut self) -> f64 {
        if self.rounds_done < self.t0 {
            return 0.0;
        }
        if self.moss.is_none() {
            self.arms = collect_bids(&self.seen).expect("collection phase saw t0 >= 1 samples");
            self.moss = Some(Moss::new(self.arms.len(), self.horizon - self.t0));
        }
        let moss = self.moss.as_ref().unwrap();
        self.last_arm = moss.select();
        self.arms[self.last_arm]
    }

    fn absorb(&mut self, bid: f64, obs: &Observation) -> Result<(), Error> {
        if self.rounds_done < self.t0 {
            // A win at bid 0 implies the competing bid was exactly 0, so the
            // hidden field costs nothing; on a loss the semi-transparent
            // feedback reveals it.
            let m = if obs.won {
                0.0
            } else {
                obs.competing_bid.ok_or(Error::FeedbackContract(
                    "collection phase needs the competing bid on lost rounds",
                ))?
            };
            self.seen.push(m);
        } else {
            let moss = self.moss.as_mut().expect("phase two started by next_bid");
            moss.update(self.last_arm, obs.utility_of(bid))?;
        }
        self.rounds_done += 1;
        Ok(())
    }
}

/// Epoch-doubling wrapper around exponential-weights learners for
/// transparent feedback. Epoch `tau` lasts `2^(tau-1)` rounds (truncated by
/// the horizon) and restarts the learner on `{0}` joined with every
/// competing bid observed before the epoch; the exploration rate is tuned
/// for the nominal epoch length.
#[derive(Debug, Clone)]
pub struct WtFpa {
    horizon: u64,
    rounds_done: u64,
    epoch: u32,
    epoch_end: u64,
    seen: Vec<f64>,
    learner: Exp3Fpa,
    last_idx: usize,
}

impl WtFpa {
    fn new(horizon: u64) -> Result<Self, Error> {
        let learner = Exp3Fpa::new(vec![0.0], gamma_for(1, 1))?;
        Ok(Self {
            horizon,
            rounds_done: 0,
            epoch: 1,
            epoch_end: 1.min(horizon),
            seen: Vec::new(),
            learner,
            last_idx: 0,
        })
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn current_points(&self) -> &[f64] {
        self.learner.points()
    }

    fn next_bid<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        self.last_idx = self.learner.sample(rng);
        self.learner.points()[self.last_idx]
    }

    fn absorb(&mut self, obs: &Observation) -> Result<(), Error> {
        let m = obs.competing_bid.ok_or(Error::FeedbackContract(
            "epoch wrapper needs the competing bid every round",
        ))?;
        self.learner.update(self.last_idx, obs)?;
        self.seen.push(m);
        self.rounds_done += 1;
        if self.rounds_done == self.epoch_end && self.rounds_done < self.horizon {
            self.epoch += 1;
            let nominal = 1u64 << (self.epoch - 1);
            let mut grid = self.seen.clone();
            grid.push(0.0);
            grid.sort_unstable_by(f64::total_cmp);
            grid.dedup();
            let gamma = gamma_for(grid.len(), nominal);
            self.learner = Exp3Fpa::new(grid, gamma)?;
            self.epoch_end = (self.rounds_done + nominal).min(self.horizon);
        }
        Ok(())
    }
}

/// A single finite-armed learner on a fixed uniform grid.
#[derive(Debug, Clone)]
pub struct Discretized {
    points: Vec<f64>,
    base: DiscretizedBase,
    last_arm: usize,
}

#[derive(Debug, Clone)]
enum DiscretizedBase {
    Moss(Moss),
    Exp3(Exp3Fpa),
}

impl Discretized {
    fn bandit(points: Vec<f64>, horizon: u64) -> Self {
        let moss = Moss::new(points.len(), horizon);
        Self {
            points,
            base: DiscretizedBase::Moss(moss),
            last_arm: 0,
        }
    }

    fn transparent(points: Vec<f64>, horizon: u64) -> Result<Self, Error> {
        let gamma = gamma_for(points.len(), horizon);
        let learner = Exp3Fpa::new(points.clone(), gamma)?;
        Ok(Self {
            points,
            base: DiscretizedBase::Exp3(learner),
            last_arm: 0,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.points
    }

    fn next_bid<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        self.last_arm = match &self.base {
            DiscretizedBase::Moss(m) => m.select(),
            DiscretizedBase::Exp3(e) => e.sample(rng),
        };
        self.points[self.last_arm]
    }

    fn absorb(&mut self, bid: f64, obs: &Observation) -> Result<(), Error> {
        match &mut self.base {
            DiscretizedBase::Moss(m) => m.update(self.last_arm, obs.utility_of(bid)),
            DiscretizedBase::Exp3(e) => e.update(self.last_arm, obs),
        }
    }
}

/// Runs one policy against one environment for `horizon` rounds.
///
/// Rejects feedback models below the policy's requirement. The environment
/// and the policy draw from independent streams of the same seed, so a run
/// is reproducible from `(env_spec, policy_spec, feedback, horizon, seed)`.
pub fn run_policy(
    env_spec: &EnvironmentSpec,
    policy_spec: &PolicySpec,
    feedback: FeedbackModel,
    horizon: u64,
    seed: u64,
) -> Result<RegretTrace, Error> {
    let required = policy_spec.min_feedback();
    if !feedback.at_least(required) {
        return Err(Error::IncompatibleFeedback {
            policy: policy_spec.name().into(),
            required: required.name(),
            got: feedback.name(),
        });
    }
    let mut env = Environment::new(env_spec.clone(), seed, horizon)?;
    let mut policy = Policy::new(policy_spec, horizon)?;
    let mut policy_rng = ChaCha8Rng::seed_from_u64(seed);
    policy_rng.set_stream(1);
    let mut trace = RegretTrace::with_capacity(horizon as usize);
    for _ in 0..horizon {
        let round = env.next_round();
        let bid = policy.next_bid(&mut policy_rng);
        debug_assert!((0.0..=1.0).contains(&bid));
        let obs = observe(&round, bid, feedback)?;
        policy.absorb(bid, &obs)?;
        trace.record(round, bid, obs.utility_of(bid));
    }
    Ok(trace)
}
