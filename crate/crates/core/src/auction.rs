//! Core auction primitives: rounds, utility, feedback channels, and bid grids.
//!
//! A round of a first-price auction is a pair (valuation, highest competing
//! bid). The bidder wins when its bid is at least the highest competing bid
//! (ties win) and pays its own bid, for a utility of `valuation - bid`.
//! Losing yields zero utility.

use serde::{Deserialize, Serialize};

use crate::Error;

/// One auction round: the bidder's valuation and the highest competing bid.
///
/// Both coordinates live in `[0, 1]`. The pair is generated by the
/// environment and is never shown to the bidder directly; the bidder only
/// sees an [`Observation`] filtered through a [`FeedbackModel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuctionRound {
    pub valuation: f64,
    pub competing_bid: f64,
}

impl AuctionRound {
    pub fn new(valuation: f64, competing_bid: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&valuation));
        debug_assert!((0.0..=1.0).contains(&competing_bid));
        Self {
            valuation,
            competing_bid,
        }
    }
}

/// How much the auctioneer reveals after each round, from richest to poorest.
///
/// The informativeness order is Full >= Transparent >= SemiTransparent >=
/// Bandit: every field revealed under a lower level is also revealed under a
/// higher one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackModel {
    /// Valuation and competing bid are always revealed.
    Full,
    /// Competing bid always revealed; valuation only on won rounds.
    Transparent,
    /// Valuation revealed on won rounds, competing bid on lost rounds; never both.
    SemiTransparent,
    /// Valuation revealed on won rounds; competing bid never revealed.
    Bandit,
}

impl FeedbackModel {
    /// Rank in the informativeness order; higher observes more.
    pub fn rank(self) -> u8 {
        match self {
            FeedbackModel::Full => 3,
            FeedbackModel::Transparent => 2,
            FeedbackModel::SemiTransparent => 1,
            FeedbackModel::Bandit => 0,
        }
    }

    /// True if `self` reveals at least as much as `other` on every round.
    pub fn at_least(self, other: FeedbackModel) -> bool {
        self.rank() >= other.rank()
    }

    pub fn name(self) -> &'static str {
        match self {
            FeedbackModel::Full => "full",
            FeedbackModel::Transparent => "transparent",
            FeedbackModel::SemiTransparent => "semi_transparent",
            FeedbackModel::Bandit => "bandit",
        }
    }
}

/// What the bidder sees after a round. `None` marks a hidden field.
///
/// Under every feedback model the valuation is revealed exactly on won
/// rounds, so the realized utility is always reconstructible from an
/// observation alone (see [`Observation::utility_of`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub valuation: Option<f64>,
    pub competing_bid: Option<f64>,
    pub won: bool,
}

impl Observation {
    /// Reconstructs the realized utility of the bid that produced this
    /// observation: zero on a loss, `valuation - bid` on a win.
    pub fn utility_of(&self, bid: f64) -> f64 {
        if self.won {
            let v = self
                .valuation
                .expect("won rounds reveal the valuation under every feedback model");
            v - bid
        } else {
            0.0
        }
    }
}

/// Utility of posting `bid` against `round`: `(V - b) * I{b >= M}`.
///
/// Ties (`bid == competing_bid`) count as a win.
pub fn utility(round: &AuctionRound, bid: f64) -> Result<f64, Error> {
    check_bid(bid)?;
    Ok(raw_utility(round, bid))
}

/// Same as [`utility`] without the domain check; for hot loops over
/// already-validated bids.
#[inline]
pub fn raw_utility(round: &AuctionRound, bid: f64) -> f64 {
    if bid >= round.competing_bid {
        round.valuation - bid
    } else {
        0.0
    }
}

/// Filters a round through a feedback model into what the bidder observes.
pub fn observe(round: &AuctionRound, bid: f64, model: FeedbackModel) -> Result<Observation, Error> {
    check_bid(bid)?;
    let won = bid >= round.competing_bid;
    let v = round.valuation;
    let m = round.competing_bid;
    let obs = match model {
        FeedbackModel::Full => Observation {
            valuation: Some(v),
            competing_bid: Some(m),
            won,
        },
        FeedbackModel::Transparent => Observation {
            valuation: if won { Some(v) } else { None },
            competing_bid: Some(m),
            won,
        },
        FeedbackModel::SemiTransparent => Observation {
            valuation: if won { Some(v) } else { None },
            competing_bid: if won { None } else { Some(m) },
            won,
        },
        FeedbackModel::Bandit => Observation {
            valuation: if won { Some(v) } else { None },
            competing_bid: None,
            won,
        },
    };
    Ok(obs)
}

fn check_bid(bid: f64) -> Result<(), Error> {
    if !(0.0..=1.0).contains(&bid) {
        return Err(Error::BidOutOfRange(bid));
    }
    Ok(())
}

/// A finite ordered set of candidate bids `0 = x_0 < x_1 < ... < x_K <= 1`.
///
/// The interval lookup maps a bid `b` to the unique cell `k` with
/// `x_k <= b < x_{k+1}`, using a sentinel upper value of 2 for the last cell
/// so that every `b` in `[0, 1]` lands somewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct BidGrid {
    points: Vec<f64>,
}

impl BidGrid {
    /// Builds a grid from arbitrary points: sorts, removes exact duplicates,
    /// and requires the result to start at 0 and stay within `[0, 1]`.
    ///
    /// Deduplication matters because bid-collection procedures can emit
    /// repeated values on tied samples.
    pub fn new(mut points: Vec<f64>) -> Result<Self, Error> {
        if points.is_empty() {
            return Err(Error::EmptyInput("bid grid"));
        }
        if points
            .iter()
            .any(|p| !p.is_finite() || !(0.0..=1.0).contains(p))
        {
            return Err(Error::InvalidParameter(
                "bid grid points must lie in [0,1]".into(),
            ));
        }
        points.sort_unstable_by(f64::total_cmp);
        points.dedup();
        if points[0] != 0.0 {
            return Err(Error::InvalidParameter("bid grid must start at 0".into()));
        }
        Ok(Self { points })
    }

    /// Uniform grid of `n >= 2` points including both endpoints 0 and 1.
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 2, "uniform grid needs at least two points");
        let k = (n - 1) as f64;
        let points = (0..n).map(|j| j as f64 / k).collect();
        Self { points }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest distance from a point of `[0, 1]` to the grid.
    pub fn mesh_radius(&self) -> f64 {
        let mut d: f64 = 1.0 - self.points[self.points.len() - 1];
        for w in self.points.windows(2) {
            d = d.max((w[1] - w[0]) / 2.0);
        }
        d
    }

    /// Interval lookup: the unique `k` with `points[k] <= b < points[k+1]`,
    /// under the sentinel convention `points[K+1] = 2`.
    pub fn lookup(&self, b: f64) -> usize {
        debug_assert!((0.0..=1.0).contains(&b));
        // partition_point gives the first index with points[i] > b.
        self.points.partition_point(|&x| x <= b) - 1
    }
}
