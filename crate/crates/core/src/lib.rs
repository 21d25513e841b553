//! Simulation library for repeated bidding in first-price auctions with
//! unknown valuations.
//!
//! The crate provides:
//!
//! - [`auction`]: the round/utility/feedback primitives shared by everything;
//! - [`env`]: stochastic and adversarial generators of (valuation, competing
//!   bid) sequences, including the hard instances with closed-form expected
//!   utilities;
//! - [`bandit`]: finite-armed learners (a rescaled MOSS and an exponential
//!   weights learner exploiting one-sided revelation of the competing bid);
//! - [`policy`]: full bidding strategies assembled from the learners;
//! - [`eval`]: regret computation (hindsight and pseudo benchmarks),
//!   deviation statistics, and log-log rate estimation.

pub mod auction;
pub mod bandit;
pub mod env;
pub mod eval;
pub mod policy;

use thiserror::Error as ThisError;

/// Errors shared across the library.
#[derive(Debug, ThisError)]
pub enum Error {
    #[error("bid {0} outside [0, 1]")]
    BidOutOfRange(f64),
    #[error("reward {0} outside [-1, 1]")]
    RewardOutOfRange(f64),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("feedback contract violated: {0}")]
    FeedbackContract(&'static str),
    #[error("policy `{policy}` requires at least {required} feedback, got {got}")]
    IncompatibleFeedback {
        policy: String,
        required: &'static str,
        got: &'static str,
    },
    #[error("no closed form available for this environment")]
    NoClosedForm,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
