//! Finite-armed learners used as subroutines by the bidding policies.

mod exp3_fpa;
mod moss;

pub use exp3_fpa::{gamma_for, reward_estimates, Exp3Fpa};
pub use moss::Moss;
