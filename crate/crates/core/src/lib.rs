//! Online linear optimization on the `{0,1}^n` hypercube.
//!
//! The crate provides three learners that induce the same sampling
//! distribution at every round:
//!
//! - [`algorithms::PolyExp`]: `n` Bernoulli means updated coordinate-wise,
//!   polynomial in `n` per round. This is the production learner.
//! - [`algorithms::Exp2Learner`]: exponential weights over all `2^n` vertices.
//!   Exponential time and memory, kept as a reference for small `n`.
//! - [`algorithms::omd_step`]: online mirror descent with the entropic
//!   regularizer on `[0,1]^n`, which produces the same mean update.
//!
//! Around them sit the bandit estimator machinery ([`bandit`]), the loss
//! generating opponents ([`adversaries`]), enumeration-based ground truth
//! ([`oracle`]) and a Monte Carlo regret harness with closed-form bounds
//! ([`harness`]).

pub mod adversaries;
pub mod algorithms;
pub mod bandit;
pub mod cube;
pub mod error;
pub mod harness;
pub mod oracle;

pub use cube::{
    best_in_hindsight, from_signed, linear_loss, realized_regret, to_signed, CubePoint,
    CumulativeLoss, Feedback, GameConfig, GameRecord, LossVector, SignedCubePoint,
};
pub use error::{Error, Result};
