//! The three equivalent hypercube learners and the `{-1,+1}^n` adapter.

mod exp2;
mod omd;
mod polyexp;
mod signed;

use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::bandit::MomentMatrix;
use crate::cube::{CubePoint, LossVector};
use crate::error::{Error, Result};

pub use exp2::{exp2_distribution, exp2_sample, Exp2Distribution, Exp2Learner, EXP2_MAX_DIM};
pub use omd::{
    bregman_divergence, entropic_f, entropic_f_gradient, fenchel_f_star, fenchel_f_star_gradient,
    omd_step,
};
pub use polyexp::{polyexp_init, polyexp_means, polyexp_update, PolyExp};
pub use signed::{signed_cube_regret, signed_cube_wrap, SignedCubeLearner, SignedRound};

/// Which learner family a parameter set or experiment refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "polyexp")]
    PolyExp,
    #[serde(rename = "exp2")]
    Exp2Reference,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::PolyExp => f.write_str("polyexp"),
            Algorithm::Exp2Reference => f.write_str("exp2"),
        }
    }
}

/// A learner over `{0,1}^n` driven by (possibly estimated) linear losses.
pub trait Learner: Send {
    fn dim(&self) -> usize;

    fn eta(&self) -> f64;

    /// `E[X]` under the current sampling distribution.
    fn means(&self) -> MeanVector;

    /// Draw a vertex from the current (unmixed) distribution.
    fn sample(&self, rng: &mut dyn RngCore) -> CubePoint;

    /// `E[X X^T]` under the current (unmixed) distribution.
    fn second_moment(&self) -> MomentMatrix;

    fn update(&mut self, estimate: &LossVector) -> Result<()>;
}

/// Per-coordinate Bernoulli means, `x in [0,1]^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanVector {
    x: Vec<f64>,
}

impl MeanVector {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if let Some(i) = x.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter(format!(
                "mean coordinate {i} = {} lies outside [0, 1]",
                x[i]
            )));
        }
        Ok(Self { x })
    }

    pub fn uniform(n: usize) -> Self {
        Self { x: vec![0.5; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.x[i]
    }

    /// Error naming the first coordinate that sits on `{0, 1}`.
    pub fn require_interior(&self) -> Result<()> {
        match self.x.iter().position(|&v| v <= 0.0 || v >= 1.0) {
            Some(index) => Err(Error::BoundaryPoint {
                index,
                value: self.x[index],
            }),
            None => Ok(()),
        }
    }

    /// Probability of `vertex` under the product of Bernoulli(x_i).
    pub fn product_probability(&self, vertex: &CubePoint) -> f64 {
        self.x
            .iter()
            .zip(vertex.bits())
            .map(|(&p, &b)| if b == 1 { p } else { 1.0 - p })
            .product()
    }
}

/// Independent Bernoulli(x_i) draw per coordinate.
pub fn bernoulli_product_sample<R: Rng + ?Sized>(x: &MeanVector, rng: &mut R) -> CubePoint {
    let bits: Vec<bool> = x
        .values()
        .iter()
        .map(|&p| rng.random::<f64>() < p)
        .collect();
    CubePoint::from_bools(&bits)
}

/// `1 / (1 + exp(-z))` without overflow for any finite `z`.
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow for any finite `z`.
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// `log(sum_k exp(v_k))` with max shift.
pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}
