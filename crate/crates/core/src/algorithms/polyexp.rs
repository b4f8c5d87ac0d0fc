use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{bernoulli_product_sample, sigmoid, Learner, MeanVector};
use crate::bandit::{second_moment_product, MomentMatrix};
use crate::cube::{check_dim, CubePoint, LossVector};
use crate::error::{Error, Result};

/// PolyExp learner state.
///
/// Stores `theta_i = eta * sum_tau estimate_{i,tau}`; the Bernoulli means are
/// `x_i = 1 / (1 + exp(theta_i))`, evaluated on demand. Keeping the scaled
/// cumulative loss instead of the means makes every round an exact
/// evaluation of the closed form rather than a product of incremental
/// updates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyExp {
    theta: Vec<f64>,
    eta: f64,
}

impl PolyExp {
    pub fn new(n: usize, eta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eta must be > 0, got {eta}"
            )));
        }
        Ok(Self {
            theta: vec![0.0; n],
            eta,
        })
    }

    /// State whose means are `x`; every coordinate must be interior.
    pub fn from_means(x: &MeanVector, eta: f64) -> Result<Self> {
        x.require_interior()?;
        let mut state = Self::new(x.len(), eta)?;
        for (t, &xi) in state.theta.iter_mut().zip(x.values()) {
            *t = (1.0 - xi).ln() - xi.ln();
        }
        Ok(state)
    }

    pub fn from_theta(theta: Vec<f64>, eta: f64) -> Result<Self> {
        let mut state = Self::new(theta.len(), eta)?;
        state.theta = theta;
        Ok(state)
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// `x_i = 1 / (1 + exp(theta_i))`.
    pub fn mean_values(&self) -> Vec<f64> {
        self.theta.iter().map(|&t| sigmoid(-t)).collect()
    }

    /// `log P(X = vertex)` under the product distribution, accurate even
    /// when individual means round to 0 or 1.
    pub fn log_probability(&self, vertex: &CubePoint) -> f64 {
        self.theta
            .iter()
            .zip(vertex.bits())
            .map(|(&t, &b)| {
                // log x = -softplus(theta), log(1 - x) = -softplus(-theta)
                if b == 1 {
                    -super::softplus(t)
                } else {
                    -super::softplus(-t)
                }
            })
            .sum()
    }

    /// Adds `eta * estimate` to the scaled cumulative loss.
    pub fn apply(&mut self, estimate: &LossVector) -> Result<()> {
        check_dim(self.theta.len(), estimate.len())?;
        for (t, &l) in self.theta.iter_mut().zip(estimate.values()) {
            *t += self.eta * l;
        }
        Ok(())
    }
}

impl Learner for PolyExp {
    fn dim(&self) -> usize {
        self.theta.len()
    }

    fn eta(&self) -> f64 {
        self.eta
    }

    fn means(&self) -> MeanVector {
        polyexp_means(self)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> CubePoint {
        bernoulli_product_sample(&self.means(), rng)
    }

    fn second_moment(&self) -> MomentMatrix {
        second_moment_product(&self.means())
    }

    fn update(&mut self, estimate: &LossVector) -> Result<()> {
        self.apply(estimate)
    }
}

pub fn polyexp_init(n: usize, eta: f64) -> Result<PolyExp> {
    PolyExp::new(n, eta)
}

pub fn polyexp_means(state: &PolyExp) -> MeanVector {
    MeanVector {
        x: state.mean_values(),
    }
}

pub fn polyexp_update(state: &PolyExp, estimate: &LossVector) -> Result<PolyExp> {
    let mut next = state.clone();
    next.apply(estimate)?;
    Ok(next)
}
