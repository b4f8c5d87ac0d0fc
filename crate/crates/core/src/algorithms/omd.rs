//! Online mirror descent on `[0,1]^n` with the entropic regularizer
//! `F(x) = sum_i x_i log x_i + (1 - x_i) log(1 - x_i)`.

use super::{sigmoid, softplus, MeanVector};
use crate::cube::{check_dim, LossVector};
use crate::error::Result;

fn xlogx(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * v.ln()
    }
}

/// `F(x)`, with `0 log 0 = 0` on the boundary.
pub fn entropic_f(x: &MeanVector) -> f64 {
    x.values().iter().map(|&v| xlogx(v) + xlogx(1.0 - v)).sum()
}

/// `grad F(x)_i = log x_i - log(1 - x_i)`; undefined on the boundary.
pub fn entropic_f_gradient(x: &MeanVector) -> Result<Vec<f64>> {
    x.require_interior()?;
    Ok(x.values()
        .iter()
        .map(|&v| v.ln() - (1.0 - v).ln())
        .collect())
}

/// `F*(theta) = sum_i log(1 + exp(theta_i))`.
pub fn fenchel_f_star(theta: &[f64]) -> f64 {
    theta.iter().map(|&t| softplus(t)).sum()
}

/// `grad F*(theta)_i = 1 / (1 + exp(-theta_i))`.
pub fn fenchel_f_star_gradient(theta: &[f64]) -> MeanVector {
    MeanVector {
        x: theta.iter().map(|&t| sigmoid(t)).collect(),
    }
}

/// One mirror step `grad F*(grad F(x) - eta * estimate)`.
///
/// The image of `grad F*` already lies in `[0,1]^n`, so no Bregman
/// projection follows.
pub fn omd_step(x: &MeanVector, estimate: &LossVector, eta: f64) -> Result<MeanVector> {
    check_dim(x.len(), estimate.len())?;
    let mut dual = entropic_f_gradient(x)?;
    for (d, &l) in dual.iter_mut().zip(estimate.values()) {
        *d -= eta * l;
    }
    Ok(fenchel_f_star_gradient(&dual))
}

/// `D_F(x || y) = F(x) - F(y) - grad F(y)^T (x - y)`; `y` must be interior.
pub fn bregman_divergence(x: &MeanVector, y: &MeanVector) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    let grad = entropic_f_gradient(y)?;
    let linear: f64 = grad
        .iter()
        .zip(x.values().iter().zip(y.values()))
        .map(|(g, (a, b))| g * (a - b))
        .sum();
    Ok(entropic_f(x) - entropic_f(y) - linear)
}
