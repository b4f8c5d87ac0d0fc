//! Bandit-feedback machinery: second-moment matrices, uniform exploration,
//! the `P^-1 X X^T l` estimator and the tuned `(eta, gamma)` pairs.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::{bernoulli_product_sample, Algorithm, MeanVector};
use crate::cube::{check_dim, CubePoint, Feedback, LossVector};
use crate::error::{Error, Result};

/// Symmetric `n x n` second-moment matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    entries: DMatrix<f64>,
}

impl MomentMatrix {
    /// Builds from the upper triangle of `f`; the lower triangle is mirrored so
    /// the result is exactly symmetric.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut entries = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                entries[(i, j)] = v;
                entries[(j, i)] = v;
            }
        }
        Self { entries }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (&self.entries * DVector::from_column_slice(v))
            .iter()
            .copied()
            .collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        Self {
            entries: &self.entries * a + &other.entries * b,
        }
    }
}

/// `E[X X^T]` for `X ~ prod_i Bernoulli(x_i)`: `x_i x_j` off the diagonal,
/// `x_i` on it.
pub fn second_moment_product(x: &MeanVector) -> MomentMatrix {
    let v = x.values();
    MomentMatrix::from_fn(x.len(), |i, j| if i == j { v[i] } else { v[i] * v[j] })
}

/// `E[X X^T]` for `X` uniform on the cube, `(I + 1 1^T) / 4`.
pub fn second_moment_uniform(n: usize) -> MomentMatrix {
    MomentMatrix::from_fn(n, |i, j| if i == j { 0.5 } else { 0.25 })
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "mixing coefficient gamma must lie in (0, 1), got {gamma}"
        )))
    }
}

fn mix(sigma: &MomentMatrix, gamma: f64) -> MomentMatrix {
    sigma.combine(1.0 - gamma, &second_moment_uniform(sigma.dim()), gamma)
}

/// `P = (1 - gamma) Sigma_x + gamma Sigma_mu`.
pub fn mixing_matrix(x: &MeanVector, gamma: f64) -> Result<MomentMatrix> {
    check_gamma(gamma)?;
    Ok(mix(&second_moment_product(x), gamma))
}

/// Same as [`mixing_matrix`] for an arbitrary exploitation second moment.
pub fn mixing_matrix_from(sigma: &MomentMatrix, gamma: f64) -> Result<MomentMatrix> {
    check_gamma(gamma)?;
    Ok(mix(sigma, gamma))
}

/// Solves `P u = v` through a Cholesky factorization.
pub fn spd_solve(p: &MomentMatrix, v: &[f64]) -> Result<Vec<f64>> {
    check_dim(p.dim(), v.len())?;
    let chol = p
        .entries
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite)?;
    Ok(chol
        .solve(&DVector::from_column_slice(v))
        .iter()
        .copied()
        .collect())
}

/// With probability `gamma` draw uniformly from the cube, otherwise from
/// `exploit`. One uniform variate picks the branch.
pub fn mixed_sample_with<R: Rng + ?Sized>(
    n: usize,
    gamma: f64,
    rng: &mut R,
    exploit: impl FnOnce(&mut R) -> CubePoint,
) -> CubePoint {
    if rng.random::<f64>() < gamma {
        bernoulli_product_sample(&MeanVector::uniform(n), rng)
    } else {
        exploit(rng)
    }
}

pub fn mixed_sample<R: Rng + ?Sized>(x: &MeanVector, gamma: f64, rng: &mut R) -> CubePoint {
    mixed_sample_with(x.len(), gamma, rng, |r| bernoulli_product_sample(x, r))
}

/// `observed * P^-1 X`, where `observed = X^T l` is the only feedback.
pub fn estimate_loss(p: &MomentMatrix, x: &CubePoint, observed: f64) -> Result<LossVector> {
    check_dim(p.dim(), x.len())?;
    let u = spd_solve(p, &x.to_f64())?;
    Ok(LossVector::unbounded(
        u.into_iter().map(|v| observed * v).collect(),
    ))
}

/// Coordinates with `|eta * estimate_i| > 1`.
pub fn estimate_magnitude_check(eta: f64, estimate: &LossVector) -> usize {
    estimate
        .values()
        .iter()
        .filter(|&&v| (eta * v).abs() > 1.0)
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunedParameters {
    pub eta: f64,
    pub gamma: f64,
    pub algorithm: Algorithm,
    pub feedback: Feedback,
}

fn tuned_raw(n: u64, horizon: u64, algorithm: Algorithm, feedback: Feedback) -> (f64, f64) {
    let ln2 = std::f64::consts::LN_2;
    let n = n as f64;
    let t = horizon as f64;
    match (algorithm, feedback) {
        (Algorithm::PolyExp, Feedback::FullInformation) => ((ln2 / t).sqrt(), 0.0),
        (Algorithm::PolyExp, Feedback::Bandit) => {
            let eta = (3.0 * ln2 / (8.0 * n * t)).sqrt();
            (eta, 4.0 * n * eta)
        }
        (Algorithm::Exp2Reference, Feedback::FullInformation) => ((ln2 / (n * t)).sqrt(), 0.0),
        (Algorithm::Exp2Reference, Feedback::Bandit) => {
            let eta = (ln2 / (9.0 * n * n * t)).sqrt();
            (eta, 4.0 * n * n * eta)
        }
    }
}

/// Learning rate and mixing coefficient behind the closed-form regret bounds.
pub fn tuned_parameters(
    n: usize,
    horizon: usize,
    algorithm: Algorithm,
    feedback: Feedback,
) -> Result<TunedParameters> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon T must be >= 1".into()));
    }
    let (n64, t64) = (n as u64, horizon as u64);
    let (eta, gamma) = tuned_raw(n64, t64, algorithm, feedback);
    if gamma >= 1.0 {
        // gamma is decreasing in T; find the first horizon with gamma < 1
        let (mut lo, mut hi) = (t64, t64.max(1));
        while tuned_raw(n64, hi, algorithm, feedback).1 >= 1.0 {
            lo = hi;
            hi = hi.saturating_mul(2);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if tuned_raw(n64, mid, algorithm, feedback).1 >= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Err(Error::HorizonTooShort {
            horizon: t64,
            gamma,
            min_horizon: hi,
        });
    }
    Ok(TunedParameters {
        eta,
        gamma,
        algorithm,
        feedback,
    })
}
