//! Enumeration-based ground truth.
//!
//! Everything here walks all `2^n` vertices (or all sign patterns) and is only
//! usable for small dimensions. Products of exponentials are handled in log
//! space.

use statrs::function::gamma::ln_gamma;

use crate::algorithms::{exp2_distribution, log_sum_exp, softplus, MeanVector};
use crate::bandit::{estimate_loss, mixing_matrix};
use crate::cube::{check_dim, linear_loss, CubePoint, LossVector};
use crate::error::{Error, Result};

pub const ENUMERATION_MAX_DIM: usize = 20;
pub const IDENTITY_MAX_DIM: usize = 12;
pub const MARGINALS_MAX_DIM: usize = 12;
pub const ESTIMATOR_MAX_DIM: usize = 8;
pub const ODD_HORIZON_MAX: u64 = 24;

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidDimension(0))
    } else if n > cap {
        Err(Error::ReferenceTooLarge { n, cap })
    } else {
        Ok(())
    }
}

/// Exact distribution over `{0,1}^n`, indexed like [`enumerate_cube`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    n: usize,
    probabilities: Vec<f64>,
}

impl ExactDistribution {
    pub fn new(n: usize, probabilities: Vec<f64>) -> Result<Self> {
        check_cap(n, ENUMERATION_MAX_DIM)?;
        check_dim(1 << n, probabilities.len())?;
        let total: f64 = probabilities.iter().sum();
        if probabilities.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "probabilities must be nonnegative and sum to 1 (sum = {total})"
            )));
        }
        Ok(Self { n, probabilities })
    }

    /// `q(X) = (1 - gamma) prod_i x_i^X_i (1 - x_i)^(1 - X_i) + gamma 2^-n`.
    pub fn mixed_product(x: &MeanVector, gamma: f64) -> Result<Self> {
        let n = x.len();
        check_cap(n, ENUMERATION_MAX_DIM)?;
        let uniform = 0.5f64.powi(n as i32);
        let probabilities = (0..1u64 << n)
            .map(|k| {
                (1.0 - gamma) * x.product_probability(&CubePoint::from_index(k, n))
                    + gamma * uniform
            })
            .collect();
        Self::new(n, probabilities)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `E[f(X)]` for vector-valued `f`.
    pub fn expectation(
        &self,
        mut f: impl FnMut(&CubePoint) -> Result<Vec<f64>>,
    ) -> Result<Vec<f64>> {
        let mut acc: Option<Vec<f64>> = None;
        for (k, &p) in self.probabilities.iter().enumerate() {
            let v = f(&CubePoint::from_index(k as u64, self.n))?;
            let a = acc.get_or_insert_with(|| vec![0.0; v.len()]);
            for (s, x) in a.iter_mut().zip(&v) {
                *s += p * x;
            }
        }
        Ok(acc.unwrap_or_default())
    }
}

/// All `2^n` vertices; entry `k` has coordinate `i` equal to bit `i` of `k`.
pub fn enumerate_cube(n: usize) -> Result<Vec<CubePoint>> {
    check_cap(n, ENUMERATION_MAX_DIM)?;
    Ok((0..1u64 << n)
        .map(|k| CubePoint::from_index(k, n))
        .collect())
}

fn check_history(history: &[LossVector], n: usize) -> Result<()> {
    history.iter().try_for_each(|l| check_dim(n, l.len()))
}

/// Both sides of the product/sum identity, in log space:
/// `sum_i log(1 + exp(-eta L_i))` and `log sum_Y exp(-eta sum_tau Y^T l_tau)`.
pub fn product_sum_identity(history: &[LossVector], eta: f64, n: usize) -> Result<(f64, f64)> {
    check_cap(n, IDENTITY_MAX_DIM)?;
    check_history(history, n)?;
    let mut cumulative = vec![0.0; n];
    for l in history {
        for (c, v) in cumulative.iter_mut().zip(l.values()) {
            *c += v;
        }
    }
    let lhs = cumulative.iter().map(|&c| softplus(-eta * c)).sum();
    let exponents: Vec<f64> = enumerate_cube(n)?
        .iter()
        .map(|y| {
            history
                .iter()
                .map(|l| linear_loss(y, l))
                .sum::<Result<f64>>()
                .map(|s| -eta * s)
        })
        .collect::<Result<_>>()?;
    Ok((lhs, log_sum_exp(&exponents)))
}

/// `P(X_i = 1)` under the exact exponential-weights distribution.
pub fn exp2_exact_marginals(history: &[LossVector], eta: f64, n: usize) -> Result<MeanVector> {
    check_cap(n, MARGINALS_MAX_DIM)?;
    Ok(exp2_distribution(history, eta, n)?.marginals())
}

/// `sum_X q(X) * estimate_loss(P, X, X^T l)`; equals `l` when the estimator
/// is unbiased.
pub fn exact_estimator_expectation(
    x: &MeanVector,
    gamma: f64,
    l: &LossVector,
) -> Result<LossVector> {
    let n = x.len();
    check_cap(n, ESTIMATOR_MAX_DIM)?;
    check_dim(n, l.len())?;
    let p = mixing_matrix(x, gamma)?;
    let q = ExactDistribution::mixed_product(x, gamma)?;
    let mean = q.expectation(|v| {
        let est = estimate_loss(&p, v, linear_loss(v, l)?)?;
        Ok(est.values().to_vec())
    })?;
    Ok(LossVector::unbounded(mean))
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// Largest half-horizon for which `2k * C(2k, k)` is computed in integers.
const EXACT_HALF_HORIZON_MAX: u64 = 60;

/// `E|Y_1 + ... + Y_T|` for i.i.d. uniform signs.
///
/// Even `T = 2k` uses `(2k / 4^k) C(2k, k)`: integer arithmetic while the
/// binomial fits, log-gamma beyond. Odd `T` is enumerated over the number of
/// positive signs and is refused above `T = 24`.
pub fn expected_abs_rademacher_sum(horizon: u64) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon T must be >= 1".into()));
    }
    if horizon % 2 == 1 {
        if horizon > ODD_HORIZON_MAX {
            return Err(Error::OddHorizon(horizon));
        }
        let total: u128 = (0..=horizon)
            .map(|j| binomial(horizon, j) * u128::from((2 * j).abs_diff(horizon)))
            .sum();
        return Ok(total as f64 / 2f64.powi(horizon as i32));
    }
    let k = horizon / 2;
    if k <= EXACT_HALF_HORIZON_MAX {
        let numerator = u128::from(2 * k) * binomial(2 * k, k);
        return Ok(numerator as f64 / 2f64.powi(2 * k as i32));
    }
    let kf = k as f64;
    let log_value =
        (2.0 * kf).ln() + ln_gamma(2.0 * kf + 1.0) - 2.0 * ln_gamma(kf + 1.0) - kf * 4f64.ln();
    Ok(log_value.exp())
}

/// `E[max_X sum_t l_t^T X]` under the Rademacher adversary,
/// `n/2 * E|sum_t Y_t|`.
pub fn expected_max_linear_gain(n: usize, horizon: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    Ok(n as f64 / 2.0 * expected_abs_rademacher_sum(horizon)?)
}
