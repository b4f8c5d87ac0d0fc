//! Exponential weights over all `2^n` vertices.
//!
//! Reference implementation only: memory and time are `O(2^n)` per round.
//! Vertex `k` of the table is [`CubePoint::from_index`]`(k, n)`.

use rand::{Rng, RngCore};

use super::{log_sum_exp, Learner, MeanVector};
use crate::bandit::MomentMatrix;
use crate::cube::{check_dim, CubePoint, LossVector};
use crate::error::{Error, Result};

pub const EXP2_MAX_DIM: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Exp2Distribution {
    n: usize,
    log_weights: Vec<f64>,
    probabilities: Vec<f64>,
}

fn check_cap(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if n > EXP2_MAX_DIM {
        return Err(Error::ReferenceTooLarge {
            n,
            cap: EXP2_MAX_DIM,
        });
    }
    Ok(())
}

impl Exp2Distribution {
    /// `w_1(X) = 1` for every vertex.
    pub fn uniform(n: usize) -> Result<Self> {
        check_cap(n)?;
        Self::from_log_weights(n, vec![0.0; 1 << n])
    }

    pub fn from_log_weights(n: usize, log_weights: Vec<f64>) -> Result<Self> {
        check_cap(n)?;
        check_dim(1 << n, log_weights.len())?;
        let mut dist = Self {
            n,
            log_weights,
            probabilities: Vec::new(),
        };
        dist.normalize();
        Ok(dist)
    }

    fn normalize(&mut self) {
        let log_z = log_sum_exp(&self.log_weights);
        self.probabilities = self
            .log_weights
            .iter()
            .map(|&w| (w - log_z).exp())
            .collect();
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, vertex: &CubePoint) -> f64 {
        self.probabilities[vertex.to_index() as usize]
    }

    /// `w(X) <- w(X) * exp(-eta X^T estimate)` for every vertex.
    pub fn apply_loss(&mut self, estimate: &LossVector, eta: f64) -> Result<()> {
        check_dim(self.n, estimate.len())?;
        let l = estimate.values();
        // vertex k differs from k with its lowest set bit cleared in exactly
        // that coordinate, so each dot product is one addition.
        let mut dots = vec![0.0; self.log_weights.len()];
        for k in 1..dots.len() {
            let low = k.trailing_zeros() as usize;
            dots[k] = dots[k & (k - 1)] + l[low];
        }
        for (w, d) in self.log_weights.iter_mut().zip(&dots) {
            *w -= eta * d;
        }
        self.normalize();
        Ok(())
    }

    /// `P(X_i = 1)` for each coordinate.
    pub fn marginals(&self) -> MeanVector {
        let mut x = vec![0.0; self.n];
        for (k, &p) in self.probabilities.iter().enumerate() {
            for (i, xi) in x.iter_mut().enumerate() {
                if (k >> i) & 1 == 1 {
                    *xi += p;
                }
            }
        }
        MeanVector {
            x: x.into_iter().map(|v| v.clamp(0.0, 1.0)).collect(),
        }
    }

    /// `E[X X^T]` by enumeration.
    pub fn second_moment(&self) -> MomentMatrix {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for (k, &p) in self.probabilities.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for i in (0..n).filter(|i| (k >> i) & 1 == 1) {
                for j in (i..n).filter(|j| (k >> j) & 1 == 1) {
                    m[i * n + j] += p;
                }
            }
        }
        MomentMatrix::from_fn(n, |i, j| m[i * n + j])
    }
}

/// Exp2 distribution after feeding `history` from the uniform start.
pub fn exp2_distribution(history: &[LossVector], eta: f64, n: usize) -> Result<Exp2Distribution> {
    let mut dist = Exp2Distribution::uniform(n)?;
    for estimate in history {
        dist.apply_loss(estimate, eta)?;
    }
    Ok(dist)
}

/// Inverse-CDF draw over the vertex table.
pub fn exp2_sample<R: Rng + ?Sized>(dist: &Exp2Distribution, rng: &mut R) -> CubePoint {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (k, &p) in dist.probabilities.iter().enumerate() {
        if p > 0.0 {
            last_positive = k;
        }
        acc += p;
        if u < acc {
            return CubePoint::from_index(k as u64, dist.n);
        }
    }
    // u landed in the rounding gap above the accumulated total
    CubePoint::from_index(last_positive as u64, dist.n)
}

/// Exp2 driven as a [`Learner`].
#[derive(Debug, Clone)]
pub struct Exp2Learner {
    dist: Exp2Distribution,
    eta: f64,
}

impl Exp2Learner {
    pub fn new(n: usize, eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eta must be > 0, got {eta}"
            )));
        }
        Ok(Self {
            dist: Exp2Distribution::uniform(n)?,
            eta,
        })
    }

    pub fn distribution(&self) -> &Exp2Distribution {
        &self.dist
    }
}

impl Learner for Exp2Learner {
    fn dim(&self) -> usize {
        self.dist.n
    }

    fn eta(&self) -> f64 {
        self.eta
    }

    fn means(&self) -> MeanVector {
        self.dist.marginals()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> CubePoint {
        exp2_sample(&self.dist, rng)
    }

    fn second_moment(&self) -> MomentMatrix {
        self.dist.second_moment()
    }

    fn update(&mut self, estimate: &LossVector) -> Result<()> {
        self.dist.apply_loss(estimate, self.eta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_history(n: usize, rounds: usize, rng: &mut ChaCha8Rng) -> Vec<LossVector> {
        (0..rounds)
            .map(|_| {
                LossVector::bounded((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()).unwrap()
            })
            .collect()
    }

    #[test]
    fn empty_history_is_uniform() {
        for n in 1..=6 {
            let d = exp2_distribution(&[], 0.5, n).unwrap();
            let expected = 0.5f64.powi(n as i32);
            assert!(d
                .probabilities()
                .iter()
                .all(|&p| (p - expected).abs() < 1e-15));
        }
    }

    #[test]
    fn single_coordinate_normalization() {
        for &(eta, c) in &[(0.3, 0.7), (1.0, -1.0), (2.0, 0.25)] {
            let d = exp2_distribution(&[LossVector::unbounded(vec![c])], eta, 1).unwrap();
            let e = (-eta * c).exp();
            let expected = e / (1.0 + e);
            assert!((d.probability(&CubePoint::ones(1)) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let h = random_history(10, 25, &mut rng);
            let d = exp2_distribution(&h, 0.8, 10).unwrap();
            let total: f64 = d.probabilities().iter().sum();
            assert!((total - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn log_weights_match_per_vertex_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 5;
        let eta = 0.4;
        let h = random_history(n, 12, &mut rng);
        let d = exp2_distribution(&h, eta, n).unwrap();
        for k in 0..(1u64 << n) {
            let x = CubePoint::from_index(k, n);
            let direct: f64 = -eta
                * h.iter()
                    .map(|l| crate::cube::linear_loss(&x, l).unwrap())
                    .sum::<f64>();
            assert!((d.log_weights()[k as usize] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 4;
        let h = random_history(n, 8, &mut rng);
        let d = exp2_distribution(&h, 0.6, n).unwrap();
        let shifted: Vec<f64> = d.log_weights().iter().map(|w| w + 123.4).collect();
        let e = Exp2Distribution::from_log_weights(n, shifted).unwrap();
        for (p, q) in d.probabilities().iter().zip(e.probabilities()) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            exp2_distribution(&[], 0.1, 21),
            Err(Error::ReferenceTooLarge { n: 21, cap: 20 })
        ));
        assert!(Exp2Learner::new(0, 0.1).is_err());
    }

    #[test]
    fn uniform_sampling_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = Exp2Distribution::uniform(2).unwrap();
        let draws = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..draws {
            counts[exp2_sample(&d, &mut rng).to_index() as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 / draws as f64 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn point_mass_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 3;
        let mut lw = vec![0.0; 8];
        lw[5] = 1e6;
        let d = Exp2Distribution::from_log_weights(n, lw).unwrap();
        for _ in 0..1000 {
            assert_eq!(exp2_sample(&d, &mut rng).to_index(), 5);
        }
    }

    #[test]
    fn two_vertex_sampling_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (eta, c) = (0.9, -0.6);
        let d = exp2_distribution(&[LossVector::unbounded(vec![c])], eta, 1).unwrap();
        let e = (-eta * c).exp();
        let p1 = e / (1.0 + e);
        let draws = 100_000;
        let ones = (0..draws)
            .filter(|_| exp2_sample(&d, &mut rng).is_set(0))
            .count();
        assert!((ones as f64 / draws as f64 - p1).abs() < 0.01);
    }

    #[test]
    fn second_moment_diagonal_is_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let h = random_history(4, 6, &mut rng);
        let d = exp2_distribution(&h, 0.5, 4).unwrap();
        let m = d.second_moment();
        let x = d.marginals();
        for i in 0..4 {
            assert!((m.get(i, i) - x.get(i)).abs() < 1e-15);
        }
    }
}
