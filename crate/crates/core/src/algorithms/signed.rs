//! Running a `{0,1}^n` learner on the `{-1,+1}^n` cube.
//!
//! The inner learner samples `X`, the wrapper plays `Z = 2X - 1` and feeds
//! twice the loss estimate back. Regret on the signed cube with losses `l_t`
//! then equals the inner regret with losses `2 l_t`.

use rand::{Rng, RngCore};

use super::Learner;
use crate::bandit::{mixed_sample_with, mixing_matrix_from, spd_solve, MomentMatrix};
use crate::cube::{
    check_dim, to_signed, CubePoint, CumulativeLoss, Feedback, LossVector, SignedCubePoint,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SignedRound {
    pub action: SignedCubePoint,
    pub inner_action: CubePoint,
    /// `2 * estimate`, exactly what the inner learner was updated with.
    pub fed_estimate: LossVector,
}

#[derive(Debug, Clone)]
pub struct SignedCubeLearner<L> {
    inner: L,
    feedback: Feedback,
    gamma: f64,
}

impl<L: Learner> SignedCubeLearner<L> {
    pub fn new(inner: L, feedback: Feedback, gamma: f64) -> Result<Self> {
        match feedback {
            Feedback::FullInformation if gamma != 0.0 => {
                return Err(Error::InvalidParameter(format!(
                    "gamma must be 0 with full information, got {gamma}"
                )))
            }
            Feedback::Bandit if !(gamma > 0.0 && gamma < 1.0) => {
                return Err(Error::InvalidParameter(format!(
                    "gamma must lie in (0, 1) with bandit feedback, got {gamma}"
                )))
            }
            _ => {}
        }
        Ok(Self {
            inner,
            feedback,
            gamma,
        })
    }

    pub fn inner(&self) -> &L {
        &self.inner
    }

    pub fn into_inner(self) -> L {
        self.inner
    }

    /// One round against `loss`. Under bandit feedback only `Z^T loss`
    /// reaches the estimator.
    pub fn play_round<R: Rng>(&mut self, loss: &LossVector, rng: &mut R) -> Result<SignedRound> {
        let n = self.inner.dim();
        check_dim(n, loss.len())?;
        let (inner_action, estimate) = match self.feedback {
            Feedback::FullInformation => {
                let x = self.inner.sample(rng as &mut dyn RngCore);
                (x, loss.clone())
            }
            Feedback::Bandit => {
                let p = signed_mixing_matrix(&mixing_matrix_from(
                    &self.inner.second_moment(),
                    self.gamma,
                )?);
                let inner = &self.inner;
                let x = mixed_sample_with(n, self.gamma, rng, |r| inner.sample(r));
                let z = to_signed(&x);
                let observed = z.dot(loss)?;
                let u = spd_solve(&p, &z.to_f64())?;
                (
                    x,
                    LossVector::unbounded(u.into_iter().map(|v| observed * v).collect()),
                )
            }
        };
        let fed = estimate.scaled(2.0);
        self.inner.update(&fed)?;
        Ok(SignedRound {
            action: to_signed(&inner_action),
            inner_action,
            fed_estimate: fed,
        })
    }
}

/// `E[(2X - 1)(2X - 1)^T]` from `E[X X^T]`; for binary `X`, `E[X] = diag`.
fn signed_mixing_matrix(m: &MomentMatrix) -> MomentMatrix {
    MomentMatrix::from_fn(m.dim(), |i, j| {
        4.0 * m.get(i, j) - 2.0 * m.get(i, i) - 2.0 * m.get(j, j) + 1.0
    })
}

pub fn signed_cube_wrap<L: Learner, R: Rng>(
    learner: &mut SignedCubeLearner<L>,
    loss: &LossVector,
    rng: &mut R,
) -> Result<(SignedCubePoint, LossVector)> {
    let round = learner.play_round(loss, rng)?;
    Ok((round.action, round.fed_estimate))
}

/// `sum_t Z_t^T l_t - min_Z sum_t Z^T l_t`; the minimum is `-sum_i |L_i|`.
pub fn signed_cube_regret(actions: &[SignedCubePoint], losses: &[LossVector]) -> Result<f64> {
    check_dim(actions.len(), losses.len())?;
    let first = losses
        .first()
        .ok_or_else(|| Error::IncompleteRecord("no rounds recorded".into()))?;
    let mut cumulative = CumulativeLoss::new(first.len());
    let mut played = 0.0;
    for (z, l) in actions.iter().zip(losses) {
        played += z.dot(l)?;
        cumulative.add(l)?;
    }
    let best: f64 = -cumulative.totals().iter().map(|t| t.abs()).sum::<f64>();
    Ok(played - best)
}
