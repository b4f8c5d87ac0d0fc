//! Domain types for the hypercube game and regret accounting.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed above 1 when validating bounded losses.
pub const LOSS_BOUND_SLACK: f64 = 1e-12;

/// A vertex of `{0,1}^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CubePoint {
    bits: Vec<u8>,
}

impl CubePoint {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if let Some(i) = bits.iter().position(|&b| b > 1) {
            return Err(Error::InvalidParameter(format!(
                "cube coordinate {i} = {} is not 0 or 1",
                bits[i]
            )));
        }
        Ok(Self { bits })
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self {
            bits: bits.iter().map(|&b| u8::from(b)).collect(),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self { bits: vec![0; n] }
    }

    pub fn ones(n: usize) -> Self {
        Self { bits: vec![1; n] }
    }

    /// Vertex whose coordinate `i` is bit `i` of `index`.
    pub fn from_index(index: u64, n: usize) -> Self {
        Self {
            bits: (0..n).map(|i| ((index >> i) & 1) as u8).collect(),
        }
    }

    /// Inverse of [`CubePoint::from_index`]. Only meaningful for `n <= 64`.
    pub fn to_index(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn is_set(&self, i: usize) -> bool {
        self.bits[i] == 1
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| f64::from(b)).collect()
    }
}

impl fmt::Display for CubePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// A vertex of `{-1,+1}^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedCubePoint {
    entries: Vec<i8>,
}

impl SignedCubePoint {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if let Some(i) = entries.iter().position(|&z| z != 1 && z != -1) {
            return Err(Error::InvalidParameter(format!(
                "signed coordinate {i} = {} is not -1 or +1",
                entries[i]
            )));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(|&z| f64::from(z)).collect()
    }

    /// `Z^T l` for a loss vector of matching length.
    pub fn dot(&self, loss: &LossVector) -> Result<f64> {
        check_dim(self.len(), loss.len())?;
        Ok(self
            .entries
            .iter()
            .zip(loss.values())
            .map(|(&z, &l)| f64::from(z) * l)
            .sum())
    }
}

/// Either an adversary's loss (bounded, `|l_i| <= 1`) or an estimate fed to a
/// learner (unbounded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossVector {
    values: Vec<f64>,
    bounded: bool,
}

impl LossVector {
    /// Loss satisfying the L-infinity assumption. Values outside `[-1, 1]` are
    /// rejected, never clipped.
    pub fn bounded(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value.abs() > 1.0 + LOSS_BOUND_SLACK {
                return Err(Error::LossOutOfRange { index, value });
            }
        }
        Ok(Self {
            values,
            bounded: true,
        })
    }

    /// Loss estimate with no magnitude contract.
    pub fn unbounded(values: Vec<f64>) -> Self {
        Self {
            values,
            bounded: false,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
            bounded: true,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coordinate-wise multiple; the result is an unbounded vector.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::unbounded(self.values.iter().map(|v| v * factor).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Running coordinate-wise sum of loss vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeLoss {
    totals: Vec<f64>,
    rounds_seen: usize,
}

impl CumulativeLoss {
    pub fn new(n: usize) -> Self {
        Self {
            totals: vec![0.0; n],
            rounds_seen: 0,
        }
    }

    pub fn from_totals(totals: Vec<f64>) -> Self {
        Self {
            totals,
            rounds_seen: 0,
        }
    }

    pub fn add(&mut self, loss: &LossVector) -> Result<()> {
        check_dim(self.totals.len(), loss.len())?;
        for (total, v) in self.totals.iter_mut().zip(loss.values()) {
            *total += v;
        }
        self.rounds_seen += 1;
        Ok(())
    }

    pub fn totals(&self) -> &[f64] {
        &self.totals
    }

    pub fn rounds_seen(&self) -> usize {
        self.rounds_seen
    }

    pub fn len(&self) -> usize {
        self.totals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.totals.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feedback {
    #[serde(rename = "full")]
    FullInformation,
    Bandit,
}

impl fmt::Display for Feedback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feedback::FullInformation => f.write_str("full"),
            Feedback::Bandit => f.write_str("bandit"),
        }
    }
}

/// Parameters of a single game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub n: usize,
    pub horizon: usize,
    pub eta: f64,
    pub gamma: f64,
    pub feedback: Feedback,
    pub seed: u64,
}

impl GameConfig {
    pub fn new(
        n: usize,
        horizon: usize,
        eta: f64,
        gamma: f64,
        feedback: Feedback,
        seed: u64,
    ) -> Result<Self> {
        let config = Self {
            n,
            horizon,
            eta,
            gamma,
            feedback,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon T must be >= 1".into()));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eta must be > 0, got {}",
                self.eta
            )));
        }
        match self.feedback {
            Feedback::FullInformation if self.gamma != 0.0 => Err(Error::InvalidParameter(
                format!("gamma must be 0 with full information, got {}", self.gamma),
            )),
            Feedback::Bandit if !(self.gamma > 0.0 && self.gamma < 1.0) => {
                Err(Error::InvalidParameter(format!(
                    "gamma must lie in (0, 1) with bandit feedback, got {}",
                    self.gamma
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Full trajectory of one learner-vs-adversary game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub horizon: usize,
    pub actions: Vec<CubePoint>,
    pub losses: Vec<LossVector>,
    pub estimates: Vec<LossVector>,
    pub incurred: Vec<f64>,
    pub regret: f64,
    /// Rounds in which some coordinate had `|eta * estimate_i| > 1`.
    pub violation_count: usize,
}

impl GameRecord {
    pub fn with_capacity(horizon: usize) -> Self {
        Self {
            horizon,
            actions: Vec::with_capacity(horizon),
            losses: Vec::with_capacity(horizon),
            estimates: Vec::with_capacity(horizon),
            incurred: Vec::with_capacity(horizon),
            regret: 0.0,
            violation_count: 0,
        }
    }

    pub fn rounds(&self) -> usize {
        self.actions.len()
    }

    pub fn total_loss(&self) -> f64 {
        self.incurred.iter().sum()
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `X^T l`.
pub fn linear_loss(x: &CubePoint, loss: &LossVector) -> Result<f64> {
    check_dim(x.len(), loss.len())?;
    Ok(x.bits()
        .iter()
        .zip(loss.values())
        .filter(|(&b, _)| b == 1)
        .map(|(_, &l)| l)
        .sum())
}

/// Minimizing vertex of `X^T L` over the whole cube and its value.
///
/// The objective separates by coordinate, so `X*_i = 1` iff `L_i < 0`. Ties at
/// exactly zero resolve to 0.
pub fn best_in_hindsight(cumulative: &CumulativeLoss) -> (CubePoint, f64) {
    let bits = cumulative
        .totals()
        .iter()
        .map(|&total| u8::from(total < 0.0))
        .collect();
    let value = cumulative
        .totals()
        .iter()
        .map(|&total| total.min(0.0))
        .sum();
    (CubePoint { bits }, value)
}

/// `sum_t X_t^T l_t - min_X sum_t X^T l_t`, computed on the true losses.
pub fn realized_regret(record: &GameRecord) -> Result<f64> {
    let horizon = record.horizon;
    if record.actions.len() != horizon || record.losses.len() != horizon {
        return Err(Error::IncompleteRecord(format!(
            "expected {horizon} rounds, found {} actions and {} losses",
            record.actions.len(),
            record.losses.len()
        )));
    }
    let first = record
        .losses
        .first()
        .ok_or_else(|| Error::IncompleteRecord("no rounds recorded".into()))?;
    let mut cumulative = CumulativeLoss::new(first.len());
    let mut played = 0.0;
    for (x, loss) in record.actions.iter().zip(&record.losses) {
        played += linear_loss(x, loss)?;
        cumulative.add(loss)?;
    }
    let (_, best) = best_in_hindsight(&cumulative);
    Ok(played - best)
}

/// `Z = 2X - 1`.
pub fn to_signed(x: &CubePoint) -> SignedCubePoint {
    SignedCubePoint {
        entries: x.bits().iter().map(|&b| 2 * b as i8 - 1).collect(),
    }
}

/// `X = (Z + 1) / 2`.
pub fn from_signed(z: &SignedCubePoint) -> CubePoint {
    CubePoint {
        bits: z.entries().iter().map(|&e| ((e + 1) / 2) as u8).collect(),
    }
}
