//! Loss-generating opponents.
//!
//! All shipped adversaries are oblivious. The [`Adversary`] interface only
//! hands out the learner's past actions, so an adaptive adversary written
//! against it can never observe the current round's randomness.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::algorithms::bernoulli_product_sample;
use crate::algorithms::MeanVector;
use crate::cube::{CubePoint, LossVector};
use crate::error::{Error, Result};

pub trait Adversary: Send {
    fn dim(&self) -> usize;

    /// Loss for round `round` (0-based). `past_actions` holds `X_1..X_{t-1}`.
    fn next_loss(
        &mut self,
        round: usize,
        past_actions: &[CubePoint],
        rng: &mut dyn RngCore,
    ) -> Result<LossVector>;
}

fn sign_draw<R: Rng + ?Sized>(rng: &mut R, p_minus: f64) -> f64 {
    if rng.random::<f64>() < p_minus {
        -1.0
    } else {
        1.0
    }
}

/// I.i.d. `+-1` coordinates with probability 1/2 each.
pub fn rademacher_loss<R: Rng + ?Sized>(n: usize, rng: &mut R) -> LossVector {
    signs((0..n).map(|_| sign_draw(rng, 0.5)).collect())
}

fn signs(values: Vec<f64>) -> LossVector {
    LossVector::bounded(values).expect("+-1 entries are bounded")
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RademacherAdversary {
    n: usize,
}

impl RademacherAdversary {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl Adversary for RademacherAdversary {
    fn dim(&self) -> usize {
        self.n
    }

    fn next_loss(
        &mut self,
        _: usize,
        _: &[CubePoint],
        rng: &mut dyn RngCore,
    ) -> Result<LossVector> {
        Ok(rademacher_loss(self.n, rng))
    }
}

/// Stochastic adversary that tilts coordinates of a hidden vertex towards
/// `-1` by `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapAdversary {
    epsilon: f64,
    hidden_vertex: CubePoint,
}

impl GapAdversary {
    pub fn new(epsilon: f64, hidden_vertex: CubePoint) -> Result<Self> {
        if !(0.0..=0.5).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!(
                "gap epsilon must lie in [0, 1/2], got {epsilon}"
            )));
        }
        Ok(Self {
            epsilon,
            hidden_vertex,
        })
    }

    /// Hidden vertex drawn uniformly from the cube.
    pub fn random<R: Rng + ?Sized>(n: usize, epsilon: f64, rng: &mut R) -> Result<Self> {
        let hidden = bernoulli_product_sample(&MeanVector::uniform(n), rng);
        Self::new(epsilon, hidden)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn hidden_vertex(&self) -> &CubePoint {
        &self.hidden_vertex
    }

    /// `[(-1, P(-1)), (+1, P(+1))]` for coordinate `i`.
    pub fn coordinate_law(&self, i: usize) -> [(f64, f64); 2] {
        let tilt = if self.hidden_vertex.is_set(i) {
            self.epsilon
        } else {
            0.0
        };
        [(-1.0, 0.5 + tilt), (1.0, 0.5 - tilt)]
    }
}

pub fn gap_loss<R: Rng + ?Sized>(adversary: &GapAdversary, rng: &mut R) -> LossVector {
    signs(
        (0..adversary.hidden_vertex.len())
            .map(|i| sign_draw(rng, adversary.coordinate_law(i)[0].1))
            .collect(),
    )
}

impl Adversary for GapAdversary {
    fn dim(&self) -> usize {
        self.hidden_vertex.len()
    }

    fn next_loss(
        &mut self,
        _: usize,
        _: &[CubePoint],
        rng: &mut dyn RngCore,
    ) -> Result<LossVector> {
        Ok(gap_loss(self, rng))
    }
}

/// `min(sqrt(n / T) / 4, 1/2)`, the maximizer of `eps n T (1/2 - eps sqrt(T/n))`
/// clipped to the valid range.
pub fn default_gap_epsilon(n: usize, horizon: usize) -> f64 {
    (0.25 * (n as f64 / horizon as f64).sqrt()).min(0.5)
}

/// Pre-recorded bounded losses, one row per round.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSequence {
    n: usize,
    rows: Vec<LossVector>,
    source: Option<PathBuf>,
}

impl LossSequence {
    pub fn from_rows(rows: Vec<LossVector>) -> Result<Self> {
        let n = rows.first().map(LossVector::len).ok_or_else(|| {
            Error::InvalidParameter("loss sequence must contain at least one row".into())
        })?;
        for (row, l) in rows.iter().enumerate() {
            if l.len() != n {
                return Err(Error::SequenceParse {
                    row: row + 1,
                    column: l.len().min(n) + 1,
                    message: format!("expected {n} columns, found {}", l.len()),
                });
            }
            if let Some(column) = l
                .values()
                .iter()
                .position(|v| !v.is_finite() || v.abs() > 1.0 + crate::cube::LOSS_BOUND_SLACK)
            {
                return Err(Error::SequenceParse {
                    row: row + 1,
                    column: column + 1,
                    message: format!("value {} outside [-1, 1]", l.values()[column]),
                });
            }
        }
        Ok(Self {
            n,
            rows,
            source: None,
        })
    }

    /// Headerless CSV: `T` rows of `n` comma-separated decimals in `[-1, 1]`.
    /// Rows and columns in errors are 1-based.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows = Vec::new();
        let mut width = None;
        for (r, record) in csv.records().enumerate() {
            let record = record?;
            let row = r + 1;
            let expected = *width.get_or_insert(record.len());
            if record.len() != expected {
                return Err(Error::SequenceParse {
                    row,
                    column: record.len().min(expected) + 1,
                    message: format!("expected {expected} columns, found {}", record.len()),
                });
            }
            let mut values = Vec::with_capacity(expected);
            for (c, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::SequenceParse {
                    row,
                    column: c + 1,
                    message: format!("cannot parse {field:?} as a number"),
                })?;
                values.push(v);
            }
            rows.push(LossVector::bounded(values).map_err(|e| match e {
                Error::LossOutOfRange { index, value } => Error::SequenceParse {
                    row,
                    column: index + 1,
                    message: format!("value {value} outside [-1, 1]"),
                },
                other => other,
            })?);
        }
        Self::from_rows(rows)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut seq = Self::from_reader(File::open(path)?)?;
        seq.source = Some(path.to_path_buf());
        Ok(seq)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn source(&self) -> Option<&Path> {
        self.source.as_deref()
    }

    pub fn rows(&self) -> &[LossVector] {
        &self.rows
    }
}

/// Row `round` (0-based) of the sequence, verbatim.
pub fn fixed_sequence_loss(source: &LossSequence, round: usize) -> Result<LossVector> {
    source
        .rows
        .get(round)
        .cloned()
        .ok_or(Error::SequenceExhausted {
            round,
            available: source.rows.len(),
        })
}

#[derive(Debug, Clone)]
pub struct FixedSequenceAdversary {
    source: Arc<LossSequence>,
}

impl FixedSequenceAdversary {
    pub fn new(source: Arc<LossSequence>) -> Self {
        Self { source }
    }
}

impl Adversary for FixedSequenceAdversary {
    fn dim(&self) -> usize {
        self.source.n
    }

    fn next_loss(
        &mut self,
        round: usize,
        _: &[CubePoint],
        _: &mut dyn RngCore,
    ) -> Result<LossVector> {
        fixed_sequence_loss(&self.source, round)
    }
}

/// Adversary choice for an experiment; instantiated fresh for every game.
#[derive(Debug, Clone, PartialEq)]
pub enum AdversarySpec {
    Rademacher,
    /// `epsilon = None` means [`default_gap_epsilon`].
    GapStochastic {
        epsilon: Option<f64>,
    },
    FixedSequence(Arc<LossSequence>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdversaryKind {
    Rademacher,
    Gap,
    Fixed,
}

impl std::fmt::Display for AdversaryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AdversaryKind::Rademacher => "rademacher",
            AdversaryKind::Gap => "gap",
            AdversaryKind::Fixed => "fixed",
        })
    }
}

impl AdversarySpec {
    pub fn kind(&self) -> AdversaryKind {
        match self {
            AdversarySpec::Rademacher => AdversaryKind::Rademacher,
            AdversarySpec::GapStochastic { .. } => AdversaryKind::Gap,
            AdversarySpec::FixedSequence(_) => AdversaryKind::Fixed,
        }
    }

    /// Effective epsilon for a gap adversary, `None` otherwise.
    pub fn epsilon(&self, n: usize, horizon: usize) -> Option<f64> {
        match self {
            AdversarySpec::GapStochastic { epsilon } => {
                Some(epsilon.unwrap_or_else(|| default_gap_epsilon(n, horizon)))
            }
            _ => None,
        }
    }

    pub fn validate(&self, n: usize, horizon: usize) -> Result<()> {
        match self {
            AdversarySpec::Rademacher => Ok(()),
            AdversarySpec::GapStochastic { .. } => {
                let eps = self.epsilon(n, horizon).unwrap_or_default();
                GapAdversary::new(eps, CubePoint::zeros(n)).map(|_| ())
            }
            AdversarySpec::FixedSequence(seq) => {
                if seq.dim() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: seq.dim(),
                    });
                }
                if seq.len() < horizon {
                    return Err(Error::SequenceExhausted {
                        round: seq.len(),
                        available: seq.len(),
                    });
                }
                Ok(())
            }
        }
    }

    /// Fresh adversary for one game. The gap adversary's hidden vertex is
    /// drawn from `rng`.
    pub fn instantiate(
        &self,
        n: usize,
        horizon: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Box<dyn Adversary>> {
        self.validate(n, horizon)?;
        Ok(match self {
            AdversarySpec::Rademacher => Box::new(RademacherAdversary::new(n)),
            AdversarySpec::GapStochastic { .. } => {
                let eps = self.epsilon(n, horizon).unwrap_or_default();
                Box::new(GapAdversary::random(n, eps, rng)?)
            }
            AdversarySpec::FixedSequence(seq) => Box::new(FixedSequenceAdversary::new(seq.clone())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::linear_loss;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rademacher_entries_and_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let draws = 100_000;
        let n = 3;
        let mut sums = vec![0.0; n];
        let fixed = CubePoint::new(vec![1, 0, 1]).unwrap();
        let mut played = 0.0;
        let mut played_sq = 0.0;
        for _ in 0..draws {
            let l = rademacher_loss(n, &mut rng);
            assert!(l.is_bounded());
            for (s, v) in sums.iter_mut().zip(l.values()) {
                assert!(*v == 1.0 || *v == -1.0);
                *s += v;
            }
            let x = linear_loss(&fixed, &l).unwrap();
            played += x;
            played_sq += x * x;
        }
        let nf = draws as f64;
        for s in sums {
            assert!((s / nf).abs() < 4.0 / nf.sqrt());
        }
        let mean = played / nf;
        let se = ((played_sq / nf - mean * mean) / nf).sqrt();
        assert!(mean.abs() < 4.0 * se);
    }

    #[test]
    fn zero_gap_reproduces_rademacher() {
        let mut a = ChaCha8Rng::seed_from_u64(42);
        let mut b = a.clone();
        let gap = GapAdversary::new(0.0, CubePoint::ones(5)).unwrap();
        for _ in 0..100 {
            assert_eq!(gap_loss(&gap, &mut a), rademacher_loss(5, &mut b));
        }
    }

    #[test]
    fn full_gap_is_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let gap = GapAdversary::new(0.5, CubePoint::new(vec![1, 0]).unwrap()).unwrap();
        for _ in 0..1000 {
            assert_eq!(gap_loss(&gap, &mut rng).values()[0], -1.0);
        }
    }

    #[test]
    fn gap_coordinate_mean_by_enumeration() {
        for &eps in &[0.0, 0.1, 0.25, 0.5] {
            let gap = GapAdversary::new(eps, CubePoint::new(vec![1, 0, 1]).unwrap()).unwrap();
            for i in 0..3 {
                let law = gap.coordinate_law(i);
                let total: f64 = law.iter().map(|(_, p)| p).sum();
                let mean: f64 = law.iter().map(|(v, p)| v * p).sum();
                assert!((total - 1.0).abs() < 1e-15);
                let expected = -2.0 * eps * f64::from(gap.hidden_vertex().get(i));
                assert!((mean - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gap_sampled_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let gap = GapAdversary::new(0.1, CubePoint::new(vec![1, 0]).unwrap()).unwrap();
        let draws = 100_000;
        let mut sums = [0.0; 2];
        for _ in 0..draws {
            let l = gap_loss(&gap, &mut rng);
            sums[0] += l.values()[0];
            sums[1] += l.values()[1];
        }
        let nf = draws as f64;
        assert!((sums[0] / nf + 0.2).abs() < 4.0 / nf.sqrt());
        assert!((sums[1] / nf).abs() < 4.0 / nf.sqrt());
    }

    #[test]
    fn gap_rejects_bad_epsilon() {
        assert!(GapAdversary::new(0.6, CubePoint::zeros(2)).is_err());
        assert!(GapAdversary::new(-0.1, CubePoint::zeros(2)).is_err());
        assert!(AdversarySpec::GapStochastic { epsilon: Some(0.7) }
            .validate(2, 10)
            .is_err());
    }

    #[test]
    fn default_epsilon_examples() {
        assert!((default_gap_epsilon(4, 6400) - 0.00625).abs() < 1e-15);
        assert_eq!(default_gap_epsilon(50, 50), 0.25);
        assert_eq!(default_gap_epsilon(100, 1), 0.5);
    }

    #[test]
    fn sequence_parsing() {
        let seq = LossSequence::from_reader("0.5, -1\n0,1\n".as_bytes()).unwrap();
        assert_eq!(seq.dim(), 2);
        assert_eq!(seq.len(), 2);
        assert_eq!(fixed_sequence_loss(&seq, 0).unwrap().values(), &[0.5, -1.0]);
        assert!(matches!(
            fixed_sequence_loss(&seq, 2),
            Err(Error::SequenceExhausted {
                round: 2,
                available: 2
            })
        ));
    }

    #[test]
    fn sequence_errors_report_position() {
        match LossSequence::from_reader("0,0\n0.2,1.5\n".as_bytes()) {
            Err(Error::SequenceParse {
                row: 2, column: 2, ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match LossSequence::from_reader("0,0\n0.2,abc\n".as_bytes()) {
            Err(Error::SequenceParse {
                row: 2, column: 2, ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match LossSequence::from_reader("0,0,0\n0.2,0.1\n".as_bytes()) {
            Err(Error::SequenceParse { row: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(LossSequence::from_reader("".as_bytes()).is_err());
    }

    #[test]
    fn spec_instantiation() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let seq = Arc::new(LossSequence::from_reader("0,0\n0,0\n".as_bytes()).unwrap());
        let spec = AdversarySpec::FixedSequence(seq);
        assert!(spec.instantiate(2, 2, &mut rng).is_ok());
        assert!(spec.instantiate(2, 3, &mut rng).is_err());
        assert!(spec.instantiate(3, 2, &mut rng).is_err());
        assert_eq!(
            AdversarySpec::GapStochastic { epsilon: None }.epsilon(4, 6400),
            Some(0.00625)
        );
        assert_eq!(AdversarySpec::Rademacher.epsilon(4, 6400), None);
    }
}
