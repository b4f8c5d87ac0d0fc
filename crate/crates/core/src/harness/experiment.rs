use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::bounds::theoretical_bound;
use super::game::{play_game, RunStreams};
use crate::adversaries::AdversarySpec;
use crate::algorithms::{Algorithm, Exp2Learner, Learner, PolyExp, EXP2_MAX_DIM};
use crate::bandit::tuned_parameters;
use crate::cube::{GameConfig, GameRecord};
use crate::error::{Error, Result};

pub type LearnerKind = Algorithm;

pub fn build_learner(kind: LearnerKind, n: usize, eta: f64) -> Result<Box<dyn Learner>> {
    Ok(match kind {
        Algorithm::PolyExp => Box::new(PolyExp::new(n, eta)?),
        Algorithm::Exp2Reference => Box::new(Exp2Learner::new(n, eta)?),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// `config.seed` is the master seed for all runs.
    pub config: GameConfig,
    pub learner: LearnerKind,
    pub adversary: AdversarySpec,
    pub runs: usize,
    /// Replace `config.eta` and `config.gamma` by the tuned values.
    pub tuned: bool,
}

impl ExperimentSpec {
    /// The game configuration actually played, after tuning.
    pub fn resolved_config(&self) -> Result<GameConfig> {
        let mut config = self.config.clone();
        if self.tuned {
            let params = tuned_parameters(config.n, config.horizon, self.learner, config.feedback)?;
            config.eta = params.eta;
            config.gamma = params.gamma;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<GameConfig> {
        if self.runs == 0 {
            return Err(Error::InvalidParameter("runs must be >= 1".into()));
        }
        if self.learner == Algorithm::Exp2Reference && self.config.n > EXP2_MAX_DIM {
            return Err(Error::ReferenceTooLarge {
                n: self.config.n,
                cap: EXP2_MAX_DIM,
            });
        }
        let config = self.resolved_config()?;
        self.adversary.validate(config.n, config.horizon)?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub eta: f64,
    pub gamma: f64,
    pub epsilon: Option<f64>,
    pub mean_regret: f64,
    /// Sample standard deviation over `sqrt(runs)`; 0 for a single run.
    pub stderr: f64,
    pub per_run: Vec<f64>,
    pub bound: f64,
    pub bound_satisfied: bool,
    pub violations: usize,
    pub wall_time: Duration,
}

/// One game of the experiment, seeded by `(config.seed, run_index)`.
pub fn play_run(
    spec: &ExperimentSpec,
    config: &GameConfig,
    run_index: usize,
) -> Result<GameRecord> {
    let mut streams = RunStreams::new(config.seed, run_index as u64);
    let mut adversary =
        spec.adversary
            .instantiate(config.n, config.horizon, &mut streams.adversary)?;
    let mut learner = build_learner(spec.learner, config.n, config.eta)?;
    play_game(config, learner.as_mut(), adversary.as_mut(), &mut streams)
}

/// Neumaier-compensated sum, evaluated in slice order.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        c += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + c
}

pub fn monte_carlo_regret(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let start = Instant::now();
    let config = spec.validate()?;
    let outcomes: Vec<(f64, usize)> = (0..spec.runs)
        .into_par_iter()
        .map(|run| play_run(spec, &config, run).map(|r| (r.regret, r.violation_count)))
        .collect::<Result<_>>()?;

    let per_run: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let runs = per_run.len() as f64;
    let mean = compensated_sum(per_run.iter().copied()) / runs;
    let stderr = if per_run.len() > 1 {
        let ss = compensated_sum(per_run.iter().map(|r| (r - mean).powi(2)));
        (ss / (runs - 1.0)).sqrt() / runs.sqrt()
    } else {
        0.0
    };
    let bound = theoretical_bound(config.n, config.horizon, spec.learner, config.feedback)?;
    Ok(ExperimentResult {
        eta: config.eta,
        gamma: config.gamma,
        epsilon: spec.adversary.epsilon(config.n, config.horizon),
        mean_regret: mean,
        stderr,
        per_run,
        bound,
        bound_satisfied: mean <= bound,
        violations: outcomes.iter().map(|o| o.1).sum(),
        wall_time: start.elapsed(),
    })
}
