use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adversaries::Adversary;
use crate::algorithms::Learner;
use crate::bandit::{
    estimate_loss, estimate_magnitude_check, mixed_sample_with, mixing_matrix_from, MomentMatrix,
};
use crate::cube::{
    check_dim, linear_loss, realized_regret, CubePoint, Feedback, GameConfig, GameRecord,
    LossVector,
};
use crate::error::{Error, Result};

/// Independent generators for one run: learner sampling and adversary draws.
///
/// Both derive from `(master seed, run index)` only, so runs can execute in
/// any order or on any thread.
#[derive(Debug, Clone)]
pub struct RunStreams {
    pub learner: ChaCha8Rng,
    pub adversary: ChaCha8Rng,
}

impl RunStreams {
    pub fn new(master_seed: u64, run_index: u64) -> Self {
        let stream = |offset: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
            rng.set_stream(2 * run_index + offset);
            rng
        };
        Self {
            learner: stream(0),
            adversary: stream(1),
        }
    }
}

fn check_players(
    config: &GameConfig,
    learner: &dyn Learner,
    adversary: &dyn Adversary,
) -> Result<()> {
    config.validate()?;
    check_dim(config.n, learner.dim())?;
    check_dim(config.n, adversary.dim())
}

fn finish(mut record: GameRecord) -> Result<GameRecord> {
    record.regret = realized_regret(&record)?;
    Ok(record)
}

pub fn play_full_information(
    config: &GameConfig,
    learner: &mut dyn Learner,
    adversary: &mut dyn Adversary,
    streams: &mut RunStreams,
) -> Result<GameRecord> {
    if config.feedback != Feedback::FullInformation {
        return Err(Error::InvalidParameter(
            "play_full_information needs full feedback".into(),
        ));
    }
    check_players(config, learner, adversary)?;
    let mut record = GameRecord::with_capacity(config.horizon);
    for t in 0..config.horizon {
        let loss = adversary.next_loss(t, &record.actions, &mut streams.adversary)?;
        check_dim(config.n, loss.len())?;
        let x = learner.sample(&mut streams.learner);
        record.incurred.push(linear_loss(&x, &loss)?);
        learner.update(&loss)?;
        record.actions.push(x);
        record.estimates.push(loss.clone());
        record.losses.push(loss);
    }
    finish(record)
}

/// Everything the bandit learner gets to see in one round.
struct BanditObservation<'a> {
    action: &'a CubePoint,
    mixing: &'a MomentMatrix,
    observed: f64,
}

fn bandit_update(learner: &mut dyn Learner, obs: BanditObservation<'_>) -> Result<LossVector> {
    let estimate = estimate_loss(obs.mixing, obs.action, obs.observed)?;
    learner.update(&estimate)?;
    Ok(estimate)
}

pub fn play_bandit(
    config: &GameConfig,
    learner: &mut dyn Learner,
    adversary: &mut dyn Adversary,
    streams: &mut RunStreams,
) -> Result<GameRecord> {
    if config.feedback != Feedback::Bandit {
        return Err(Error::InvalidParameter(
            "play_bandit needs bandit feedback".into(),
        ));
    }
    check_players(config, learner, adversary)?;
    let mut record = GameRecord::with_capacity(config.horizon);
    for t in 0..config.horizon {
        let loss = adversary.next_loss(t, &record.actions, &mut streams.adversary)?;
        check_dim(config.n, loss.len())?;
        let mixing = mixing_matrix_from(&learner.second_moment(), config.gamma)?;
        let learner_ref = &*learner;
        let x = mixed_sample_with(config.n, config.gamma, &mut streams.learner, |r| {
            learner_ref.sample(r)
        });
        let observed = linear_loss(&x, &loss)?;
        let estimate = bandit_update(
            learner,
            BanditObservation {
                action: &x,
                mixing: &mixing,
                observed,
            },
        )?;
        if estimate_magnitude_check(config.eta, &estimate) > 0 {
            record.violation_count += 1;
        }
        record.incurred.push(observed);
        record.actions.push(x);
        record.estimates.push(estimate);
        record.losses.push(loss);
    }
    finish(record)
}

pub fn play_game(
    config: &GameConfig,
    learner: &mut dyn Learner,
    adversary: &mut dyn Adversary,
    streams: &mut RunStreams,
) -> Result<GameRecord> {
    match config.feedback {
        Feedback::FullInformation => play_full_information(config, learner, adversary, streams),
        Feedback::Bandit => play_bandit(config, learner, adversary, streams),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::{
        FixedSequenceAdversary, GapAdversary, LossSequence, RademacherAdversary,
    };
    use crate::algorithms::Algorithm;
    use crate::algorithms::{Exp2Learner, PolyExp};
    use crate::bandit::tuned_parameters;
    use rand::RngCore;
    use std::sync::Arc;

    struct Silent(usize);

    impl Adversary for Silent {
        fn dim(&self) -> usize {
            self.0
        }

        fn next_loss(
            &mut self,
            _: usize,
            _: &[CubePoint],
            _: &mut dyn RngCore,
        ) -> Result<LossVector> {
            Ok(LossVector::zeros(self.0))
        }
    }

    fn fixed(rows: Vec<Vec<f64>>) -> FixedSequenceAdversary {
        let rows = rows
            .into_iter()
            .map(|r| LossVector::bounded(r).unwrap())
            .collect();
        FixedSequenceAdversary::new(Arc::new(LossSequence::from_rows(rows).unwrap()))
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let mut a = RunStreams::new(7, 3);
        let mut b = RunStreams::new(7, 3);
        let mut c = RunStreams::new(7, 4);
        let x = a.learner.next_u64();
        assert_eq!(x, b.learner.next_u64());
        assert_ne!(x, a.adversary.next_u64());
        assert_ne!(x, c.learner.next_u64());
    }

    #[test]
    fn zero_losses_give_zero_regret() {
        for feedback in [Feedback::FullInformation, Feedback::Bandit] {
            let gamma = if feedback == Feedback::Bandit {
                0.2
            } else {
                0.0
            };
            let config = GameConfig::new(4, 100, 0.1, gamma, feedback, 0).unwrap();
            let mut learner = PolyExp::new(4, 0.1).unwrap();
            let record = play_game(
                &config,
                &mut learner,
                &mut Silent(4),
                &mut RunStreams::new(0, 0),
            )
            .unwrap();
            assert_eq!(record.regret, 0.0);
            assert!(record
                .estimates
                .iter()
                .all(|e| e.values().iter().all(|&v| v == 0.0)));
            assert_eq!(learner.means().values(), &[0.5; 4]);
        }
    }

    #[test]
    fn fixed_sequence_matches_closed_form_means() {
        let eta = 0.4;
        let rows = vec![vec![0.5, -1.0], vec![0.25, 0.75], vec![-0.5, 1.0]];
        let config = GameConfig::new(2, 3, eta, 0.0, Feedback::FullInformation, 0).unwrap();
        let mut learner = PolyExp::new(2, eta).unwrap();
        play_full_information(
            &config,
            &mut learner,
            &mut fixed(rows),
            &mut RunStreams::new(1, 0),
        )
        .unwrap();
        // cumulative losses (0.25, 0.75)
        let expected = [
            1.0 / (1.0 + (eta * 0.25f64).exp()),
            1.0 / (1.0 + (eta * 0.75f64).exp()),
        ];
        for (a, b) in learner.means().values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn same_seed_same_record() {
        let params = tuned_parameters(5, 300, Algorithm::PolyExp, Feedback::Bandit).unwrap();
        let config =
            GameConfig::new(5, 300, params.eta, params.gamma, Feedback::Bandit, 9).unwrap();
        let play = || {
            let mut streams = RunStreams::new(9, 2);
            let mut adversary = GapAdversary::random(5, 0.1, &mut streams.adversary).unwrap();
            let mut learner = PolyExp::new(5, params.eta).unwrap();
            play_bandit(&config, &mut learner, &mut adversary, &mut streams).unwrap()
        };
        assert_eq!(play(), play());
    }

    #[test]
    fn tuned_bandit_has_no_violations() {
        for n in [2, 5] {
            let params = tuned_parameters(n, 1000, Algorithm::PolyExp, Feedback::Bandit).unwrap();
            let config =
                GameConfig::new(n, 1000, params.eta, params.gamma, Feedback::Bandit, 4).unwrap();
            let mut learner = PolyExp::new(n, params.eta).unwrap();
            let record = play_bandit(
                &config,
                &mut learner,
                &mut RademacherAdversary::new(n),
                &mut RunStreams::new(4, 0),
            )
            .unwrap();
            assert_eq!(record.violation_count, 0);
        }
    }

    #[test]
    fn bandit_learner_sees_only_the_scalar() {
        let n = 4;
        let config = GameConfig::new(n, 200, 0.05, 0.3, Feedback::Bandit, 0).unwrap();
        let mut streams = RunStreams::new(11, 0);
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|_| {
                crate::adversaries::rademacher_loss(n, &mut streams.adversary)
                    .values()
                    .to_vec()
            })
            .collect();
        let mut first = PolyExp::new(n, 0.05).unwrap();
        let original = play_bandit(
            &config,
            &mut first,
            &mut fixed(rows.clone()),
            &mut RunStreams::new(11, 0),
        )
        .unwrap();

        // zero every coordinate the learner did not play
        let masked: Vec<Vec<f64>> = rows
            .iter()
            .zip(&original.actions)
            .map(|(r, x)| {
                r.iter()
                    .enumerate()
                    .map(|(i, &v)| if x.is_set(i) { v } else { 0.0 })
                    .collect()
            })
            .collect();
        let mut second = PolyExp::new(n, 0.05).unwrap();
        let replay = play_bandit(
            &config,
            &mut second,
            &mut fixed(masked),
            &mut RunStreams::new(11, 0),
        )
        .unwrap();
        assert_eq!(original.actions, replay.actions);
        assert_eq!(original.estimates, replay.estimates);
        assert_eq!(original.incurred, replay.incurred);
        assert_eq!(first, second);
    }

    #[test]
    fn exp2_and_polyexp_play_identically_in_distribution_terms() {
        let n = 3;
        let config = GameConfig::new(n, 50, 0.2, 0.0, Feedback::FullInformation, 0).unwrap();
        let mut exp2 = Exp2Learner::new(n, 0.2).unwrap();
        let mut poly = PolyExp::new(n, 0.2).unwrap();
        let mut a = RademacherAdversary::new(n);
        play_full_information(&config, &mut exp2, &mut a, &mut RunStreams::new(2, 0)).unwrap();
        let record =
            play_full_information(&config, &mut poly, &mut a, &mut RunStreams::new(2, 0)).unwrap();
        for (p, q) in exp2.means().values().iter().zip(poly.means().values()) {
            assert!((p - q).abs() < 1e-12);
        }
        assert_eq!(record.rounds(), 50);
    }

    #[test]
    fn rejects_mismatched_players() {
        let config = GameConfig::new(3, 10, 0.1, 0.0, Feedback::FullInformation, 0).unwrap();
        let mut learner = PolyExp::new(2, 0.1).unwrap();
        let err = play_full_information(
            &config,
            &mut learner,
            &mut Silent(3),
            &mut RunStreams::new(0, 0),
        );
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
        let mut learner = PolyExp::new(3, 0.1).unwrap();
        assert!(play_bandit(
            &config,
            &mut learner,
            &mut Silent(3),
            &mut RunStreams::new(0, 0)
        )
        .is_err());
    }
}
