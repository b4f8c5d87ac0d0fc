use std::io::Write;
use std::sync::Arc;

use polyexp::adversaries::{AdversarySpec, LossSequence};
use polyexp::algorithms::Algorithm;
use polyexp::algorithms::MeanVector;
use polyexp::bandit::{mixing_matrix, tuned_parameters};
use polyexp::harness::{lower_bound_reference, monte_carlo_regret, ExperimentSpec};
use polyexp::oracle::exact_estimator_expectation;
use polyexp::{Error, Feedback, GameConfig, LossVector};
use proptest::prelude::*;

fn spec(
    n: usize,
    horizon: usize,
    feedback: Feedback,
    adversary: AdversarySpec,
    runs: usize,
) -> ExperimentSpec {
    ExperimentSpec {
        config: GameConfig {
            n,
            horizon,
            eta: 1.0,
            gamma: 0.0,
            feedback,
            seed: 2024,
        },
        learner: Algorithm::PolyExp,
        adversary,
        runs,
        tuned: true,
    }
}

#[test]
fn rademacher_regret_matches_expected_max() {
    let s = spec(
        4,
        512,
        Feedback::FullInformation,
        AdversarySpec::Rademacher,
        400,
    );
    let result = monte_carlo_regret(&s).unwrap();
    let floor = lower_bound_reference(4, 512, Feedback::FullInformation).unwrap();
    assert!((result.mean_regret - floor).abs() <= 4.0 * result.stderr);
    assert!(result.bound_satisfied);
}

#[test]
fn exp2_reference_runs_under_the_same_harness() {
    let mut s = spec(
        3,
        256,
        Feedback::Bandit,
        AdversarySpec::GapStochastic { epsilon: None },
        20,
    );
    s.learner = Algorithm::Exp2Reference;
    let result = monte_carlo_regret(&s).unwrap();
    assert_eq!(result.violations, 0);
    assert!(result.bound_satisfied);
    let tuned = tuned_parameters(3, 256, Algorithm::Exp2Reference, Feedback::Bandit).unwrap();
    assert_eq!(result.eta, tuned.eta);
}

#[test]
fn zero_sequence_from_csv_gives_zero_regret() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    for _ in 0..50 {
        writeln!(file, "0,0,0").unwrap();
    }
    let seq = Arc::new(LossSequence::from_path(file.path()).unwrap());
    for feedback in [Feedback::FullInformation, Feedback::Bandit] {
        let s = spec(
            3,
            50,
            feedback,
            AdversarySpec::FixedSequence(seq.clone()),
            3,
        );
        let result = monte_carlo_regret(&s).unwrap();
        assert!(result.per_run.iter().all(|&r| r == 0.0));
    }
}

#[test]
fn short_sequence_is_rejected() {
    let rows = vec![LossVector::zeros(2); 5];
    let seq = Arc::new(LossSequence::from_rows(rows).unwrap());
    let s = spec(
        2,
        6,
        Feedback::FullInformation,
        AdversarySpec::FixedSequence(seq),
        1,
    );
    assert!(matches!(
        monte_carlo_regret(&s),
        Err(Error::SequenceExhausted { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn estimator_is_unbiased(
        x in proptest::collection::vec(0.0f64..=1.0, 1..=5),
        l in proptest::collection::vec(-1.0f64..=1.0, 5),
        gamma in 0.01f64..0.99,
    ) {
        let n = x.len();
        let x = MeanVector::new(x).unwrap();
        let l = LossVector::bounded(l[..n].to_vec()).unwrap();
        let e = exact_estimator_expectation(&x, gamma, &l).unwrap();
        for (a, b) in e.values().iter().zip(l.values()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn mixing_matrix_is_well_conditioned(
        x in proptest::collection::vec(0.0f64..=1.0, 1..=10),
        gamma in 0.001f64..0.999,
    ) {
        let p = mixing_matrix(&MeanVector::new(x).unwrap(), gamma).unwrap();
        prop_assert!(p.min_eigenvalue() >= gamma / 4.0 - 1e-12);
    }
}
