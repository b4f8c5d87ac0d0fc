//! Game loops, Monte Carlo regret estimation and closed-form bounds.

pub mod bounds;
pub mod experiment;
pub mod game;

pub use bounds::{bandit_lower_bound, lower_bound_reference, theoretical_bound};
pub use experiment::{
    build_learner, monte_carlo_regret, play_run, ExperimentResult, ExperimentSpec, LearnerKind,
};
pub use game::{play_bandit, play_full_information, play_game, RunStreams};
