//! Command-line front end for the `polyexp` crate.
//!
//! `run` executes a Monte Carlo regret experiment, `equivalence` and
//! `lowerbound` run numerical check suites, `bounds` tabulates the closed-form
//! bounds. Data goes to stdout (or `--output`), diagnostics to stderr.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use polyexp::adversaries::{rademacher_loss, AdversarySpec, LossSequence};
use polyexp::algorithms::{
    exp2_distribution, omd_step, polyexp_means, polyexp_update, Algorithm, MeanVector, PolyExp,
};
use polyexp::bandit::tuned_parameters;
use polyexp::harness::{
    lower_bound_reference, monte_carlo_regret, theoretical_bound, ExperimentSpec,
};
use polyexp::oracle::{
    enumerate_cube, expected_abs_rademacher_sum, expected_max_linear_gain, product_sum_identity,
};
use polyexp::{Feedback, GameConfig, LossVector};

pub const VERSION: &str = concat!("polyexp ", env!("CARGO_PKG_VERSION"));

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_SUITE_FAILURE: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    SuiteFailure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::SuiteFailure(_) => EXIT_SUITE_FAILURE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::SuiteFailure(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<polyexp::Error> for CliError {
    fn from(e: polyexp::Error) -> Self {
        let hint = match &e {
            polyexp::Error::HorizonTooShort { min_horizon, .. } => {
                format!(" (use --T {min_horizon} or larger, or pass --eta and --gamma)")
            }
            _ => String::new(),
        };
        CliError::Validation(format!("{e}{hint}"))
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Validation(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Validation(format!("csv: {e}"))
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "polyexp",
    version,
    about = "Online linear optimization on the {0,1}^n hypercube"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo estimate of expected regret against an adversary
    Run(RunArgs),
    /// Exp2 / PolyExp / mirror descent agreement checks
    Equivalence(EquivalenceArgs),
    /// Upper bounds and lower-bound references on an (n, T) grid
    Bounds(BoundsArgs),
    /// Sign-sum formula and expected best-vertex gain checks
    Lowerbound(LowerboundArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LearnerArg {
    Polyexp,
    Exp2,
}

impl From<LearnerArg> for Algorithm {
    fn from(v: LearnerArg) -> Self {
        match v {
            LearnerArg::Polyexp => Algorithm::PolyExp,
            LearnerArg::Exp2 => Algorithm::Exp2Reference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeedbackArg {
    Full,
    Bandit,
}

impl From<FeedbackArg> for Feedback {
    fn from(v: FeedbackArg) -> Self {
        match v {
            FeedbackArg::Full => Feedback::FullInformation,
            FeedbackArg::Bandit => Feedback::Bandit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AdversaryArg {
    Rademacher,
    Gap,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "T")]
    pub horizon: usize,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, value_enum, default_value_t = LearnerArg::Polyexp)]
    pub learner: LearnerArg,
    #[arg(long, value_enum, default_value_t = FeedbackArg::Full)]
    pub feedback: FeedbackArg,
    #[arg(long, value_enum, default_value_t = AdversaryArg::Rademacher)]
    pub adversary: AdversaryArg,
    /// Gap adversary tilt; defaults to min(sqrt(n/T)/4, 1/2)
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Learning rate; tuned from (n, T) when omitted
    #[arg(long)]
    pub eta: Option<f64>,
    /// Exploration mass for bandit feedback; tuned when omitted
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Headerless CSV of T rows with n losses each, for `--adversary fixed`
    #[arg(long)]
    pub sequence: Option<PathBuf>,
    #[arg(long, env = "POLYEXP_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads; output does not depend on it
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write per-run regrets to this CSV file
    #[arg(long)]
    pub per_run: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EquivalenceArgs {
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long = "T", default_value_t = 30)]
    pub horizon: usize,
    #[arg(long, default_value_t = 100)]
    pub histories: usize,
    #[arg(long, default_value_t = 0.3)]
    pub eta: f64,
    /// Random (x, estimate, eta) triples for the mirror-step suite
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[arg(long, env = "POLYEXP_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 4, 8])]
    pub n: Vec<usize>,
    #[arg(long = "T", value_delimiter = ',', default_values_t = vec![10_000usize])]
    pub horizon: Vec<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LowerboundArgs {
    #[arg(long = "T")]
    pub horizon: u64,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Simulated games for the Monte Carlo check
    #[arg(long, default_value_t = 100_000)]
    pub games: usize,
    #[arg(long, env = "POLYEXP_SEED", default_value_t = 0)]
    pub seed: u64,
}

pub fn execute(cli: Cli) -> CliResult {
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Equivalence(args) => cmd_equivalence(&args),
        Command::Bounds(args) => cmd_bounds(&args),
        Command::Lowerbound(args) => cmd_lowerbound(&args),
    }
}

fn open_output(path: Option<&PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

/// One result row; field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub n: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub runs: usize,
    pub learner: Algorithm,
    pub feedback: Feedback,
    pub adversary: String,
    pub eta: f64,
    pub gamma: f64,
    pub mean_regret: f64,
    pub stderr: f64,
    pub bound: f64,
    pub bound_satisfied: bool,
    pub violations: usize,
    pub seed: u64,
    pub epsilon: Option<f64>,
    pub version: &'static str,
}

pub const RUN_HEADER: &str =
    "n,T,runs,learner,feedback,adversary,eta,gamma,mean_regret,stderr,bound,bound_satisfied,violations,seed,epsilon,version";

pub fn experiment_spec(args: &RunArgs) -> CliResult<ExperimentSpec> {
    let algorithm = Algorithm::from(args.learner);
    let feedback = Feedback::from(args.feedback);
    let adversary = match args.adversary {
        AdversaryArg::Rademacher => AdversarySpec::Rademacher,
        AdversaryArg::Gap => AdversarySpec::GapStochastic {
            epsilon: args.epsilon,
        },
        AdversaryArg::Fixed => {
            let path = args.sequence.as_ref().ok_or_else(|| {
                CliError::Validation("--adversary fixed needs --sequence <file>".into())
            })?;
            AdversarySpec::FixedSequence(Arc::new(LossSequence::from_path(path)?))
        }
    };
    if args.epsilon.is_some() && args.adversary != AdversaryArg::Gap {
        return Err(CliError::Validation(
            "--epsilon only applies to --adversary gap".into(),
        ));
    }
    if args.sequence.is_some() && args.adversary != AdversaryArg::Fixed {
        return Err(CliError::Validation(
            "--sequence only applies to --adversary fixed".into(),
        ));
    }
    let needs_tuning = args.eta.is_none() || (feedback == Feedback::Bandit && args.gamma.is_none());
    let tuned = if needs_tuning {
        Some(tuned_parameters(args.n, args.horizon, algorithm, feedback)?)
    } else {
        None
    };
    let eta = args.eta.or(tuned.map(|t| t.eta)).unwrap_or_default();
    let gamma = match feedback {
        Feedback::FullInformation => args.gamma.unwrap_or(0.0),
        Feedback::Bandit => args.gamma.or(tuned.map(|t| t.gamma)).unwrap_or_default(),
    };
    let spec = ExperimentSpec {
        config: GameConfig {
            n: args.n,
            horizon: args.horizon,
            eta,
            gamma,
            feedback,
            seed: args.seed,
        },
        learner: algorithm,
        adversary,
        runs: args.runs,
        tuned: false,
    };
    spec.validate()?;
    Ok(spec)
}

fn thread_pool(threads: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Validation("--threads must be >= 1".into()));
        }
        builder = builder.num_threads(t);
    }
    builder
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))
}

pub fn cmd_run(args: &RunArgs) -> CliResult {
    let spec = experiment_spec(args)?;
    let result = thread_pool(args.threads)?.install(|| monte_carlo_regret(&spec))?;
    let row = RunRow {
        n: spec.config.n,
        horizon: spec.config.horizon,
        runs: spec.runs,
        learner: spec.learner,
        feedback: spec.config.feedback,
        adversary: spec.adversary.kind().to_string(),
        eta: result.eta,
        gamma: result.gamma,
        mean_regret: result.mean_regret,
        stderr: result.stderr,
        bound: result.bound,
        bound_satisfied: result.bound_satisfied,
        violations: result.violations,
        seed: spec.config.seed,
        epsilon: result.epsilon,
        version: VERSION,
    };
    let mut out = open_output(args.output.as_ref())?;
    match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.serialize(&row)?;
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &row)
                .map_err(|e| CliError::Validation(format!("json: {e}")))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    if let Some(path) = &args.per_run {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["run", "regret"])?;
        for (i, r) in result.per_run.iter().enumerate() {
            w.write_record([i.to_string(), r.to_string()])?;
        }
        w.flush()?;
    }
    eprintln!("wall time {:.3}s", result.wall_time.as_secs_f64());
    Ok(())
}

/// Largest deviation found by one check suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

pub const EQUIVALENCE_MAX_DIM: usize = 10;

fn random_history(n: usize, rounds: usize, rng: &mut ChaCha8Rng) -> Vec<LossVector> {
    (0..rounds)
        .map(|_| {
            let row = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            LossVector::bounded(row).expect("draws lie in [-1, 1]")
        })
        .collect()
}

/// Runs the joint-distribution, marginal, mirror-step and product/sum
/// identity suites. `inject_fault` nudges one PolyExp update by `1e-6`.
pub fn equivalence_suites(args: &EquivalenceArgs) -> CliResult<Vec<SuiteReport>> {
    let n = args.n;
    if n == 0 || n > EQUIVALENCE_MAX_DIM {
        return Err(CliError::Validation(format!(
            "--n must lie in 1..={EQUIVALENCE_MAX_DIM}, got {n}"
        )));
    }
    if !(args.eta.is_finite() && args.eta > 0.0) {
        return Err(CliError::Validation(format!(
            "--eta must be > 0, got {}",
            args.eta
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let vertices = enumerate_cube(n)?;
    let (mut joint, mut marginal, mut identity) = (0.0f64, 0.0f64, 0.0f64);
    for h in 0..args.histories {
        let history = random_history(n, args.horizon, &mut rng);
        let mut state = PolyExp::new(n, args.eta)?;
        for (t, l) in history.iter().enumerate() {
            if args.inject_fault && h == 0 && t == 0 {
                let mut v = l.values().to_vec();
                v[0] += 1e-6;
                state = polyexp_update(&state, &LossVector::unbounded(v))?;
            } else {
                state = polyexp_update(&state, l)?;
            }
        }
        let x = polyexp_means(&state);
        let exact = exp2_distribution(&history, args.eta, n)?;
        for v in &vertices {
            joint = joint.max((exact.probability(v) - x.product_probability(v)).abs());
        }
        for (a, b) in exact.marginals().values().iter().zip(x.values()) {
            marginal = marginal.max((a - b).abs());
        }
        if n <= polyexp::oracle::IDENTITY_MAX_DIM {
            let (lhs, rhs) = product_sum_identity(&history, args.eta, n)?;
            identity = identity.max((lhs - rhs).abs());
        }
    }

    let mut omd = 0.0f64;
    for _ in 0..args.steps {
        let x = MeanVector::new((0..n).map(|_| rng.random_range(0.01..0.99)).collect())?;
        let l = LossVector::unbounded((0..n).map(|_| rng.random_range(-5.0..5.0)).collect());
        let eta = rng.random_range(0.01..1.0);
        let mirror = omd_step(&x, &l, eta)?;
        let poly = polyexp_means(&polyexp_update(&PolyExp::from_means(&x, eta)?, &l)?);
        for (a, b) in mirror.values().iter().zip(poly.values()) {
            omd = omd.max((a - b).abs());
        }
    }

    Ok(vec![
        SuiteReport {
            name: "exp2_joint",
            max_deviation: joint,
            tolerance: 1e-9,
        },
        SuiteReport {
            name: "exp2_marginal",
            max_deviation: marginal,
            tolerance: 1e-9,
        },
        SuiteReport {
            name: "omd_step",
            max_deviation: omd,
            tolerance: 1e-12,
        },
        SuiteReport {
            name: "product_sum_identity",
            max_deviation: identity,
            tolerance: 1e-9,
        },
    ])
}

fn report_suites(reports: &[SuiteReport]) -> CliResult {
    let mut out = io::stdout().lock();
    writeln!(out, "suite,max_deviation,tolerance,pass")?;
    for r in reports {
        writeln!(
            out,
            "{},{:e},{:e},{}",
            r.name,
            r.max_deviation,
            r.tolerance,
            r.passed()
        )?;
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.name)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::SuiteFailure(failed.join(", ")))
    }
}

pub fn cmd_equivalence(args: &EquivalenceArgs) -> CliResult {
    report_suites(&equivalence_suites(args)?)
}

/// One row of the bounds table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsRow {
    pub n: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub polyexp_full: f64,
    pub polyexp_bandit: f64,
    pub exp2_full: f64,
    pub exp2_bandit: f64,
    /// Empty for odd `T > 24`, where no exact value is computed.
    pub lower_full: Option<f64>,
    pub lower_bandit: f64,
    pub ratio_full: f64,
    pub ratio_bandit: f64,
}

pub fn bounds_row(n: usize, horizon: usize) -> CliResult<BoundsRow> {
    let b = |a, f| theoretical_bound(n, horizon, a, f);
    let polyexp_full = b(Algorithm::PolyExp, Feedback::FullInformation)?;
    let polyexp_bandit = b(Algorithm::PolyExp, Feedback::Bandit)?;
    let exp2_full = b(Algorithm::Exp2Reference, Feedback::FullInformation)?;
    let exp2_bandit = b(Algorithm::Exp2Reference, Feedback::Bandit)?;
    Ok(BoundsRow {
        n,
        horizon,
        polyexp_full,
        polyexp_bandit,
        exp2_full,
        exp2_bandit,
        lower_full: lower_bound_reference(n, horizon, Feedback::FullInformation).ok(),
        lower_bandit: lower_bound_reference(n, horizon, Feedback::Bandit)?,
        ratio_full: exp2_full / polyexp_full,
        ratio_bandit: exp2_bandit / polyexp_bandit,
    })
}

pub fn cmd_bounds(args: &BoundsArgs) -> CliResult {
    let mut out = open_output(args.output.as_ref())?;
    let mut w = csv::Writer::from_writer(&mut out);
    for &n in &args.n {
        for &t in &args.horizon {
            w.serialize(bounds_row(n, t)?)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Sum of `|Y_1 + ... + Y_T|` over all `2^T` sign patterns, divided by `2^T`.
pub fn enumerate_abs_sign_sum(horizon: u32) -> f64 {
    let total: u64 = (0u64..1 << horizon)
        .map(|mask| (2 * i64::from(mask.count_ones()) - i64::from(horizon)).unsigned_abs())
        .sum();
    total as f64 / 2f64.powi(horizon as i32)
}

pub const ENUMERATION_MAX_HORIZON: u64 = 24;

/// Sample mean and standard error of `max_X sum_t l_t^T X` over `games`
/// Rademacher games.
pub fn simulate_max_gain(n: usize, horizon: u64, games: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for _ in 0..games {
        let mut totals = vec![0.0f64; n];
        for _ in 0..horizon {
            for (s, v) in totals.iter_mut().zip(rademacher_loss(n, &mut rng).values()) {
                *s += v;
            }
        }
        let gain: f64 = totals.iter().map(|&s| s.max(0.0)).sum();
        sum += gain;
        sum_sq += gain * gain;
    }
    let g = games as f64;
    let mean = sum / g;
    let var = (sum_sq - g * mean * mean) / (g - 1.0);
    (mean, (var.max(0.0) / g).sqrt())
}

pub fn cmd_lowerbound(args: &LowerboundArgs) -> CliResult {
    let t = args.horizon;
    if t == 0 || t % 2 == 1 {
        return Err(CliError::Validation(format!(
            "--T must be even and positive, got {t}"
        )));
    }
    if args.n == 0 {
        return Err(CliError::Validation("--n must be >= 1".into()));
    }
    if args.games < 2 {
        return Err(CliError::Validation("--games must be >= 2".into()));
    }
    let formula = expected_abs_rademacher_sum(t)?;
    let mut out = io::stdout().lock();
    let mut failures = Vec::new();
    writeln!(out, "check,value,reference,pass")?;
    if t <= ENUMERATION_MAX_HORIZON {
        let enumerated = enumerate_abs_sign_sum(t as u32);
        let pass = formula == enumerated;
        writeln!(out, "sign_sum_enumeration,{formula},{enumerated},{pass}")?;
        if !pass {
            failures.push("sign_sum_enumeration");
        }
    } else {
        writeln!(out, "sign_sum_formula,{formula},,true")?;
    }
    let exact = expected_max_linear_gain(args.n, t)?;
    let (mean, stderr) = simulate_max_gain(args.n, t, args.games, args.seed);
    let pass = (mean - exact).abs() <= 3.0 * stderr;
    writeln!(out, "expected_max_gain_mc,{mean},{exact},{pass}")?;
    writeln!(out, "expected_max_gain_stderr,{stderr},,true")?;
    if !pass {
        failures.push("expected_max_gain_mc");
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::SuiteFailure(failures.join(", ")))
    }
}
