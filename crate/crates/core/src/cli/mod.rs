//! Command-line front end.
//!
//! `ftcal fit | eval | predict | simulate | inspect`. Exit codes: 0 success,
//! 1 usage or specification error, 2 data error, 3 numerical failure.
//! `FTCAL_THREADS` caps the number of worker threads.

mod commands;
mod sweep;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::SplitMode;
use crate::error::{Error, Result};
use crate::model::{ModelSpec, EFFECTIVE_THRESHOLD};

pub use sweep::{sweep_configurations, SweepRow, SWEEP_HEADER, SWEEP_LAMBDAS};

/// Environment variable limiting the worker pool size.
pub const THREADS_VAR: &str = "FTCAL_THREADS";

/// Everything one invocation needs, as parsed from the command line.
#[derive(Debug, Clone, Parser)]
#[command(name = "ftcal", version, about = "Polynomial calibration of six-axis force/torque sensors")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Fit a calibration model, or a degree/λ sweep with --sweep.
    Fit(FitArgs),
    /// Score a model on a dataset.
    Eval(EvalArgs),
    /// Write predicted wrenches for a dataset.
    Predict(PredictArgs),
    /// Generate a synthetic dataset.
    Simulate(SimulateArgs),
    /// List model coefficients by magnitude.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    /// Polynomial degree. With --sweep, the largest degree swept (default 5).
    #[arg(long)]
    pub degree: Option<usize>,
    /// LASSO weight in normalized feature units; 0 selects least squares.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Lagged outputs (ARX).
    #[arg(long, default_value_t = 0)]
    pub na: usize,
    /// Lagged inputs (ARX).
    #[arg(long, default_value_t = 0)]
    pub nb: usize,
    /// Use the six gauges only.
    #[arg(long)]
    pub no_temperature: bool,
}

impl SpecArgs {
    pub fn inputs(&self) -> usize {
        if self.no_temperature {
            6
        } else {
            7
        }
    }

    pub fn spec(&self) -> Result<ModelSpec> {
        let spec = ModelSpec::new(self.degree.unwrap_or(1), self.inputs(), 6)
            .with_lambda(self.lambda.unwrap_or(0.0))
            .with_lags(self.na, self.nb);
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitKind {
    Chronological,
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Training dataset.
    #[arg(long, conflicts_with = "data")]
    pub train: Option<PathBuf>,
    /// Validation dataset.
    #[arg(long)]
    pub val: Option<PathBuf>,
    /// Single dataset, split with --split.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Fraction of --data used for training.
    #[arg(long, requires = "data", conflicts_with = "val")]
    pub split: Option<f64>,
    #[arg(long, value_enum, default_value_t = SplitKind::Chronological)]
    pub split_mode: SplitKind,
    /// Seed for a random split.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Zero coefficients with magnitude at or below this before saving.
    #[arg(long)]
    pub prune: Option<f64>,
    /// Model file, or the sweep CSV with --sweep (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fit degrees 1..=d with least squares and the λ ladder at degree 4.
    #[arg(long)]
    pub sweep: bool,
    /// Leave the fit time out of the model file.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Report file (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Prediction CSV (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrajectoryKind {
    /// Independent uniform draws over the envelope.
    Random,
    /// Fixed-norm forces over a grid of directions.
    Grid,
    /// A vertical load ramped up and back down.
    Lifting,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Transducer settings (TOML); defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for the trajectory and the measurement noise.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample count for the random trajectory.
    #[arg(long, default_value_t = 5000)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = TrajectoryKind::Random)]
    pub trajectory: TrajectoryKind,
    /// Dataset CSV (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Hide coefficients with magnitude at or below this.
    #[arg(long, default_value_t = EFFECTIVE_THRESHOLD)]
    pub prune: f64,
    /// Listing file (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl FitArgs {
    pub fn split_mode(&self) -> SplitMode {
        match self.split_mode {
            SplitKind::Chronological => SplitMode::Chronological,
            SplitKind::Random => SplitMode::Random(self.seed),
        }
    }
}

impl RunConfig {
    /// Cross-flag checks clap cannot express.
    pub fn validate(&self) -> Result<()> {
        match &self.command {
            Command::Fit(a) => {
                if a.train.is_none() && a.data.is_none() {
                    return Err(Error::InvalidSpec("fit needs --train or --data".into()));
                }
                if a.sweep {
                    if a.spec.lambda.is_some() {
                        return Err(Error::InvalidSpec(
                            "--sweep runs its own λ ladder; drop --lambda".into(),
                        ));
                    }
                    if a.prune.is_some() {
                        return Err(Error::InvalidSpec("--prune does not apply to --sweep".into()));
                    }
                } else if a.out.is_none() {
                    return Err(Error::InvalidSpec("fit needs --out for the model file".into()));
                }
                if let Some(p) = a.prune {
                    if !(p >= 0.0) {
                        return Err(Error::InvalidSpec(format!("--prune must be ≥ 0, got {p}")));
                    }
                }
                let mut spec = a.spec.clone();
                if a.sweep {
                    spec.degree = Some(spec.degree.unwrap_or(sweep::DEFAULT_MAX_DEGREE));
                }
                spec.spec()?;
            }
            Command::Inspect(a) => {
                if !(a.prune >= 0.0) {
                    return Err(Error::InvalidSpec(format!("--prune must be ≥ 0, got {}", a.prune)));
                }
            }
            Command::Simulate(a) => {
                if a.samples == 0 {
                    return Err(Error::InvalidSpec("--samples must be positive".into()));
                }
            }
            Command::Eval(_) | Command::Predict(_) => {}
        }
        Ok(())
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_VAR) {
        let threads: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                Error::InvalidSpec(format!("{THREADS_VAR} must be a positive integer, got \"{value}\""))
            })?;
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| Error::Numerical(format!("cannot start worker pool: {e}")))
}

/// Runs a parsed configuration.
pub fn run(config: &RunConfig) -> Result<()> {
    config.validate()?;
    let pool = thread_pool()?;
    pool.install(|| match &config.command {
        Command::Fit(a) if a.sweep => sweep::cmd_sweep(a),
        Command::Fit(a) => commands::cmd_fit(a),
        Command::Eval(a) => commands::cmd_eval(a),
        Command::Predict(a) => commands::cmd_predict(a),
        Command::Simulate(a) => commands::cmd_simulate(a),
        Command::Inspect(a) => commands::cmd_inspect(a),
    })
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&config) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    main_with(std::env::args_os())
}
