//! Command-line front end. `main.rs` only parses arguments and maps errors to
//! exit codes; everything else lives here so it can be tested in-process.

mod commands;
mod range;
mod sweep;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use noma_crs::ErrorKind;

pub use range::RhoRange;
pub use sweep::SweepId;

/// Exit status for invalid configuration or arguments.
pub const EXIT_CONFIG: i32 = 3;
/// Exit status for numerical failures.
pub const EXIT_NUMERIC: i32 = 4;
/// Exit status for file, dataset and model errors.
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "noma-crs", version, about = "Error-rate analysis and power-split optimisation for NOMA cooperative relaying")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form BPSK error probabilities over an SNR sweep.
    Analyze(AnalyzeArgs),
    /// Monte Carlo BER over an SNR sweep, with the closed form alongside for BPSK.
    Simulate(SimulateArgs),
    /// Full-search optimal (alpha, beta) per SNR point.
    Optimize(OptimizeArgs),
    /// Label a channel grid with full-search optima.
    Dataset(DatasetArgs),
    /// Train surrogate models on a labelled dataset.
    Train(TrainArgs),
    /// Predict (alpha, beta) with a trained surrogate.
    Predict(PredictArgs),
    /// Reproduce a figure-class experiment as CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario TOML file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Total SNR sweep in dB, START:STEP:STOP or a single value.
    #[arg(long, default_value = "0:5:40", allow_hyphen_values = true)]
    pub rho_db: RhoRange,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "0:5:40", allow_hyphen_values = true)]
    pub rho_db: RhoRange,
    /// Frames per SNR point.
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Analytic,
    Mc,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: Common,
    /// SNR points; defaults to the config's rho_t_db.
    #[arg(long, allow_hyphen_values = true)]
    pub rho_db: Option<RhoRange>,
    /// Grid points per axis.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = Engine::Analytic)]
    pub engine: Engine,
    /// Frames per grid point for the Monte Carlo engine.
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also write the alpha,beta,ber surface of a single SNR point here.
    #[arg(long)]
    pub surface: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Total SNR values in dB.
    #[arg(long, default_value = "0:5:20", allow_hyphen_values = true)]
    pub rho_db: RhoRange,
    /// Shape values applied to every link.
    #[arg(long, default_value = "0.5:0.5:4")]
    pub m_values: RhoRange,
    /// Spread values applied to every link.
    #[arg(long, default_value = "1:1:10")]
    pub omega_values: RhoRange,
    /// Label a seeded random subset of this many grid points.
    #[arg(long)]
    pub records: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Optimiser grid points per axis.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    #[value(name = "6in")]
    SixIn,
    #[value(name = "7in")]
    SevenIn,
}

impl From<ModeArg> for noma_crs::surrogate::InputMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::SixIn => Self::Channel,
            ModeArg::SevenIn => Self::ChannelAndSnr,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset CSV produced by `dataset`.
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory for model files.
    #[arg(long)]
    pub out: PathBuf,
    /// 6in trains one model per SNR; 7in one model with the SNR as input.
    #[arg(long, value_enum, default_value_t = ModeArg::SixIn)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub max_epochs: usize,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: Common,
    /// Model file or directory of model files.
    #[arg(long)]
    pub model: PathBuf,
    /// SNR points; defaults to the config's rho_t_db.
    #[arg(long, allow_hyphen_values = true)]
    pub rho_db: Option<RhoRange>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Experiment to run.
    #[arg(value_enum)]
    pub plan: SweepId,
    /// Scenario TOML overriding the plan's default channel and modulation.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SNR sweep; each plan has its own default.
    #[arg(long, allow_hyphen_values = true)]
    pub rho_db: Option<RhoRange>,
    /// Model file or directory, needed by plans with surrogate columns.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Optimiser grid points per axis (plan default when omitted).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Monte Carlo frames per point; 0 disables simulation columns where optional.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Analyze(a) => commands::analyze(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Optimize(a) => commands::optimize(&a),
        Command::Dataset(a) => commands::dataset(&a),
        Command::Train(a) => commands::train(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Sweep(a) => sweep::run(&a),
    }
}

/// Exit status for an error returned by [`run`].
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<noma_crs::Error>() {
            return match e.kind() {
                ErrorKind::Config => EXIT_CONFIG,
                ErrorKind::Numeric => EXIT_NUMERIC,
                ErrorKind::Io => EXIT_IO,
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<csv::Error>() {
            return EXIT_IO;
        }
    }
    EXIT_CONFIG
}
