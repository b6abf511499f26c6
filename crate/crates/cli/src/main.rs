//! `wsol`: evaluate, verify and train with weighted score-oriented losses.

mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "wsol", version, about = "Weighted score-oriented losses: evaluation, verification and training")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Threshold sweep, expected confusion matrices and scores of a labeled series.
    Eval(EvalArgs),
    /// Loss value and optionally its gradient over the predictions.
    Loss(LossArgs),
    /// Closed forms against exact and Monte Carlo oracles.
    Verify(VerifyArgs),
    /// Train a small network on a temporal dataset.
    Train(TrainArgs),
    /// Two series with the same confusion matrix but different error placement.
    DemoFigure1(DemoArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// CSV with `label,prediction[,timestamp]` or `label_j,pred_j` columns.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// JSON report destination.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the threshold sweep as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Number of grid steps of the threshold sweep.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write `index,gradient,kink` rows here.
    #[arg(long)]
    pub gradient: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Monte Carlo draws per oracle call.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Random cases per check group.
    #[arg(long, default_value_t = 200)]
    pub cases: usize,
    #[arg(long, env = "WSOL_SEED", default_value_t = 20_240_901)]
    pub seed: u64,
    /// Comma-separated check groups to run.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Also write the results as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Synthetic dataset settings (JSON).
    #[arg(long, conflicts_with = "data")]
    pub synth: Option<PathBuf>,
    /// Dataset CSV with feature columns and a `label` column.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Loss specification (JSON), single or combined.
    #[arg(long)]
    pub loss: PathBuf,
    /// Configuration document; its `train` section sets defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Hidden layer widths, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    #[arg(long, env = "WSOL_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Compare against this loss over paired runs instead of a single run.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    /// Number of paired runs, seeded `seed, seed+1, ...`.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Optional configuration whose `weights` replace the default.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(a) => commands::eval::run(&a),
        Command::Loss(a) => commands::loss::run(&a),
        Command::Verify(a) => commands::verify::run(&a),
        Command::Train(a) => commands::train::run(&a),
        Command::DemoFigure1(a) => commands::demo::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
