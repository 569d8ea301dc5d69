use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod error;
mod ingest;
mod output;

use error::CliError;

/// Video popularity model: evaluate, classify, simulate, fit and measure view curves.
#[derive(Debug, Parser)]
#[command(name = "vidpop", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample x, y, s, x', z, w, dw on a time grid.
    Eval(EvalArgs),
    /// Print the regime and critical times of a parameter set.
    Classify(ClassifyArgs),
    /// Run the stochastic simulator.
    Simulate(SimulateArgs),
    /// Fit (A, B, V_total, gamma) to daily view counts.
    Fit(FitArgs),
    /// Windowed view-count entropy of one or more traces.
    Entropy(EntropyArgs),
    /// Rerun a subcommand from its manifest and compare output digests.
    Replay(ReplayArgs),
}

#[derive(Debug, Args, Clone)]
pub struct ParamArgs {
    /// JSON file with n_users, alpha, beta, q, gamma; flags override its fields.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Total user population.
    #[arg(long = "n")]
    n: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    /// Number of grid points, starting at t = 0.
    #[arg(long, default_value_t = 400)]
    steps: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Grid points for the x'' / x''' sign scan.
    #[arg(long, default_value_t = 10_000)]
    scan_points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 1.0)]
    dt_slot: f64,
    #[arg(long, default_value_t = 365)]
    slots: usize,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// Required: runs are only reproducible from an explicit seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Use rate * dt as slot probability instead of 1 - exp(-rate * dt).
    #[arg(long)]
    linearized: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with header video_id,day,views.
    #[arg(long)]
    trace: PathBuf,
    /// Fit only this video.
    #[arg(long)]
    video: Option<String>,
    /// Also emit peak-normalized observed and fitted curves.
    #[arg(long)]
    normalize: bool,
    #[arg(long, default_value_t = 2000)]
    max_evals_per_start: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// Trace CSV file, or a directory of them.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = vidpop::metrics::DEFAULT_WINDOW)]
    window: usize,
    /// Skip traces that are shorter than the window or have no views in it.
    #[arg(long)]
    skip_invalid: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

pub(crate) fn dispatch(args: Vec<String>) -> Result<(), CliError> {
    let argv = std::iter::once("vidpop".to_string()).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return Err(CliError::Usage(first.trim_start_matches("error: ").to_string()));
        }
    };
    match cli.command {
        Command::Eval(a) => commands::eval(&a, &args),
        Command::Classify(a) => commands::classify(&a, &args),
        Command::Simulate(a) => commands::simulate(&a, &args),
        Command::Fit(a) => commands::fit(&a, &args),
        Command::Entropy(a) => commands::entropy(&a, &args),
        Command::Replay(a) => commands::replay(&a),
    }
}

fn main() -> ExitCode {
    match dispatch(std::env::args().skip(1).collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(2)
        }
    }
}
