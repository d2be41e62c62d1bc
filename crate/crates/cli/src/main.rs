//! `arena`: command-line front end for the rating engine.
//!
//! Every command accepts `--seed` and `--out`. Tabular output is CSV preceded
//! by a `#` line recording the command, seed and configuration. Exit codes:
//! 0 on success, 2 for invalid input, 3 when the estimation itself fails
//! (for example a disconnected comparison graph).

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "arena", version, about = "Bradley-Terry ratings and proximity scheduling for pairwise leaderboards")]
struct Cli {
    /// Seed for every random stream the command uses.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (standard output when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit ratings to a battle log, print the leaderboard and write a snapshot.
    Rank(RankArgs),
    /// Draw the next battle sets from a snapshot with proximity sampling.
    Schedule(ScheduleArgs),
    /// Run a placement session for a new model from per-round results.
    Place(PlaceArgs),
    /// Simulation experiments.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Two-dimensional disc decomposition and transitivity report.
    DiscFit(DiscArgs),
    /// Bootstrap rating spread, optionally against a baseline log.
    Bootstrap(BootstrapArgs),
    /// Rank agreement between two rating files.
    Metrics(MetricsArgs),
}

#[derive(Subcommand)]
enum SimulateCommand {
    /// Rating error of simulated datasets across proximity thresholds.
    SweepThreshold(SweepThresholdArgs),
    /// Trace of the inverse Fisher information across thresholds.
    SweepFim(SweepFimArgs),
    /// Chronological replay with cold start, placement and periodic refits.
    Replay(ReplayArgs),
}

#[derive(Args, Serialize)]
struct RankArgs {
    /// JSONL battle log.
    log: PathBuf,
    /// Snapshot path (defaults to the log path with a `.snapshot` extension).
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Virtual wins and losses added to every pair that has met.
    #[arg(long, default_value_t = 0.0)]
    regularization: f64,
}

#[derive(Args, Serialize)]
struct ScheduleArgs {
    snapshot: PathBuf,
    /// Models per battle set.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Proximity threshold in Elo.
    #[arg(long, default_value_t = 150.0)]
    h: f64,
    /// Softmax temperature in battle counts.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Minimum proximity set size.
    #[arg(long = "n-m", default_value_t = 3)]
    n_m: usize,
    /// Number of battle sets to draw.
    #[arg(long, default_value_t = 1)]
    count: usize,
}

#[derive(Args, Serialize)]
struct PlaceArgs {
    snapshot: PathBuf,
    #[arg(long)]
    new_model: String,
    /// Battles per round.
    #[arg(long, default_value_t = 10)]
    t: u32,
    /// Early stop once the win rate is this close to 0.5.
    #[arg(long, default_value_t = 0.05)]
    band: f64,
    #[arg(long, default_value_t = 3)]
    min_interval: usize,
    /// One `wins,losses` line per played round; `#` starts a comment.
    #[arg(long)]
    results: PathBuf,
}

#[derive(Args, Serialize, Clone)]
struct WorldArgs {
    /// Number of synthetic models.
    #[arg(long, default_value_t = 100)]
    models: usize,
    /// Golden ratings are drawn uniformly from (lo, hi).
    #[arg(long, default_value_t = 400.0)]
    lo: f64,
    #[arg(long, default_value_t = 1400.0)]
    hi: f64,
    /// Share of battles drawn uniformly regardless of the threshold.
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
}

#[derive(Args, Serialize)]
struct SweepThresholdArgs {
    #[command(flatten)]
    world: WorldArgs,
    #[arg(long, value_delimiter = ',', default_value = "50,100,150,200,300,500,700,1000")]
    hs: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "100000")]
    budgets: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "proximity,uniform")]
    strategies: Vec<StrategyKind>,
    /// Number of repetitions per cell.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
}

#[derive(Args, Serialize)]
struct SweepFimArgs {
    #[command(flatten)]
    world: WorldArgs,
    #[arg(long, value_enum, default_value_t = FimModeArg::Ideal)]
    mode: FimModeArg,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "100,150,200,250,300,350,400,450,500,550,600,650,700,750,800,850,900,950,1000"
    )]
    hs: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "10000,100000,1000000")]
    budgets: Vec<u64>,
    #[arg(long, default_value_t = 5)]
    seeds: u64,
}

#[derive(Args, Serialize)]
struct ReplayArgs {
    /// Replay a recorded log instead of a synthetic stream.
    #[arg(long)]
    log: Option<PathBuf>,
    #[command(flatten)]
    world: WorldArgs,
    /// Length of the synthetic stream.
    #[arg(long, default_value_t = 100_000)]
    records: usize,
    /// Synthetic models present from the start; the rest join later.
    #[arg(long, default_value_t = 8)]
    initial_models: usize,
    #[arg(long, value_enum, default_value_t = ReplayKind::Proximity)]
    strategy: ReplayKind,
    /// Threshold for the proximity strategy.
    #[arg(long, default_value_t = 150.0)]
    h: f64,
    /// Kept share of records for the uniform strategy.
    #[arg(long, default_value_t = 0.5)]
    keep: f64,
    #[arg(long, default_value_t = 0.2)]
    cold_start: f64,
    /// Refit after this many streamed records.
    #[arg(long, default_value_t = 5000)]
    refit_every: usize,
    /// Placement battles per round.
    #[arg(long, default_value_t = 10)]
    t: u32,
}

#[derive(Args, Serialize)]
struct DiscArgs {
    log: PathBuf,
    /// Drop pairs with fewer battles than this before fitting.
    #[arg(long, default_value_t = 0)]
    min_count: u64,
    #[arg(long, default_value_t = 20_000)]
    iterations: usize,
    #[arg(long, default_value_t = 0.5)]
    learning_rate: f64,
}

#[derive(Args, Serialize)]
struct BootstrapArgs {
    log: PathBuf,
    #[arg(long, default_value_t = 100)]
    rounds: usize,
    /// Log of equal size collected with uniform sampling; reduction is
    /// baseline variance minus variance on `log`.
    #[arg(long)]
    baseline: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct MetricsArgs {
    /// CSV with `model` and `rating` columns.
    estimated: PathBuf,
    golden: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum StrategyKind {
    Proximity,
    Uniform,
}

#[derive(ValueEnum, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum FimModeArg {
    Ideal,
    Practical,
}

#[derive(ValueEnum, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum ReplayKind {
    All,
    Proximity,
    Uniform,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.as_deref();
    let result = match &cli.command {
        Command::Rank(a) => commands::rank(a, cli.seed, out),
        Command::Schedule(a) => commands::schedule(a, cli.seed, out),
        Command::Place(a) => commands::place(a, cli.seed, out),
        Command::Simulate(SimulateCommand::SweepThreshold(a)) => commands::sweep_threshold(a, cli.seed, out),
        Command::Simulate(SimulateCommand::SweepFim(a)) => commands::sweep_fim(a, cli.seed, out),
        Command::Simulate(SimulateCommand::Replay(a)) => commands::replay(a, cli.seed, out),
        Command::DiscFit(a) => commands::disc_fit(a, cli.seed, out),
        Command::Bootstrap(a) => commands::bootstrap(a, cli.seed, out),
        Command::Metrics(a) => commands::metrics(a, cli.seed, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
