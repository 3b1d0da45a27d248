mod commands;
mod output;
mod request;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tte3o_core::{Error, ErrorClass};

#[derive(Parser)]
#[command(
    name = "tte3o",
    version,
    about = "Three-outcome designs for randomized time-to-event trials"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Decimal places in text and CSV output.
    #[arg(long, global = true, env = "TTE3O_PRECISION", default_value_t = 4)]
    precision: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    /// Only for `table` and `density`.
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum-event fixed design and its boundaries.
    Design(DesignArgs),
    /// Two-stage design with one interim analysis.
    GsDesign(GsArgs),
    /// Regenerate the published design table.
    Table(TableArgs),
    /// Sampling densities of the estimator under both hypotheses, for plotting.
    Density(DensityArgs),
    /// Monte-Carlo operating characteristics of a design.
    Simulate(SimulateArgs),
    /// Log-rank statistic for patient-level data.
    Logrank(LogrankArgs),
}

#[derive(Args)]
pub struct DesignArgs {
    /// Structured request file; replaces the design flags.
    #[arg(long, conflicts_with_all = ["hr1", "alpha", "beta", "pi", "eta"])]
    pub request: Option<PathBuf>,
    /// Hazard ratio under the null hypothesis.
    #[arg(long, default_value_t = 1.0)]
    pub hr0: f64,
    /// Hazard ratio under the alternative hypothesis.
    #[arg(long, required_unless_present = "request")]
    pub hr1: Option<f64>,
    /// Probability of rejecting H0 when H0 holds.
    #[arg(long, required_unless_present = "request")]
    pub alpha: Option<f64>,
    /// Probability of rejecting H1 when H1 holds.
    #[arg(long, required_unless_present = "request")]
    pub beta: Option<f64>,
    /// Required probability of rejecting H0 when H1 holds.
    #[arg(long, required_unless_present = "request")]
    pub pi: Option<f64>,
    /// Required probability of rejecting H1 when H0 holds.
    #[arg(long, required_unless_present = "request")]
    pub eta: Option<f64>,
    /// Randomization ratio, experimental to control.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Round the event count up to a whole number.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub round_events: bool,
}

#[derive(Args)]
pub struct GsArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Information fraction at the interim analysis.
    #[arg(long, default_value_t = 0.5)]
    pub t1: f64,
    /// Part of alpha spent at the interim.
    #[arg(long, default_value_t = 0.0)]
    pub alpha1: f64,
    /// Part of beta spent at the interim.
    #[arg(long, default_value_t = 0.0)]
    pub beta1: f64,
}

#[derive(Args)]
pub struct TableArgs {
    /// Output file (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Number of grid points.
    #[arg(long, default_value_t = 401)]
    pub grid_points: usize,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Design request file or a result document from `design`/`gs-design`.
    #[arg(long)]
    pub design: PathBuf,
    /// True log hazard ratio.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    /// Control-arm hazard per time unit.
    #[arg(long)]
    pub hazard: f64,
    #[arg(long)]
    pub n_patients: u64,
    /// Length of the uniform accrual period.
    #[arg(long)]
    pub accrual: f64,
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Weibull shape for event times (exponential when absent).
    #[arg(long)]
    pub weibull_shape: Option<f64>,
}

#[derive(Args)]
pub struct LogrankArgs {
    /// CSV with columns arm, entry_time, time, event.
    #[arg(long)]
    pub data: PathBuf,
    /// Calendar-time analysis cutoff (all follow-up when absent).
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
}

fn report(e: &Error, format: Format) -> ExitCode {
    let class = e.class();
    let line = if format == Format::Json {
        serde_json::json!({
            "error": { "code": e.code(), "class": format!("{class:?}").to_lowercase(), "message": e.to_string() }
        })
        .to_string()
    } else {
        format!("error[{}]: {}", e.code(), e.to_string().replace('\n', " "))
    };
    eprintln!("{line}");
    ExitCode::from(match class {
        ErrorClass::Validation => 2,
        ErrorClass::Numerical => 3,
        ErrorClass::Io => 4,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = commands::Context {
        format: cli.format,
        precision: cli.precision,
    };
    let result = match &cli.command {
        Command::Design(a) => commands::design(&ctx, a),
        Command::GsDesign(a) => commands::gs_design(&ctx, a),
        Command::Table(a) => commands::table(&ctx, a),
        Command::Density(a) => commands::density(&ctx, a),
        Command::Simulate(a) => commands::simulate(&ctx, a),
        Command::Logrank(a) => commands::logrank(&ctx, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e, cli.format),
    }
}
