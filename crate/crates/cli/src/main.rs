//! `qsys`: sample, inspect and simulate quasi-systematic point processes.

mod commands;
mod process;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::process::ProcessArgs;

#[derive(Parser, Debug)]
#[command(name = "qsys", version, about = "Quasi-systematic sampling on the unit interval")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw realisations: one row per (replicate, point).
    Sample(SampleArgs),
    /// Tabulate the first- or second-order inclusion density.
    Density(DensityArgs),
    /// Horvitz-Thompson estimates with variance estimates and intervals.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo experiment from a built-in table or a JSON config.
    Simulate(SimulateArgs),
    /// Run the numerical identity suites.
    Validate(ValidateArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for qsys::output::Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => qsys::output::Format::Csv,
            FormatArg::Json => qsys::output::Format::Json,
        }
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    process: ProcessArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[command(flatten)]
    process: ProcessArgs,
    /// 1 for the first-order density, 2 for the joint density.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    order: u8,
    /// Fixed first coordinate for the order-2 curve (required for fixed-size processes).
    #[arg(long)]
    x: Option<f64>,
    /// Grid points are k / resolution for k = 1 .. resolution - 1.
    #[arg(long, default_value_t = 200)]
    resolution: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FunctionArg {
    H,
    HFolded,
    Expr,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[command(flatten)]
    process: ProcessArgs,
    /// Function of interest: the test function h, its folded version, or --expr.
    #[arg(long, value_enum)]
    function: FunctionArg,
    /// Expression in x for --function expr.
    #[arg(long)]
    expr: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    /// Confidence level of the normal-approximation interval.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, env = "QSYS_WORKERS")]
    workers: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
#[group(id = "source", required = true, multiple = false, args = ["table", "config"])]
struct SimulateArgs {
    /// Built-in grid 1 to 5.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    table: Option<u8>,
    /// JSON experiment config (schema qsys-config/1).
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the replicate count.
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long, env = "QSYS_WORKERS")]
    workers: Option<usize>,
    /// Also write the full summary (failures, curves) as JSON here.
    #[arg(long)]
    summary_json: Option<std::path::PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Suite {
    Renewal,
    Densities,
    Equivalence,
    All,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Replicates for the equivalence suite.
    #[arg(long, default_value_t = 100_000)]
    replicates: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(a) => commands::sample(a),
        Command::Density(a) => commands::density(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Validate(a) => commands::validate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
