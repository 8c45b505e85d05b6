mod commands;
mod error;
mod expr;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Optimal unambiguous discrimination of symmetric states.
#[derive(Debug, Parser)]
#[command(name = "symdisc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coefficients, optimal success probability and POVM filters.
    Discriminate(DiscriminateArgs),
    /// Compile the linear-optics setup and count its components.
    Compile(CompileArgs),
    /// Monte-Carlo photon-counting experiment.
    Simulate(SimulateArgs),
    /// Success probability over a grid of one angle.
    Sweep(SweepArgs),
    /// Run the built-in consistency checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, ValueEnum)]
enum Format {
    Json,
    Csv,
    NetlistText,
}

/// Comma-separated list of reals; entries may use `pi`.
#[derive(Debug, Clone)]
struct RealList(Vec<f64>);

fn real_list(s: &str) -> Result<RealList, String> {
    expr::parse_list(s).map(RealList)
}

#[derive(Debug, Args)]
struct SystemArgs {
    /// Number of states N.
    #[arg(long)]
    dim: Option<usize>,
    /// Hyperspherical angles θ_1,…,θ_{N−1} in radians, e.g. `pi/3,0.3pi,pi/4`.
    #[arg(long, value_parser = real_list, allow_hyphen_values = true, conflicts_with = "coeffs")]
    angles: Option<RealList>,
    /// Seed-state coefficients c_0,…,c_{N−1}.
    #[arg(long, value_parser = real_list, allow_hyphen_values = true)]
    coeffs: Option<RealList>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct DiscriminateArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CompileArgs {
    /// Defaults to θ = (π/3, …, π/3, π/6) when neither angles nor coefficients are given.
    #[command(flatten)]
    system: SystemArgs,
    /// Index l of the prepared state.
    #[arg(long, default_value_t = 0)]
    state: usize,
    /// Directory receiving `netlist.txt`, `netlist.json` and `counts.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format of the netlist printed to stdout when `--out` is absent.
    #[arg(long, value_enum, default_value = "netlist-text")]
    format: Format,
    /// Compare component counts for N = 4, 8, 16 with the reference table.
    #[arg(long)]
    check_table1: bool,
}

#[derive(Debug, Args)]
struct NoiseArgs {
    /// PBS extinction ratio (e.g. 1000 for 1,000:1); ideal when absent.
    #[arg(long)]
    extinction: Option<f64>,
    /// Standard deviation in radians of the phase error on each beam-splitter arm.
    #[arg(long, default_value_t = 0.0)]
    phase_noise: f64,
    #[arg(long, default_value_t = 1.0)]
    detector_efficiency: f64,
    #[arg(long, default_value_t = 1.0)]
    heralding_efficiency: f64,
    /// Worker threads; 0 picks automatically. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Always prepare this index instead of a uniform choice.
    #[arg(long)]
    state: Option<usize>,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Values of the other angles; defaults to π/3, …, π/3, π/6.
    #[arg(long, value_parser = real_list, allow_hyphen_values = true)]
    angles: Option<RealList>,
    /// Which angle θ_j to sweep (1-based).
    #[arg(long, default_value_t = 1)]
    index: usize,
    /// Explicit grid values.
    #[arg(long, value_parser = real_list, allow_hyphen_values = true, conflicts_with_all = ["from", "to", "steps"])]
    grid: Option<RealList>,
    #[arg(long, value_parser = expr::parse_radians, allow_hyphen_values = true, requires_all = ["to", "steps"])]
    from: Option<f64>,
    #[arg(long, value_parser = expr::parse_radians, allow_hyphen_values = true, requires_all = ["from", "steps"])]
    to: Option<f64>,
    #[arg(long, requires_all = ["from", "to"], value_parser = clap::value_parser!(u64).range(1..))]
    steps: Option<u64>,
    /// Add an empirical column from this many trials per grid point.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 4)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random angle vectors per check.
    #[arg(long, default_value_t = 20)]
    draws: usize,
    /// Perturb the reference inverse-Fourier matrix by this amount.
    #[arg(long, hide = true, default_value_t = 0.0)]
    inject_fourier_fault: f64,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Discriminate(a) => commands::discriminate(a),
        Command::Compile(a) => commands::compile(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Verify(a) => commands::verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
