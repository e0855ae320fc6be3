//! `squashnet`: build separating and approximating squashing networks from
//! the command line.
//!
//! Exit status is 0 on success, 2 for invalid arguments or unreadable
//! inputs, 1 when a construction fails its own post-check and 3 when the
//! approximation loop runs out of iterations.

mod commands;
mod specs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use squashnet_core::approximator::DEFAULT_BETA;
use squashnet_core::Error as CoreError;

use specs::TargetSpec;

#[derive(Debug, Parser)]
#[command(
    name = "squashnet",
    version,
    about = "Squashing-network separators and approximants"
)]
struct Cli {
    /// Reserved for randomized variants; every command is currently deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gate σ(s + t·x) taking x0 below eps and x1 above 1 - eps.
    SeparatePoints(SeparatePointsArgs),
    /// Network below eps at a point and above 1 - eps on a grid point set.
    SeparatePointSet(SeparatePointSetArgs),
    /// Squashed network above 1 - eps on set A and below eps on set B.
    SeparateSets(SeparateSetsArgs),
    /// Approximate a target on a grid to sup-norm error below eps.
    Approximate(ApproximateArgs),
    /// Sup-norm error of a network file against a target.
    Verify(VerifyArgs),
    /// Network values (and optionally target and error) at every grid point.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
struct SigmaArg {
    /// Activation: logistic, tanh, ramp:lo,hi or table:PATH.
    #[arg(long, default_value = "logistic")]
    sigma: String,
}

#[derive(Debug, Args)]
struct SeparatePointsArgs {
    #[arg(long, allow_hyphen_values = true)]
    x0: f64,
    #[arg(long, allow_hyphen_values = true)]
    x1: f64,
    #[arg(long)]
    eps: f64,
    #[command(flatten)]
    sigma: SigmaArg,
    /// Also check the monotone side conditions beyond x0 and x1.
    #[arg(long)]
    side_conditions: bool,
    /// Write σ(s + t·x) over a probe range as CSV.
    #[arg(long)]
    probe_csv: Option<PathBuf>,
    /// Probe range as lo,hi; defaults to the pair widened by its gap on each side.
    #[arg(long, allow_hyphen_values = true)]
    probe_range: Option<String>,
    #[arg(long, default_value_t = 201)]
    probe_count: usize,
}

#[derive(Debug, Args)]
struct SeparatePointSetArgs {
    /// The point to push below eps, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    x0: String,
    /// Point-set CSV of grid points.
    #[arg(long)]
    set: PathBuf,
    /// Grid as lo,hi,res[;lo,hi,res...].
    #[arg(long, allow_hyphen_values = true)]
    domain: String,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[command(flatten)]
    sigma: SigmaArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SeparateSetsArgs {
    #[arg(long = "set-a")]
    set_a: PathBuf,
    #[arg(long = "set-b")]
    set_b: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    domain: String,
    #[arg(long, default_value_t = 1.0 / 6.0)]
    eps: f64,
    #[command(flatten)]
    sigma: SigmaArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ApproximateArgs {
    /// const:C, proj:AXIS, sin2pix, sin2pix-cos2piy, gauss:CENTER;WIDTH[;AMP],
    /// maxcoord or csv:PATH.
    #[arg(long, allow_hyphen_values = true)]
    target: TargetSpec,
    #[arg(long, allow_hyphen_values = true)]
    domain: String,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
    #[command(flatten)]
    sigma: SigmaArg,
    #[arg(long)]
    out: PathBuf,
    /// Per-iteration trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    target: TargetSpec,
    #[arg(long, allow_hyphen_values = true)]
    domain: String,
    /// Check on the grid refined by this factor per axis.
    #[arg(long, default_value_t = 1)]
    verify_multiplier: usize,
    /// Per-point CSV of network value, target and error.
    #[arg(long)]
    heatmap: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    domain: String,
    /// Adds target and error columns.
    #[arg(long, allow_hyphen_values = true)]
    target: Option<TargetSpec>,
    #[arg(long, default_value_t = 1)]
    verify_multiplier: usize,
    #[arg(long)]
    out: PathBuf,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<CoreError>()) {
        Some(CoreError::NotConverged(_)) => 3,
        Some(e) if !e.is_validation() => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SeparatePoints(args) => commands::separate_points(args),
        Command::SeparatePointSet(args) => commands::separate_point_set(args),
        Command::SeparateSets(args) => commands::separate_sets(args),
        Command::Approximate(args) => commands::approximate(args),
        Command::Verify(args) => commands::verify(args),
        Command::Export(args) => commands::export(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
