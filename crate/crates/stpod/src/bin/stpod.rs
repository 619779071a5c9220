//! Experiment CLI: reproduces the built-in examples and writes CSV results.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stpod::experiment::{
    run_example, ExampleKind, ExperimentConfig, PartialConfig, parse_sweep_spec,
};
use stpod::pod::ProjectionOrder;
use stpod::StpodError;

#[derive(Parser)]
#[command(name = "stpod", version, about = "Space-time POD experiments for a 1D heat problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the full-order model, reduce it, and write CSV results
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Built-in example: 1 (manufactured solution) or 2 (ring forcing)
    #[arg(long)]
    example: Option<String>,
    /// Config file with `key = value` lines mirroring the flag names
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of time nodes
    #[arg(long = "n-time")]
    n_time: Option<usize>,
    /// Number of space nodes (including the two boundary nodes)
    #[arg(long = "n-space")]
    n_space: Option<usize>,
    /// Diffusion coefficient
    #[arg(long)]
    mu: Option<f64>,
    /// Projection order: space-first or time-first
    #[arg(long)]
    order: Option<String>,
    /// Reduced space dimension for the figure outputs / single-point runs
    #[arg(long = "q-hat")]
    q_hat: Option<usize>,
    /// Reduced time dimension for the figure outputs / single-point runs
    #[arg(long = "s-hat")]
    s_hat: Option<usize>,
    /// Diagonal sweep A:B or A:B:STEP over q-hat = s-hat
    #[arg(long = "sweep-diagonal")]
    sweep_diagonal: Option<String>,
    /// Add the 5:60:5 rectangle of (q-hat, s-hat) pairs to the sweep
    #[arg(long = "full-sweep")]
    full_sweep: bool,
    /// Gauss-Legendre points per subcell for right-hand-side assembly
    #[arg(long = "quad-order")]
    quad_order: Option<usize>,
    /// Subdivisions per cell for right-hand-side assembly
    #[arg(long = "subdivide")]
    subdivide: Option<usize>,
    /// Output directory
    #[arg(long = "out")]
    out: Option<PathBuf>,
    /// Solve the full-order model fresh instead of using the cache
    #[arg(long = "no-cache")]
    no_cache: bool,
}

fn partial_from_args(args: &RunArgs) -> Result<PartialConfig, StpodError> {
    Ok(PartialConfig {
        example: args.example.as_deref().map(ExampleKind::parse).transpose()?,
        n_time: args.n_time,
        n_space: args.n_space,
        mu: args.mu,
        order: args.order.as_deref().map(ProjectionOrder::parse).transpose()?,
        q_hat: args.q_hat,
        s_hat: args.s_hat,
        sweep_diagonal: args.sweep_diagonal.as_deref().map(parse_sweep_spec).transpose()?,
        full_sweep: if args.full_sweep { Some(true) } else { None },
        quad_order: args.quad_order,
        subdivision: args.subdivide,
        out_dir: args.out.clone(),
        no_cache: if args.no_cache { Some(true) } else { None },
    })
}

const EXIT_BOUND_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

fn exit_code_for(err: &StpodError) -> u8 {
    match err {
        StpodError::Config(_) => EXIT_CONFIG,
        StpodError::Io(_) | StpodError::Malformed { .. } => EXIT_IO,
        _ => EXIT_BOUND_FAILURE,
    }
}

fn run(args: &RunArgs) -> Result<(), (u8, String)> {
    let cli_partial = partial_from_args(args).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    let file_partial = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| (EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
            Some(
                PartialConfig::from_file_text(&text)
                    .map_err(|e| (EXIT_CONFIG, e.to_string()))?,
            )
        }
        None => None,
    };
    let config = ExperimentConfig::resolve(cli_partial, file_partial)
        .map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    let summary = run_example(&config).map_err(|e| (exit_code_for(&e), e.to_string()))?;

    println!(
        "example {} done: {} sweep points, outputs in {}",
        config.example.as_str(),
        summary.reports.len(),
        summary.out_dir.display()
    );
    println!(
        "fom_norm={:.6e} cache={} effective_c_stability={} ({})",
        summary.fom_norm,
        if summary.fom_was_cached { "hit" } else { "cold" },
        if summary.stability.passed { "ok" } else { "violated" },
        summary.stability.detail
    );
    if summary.bound_failures > 0 {
        return Err((
            EXIT_BOUND_FAILURE,
            format!("{} hard bound checks failed", summary.bound_failures),
        ));
    }
    println!("all hard bound checks passed");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(args) => match run(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err((code, message)) => {
                eprintln!("error: {message}");
                ExitCode::from(code)
            }
        },
    }
}
