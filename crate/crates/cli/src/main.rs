//! Batch front end for the sequential drift-detection solvers.
//!
//! One JSON config drives every subcommand; each run writes its outputs plus
//! a manifest echoing the resolved config, and `verify` replays a manifest
//! and checks that the outputs reproduce byte for byte.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "seqtest", version, about = "Sequential drift detection: boundaries, least favorable priors, Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the Monte Carlo seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Size of the worker thread pool (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the model's solver regime on a sample grid.
    Check(RunArgs),
    /// Solve the value surface and extract the stopping boundaries.
    Solve(RunArgs),
    /// Search for least favorable priors and verify the saddle point.
    Lfd(RunArgs),
    /// Closed-form constant signal-to-noise band and risk curve.
    Csnr(RunArgs),
    /// Monte Carlo summaries of a stopping rule at a given prior.
    Simulate(RunArgs),
    /// Replay a manifest and byte-compare the outputs.
    Verify {
        /// Directory holding manifest.json and the outputs.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn run(args: &RunArgs, name: &str) -> i32 {
    init_threads(args.threads);
    let mut cfg = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if let Some(seed) = args.seed {
        cfg.mc.seed = seed;
    }
    match commands::dispatch(name, &cfg, &args.out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            commands::exit_code_for(&e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Check(a) => run(a, "check"),
        Command::Solve(a) => run(a, "solve"),
        Command::Lfd(a) => run(a, "lfd"),
        Command::Csnr(a) => run(a, "csnr"),
        Command::Simulate(a) => run(a, "simulate"),
        Command::Verify { out, threads } => {
            init_threads(*threads);
            match commands::cmd_verify(out) {
                Ok(code) => code,
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            }
        }
    };
    ExitCode::from(code.clamp(0, 255) as u8)
}
