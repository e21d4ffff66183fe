use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use frnn::harness::{resolve_output_dir, Command, ExperimentConfig, RunReport};

#[derive(Parser)]
#[command(name = "frnn", version, about = "Randomized Fourier-feature PDE solver with swarm hyperparameter search")]
struct Cli {
    #[command(subcommand)]
    command: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// One solve with fixed hyperparameters.
    Solve(RunArgs),
    /// Swarm or random search over the hyperparameter space.
    Optimize(RunArgs),
    /// Activation × ω grid on the 1D Poisson problem.
    Sweep(RunArgs),
    /// Derivative networks against finite differences.
    Dbench(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the outer seed for `optimize`, the inner seed otherwise.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(command: Command, args: &RunArgs) -> anyhow::Result<RunReport> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        match command {
            Command::Optimize => config.seeds.outer = seed,
            _ => config.seeds.inner = seed,
        }
    }
    let out = resolve_output_dir(&config, Some(&args.config), args.out.as_deref());
    command.run(&config, &out).with_context(|| format!("{} failed", command.name()))
}

fn print_report(report: &RunReport) {
    for e in &report.entries {
        let fvals: Vec<String> = e.fvals.iter().map(|(k, v)| format!("{k}={v:.3e}")).collect();
        println!("{:<32} fitness={:.3e} {} ({:.2}s)", e.label, e.fitness, fvals.join(" "), e.seconds);
    }
    for (k, v) in &report.summary {
        println!("{k} = {v:.3e}");
    }
    if let Some(path) = report.artifacts.last().and_then(|p| p.parent()) {
        println!("wrote {} files to {}", report.artifacts.len(), path.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Verb::Solve(a) => (Command::Solve, a),
        Verb::Optimize(a) => (Command::Optimize, a),
        Verb::Sweep(a) => (Command::Sweep, a),
        Verb::Dbench(a) => (Command::Dbench, a),
    };
    match run(command, args) {
        Ok(report) => {
            print_report(&report);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
