use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ffcirc_runner::{refit, run, Experiment, ExperimentConfig, Overrides, Result};

#[derive(Parser)]
#[command(name = "ffcirc", version, about = "Non-unitary free-fermion circuit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct RunArgs {
    /// Flat TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Unitary limit on an open chain.
    Beta0(RunArgs),
    /// Late-time correlations, entropies and mutual information on a ring.
    SteadyState(RunArgs),
    /// Early-time growth on an open chain.
    Dynamics(RunArgs),
    /// Mean-field master equation for the correlation weights.
    Master(RunArgs),
    /// Four-site light-cone demonstration.
    Lightcone(RunArgs),
    /// Continuous-time Brownian circuit.
    Brownian(RunArgs),
    /// Recompute fits of a finished run from its CSV files.
    Fit {
        /// Output directory of the run.
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(experiment: Experiment, args: &RunArgs) -> Result<()> {
    let file = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let o = Overrides {
        seed: args.seed,
        workers: args.workers,
        out: args.out.clone(),
    };
    let plan = file.with_overrides(experiment, &o)?.resolve()?;
    let output = run(&plan)?;
    for p in &output.manifest.points {
        eprintln!("{}: {} of {} realizations succeeded", p.label, p.succeeded, p.requested);
    }
    eprintln!("wrote {}", plan.common.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Beta0(a) => execute(Experiment::Beta0, a),
        Command::SteadyState(a) => execute(Experiment::SteadyState, a),
        Command::Dynamics(a) => execute(Experiment::Dynamics, a),
        Command::Master(a) => execute(Experiment::Master, a),
        Command::Lightcone(a) => execute(Experiment::Lightcone, a),
        Command::Brownian(a) => execute(Experiment::Brownian, a),
        Command::Fit { out } => refit(out).map(|_| ()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
