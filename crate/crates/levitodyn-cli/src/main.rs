use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use levitodyn::config::SimConfig;
use levitodyn::run::{run_check, run_currents, run_psd, run_simulate, run_sme, RunOptions};
use levitodyn::Error;

/// Levitated-nanoparticle dynamics, detection and quantum-trajectory runner.
#[derive(Parser)]
#[command(name = "levitodyn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; created if missing.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel sweeps (default: LEVITODYN_THREADS or 1).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Classical trajectory plus homodyne current trace.
    Simulate,
    /// Static-state current decomposition sweep.
    Currents,
    /// Quantum toy-model trajectory.
    Sme,
    /// Welch PSD and optional Lorentzian fit of a trace column.
    Psd,
    /// Run the invariant self-check suite.
    Check,
}

fn thread_count(cli: &Cli) -> Result<usize, String> {
    let n = match cli.threads {
        Some(n) => n,
        None => match std::env::var("LEVITODYN_THREADS") {
            Ok(v) => v
                .parse::<usize>()
                .map_err(|_| format!("LEVITODYN_THREADS: '{v}' is not a thread count"))?,
            Err(_) => 1,
        },
    };
    if n == 0 {
        return Err("--threads must be at least 1".into());
    }
    Ok(n)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::ConfigInvalid("--config is required".into()))?;
    let out_dir = cli
        .out
        .as_ref()
        .ok_or_else(|| Error::ConfigInvalid("--out is required".into()))?;
    let threads = thread_count(cli).map_err(Error::ConfigInvalid)?;
    let cfg = SimConfig::from_path(config_path)?;
    let opts = RunOptions {
        seed: cli.seed,
        threads,
    };
    match cli.command {
        Command::Simulate => run_simulate(&cfg, out_dir, &opts),
        Command::Currents => run_currents(&cfg, out_dir, &opts),
        Command::Sme => run_sme(&cfg, out_dir, &opts),
        Command::Psd => run_psd(&cfg, out_dir, &opts),
        Command::Check => {
            let results = run_check(&cfg)?;
            let mut all_ok = true;
            for r in &results {
                println!(
                    "check {:<24} {} ({})",
                    r.name,
                    if r.passed { "pass" } else { "FAIL" },
                    r.detail
                );
                all_ok &= r.passed;
            }
            if all_ok {
                Ok(())
            } else {
                Err(Error::ConfigInvalid("self-check failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::ConfigInvalid(_) => ExitCode::from(2),
                Error::NumericalBlowup { .. } => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
