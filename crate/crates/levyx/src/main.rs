use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use levyx::config::ExperimentConfig;
use levyx::experiments::{run_experiment, REGISTRY};
use levyx::output;
use levyx::runner::Runner;

#[derive(Parser)]
#[command(name = "levyx", version, about = "Monte Carlo checks of Lévy path identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List registered experiments.
    List,
    /// Run one experiment under the seed policy.
    Run {
        name: String,
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to `output_dir` from the config, then `.`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump raw paths and excursions as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::List => {
            for e in REGISTRY {
                println!("{:<20} {}", e.name, e.about);
            }
            Ok(0)
        }
        Command::Run { name, config, seed, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if cfg.experiment_name != name {
                bail!("config {} is for `{}`, not `{name}`", config.display(), cfg.experiment_name);
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let dir = out.or_else(|| cfg.output_dir.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
            let runner = Runner::from_env()?;
            let start = Instant::now();
            let report = run_experiment(&cfg, &runner)?;
            let path = output::write_report(&dir, &report)?;
            for c in &report.checks {
                println!("{:<40} {:?} {:?}", c.name, c.verdict, c.outcomes);
            }
            println!("verdict: {:?}", report.verdict);
            eprintln!("report: {} ({:.1} s)", path.display(), start.elapsed().as_secs_f64());
            Ok(report.verdict.exit_code() as u8)
        }
        Command::Simulate { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            output::simulate(&cfg, &out, &Runner::from_env()?)?;
            eprintln!("wrote {}", out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
