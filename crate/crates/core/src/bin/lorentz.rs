use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use lorentz::experiments::{self, ExperimentConfig, EXPERIMENTS};

#[derive(Parser)]
#[command(version, about = "Run a Lorentz gas experiment and write its CSV outputs and summary.json")]
struct Cli {
    /// One of: fpl-convergence, kernel-tables, lattice-mc, flight-vs-billiard,
    /// semigroup, poisson-baseline, memory-test, renormalization-check,
    /// trajectory-dump.
    experiment: String,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed list with this single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !EXPERIMENTS.contains(&cli.experiment.as_str()) {
        eprintln!("error: unknown experiment `{}`; expected one of {}", cli.experiment, EXPERIMENTS.join(", "));
        return ExitCode::from(2);
    }
    let mut cfg = match ExperimentConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(s) = cli.seed {
        cfg.seeds = vec![s];
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(o) = cli.out {
        cfg.out = o;
    }
    match experiments::run(&cli.experiment, &cfg) {
        Ok(summary) => {
            for run in &summary.runs {
                for c in &run.checks {
                    let tag = if c.pass { "PASS" } else { "FAIL" };
                    println!("{tag} seed={} {} = {:.6} (bound {:?} {})", run.seed, c.name, c.value, c.relation, c.bound);
                }
            }
            println!("wrote {}", cfg.out.join("summary.json").display());
            if summary.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
