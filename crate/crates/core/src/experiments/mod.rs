//! Configured, reproducible experiment runs.
//!
//! Each experiment turns an [`ExperimentConfig`] and a master seed into an
//! [`Outcome`]: named test reports, threshold checks and CSV artifacts.
//! [`run`] executes one outcome per configured seed and writes the files
//! plus `summary.json` under the output directory.

mod config;
mod runs;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{ExperimentConfig, LatticeSpec};

use crate::error::{Error, Result};
use crate::stats::TestReport;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Experiment names in the order they are documented.
pub const EXPERIMENTS: [&str; 9] = [
    "fpl-convergence",
    "kernel-tables",
    "lattice-mc",
    "flight-vs-billiard",
    "semigroup",
    "poisson-baseline",
    "memory-test",
    "renormalization-check",
    "trajectory-dump",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">")]
    Above,
    #[serde(rename = ">=")]
    AtLeast,
}

/// A scalar compared against a bound.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, bound: f64) -> Self {
        let pass = match relation {
            Relation::Below => value < bound,
            Relation::AtMost => value <= bound,
            Relation::Above => value > bound,
            Relation::AtLeast => value >= bound,
        };
        Check {
            name: name.into(),
            value,
            relation,
            bound,
            pass,
        }
    }

    /// Passes when the test did not reject (`want_pass`) or did reject.
    pub fn verdict(name: impl Into<String>, report: &TestReport, want_pass: bool) -> Self {
        let rel = if want_pass { Relation::AtLeast } else { Relation::Below };
        Check::new(name, report.p_value, rel, report.alpha)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedReport {
    pub name: String,
    #[serde(flatten)]
    pub report: TestReport,
}

/// A CSV file: column header plus rows, written after the provenance line.
#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub file: String,
    #[serde(skip)]
    pub body: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub experiment: String,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub reports: Vec<NamedReport>,
    pub metrics: BTreeMap<String, f64>,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    fn new(experiment: &str, seed: u64) -> Self {
        Outcome {
            experiment: experiment.to_string(),
            seed,
            pass: true,
            checks: Vec::new(),
            reports: Vec::new(),
            metrics: BTreeMap::new(),
            artifacts: Vec::new(),
        }
    }

    fn check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    fn report(&mut self, name: impl Into<String>, report: TestReport) {
        self.reports.push(NamedReport { name: name.into(), report });
    }

    fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    fn artifact(&mut self, file: &str, body: String) {
        self.artifacts.push(Artifact {
            file: file.to_string(),
            body,
        });
    }

    pub fn get_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn get_metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn get_report(&self, name: &str) -> Option<&TestReport> {
        self.reports.iter().find(|r| r.name == name).map(|r| &r.report)
    }
}

/// Runs experiment `name` for one master seed without touching the disk.
pub fn run_one(name: &str, cfg: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    cfg.validate()?;
    let mut out = Outcome::new(name, seed);
    match name {
        "fpl-convergence" => runs::fpl_convergence(cfg, seed, &mut out)?,
        "kernel-tables" => runs::kernel_tables(cfg, &mut out)?,
        "lattice-mc" => runs::lattice_mc(cfg, seed, &mut out)?,
        "flight-vs-billiard" => runs::flight_vs_billiard(cfg, seed, &mut out)?,
        "semigroup" => runs::semigroup(cfg, seed, &mut out)?,
        "poisson-baseline" => runs::poisson_baseline(cfg, seed, &mut out)?,
        "memory-test" => runs::memory_test(cfg, seed, &mut out)?,
        "renormalization-check" => runs::renormalization_check(cfg, seed, &mut out)?,
        "trajectory-dump" => runs::trajectory_dump(cfg, seed, &mut out)?,
        other => return Err(Error::UnknownExperiment(other.to_string())),
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub version: String,
    pub config_hash: String,
    pub experiment: String,
    pub pass: bool,
    pub runs: Vec<Outcome>,
}

fn header(hash: &str, name: &str, seed: u64) -> String {
    format!("# lorentz {VERSION} config={hash} experiment={name} seed={seed}\n")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Config {
        field: "out".into(),
        message: format!("cannot write {}: {e}", path.display()),
    })
}

/// Runs `name` once per seed in `cfg.seeds` and writes every artifact and
/// `summary.json` under `cfg.out` (one `seed-N` subdirectory per seed when
/// there are several).
pub fn run(name: &str, cfg: &ExperimentConfig) -> Result<Summary> {
    if !EXPERIMENTS.contains(&name) {
        return Err(Error::UnknownExperiment(name.to_string()));
    }
    cfg.validate()?;
    let hash = cfg.hash();
    fs::create_dir_all(&cfg.out).map_err(|e| Error::Config {
        field: "out".into(),
        message: format!("cannot create {}: {e}", cfg.out.display()),
    })?;
    let mut runs = Vec::new();
    for &seed in &cfg.seeds {
        let outcome = run_one(name, cfg, seed)?;
        let dir: PathBuf = if cfg.seeds.len() > 1 {
            let d = cfg.out.join(format!("seed-{seed}"));
            fs::create_dir_all(&d).map_err(|e| Error::Config {
                field: "out".into(),
                message: format!("cannot create {}: {e}", d.display()),
            })?;
            d
        } else {
            cfg.out.clone()
        };
        for a in &outcome.artifacts {
            write_file(&dir.join(&a.file), &(header(&hash, name, seed) + &a.body))?;
        }
        runs.push(outcome);
    }
    let summary = Summary {
        version: VERSION.to_string(),
        config_hash: hash,
        experiment: name.to_string(),
        pass: runs.iter().all(|r| r.pass),
        runs,
    };
    let json = serde_json::to_string_pretty(&summary)?;
    write_file(&cfg.out.join("summary.json"), &(json + "\n"))?;
    Ok(summary)
}
