//! Declarative experiment configuration (TOML) with field-level validation.

use std::path::{Path, PathBuf};

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::billiard::ScattererConfig;
use crate::error::{Error, Result};

fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Scatterer lattice: a named covolume-one lattice or an explicit basis
/// (rows are basis vectors).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatticeSpec {
    Named(String),
    Basis { basis: [[f64; 2]; 2] },
}

impl Default for LatticeSpec {
    fn default() -> Self {
        LatticeSpec::Named("square".into())
    }
}

impl LatticeSpec {
    pub fn basis(&self) -> Result<Matrix2<f64>> {
        match self {
            LatticeSpec::Named(n) if n == "square" => Ok(Matrix2::identity()),
            LatticeSpec::Named(n) if n == "hexagonal" => Ok(*ScattererConfig::hexagonal(0.01)?.basis()),
            LatticeSpec::Named(n) => Err(config_err("lattice", format!("unknown lattice `{n}`; expected square, hexagonal or {{ basis = [[a, b], [c, d]] }}"))),
            LatticeSpec::Basis { basis } => Ok(Matrix2::new(basis[0][0], basis[0][1], basis[1][0], basis[1][1])),
        }
    }

    pub fn scatterers(&self, rho: f64) -> Result<ScattererConfig> {
        ScattererConfig::periodic(self.basis()?, rho).map_err(|e| config_err("lattice", e.to_string()))
    }
}

/// Every knob of every experiment; each experiment reads the fields it
/// needs. Defaults are the sizes of the acceptance runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Name of the experiment; the command line wins if both are given.
    pub experiment: Option<String>,
    pub lattice: LatticeSpec,
    /// Geometry compared against `lattice` in the lattice-independence check.
    pub alt_lattice: LatticeSpec,
    /// Scatterer radii; runs needing one radius use the smallest.
    pub rho: Vec<f64>,
    /// Billiard and flight sample count.
    pub samples: usize,
    /// Haar lattice samples for the Monte Carlo estimates.
    pub mc_samples: usize,
    /// Random instances for the renormalization identity.
    pub instances: usize,
    pub xi: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Macroscopic cap on a single free flight.
    pub t_max: f64,
    /// Evaluation time for ensemble comparisons; also `t` of the semigroup run.
    pub time: f64,
    /// First leg `s` of the semigroup run.
    pub s: f64,
    /// Exit parameters for the kernel normalization check.
    pub exit_params: Vec<f64>,
    pub alpha: f64,
    /// Conditioning bins per axis in the memory-two test.
    pub bins: usize,
    /// Cells with fewer chains are skipped in the memory-two test.
    pub min_cell: usize,
    /// Grid resolution of the 2D KS test.
    pub ks_grid: usize,
    /// Collisions recorded by trajectory-dump.
    pub collisions: usize,
    /// Chains recorded by trajectory-dump.
    pub paths: usize,
    pub kernel_step: f64,
    pub block: usize,
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            lattice: LatticeSpec::default(),
            alt_lattice: LatticeSpec::Named("hexagonal".into()),
            rho: vec![0.05, 0.02, 0.005],
            samples: 100_000,
            mc_samples: 1_000_000,
            instances: 10_000,
            xi: vec![0.25, 0.5, 1.0, 2.0, 5.0],
            seeds: vec![1],
            t_max: 10.0,
            time: 1.0,
            s: 1.0,
            exit_params: vec![-0.9, -0.5, 0.0, 0.5, 0.9],
            alpha: 0.01,
            bins: 4,
            min_cell: 200,
            ks_grid: 32,
            collisions: 50,
            paths: 100,
            kernel_step: 0.02,
            block: crate::parallel::DEFAULT_BLOCK,
            workers: 1,
            out: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            // serde reports unknown and mistyped keys in the message.
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.contains("field"))
                .unwrap_or("<file>")
                .to_string();
            Error::Config { field, message: e.to_string() }
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err("--config", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_err(field, format!("must be positive and finite, got {v}")))
            }
        };
        let count = |field: &str, v: usize| if v > 0 { Ok(()) } else { Err(config_err(field, "must be positive")) };
        if self.rho.is_empty() {
            return Err(config_err("rho", "list must be nonempty"));
        }
        for &r in &self.rho {
            if !(r > 0.0 && r < 0.5) {
                return Err(config_err("rho", format!("radii must lie in (0, 0.5), got {r}")));
            }
        }
        if self.xi.is_empty() {
            return Err(config_err("xi", "grid must be nonempty"));
        }
        for &x in &self.xi {
            positive("xi", x)?;
        }
        if self.seeds.is_empty() {
            return Err(config_err("seeds", "seed list must be nonempty"));
        }
        for &s in &self.exit_params {
            if !(s.abs() <= 1.0) {
                return Err(config_err("exit_params", format!("exit parameters lie in [-1, 1], got {s}")));
            }
        }
        count("samples", self.samples)?;
        count("mc_samples", self.mc_samples)?;
        count("instances", self.instances)?;
        count("bins", self.bins)?;
        count("min_cell", self.min_cell)?;
        count("collisions", self.collisions)?;
        count("paths", self.paths)?;
        count("block", self.block)?;
        if self.ks_grid < 2 {
            return Err(config_err("ks_grid", "needs at least 2 grid points"));
        }
        positive("t_max", self.t_max)?;
        positive("time", self.time)?;
        positive("s", self.s)?;
        positive("kernel_step", self.kernel_step)?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(config_err("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        self.lattice.basis()?;
        self.lattice.scatterers(self.min_rho())?;
        self.alt_lattice.basis().map_err(|e| match e {
            Error::Config { message, .. } => config_err("alt_lattice", message),
            other => other,
        })?;
        Ok(())
    }

    pub fn min_rho(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// SHA-256 of the configuration with the scheduling-only fields
    /// (`workers`, `out`) cleared, as 16 hex digits.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.workers = 0;
        c.out = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        let d = Sha256::digest(json.as_bytes());
        d[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
