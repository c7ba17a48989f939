//! Microscopic Lorentz gas: free flight among hard disks of radius `ρ`
//! centered at the points of a unimodular lattice or of a Poisson process.
//!
//! Collision search walks the unit cells of the scatterer grid along the
//! ray and tests only the centers whose disks can reach the current cell,
//! so the cost of a flight is proportional to its length.

mod poisson;
mod traverse;

use std::io::Write;

use nalgebra::Matrix2;
use rand::Rng;
use serde::Serialize;

pub use poisson::PoissonField;

use crate::error::{Error, Result};
use crate::geometry::{reflect, Direction, Vec2};
use crate::path::PathChain;
use traverse::{trace, CellSource};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ScattererKind {
    Periodic,
    /// Centers from a Poisson process with this many points per unit area.
    Poisson { intensity: f64 },
}

/// Scatterer geometry: a covolume-one lattice (rows of `basis`) or a
/// Poisson process, with disks of radius `rho`.
#[derive(Debug, Clone)]
pub struct ScattererConfig {
    basis: Matrix2<f64>,
    rho: f64,
    kind: ScattererKind,
    /// Columns are the basis vectors: `q = cols · (m, n)`.
    cols: Matrix2<f64>,
    inv: Matrix2<f64>,
    reach: [f64; 2],
}

/// Lagrange–Gauss reduction of a planar basis; returns the reduced pair.
pub fn gauss_reduce(mut a: Vec2, mut b: Vec2) -> (Vec2, Vec2) {
    if a.norm_squared() > b.norm_squared() {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        let mu = (a.dot(&b) / a.norm_squared()).round();
        b -= mu * a;
        if b.norm_squared() >= a.norm_squared() {
            return (a, b);
        }
        std::mem::swap(&mut a, &mut b);
    }
}

impl ScattererConfig {
    /// Periodic scatterers on the lattice spanned by the rows of `basis`.
    pub fn periodic(basis: Matrix2<f64>, rho: f64) -> Result<Self> {
        let det = basis.determinant();
        if !((det.abs() - 1.0).abs() <= 1e-12) {
            return Err(Error::InvalidParam(format!("lattice basis must have |det| = 1, got {det}")));
        }
        let (a, _) = gauss_reduce(basis.row(0).transpose(), basis.row(1).transpose());
        let shortest = a.norm();
        if !(rho > 0.0 && rho < 0.5 * shortest) {
            return Err(Error::InvalidParam(format!(
                "radius {rho} must lie in (0, {}) so that scatterers do not overlap",
                0.5 * shortest
            )));
        }
        Ok(Self::build(basis, rho, ScattererKind::Periodic))
    }

    /// `Z²` with radius `rho`.
    pub fn square(rho: f64) -> Result<Self> {
        Self::periodic(Matrix2::identity(), rho)
    }

    /// Covolume-one triangular lattice with radius `rho`.
    pub fn hexagonal(rho: f64) -> Result<Self> {
        let s = (2.0 / 3f64.sqrt()).sqrt();
        Self::periodic(Matrix2::new(s, 0.0, 0.5 * s, 0.5 * 3f64.sqrt() * s), rho)
    }

    pub fn poisson(intensity: f64, rho: f64) -> Result<Self> {
        if !(intensity >= 0.0 && intensity.is_finite()) {
            return Err(Error::InvalidParam(format!("Poisson intensity must be >= 0, got {intensity}")));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParam(format!("Poisson radius must lie in (0, 1), got {rho}")));
        }
        Ok(Self::build(Matrix2::identity(), rho, ScattererKind::Poisson { intensity }))
    }

    fn build(basis: Matrix2<f64>, rho: f64, kind: ScattererKind) -> Self {
        let cols = basis.transpose();
        let inv = cols.try_inverse().expect("unimodular basis is invertible");
        let reach = [rho * inv.row(0).norm(), rho * inv.row(1).norm()];
        ScattererConfig {
            basis,
            rho,
            kind,
            cols,
            inv,
            reach,
        }
    }

    pub fn basis(&self) -> &Matrix2<f64> {
        &self.basis
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn kind(&self) -> ScattererKind {
        self.kind
    }

    pub fn is_periodic(&self) -> bool {
        self.kind == ScattererKind::Periodic
    }

    /// Same geometry with another radius.
    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        match self.kind {
            ScattererKind::Periodic => Self::periodic(self.basis, rho),
            ScattererKind::Poisson { intensity } => Self::poisson(intensity, rho),
        }
    }

    pub fn lattice_point(&self, m: i64, n: i64) -> Vec2 {
        self.cols * Vec2::new(m as f64, n as f64)
    }

    /// Lattice coordinates `(m, n)` with `q = m b₁ + n b₂`.
    pub fn lattice_coords(&self, q: Vec2) -> Vec2 {
        self.inv * q
    }

    /// Nearest lattice point to `q` among the corners of its cell's
    /// candidate neighbourhood.
    fn lattice_center_at(&self, q: Vec2) -> Option<Vec2> {
        let u = self.lattice_coords(q);
        let c = self.lattice_point(u.x.round() as i64, u.y.round() as i64);
        ((c - q).norm() <= 1e-12 * (1.0 + q.norm())).then_some(c)
    }
}

struct LatticeCells<'a> {
    cfg: &'a ScattererConfig,
}

impl CellSource for LatticeCells<'_> {
    fn to_cells(&self, p: Vec2) -> Vec2 {
        self.cfg.inv * p
    }

    fn candidates(&mut self, i: i64, j: i64, out: &mut Vec<Vec2>) {
        let [r0, r1] = self.cfg.reach;
        let m0 = (i as f64 - r0).ceil() as i64;
        let m1 = ((i + 1) as f64 + r0).floor() as i64;
        let n0 = (j as f64 - r1).ceil() as i64;
        let n1 = ((j + 1) as f64 + r1).floor() as i64;
        for m in m0..=m1 {
            for n in n0..=n1 {
                out.push(self.cfg.lattice_point(m, n));
            }
        }
    }

    fn rho(&self) -> f64 {
        self.cfg.rho
    }
}

/// Position and velocity in microscopic units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroState {
    pub q: Vec2,
    pub v: Direction,
}

impl MicroState {
    pub fn new(q: Vec2, v: Direction) -> Self {
        MicroState { q, v }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollisionRecord {
    /// Free flight time to the hit.
    pub tau: f64,
    pub center: Vec2,
    pub hit_point: Vec2,
    /// Signed impact parameter in units of `ρ`; positive when the ray
    /// passes to the left of the center.
    pub b_in: f64,
}

impl CollisionRecord {
    /// Signed offset, in units of `ρ` along the left normal of `v_out`, of
    /// the outgoing ray from the center just hit.
    pub fn exit_offset(&self, v_out: &Direction, rho: f64) -> f64 {
        (self.hit_point - self.center).dot(&v_out.perp()) / rho
    }
}

/// A realized scatterer configuration that rays can be traced through.
/// Periodic configurations are realized implicitly; Poisson ones lazily
/// from `seed`, thinned so that the start point lies outside every disk.
pub struct Scene<'a> {
    cfg: &'a ScattererConfig,
    field: Option<PoissonField>,
}

impl<'a> Scene<'a> {
    pub fn new(cfg: &'a ScattererConfig, seed: u64, start: Vec2) -> Self {
        let field = match cfg.kind {
            ScattererKind::Periodic => None,
            ScattererKind::Poisson { intensity } => Some(PoissonField::new(seed, intensity, cfg.rho, start)),
        };
        Scene { cfg, field }
    }

    pub fn config(&self) -> &ScattererConfig {
        self.cfg
    }

    /// First hit along `state` within time `t_max`, ignoring the disks
    /// centered at `exclude`.
    pub fn free_path(&mut self, state: &MicroState, t_max: f64, exclude: &[Vec2]) -> Option<CollisionRecord> {
        match &mut self.field {
            None => trace(&mut LatticeCells { cfg: self.cfg }, state.q, &state.v, t_max, exclude),
            Some(f) => trace(f, state.q, &state.v, t_max, exclude),
        }
    }

    /// Follows `state` through up to `n_collisions` collisions; each flight
    /// is capped at `t_max`. A start at a lattice point leaves its own
    /// scatterer freely.
    pub fn trajectory(&mut self, state: &MicroState, n_collisions: usize, t_max: f64) -> Trajectory {
        let mut chain = PathChain::new(state.q);
        let mut records = Vec::with_capacity(n_collisions);
        let mut cur = *state;
        let mut exclude: Vec<Vec2> = match self.field {
            None => self.cfg.lattice_center_at(state.q).into_iter().collect(),
            Some(_) => Vec::new(),
        };
        let mut truncated = false;
        for _ in 0..n_collisions {
            match self.free_path(&cur, t_max, &exclude) {
                Some(rec) => {
                    chain.push(rec.hit_point - cur.q);
                    cur = collide(self.cfg, &cur, &rec);
                    exclude.clear();
                    exclude.push(rec.center);
                    records.push(rec);
                }
                None => {
                    chain.push(t_max * cur.v.vec());
                    cur.q += t_max * cur.v.vec();
                    truncated = true;
                    break;
                }
            }
        }
        Trajectory {
            chain,
            records,
            final_state: cur,
            truncated,
        }
    }

    /// Follows `state` until time `t_end`. The last segment is the flight in
    /// progress at `t_end`, cut one unit past it if it does not end in a
    /// collision by then, so the chain can be evaluated at `t_end`.
    pub fn trajectory_until(&mut self, state: &MicroState, t_end: f64) -> Trajectory {
        let mut chain = PathChain::new(state.q);
        let mut records = Vec::new();
        let mut cur = *state;
        let mut exclude: Vec<Vec2> = match self.field {
            None => self.cfg.lattice_center_at(state.q).into_iter().collect(),
            Some(_) => Vec::new(),
        };
        let mut elapsed = 0.0;
        loop {
            let reach = t_end - elapsed + 1.0;
            match self.free_path(&cur, reach, &exclude) {
                Some(rec) => {
                    chain.push(rec.hit_point - cur.q);
                    elapsed += rec.tau;
                    cur = collide(self.cfg, &cur, &rec);
                    exclude.clear();
                    exclude.push(rec.center);
                    records.push(rec);
                    if elapsed > t_end {
                        return Trajectory {
                            chain,
                            records,
                            final_state: cur,
                            truncated: false,
                        };
                    }
                }
                None => {
                    chain.push(reach * cur.v.vec());
                    cur.q += reach * cur.v.vec();
                    return Trajectory {
                        chain,
                        records,
                        final_state: cur,
                        truncated: true,
                    };
                }
            }
        }
    }
}

/// Free path in a periodic configuration. A start exactly at a lattice
/// point excludes that point's scatterer.
pub fn free_path(cfg: &ScattererConfig, state: &MicroState, t_max: f64) -> Result<Option<CollisionRecord>> {
    if !cfg.is_periodic() {
        return Err(Error::InvalidParam("Poisson configurations are traced through a Scene".into()));
    }
    let exclude: Vec<Vec2> = cfg.lattice_center_at(state.q).into_iter().collect();
    Ok(trace(&mut LatticeCells { cfg }, state.q, &state.v, t_max, &exclude))
}

/// Specular reflection at the recorded hit.
pub fn collide(cfg: &ScattererConfig, state: &MicroState, rec: &CollisionRecord) -> MicroState {
    let n = Direction::from_vec((rec.hit_point - rec.center) / cfg.rho);
    MicroState {
        q: rec.hit_point,
        v: reflect(&state.v, &n),
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Segments between consecutive collisions (microscopic units); when
    /// truncated, the last segment is the unfinished flight of length `t_max`.
    pub chain: PathChain,
    pub records: Vec<CollisionRecord>,
    pub final_state: MicroState,
    pub truncated: bool,
}

impl Trajectory {
    /// Segments ending in a collision.
    pub fn complete_segments(&self) -> &[Vec2] {
        &self.chain.segments[..self.records.len()]
    }

    /// CSV `t, qx, qy, vx, vy, event` with one row for the start, each
    /// collision (outgoing velocity) and the end.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,qx,qy,vx,vy,event")?;
        let mut t = 0.0;
        let mut q = self.chain.origin;
        let dirs = self.chain.directions();
        let row = |w: &mut W, t: f64, q: Vec2, v: Vec2, e: &str| -> Result<()> {
            writeln!(w, "{t},{},{},{},{},{e}", q.x, q.y, v.x, v.y)?;
            Ok(())
        };
        let v0 = dirs.first().map(|d| d.vec()).unwrap_or(self.final_state.v.vec());
        row(&mut w, t, q, v0, "start")?;
        for (k, seg) in self.chain.segments.iter().enumerate() {
            t += seg.norm();
            q += seg;
            if k < self.records.len() {
                let v = dirs.get(k + 1).map(|d| d.vec()).unwrap_or(self.final_state.v.vec());
                row(&mut w, t, q, v, "collision")?;
            }
        }
        row(&mut w, t, q, self.final_state.v.vec(), "end")
    }
}

/// Boltzmann–Grad rescaling `(Q, t) = ρ (q, t)` in the plane.
pub fn to_macroscopic(chain: &PathChain, rho: f64) -> PathChain {
    chain.scaled(rho)
}

/// Initial condition for free-path sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "q")]
pub enum FplSource {
    /// Position uniform in a fundamental cell outside the scatterers.
    Generic,
    /// Fixed position; only the direction is random.
    Fixed([f64; 2]),
    /// At the lattice point at the origin, leaving its own scatterer.
    LatticeCenter,
    /// On the boundary of the origin scatterer, moving outward. No
    /// limiting law is asserted for this ensemble.
    Boundary,
}

/// Macroscopic free paths `ρ τ₁` right-censored at `xi_max`.
#[derive(Debug, Clone, Default)]
pub struct FplSample {
    pub values: Vec<f64>,
    pub censored: usize,
    pub xi_max: f64,
}

impl FplSample {
    pub fn ecdf(&self) -> crate::stats::EmpiricalCdf {
        crate::stats::EmpiricalCdf::with_censoring(self.values.clone(), self.censored, self.xi_max)
    }

    pub fn n(&self) -> usize {
        self.values.len() + self.censored
    }

    pub fn extend(&mut self, other: FplSample) {
        self.values.extend(other.values);
        self.censored += other.censored;
        self.xi_max = other.xi_max;
    }
}

/// Default macroscopic cap on a single flight.
pub const DEFAULT_XI_MAX: f64 = 10.0;

/// Draws a generic starting point in the fundamental cell, outside every
/// disk.
pub fn random_generic_position<R: Rng + ?Sized>(cfg: &ScattererConfig, rng: &mut R) -> Vec2 {
    if !cfg.is_periodic() {
        return Vec2::new(rng.random(), rng.random());
    }
    let mut near = Vec::new();
    LatticeCells { cfg }.candidates(0, 0, &mut near);
    loop {
        let q = cfg.lattice_point(0, 0) + cfg.cols * Vec2::new(rng.random(), rng.random());
        if near.iter().all(|c| (c - q).norm() >= cfg.rho) {
            return q;
        }
    }
}

/// Initial microscopic state for one free-path sample.
pub fn initial_state<R: Rng + ?Sized>(cfg: &ScattererConfig, source: FplSource, rng: &mut R) -> MicroState {
    match source {
        FplSource::Generic => {
            let q = random_generic_position(cfg, rng);
            MicroState::new(q, Direction::random(rng))
        }
        FplSource::Fixed(q) => MicroState::new(Vec2::new(q[0], q[1]), Direction::random(rng)),
        FplSource::LatticeCenter => MicroState::new(Vec2::zeros(), Direction::random(rng)),
        FplSource::Boundary => {
            let n = Direction::random(rng);
            // Outward half-circle, uniform in angle.
            let phi = (rng.random::<f64>() - 0.5) * std::f64::consts::PI;
            let v = crate::geometry::Rotation::from_angle(phi).apply(&n);
            MicroState::new(cfg.rho * n.vec(), v)
        }
    }
}

/// `n_samples` i.i.d. macroscopic free paths `ρ τ₁` from `source`, censored
/// at `xi_max`. Poisson configurations are redrawn for every sample.
pub fn sample_fpl<R: Rng + ?Sized>(
    cfg: &ScattererConfig,
    source: FplSource,
    n_samples: usize,
    xi_max: f64,
    rng: &mut R,
) -> FplSample {
    let t_max = xi_max / cfg.rho;
    let mut out = FplSample {
        values: Vec::with_capacity(n_samples),
        censored: 0,
        xi_max,
    };
    for _ in 0..n_samples {
        let state = initial_state(cfg, source, rng);
        let seed = rng.random::<u64>();
        let mut scene = Scene::new(cfg, seed, state.q);
        let exclude: Vec<Vec2> = match (cfg.is_periodic(), source) {
            (true, _) => cfg.lattice_center_at(state.q).into_iter().collect(),
            (false, _) => Vec::new(),
        };
        let exclude = if source == FplSource::Boundary && cfg.is_periodic() {
            vec![cfg.lattice_point(0, 0)]
        } else {
            exclude
        };
        match scene.free_path(&state, t_max, &exclude) {
            Some(rec) => out.values.push(cfg.rho * rec.tau),
            None => out.censored += 1,
        }
    }
    out
}
