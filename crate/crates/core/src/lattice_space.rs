//! Haar-random unimodular lattices in the plane and their intersections
//! with the cylinder `Z(ξ) = {0 < x₁ < ξ, |x₂| < 1}`.
//!
//! A lattice is `Z² M + x` with the rows of `M` as basis vectors. The
//! probability that a random lattice meets `Z(ξ)` is `F₀(ξ)`; for a random
//! affine lattice it is `F(ξ)`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::Matrix2;
use rand::Rng;
use serde::Serialize;

use crate::billiard::{gauss_reduce, ScattererConfig};
use crate::error::{Error, Result};
use crate::geometry::{Direction, Vec2};
use crate::stats::Estimate;

/// Lattice points closer than this to the cylinder boundary count as misses.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeSample {
    /// Rows are the basis vectors.
    pub basis: Matrix2<f64>,
    /// Zero for a linear lattice.
    pub translation: Vec2,
}

impl LatticeSample {
    pub fn new(basis: Matrix2<f64>, translation: Vec2) -> Result<Self> {
        let det = basis.determinant();
        if !((det - 1.0).abs() <= 1e-10) {
            return Err(Error::InvalidParam(format!("lattice basis must have det = 1, got {det}")));
        }
        Ok(LatticeSample { basis, translation })
    }

    pub fn point(&self, m: i64, n: i64) -> Vec2 {
        m as f64 * self.basis.row(0).transpose() + n as f64 * self.basis.row(1).transpose() + self.translation
    }

    /// Same lattice with a Lagrange–Gauss reduced basis (shortest vector
    /// first), orientation kept.
    pub fn reduced(&self) -> Self {
        let (a, b) = gauss_reduce(self.basis.row(0).transpose(), self.basis.row(1).transpose());
        let b = if a.x * b.y - a.y * b.x < 0.0 { -b } else { b };
        LatticeSample {
            basis: Matrix2::new(a.x, a.y, b.x, b.y),
            translation: self.translation,
        }
    }
}

/// `Z(ξ) = {0 < x₁ < ξ, |x₂| < 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cylinder {
    pub xi: f64,
}

impl Cylinder {
    pub fn new(xi: f64) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::InvalidParam(format!("cylinder length must be positive, got {xi}")));
        }
        Ok(Cylinder { xi })
    }
}

/// A Haar-random frame: modular-surface point `(x, y)` and rotation angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HaarFrame {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl HaarFrame {
    /// Basis `y^{−1/2}(1, 0)`, `y^{−1/2}(x, y)`, rotated by `theta`.
    pub fn lattice(&self) -> LatticeSample {
        let s = self.y.sqrt().recip();
        let (sn, c) = self.theta.sin_cos();
        let rot = |u: f64, w: f64| (c * u - sn * w, sn * u + c * w);
        let (a0, a1) = rot(s, 0.0);
        let (b0, b1) = rot(s * self.x, s * self.y);
        LatticeSample {
            basis: Matrix2::new(a0, a1, b0, b1),
            translation: Vec2::zeros(),
        }
    }
}

/// `(x, y)` from `(3/π) dx dy / y²` on `{|x| ≤ ½, x² + y² ≥ 1}` and a
/// uniform angle.
pub fn sample_frame<R: Rng + ?Sized>(rng: &mut R) -> HaarFrame {
    let y0 = 0.5 * 3f64.sqrt();
    loop {
        let x = rng.random::<f64>() - 0.5;
        // y⁻² tail on [y0, ∞) by inversion
        let y = y0 / (1.0 - rng.random::<f64>());
        if x * x + y * y >= 1.0 {
            return HaarFrame {
                x,
                y,
                theta: 2.0 * PI * rng.random::<f64>(),
            };
        }
    }
}

/// Haar-random point of `X₁`.
pub fn sample_x1<R: Rng + ?Sized>(rng: &mut R) -> LatticeSample {
    sample_frame(rng).lattice()
}

/// Haar-random point of `X`: `sample_x1` shifted uniformly in its cell.
pub fn sample_x<R: Rng + ?Sized>(rng: &mut R) -> LatticeSample {
    let mut lat = sample_x1(rng);
    let (u, w) = (rng.random::<f64>(), rng.random::<f64>());
    lat.translation = u * lat.basis.row(0).transpose() + w * lat.basis.row(1).transpose();
    lat
}

/// Hyperbolic mass `(3/π)∫∫ dx dy / y²` of `[x0, x1] × [y0, y1]` intersected
/// with the fundamental domain.
pub fn modular_cell_mass(x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let (x0, x1) = (x0.max(-0.5), x1.min(0.5));
    if !(x1 > x0) {
        return 0.0;
    }
    // ∫ (1/max(y0, √(1−x²)) − 1/y1)₊ dx, integrand smooth except where the
    // arc crosses y0 or y1.
    let lower = |x: f64| y0.max((1.0 - x * x).max(0.0).sqrt());
    let g = |x: f64| (1.0 / lower(x) - 1.0 / y1).max(0.0);
    let mut breaks = Vec::new();
    for y in [y0, y1] {
        if y < 1.0 {
            let c = (1.0 - y * y).sqrt();
            breaks.extend([-c, c]);
        }
    }
    let r = crate::quad::integrate_with(g, x0, x1, &breaks, &crate::quad::QuadOptions::default());
    3.0 / PI * r.value
}

/// Result of scanning a lattice against a box `(0, len) × (−half, half)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BoxScan {
    /// Smallest `x₁` among lattice points strictly inside.
    pub first: Option<f64>,
    /// Lattice points within `BOUNDARY_TOL` of the boundary.
    pub boundary: usize,
}

/// Scans the rows of the reduced lattice (lines parallel to its shortest
/// vector) that cross the box, keeping the interior point of least `x₁`.
/// The origin of a linear lattice lies on the face `x₁ = 0` and is skipped.
pub fn scan_box(lat: &LatticeSample, len: f64, half: f64) -> BoxScan {
    let red = lat.reduced();
    let a = red.basis.row(0).transpose();
    let b = red.basis.row(1).transpose();
    let x = red.translation;
    let linear = x == Vec2::zeros();
    // Row index n = (p − x) · d with d dual to b, so that a · d = 0.
    let d = Vec2::new(-a.y, a.x) / (a.x * b.y - a.y * b.x);
    let corners = [Vec2::new(0.0, -half), Vec2::new(0.0, half), Vec2::new(len, -half), Vec2::new(len, half)];
    let ns = corners.map(|c| (c - x).dot(&d));
    let n_lo = ns.iter().copied().fold(f64::INFINITY, f64::min).floor() as i64;
    let n_hi = ns.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil() as i64;
    let mut out = BoxScan::default();
    for n in n_lo..=n_hi {
        let c = n as f64 * b + x;
        // Interval of real m with c + m a inside the closed box, widened by
        // one unit so boundary points are seen.
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut empty = false;
        for (k, lim) in [(0, (0.0, len)), (1, (-half, half))] {
            if a[k] != 0.0 {
                let (t0, t1) = ((lim.0 - c[k]) / a[k], (lim.1 - c[k]) / a[k]);
                lo = lo.max(t0.min(t1));
                hi = hi.min(t0.max(t1));
            } else if !(c[k] >= lim.0 - BOUNDARY_TOL && c[k] <= lim.1 + BOUNDARY_TOL) {
                empty = true;
            }
        }
        if empty || lo > hi + 1.0 {
            continue;
        }
        let (m0, m1) = ((lo.floor() as i64) - 1, (hi.ceil() as i64) + 1);
        // Walk from the end with smaller x₁ so the first interior point is
        // the row's minimum.
        let forward = a.x >= 0.0;
        let mut m = if forward { m0 } else { m1 };
        loop {
            let p = c + m as f64 * a;
            let margin = p.x.min(len - p.x).min(half - p.y.abs());
            let at_origin = linear && n == 0 && m == 0;
            if margin > BOUNDARY_TOL {
                if out.first.is_none_or(|f| p.x < f) {
                    out.first = Some(p.x);
                }
                break;
            } else if margin >= -BOUNDARY_TOL && !at_origin {
                out.boundary += 1;
            }
            if m == if forward { m1 } else { m0 } {
                break;
            }
            m += if forward { 1 } else { -1 };
        }
    }
    out
}

/// Whether `lat` meets the open cylinder `Z(ξ)`.
pub fn cylinder_hit(lat: &LatticeSample, cyl: &Cylinder) -> bool {
    scan_box(lat, cyl.xi, 1.0).first.is_some()
}

/// Smallest `ξ ≤ xi_max` at which `lat` meets `Z(ξ)`, i.e. the least
/// `x₁ > 0` among lattice points in the strip `|x₂| < 1`.
pub fn first_hit(lat: &LatticeSample, xi_max: f64) -> BoxScan {
    scan_box(lat, xi_max, 1.0)
}

/// Monte Carlo estimates of the hitting probability on a grid of `ξ`
/// values from one set of lattice draws.
#[derive(Debug, Clone, Serialize)]
pub struct CurveEstimate {
    pub xi: Vec<f64>,
    pub estimates: Vec<Estimate>,
    pub boundary: usize,
}

impl CurveEstimate {
    /// Pools hit counts with another run over the same grid.
    pub fn merge(&self, other: &CurveEstimate) -> CurveEstimate {
        let estimates = self
            .estimates
            .iter()
            .zip(&other.estimates)
            .map(|(a, b)| {
                let hits = (a.p * a.n as f64).round() as usize + (b.p * b.n as f64).round() as usize;
                Estimate::from_hits(hits, a.n + b.n)
            })
            .collect();
        CurveEstimate {
            xi: self.xi.clone(),
            estimates,
            boundary: self.boundary + other.boundary,
        }
    }
}

/// Hitting probabilities of `Z(ξ)` for each `ξ` in `xis`, over `n_samples`
/// Haar lattices (affine when `affine`).
pub fn estimate_curve_mc<R: Rng + ?Sized>(xis: &[f64], n_samples: usize, affine: bool, rng: &mut R) -> CurveEstimate {
    let xi_max = xis.iter().copied().fold(0.0, f64::max);
    let mut hits = vec![0usize; xis.len()];
    let mut boundary = 0;
    for _ in 0..n_samples {
        let lat = if affine { sample_x(rng) } else { sample_x1(rng) };
        let scan = first_hit(&lat, xi_max);
        boundary += scan.boundary;
        if let Some(f) = scan.first {
            for (h, &xi) in hits.iter_mut().zip(xis) {
                *h += usize::from(f < xi);
            }
        }
    }
    CurveEstimate {
        xi: xis.to_vec(),
        estimates: hits.into_iter().map(|h| Estimate::from_hits(h, n_samples)).collect(),
        boundary,
    }
}

fn check_mc_args(xi: f64, n_samples: usize) -> Result<()> {
    Cylinder::new(xi)?;
    if n_samples < 1000 {
        return Err(Error::InvalidParam(format!("at least 1000 lattice samples required, got {n_samples}")));
    }
    Ok(())
}

/// `F₀(ξ)` as the fraction of Haar lattices meeting `Z(ξ)`.
pub fn estimate_f0_mc<R: Rng + ?Sized>(xi: f64, n_samples: usize, rng: &mut R) -> Result<Estimate> {
    check_mc_args(xi, n_samples)?;
    Ok(estimate_curve_mc(&[xi], n_samples, false, rng).estimates[0])
}

/// `F(ξ)` as the fraction of Haar affine lattices meeting `Z(ξ)`.
pub fn estimate_f_mc<R: Rng + ?Sized>(xi: f64, n_samples: usize, rng: &mut R) -> Result<Estimate> {
    check_mc_args(xi, n_samples)?;
    Ok(estimate_curve_mc(&[xi], n_samples, true, rng).estimates[0])
}

/// Lattice `(L − q) K(v)` in coordinates where `v` is the first axis.
fn rotated_frame(cfg: &ScattererConfig, q: Vec2, v: &Direction) -> (Matrix2<f64>, Vec2) {
    let k = Matrix2::new(v.x(), -v.y(), v.y(), v.x());
    let basis = cfg.basis() * k;
    let shift = -(k.transpose() * q);
    (basis, shift)
}

/// Whether the scatterer lattice meets the long cylinder
/// `q + {0 < x·v < ξ/ρ, |x·v⊥| < ρ}`, and whether the renormalized lattice
/// `(L − q) K(v) D(ρ)` with `D(ρ) = diag(ρ, 1/ρ)` meets `Z(ξ)`.
pub fn renormalize(cfg: &ScattererConfig, q: Vec2, v: &Direction, rho: f64, xi: f64) -> Result<(bool, bool)> {
    if !cfg.is_periodic() {
        return Err(Error::InvalidParam("renormalization needs a periodic configuration".into()));
    }
    if !(rho > 0.0 && xi > 0.0) {
        return Err(Error::InvalidParam(format!("rho and xi must be positive, got {rho}, {xi}")));
    }
    let (basis, shift) = rotated_frame(cfg, q, v);
    let long = LatticeSample { basis, translation: shift };
    let hit_long = scan_box(&long, xi / rho, rho).first.is_some();
    let dm = Matrix2::new(rho, 0.0, 0.0, 1.0 / rho);
    let renorm = LatticeSample {
        basis: basis * dm,
        translation: dm.transpose() * shift,
    };
    let hit_renorm = cylinder_hit(&renorm, &Cylinder::new(xi)?);
    Ok((hit_long, hit_renorm))
}

/// One row of the estimate export.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EstimateRow {
    pub xi: f64,
    pub f0: Estimate,
    pub f: Estimate,
}

/// CSV `xi, F0_mc, F0_stderr, F_mc, F_stderr, n`.
pub fn write_estimates_csv<W: Write>(mut w: W, rows: &[EstimateRow]) -> Result<()> {
    writeln!(w, "xi,F0_mc,F0_stderr,F_mc,F_stderr,n")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{},{}", r.xi, r.f0.p, r.f0.stderr, r.f.p, r.f.stderr, r.f0.n)?;
    }
    Ok(())
}
