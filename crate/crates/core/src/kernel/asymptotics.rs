//! Small- and large-`ξ` constants of the free-path distributions in general
//! dimension.

use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AsymptoticConstants {
    pub d: u32,
    /// Volume of the `(d−1)`-dimensional unit ball, equal to the total
    /// cross section of a unit scatterer.
    pub nu_d: f64,
    /// `F₀(ξ) ≈ f0_slope · ξ` as `ξ → 0`.
    pub f0_slope: f64,
    /// `1 − F(ξ) ≈ f_tail / ξ` as `ξ → ∞`.
    pub f_tail: f64,
    /// `F(ξ) ≈ f_slope · ξ` as `ξ → 0`.
    pub f_slope: f64,
}

/// `π^{k/2} / Γ(k/2 + 1)`.
pub fn unit_ball_volume(k: u32) -> f64 {
    let h = 0.5 * k as f64;
    PI.powf(h) / gamma(h + 1.0)
}

/// Riemann zeta for real `s > 1`: direct sum to `N` plus an Euler–Maclaurin
/// remainder.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::InvalidParam(format!("zeta needs s > 1, got {s}")));
    }
    const N: usize = 20;
    let n = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // Bernoulli terms B_{2j}/(2j)! · s(s+1)…(s+2j−2) · N^{−s−2j+1}
    const B: [f64; 5] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0];
    let mut rising = s;
    let mut fact = 2.0;
    for (j, b) in B.iter().enumerate() {
        let k = 2 * j + 2;
        sum += b / fact * rising * n.powf(-s - k as f64 + 1.0);
        rising *= (s + k as f64 - 1.0) * (s + k as f64);
        fact *= (k as f64 + 1.0) * (k as f64 + 2.0);
    }
    Ok(sum)
}

pub fn asymptotic_constants(d: u32) -> Result<AsymptoticConstants> {
    if d < 2 {
        return Err(Error::InvalidParam(format!("dimension must be at least 2, got {d}")));
    }
    let df = d as f64;
    let zeta = riemann_zeta(df)?;
    let nu_d = PI.powf(0.5 * (df - 1.0)) / gamma(0.5 * (df + 1.0));
    let f_tail = PI.powf(0.5 * (df - 1.0)) / (2f64.powi(d as i32) * df * gamma(0.5 * (df + 3.0)) * zeta);
    Ok(AsymptoticConstants {
        d,
        nu_d,
        f0_slope: nu_d / zeta,
        f_tail,
        f_slope: nu_d,
    })
}
