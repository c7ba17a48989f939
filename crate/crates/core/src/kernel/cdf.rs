//! Free-path distribution functions by quadrature over `(w, z)` with the
//! `ξ`-integrals done in closed form.
//!
//! The integrands below are piecewise smooth in `(w, z)` with kinks on the
//! lines `|z| = |w|`, `z = −w`, `|z| = |1/ξ − 1|` and `w = |1/ξ − 1|`; these
//! are passed as panel boundaries to the one-dimensional adaptive rule.

use super::profile::XiProfile;
use super::{exp_kernel, PHI0_MAX};
use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};

const INNER_TOL: f64 = 1e-12;
const OUTER_TOL: f64 = 1e-9;
const INNER_FAIL: f64 = 1e-6;

/// `∫_{-1}^{1} ∫_{-1}^{1} g(w, z) dz dw` for integrands with the symmetry
/// `g(w, z) = g(−w, −z)` and kinks at the lines listed in the module docs.
fn kernel_plane_integral<G>(g: G, xi: f64, tol: f64) -> Result<f64>
where
    G: Fn(f64, f64) -> f64,
{
    let a = (1.0 / xi - 1.0).abs();
    let mut err: Option<Error> = None;
    let inner = |w: f64| {
        let opts = QuadOptions {
            abs_tol: tol * 1e-2,
            rel_tol: 1e-10,
            max_panels: 500,
        };
        let r = quad::integrate_with(|z| g(w, z), -1.0, 1.0, &[-w, 0.0, w, a, -a], &opts);
        // Within ~1e-8 of the corners w = z = ±1 the integrand peaks at
        // 1/(1 − |z|), which the z grid resolves only to ~1e-7 relative, so
        // the inner rule stalls near 1e-9. Those w carry negligible outer
        // weight; only a gross inner failure is reported.
        if r.error > INNER_FAIL {
            err.get_or_insert(Error::Quadrature {
                tolerance: tol,
                estimate: r.error,
            });
        }
        r.value
    };
    let r = quad::integrate(inner, 0.0, 1.0, &[a], tol);
    if let Some(e) = err {
        return Err(e);
    }
    Ok(2.0 * r?.value)
}

/// Density of [`f0_quadrature`]: `∫ Φ₀(ξ, 0, z) dz`, closed form.
pub fn f0_density(xi: f64) -> f64 {
    if xi <= 0.0 || xi >= 1.0 {
        return 0.0;
    }
    let a = 1.0 / xi - 1.0;
    if a >= 1.0 {
        2.0 * PHI0_MAX
    } else {
        2.0 * PHI0_MAX * (a - a * a.ln())
    }
}

/// `F₀(ξ) = ∫_0^ξ ∫ Φ₀(ξ', 0, z) dz dξ'`, the free-path CDF for a particle
/// leaving a scatterer center.
pub fn f0_quadrature(xi: f64) -> Result<f64> {
    if xi <= 0.0 {
        return Ok(0.0);
    }
    let a = 1.0 / xi - 1.0;
    let r = quad::integrate(|z| XiProfile::new(0.0, z).mass(0.0, xi), 0.0, 1.0, &[a], INNER_TOL)?;
    Ok((2.0 * r.value).min(1.0))
}

/// Density of [`f_quadrature`]: `∫∫ ∫_ξ^∞ Φ₀ dξ' dw dz`.
pub fn f_density(xi: f64) -> Result<f64> {
    if xi <= 0.0 {
        return Ok(super::NU_2);
    }
    kernel_plane_integral(|w, z| XiProfile::new(w, z).mass(xi, f64::INFINITY), xi, OUTER_TOL)
}

/// `F(ξ) = ∫_0^ξ ∫_{ξ'}^∞ ∫∫ Φ₀ dw dz dξ'' dξ'`, the free-path CDF for a
/// generic starting point.
pub fn f_quadrature(xi: f64) -> Result<f64> {
    if xi <= 0.0 {
        return Ok(0.0);
    }
    let v = kernel_plane_integral(|w, z| XiProfile::new(w, z).capped_mean(xi), xi, OUTER_TOL)?;
    Ok(v.clamp(0.0, 1.0))
}

/// `1 − F(ξ)`, computed directly so that the tail keeps relative accuracy.
pub fn f_survival(xi: f64) -> Result<f64> {
    if xi <= 0.0 {
        return Ok(1.0);
    }
    // Tolerance relative to the ξ⁻¹ tail size.
    let tol = (OUTER_TOL / xi.max(1.0)).max(1e-14);
    kernel_plane_integral(|w, z| XiProfile::new(w, z).excess(xi), xi, tol)
}

/// `∫_{-1}^{1} ∫_0^∞ Φ₀(ξ, b, −s) dξ db`.
pub fn normalization(s: f64) -> Result<f64> {
    let z = -s;
    let pts = [-z.abs(), -z, 0.0, z.abs()];
    Ok(quad::integrate(|b| XiProfile::new(b, z).mass(0.0, f64::INFINITY), -1.0, 1.0, &pts, INNER_TOL)?.value)
}

/// `∫∫∫ ξ Φ₀ dξ dw dz`, the normalization of the stationary density.
#[cfg(test)]
pub(crate) fn mean_flight_integral(tol: f64) -> Result<f64> {
    kernel_plane_integral(|w, z| XiProfile::new(w, z).moment(0.0, f64::INFINITY), 0.5, tol)
}

/// `H(ξ, b) = ∫_ξ^∞ ∫ Φ₀(ξ', b, z) dz dξ'`.
pub(crate) fn stationary_profile(xi: f64, b: f64, tol: f64) -> Result<f64> {
    let a = if xi > 0.0 { (1.0 / xi - 1.0).abs() } else { 2.0 };
    let pts = [-b.abs(), -b, 0.0, b.abs(), a, -a];
    Ok(quad::integrate(|z| XiProfile::new(b, z).mass(xi, f64::INFINITY), -1.0, 1.0, &pts, tol)?.value)
}

/// The three limiting free-path laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FreePathLaw {
    /// Leaving a scatterer center, `F₀`.
    Center,
    /// Generic starting point, `F`.
    Generic,
    /// Poisson scatterers, `1 − e^{−2ξ}`.
    Exponential,
}

impl FreePathLaw {
    pub fn cdf(&self, xi: f64) -> Result<f64> {
        match self {
            FreePathLaw::Center => f0_quadrature(xi),
            FreePathLaw::Generic => f_quadrature(xi),
            FreePathLaw::Exponential => Ok(if xi <= 0.0 { 0.0 } else { 1.0 - exp_kernel(xi) }),
        }
    }

    pub fn density(&self, xi: f64) -> Result<f64> {
        match self {
            FreePathLaw::Center => Ok(f0_density(xi)),
            FreePathLaw::Generic => f_density(xi),
            FreePathLaw::Exponential => Ok(if xi < 0.0 { 0.0 } else { 2.0 * exp_kernel(xi) }),
        }
    }
}

/// Tabulated CDF with cubic Hermite interpolation on a uniform grid, for
/// evaluating a law at many sample points. Beyond the grid the CDF is
/// computed directly.
#[derive(Debug, Clone)]
pub struct CdfTable {
    law: FreePathLaw,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl CdfTable {
    pub fn build(law: FreePathLaw, xi_max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(xi_max > step) {
            return Err(Error::InvalidParam(format!("cdf table needs 0 < step < xi_max, got {step}, {xi_max}")));
        }
        let n = (xi_max / step).ceil() as usize;
        let mut values = Vec::with_capacity(n + 1);
        let mut slopes = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let xi = i as f64 * step;
            values.push(law.cdf(xi)?);
            slopes.push(law.density(xi)?);
        }
        Ok(CdfTable {
            law,
            step,
            values,
            slopes,
        })
    }

    pub fn law(&self) -> FreePathLaw {
        self.law
    }

    pub fn xi_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    pub fn cdf(&self, xi: f64) -> f64 {
        if xi <= 0.0 {
            return 0.0;
        }
        let pos = xi / self.step;
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return self.law.cdf(xi).unwrap_or(f64::NAN);
        }
        let t = pos - i as f64;
        let h = self.step;
        let (p0, p1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * p0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * p1
            + (t3 - t2) * m1;
        v.clamp(0.0, 1.0)
    }

    /// `(ξ, F(ξ))` at the grid nodes.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| (i as f64 * self.step, v))
    }
}
