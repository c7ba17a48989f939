//! Closed-form `ξ`-profile of `Φ₀` at fixed `(w, z)`.
//!
//! With `M = max(|w|,|z|)`, `S = |w+z|` and `c = M + 1 − S`, the kernel is
//! flat at height `6/π²` on `(0, 1/(M+1)]`, equals `(6/π²)(1/ξ − c)/S` on
//! `(1/(M+1), 1/c)` and vanishes beyond. All `ξ`-integrals used by the CDF
//! and density routines reduce to elementary functions on these pieces.

use super::PHI0_MAX;

/// Below this `|w+z|` the kernel is taken as its indicator limit.
const SUM_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct XiProfile {
    /// End of the flat piece, `1/(M+1)`.
    pub flat_end: f64,
    /// End of the support, `1/c` (infinite at the corners `w = z = ±1`).
    pub cut: f64,
    c: f64,
    sum: f64,
}

impl XiProfile {
    pub fn new(w: f64, z: f64) -> Self {
        let m = w.abs().max(z.abs());
        let sum = (w + z).abs();
        let flat_end = 1.0 / (m + 1.0);
        if sum < SUM_EPS {
            return XiProfile {
                flat_end,
                cut: flat_end,
                c: m + 1.0,
                sum: 0.0,
            };
        }
        let c = (m + 1.0 - sum).max(0.0);
        let cut = if c == 0.0 { f64::INFINITY } else { (1.0 / c).max(flat_end) };
        XiProfile { flat_end, cut, c, sum }
    }

    pub fn density(&self, xi: f64) -> f64 {
        if xi <= 0.0 {
            0.0
        } else if xi <= self.flat_end {
            PHI0_MAX
        } else if xi < self.cut {
            PHI0_MAX * ((1.0 / xi - self.c) / self.sum).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    /// `∫_l^u Φ₀ dξ`, with `u` possibly infinite.
    pub fn mass(&self, l: f64, u: f64) -> f64 {
        let l = l.max(0.0);
        if u <= l {
            return 0.0;
        }
        let mut total = 0.0;
        let (fl, fu) = (l, u.min(self.flat_end));
        if fu > fl {
            total += fu - fl;
        }
        let (ll, lu) = (l.max(self.flat_end), u.min(self.cut));
        if lu > ll {
            if lu.is_infinite() {
                return f64::INFINITY;
            }
            total += ((lu / ll).ln() - self.c * (lu - ll)) / self.sum;
        }
        PHI0_MAX * total
    }

    /// `∫_l^u ξ Φ₀ dξ`.
    pub fn moment(&self, l: f64, u: f64) -> f64 {
        let l = l.max(0.0);
        if u <= l {
            return 0.0;
        }
        let mut total = 0.0;
        let (fl, fu) = (l, u.min(self.flat_end));
        if fu > fl {
            total += 0.5 * (fu * fu - fl * fl);
        }
        let (ll, lu) = (l.max(self.flat_end), u.min(self.cut));
        if lu > ll {
            if lu.is_infinite() {
                return f64::INFINITY;
            }
            total += ((lu - ll) - 0.5 * self.c * (lu - ll) * (lu + ll)) / self.sum;
        }
        PHI0_MAX * total
    }

    /// `∫_ξ^∞ (ξ' − ξ) Φ₀(ξ') dξ'`.
    pub fn excess(&self, xi: f64) -> f64 {
        let xi = xi.max(0.0);
        let mut total = 0.0;
        if xi < self.flat_end {
            let d = self.flat_end - xi;
            total += 0.5 * d * d;
        }
        let (l, u) = (xi.max(self.flat_end), self.cut);
        if u > l {
            if u.is_infinite() {
                return f64::INFINITY;
            }
            let d = u - l;
            // d − ξ ln(u/l) − c d ((u+l)/2 − ξ), written to keep the
            // leading cancellation small when l = ξ.
            let log_part = if l == xi {
                let x = d / l;
                l * (x - x.ln_1p())
            } else {
                d - xi * (u / l).ln()
            };
            total += (log_part - self.c * d * (0.5 * (u + l) - xi)) / self.sum;
        }
        PHI0_MAX * total
    }

    /// Contribution of `(w, z)` to the generic free-path CDF:
    /// `∫_0^ξ ξ'Φ₀ dξ' + ξ ∫_ξ^∞ Φ₀ dξ'`.
    pub fn capped_mean(&self, xi: f64) -> f64 {
        self.moment(0.0, xi) + xi * self.mass(xi, f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::phi0_raw;
    use crate::quad;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn density_matches_formula() {
        for &(w, z) in &[(0.5, -0.2), (0.0, 0.7), (0.9, 0.95), (-0.3, 0.3), (1.0, 1.0)] {
            let p = XiProfile::new(w, z);
            for i in 1..400 {
                let xi = i as f64 * 0.01;
                assert_abs_diff_eq!(p.density(xi), phi0_raw(xi, w, z), epsilon = 1e-14);
            }
        }
    }

    fn numeric(p: &XiProfile, f: impl Fn(f64) -> f64, l: f64, u: f64) -> f64 {
        quad::integrate(f, l, u, &[p.flat_end, p.cut], 1e-13).unwrap().value
    }

    proptest! {
        #[test]
        fn pieces_match_quadrature(w in -1.0..1.0f64, z in -1.0..1.0f64, xi in 0.01..3.0f64) {
            let p = XiProfile::new(w, z);
            prop_assume!(p.cut < 1e3);
            let top = p.cut.max(xi);
            let m = numeric(&p, |x| p.density(x), xi, top);
            prop_assert!((p.mass(xi, f64::INFINITY) - m).abs() < 1e-9);
            let mo = numeric(&p, |x| x * p.density(x), 0.0, xi);
            prop_assert!((p.moment(0.0, xi) - mo).abs() < 1e-9);
            let ex = numeric(&p, |x| (x - xi) * p.density(x), xi, top);
            prop_assert!((p.excess(xi) - ex).abs() < 1e-9);
        }
    }

    #[test]
    fn unit_mass_along_z_zero() {
        // ∫Φ₀(ξ, w, 0) dξ = (6/π²) ln(1+|w|)/|w|
        for &w in &[0.1, 0.5, 0.99] {
            let p = XiProfile::new(w, 0.0);
            let expect = PHI0_MAX * (1.0f64 + w).ln() / w;
            assert_abs_diff_eq!(p.mass(0.0, f64::INFINITY), expect, epsilon = 1e-14);
        }
    }

    #[test]
    fn indicator_line() {
        let p = XiProfile::new(0.4, -0.4);
        assert_eq!(p.cut, p.flat_end);
        assert_abs_diff_eq!(p.mass(0.0, 10.0), PHI0_MAX / 1.4, epsilon = 1e-15);
    }
}
