//! Adaptive Gauss–Kronrod quadrature on panels with known breakpoints.
//!
//! Integrands in this crate are piecewise smooth with kinks at analytically
//! known locations. Callers pass those locations as breakpoints so that every
//! kink is a panel endpoint; the 15-point Kronrod rule then converges at its
//! smooth rate on each panel and bisection only refines genuinely curved
//! regions.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (7-point rule).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_panels: 4000,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod panel with the embedded 7-point Gauss estimate.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

/// Adaptive integration over `[a, b]` with every break strictly inside the
/// interval used as a panel boundary; breaks outside it are ignored.
/// Returns the estimate even when the tolerance is not reached; check
/// `converged`.
pub fn integrate_with<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, breaks: &[f64], opts: &QuadOptions) -> QuadResult {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0;
    for w in pts.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (value, error) = gk15(&mut f, w[0], w[1]);
        evaluations += 15;
        total += value;
        total_err += error;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    let tol = |v: f64| opts.abs_tol.max(opts.rel_tol * v.abs());
    while total_err > tol(total) && heap.len() < opts.max_panels {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Panel cannot be split further in floating point.
            heap.push(Panel { error: 0.0, ..worst });
            total_err -= worst.error;
            continue;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed accumulated rounding from the running updates.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    QuadResult {
        value,
        error,
        evaluations,
        converged: error <= tol(value),
    }
}

/// Adaptive integration to absolute tolerance `abs_tol`; fails with the
/// achieved error estimate if the tolerance is not met.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], abs_tol: f64) -> Result<QuadResult> {
    let opts = QuadOptions {
        abs_tol,
        ..QuadOptions::default()
    };
    let r = integrate_with(f, a, b, breaks, &opts);
    if r.converged {
        Ok(r)
    } else {
        Err(Error::Quadrature {
            tolerance: abs_tol,
            estimate: r.error,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_is_exact_on_one_panel() {
        let mut f = |x: f64| x.powi(10) - 3.0 * x.powi(3);
        let (v, _) = gk15(&mut f, 0.0, 2.0);
        assert_abs_diff_eq!(v, 2f64.powi(11) / 11.0 - 12.0, epsilon = 1e-11);
    }

    #[test]
    fn kink_at_breakpoint_converges_fast() {
        let r = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3, 1.7], 1e-13).unwrap();
        assert_abs_diff_eq!(r.value, 0.045 + 0.245, epsilon = 1e-13);
        assert_eq!(r.evaluations, 30);
    }

    #[test]
    fn unaligned_kink_still_converges() {
        let r = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[], 1e-10).unwrap();
        assert_abs_diff_eq!(r.value, 0.29, epsilon = 1e-10);
    }

    #[test]
    fn log_singularity() {
        let r = integrate(|x: f64| -x.ln(), 0.0, 1.0, &[], 1e-10).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn reports_failure() {
        let opts = QuadOptions {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_panels: 3,
        };
        let r = integrate_with(|x: f64| (1.0 / x).sin(), 1e-3, 1.0, &[], &opts);
        assert!(!r.converged);
        assert!(r.error > 0.0);
    }

    #[test]
    fn degenerate_interval() {
        let r = integrate(|x: f64| x, 1.0, 1.0, &[], 1e-12).unwrap();
        assert_eq!(r.value, 0.0);
    }
}
