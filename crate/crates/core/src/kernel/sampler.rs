//! Exact rejection samplers for the transition law `Φ₀(ξ, b, −s)` and for
//! the stationary law `H(ξ, b)` of `(ξ, b)`.
//!
//! Both envelopes are piecewise: a box on `ξ ≤ 1`, a strip hugging the
//! support `|b| > 1 − 1/ξ` on `1 < ξ ≤ 2`, and a Pareto-by-triangle majorant
//! in the corner `ξ > 2`. Expected proposals per draw do not depend on `s`.

use rand::Rng;
use std::f64::consts::LN_2;

use super::cdf::stationary_profile;
use super::{phi0_raw, PHI0_MAX};
use crate::error::{Error, Result};

/// Proposals before a sampler reports failure instead of looping.
pub const REJECTION_CAP: usize = 10_000;

const TRANSITION_WEIGHTS: [f64; 3] = [2.0, LN_2, 0.25];
const STATIONARY_WEIGHTS: [f64; 3] = [2.0, 2.0 * LN_2, 0.5 * PHI0_MAX];

fn pick_region<R: Rng + ?Sized>(rng: &mut R, weights: &[f64; 3]) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    if u < weights[0] {
        0
    } else if u < weights[0] + weights[1] {
        1
    } else {
        2
    }
}

/// Draws `(ξ, b)` from the density `Φ₀(ξ, b, −s)`.
pub fn sample_xi_b<R: Rng + ?Sized>(s: f64, rng: &mut R) -> Result<(f64, f64)> {
    if !(s.abs() <= 1.0) {
        return Err(Error::InvalidParam(format!("exit parameter {s} outside [-1, 1]")));
    }
    let z = -s;
    // Φ₀(ξ, b, z) = Φ₀(ξ, −b, −z): sample at |z| and mirror.
    let (za, flip) = if z < 0.0 { (-z, true) } else { (z, false) };
    for _ in 0..REJECTION_CAP {
        let (xi, b, envelope) = match pick_region(rng, &TRANSITION_WEIGHTS) {
            0 => {
                let xi = 1.0 - rng.random::<f64>();
                (xi, 2.0 * rng.random::<f64>() - 1.0, PHI0_MAX)
            }
            1 => {
                let xi = 2f64.powf(rng.random::<f64>());
                (xi, 1.0 - rng.random::<f64>() / xi, PHI0_MAX)
            }
            _ => {
                let xi = 2.0 / (1.0 - rng.random::<f64>());
                let a = (1.0 - rng.random::<f64>().sqrt()) / xi;
                (xi, 1.0 - a, PHI0_MAX * (1.0 / xi - a))
            }
        };
        if !(b.abs() < 1.0) {
            continue;
        }
        let target = phi0_raw(xi, b, za);
        if target > 0.0 && rng.random::<f64>() * envelope < target {
            return Ok((xi, if flip { -b } else { b }));
        }
    }
    Err(Error::RejectionCap {
        iterations: REJECTION_CAP,
        context: format!("transition kernel at s = {s}"),
    })
}

/// Draws `(ξ, b)` from the stationary density `H(ξ, b)`.
pub fn sample_stationary_xi_b<R: Rng + ?Sized>(rng: &mut R) -> Result<(f64, f64)> {
    for _ in 0..REJECTION_CAP {
        let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let (xi, b, envelope) = match pick_region(rng, &STATIONARY_WEIGHTS) {
            0 => (1.0 - rng.random::<f64>(), 2.0 * rng.random::<f64>() - 1.0, 1.0),
            1 => {
                let xi = 2f64.powf(rng.random::<f64>());
                (xi, side * (1.0 - rng.random::<f64>() / xi), 1.0)
            }
            _ => {
                let xi = 2.0 / (1.0 - rng.random::<f64>());
                let a = (1.0 - rng.random::<f64>().sqrt()) / xi;
                (xi, side * (1.0 - a), PHI0_MAX * (1.0 / xi - a))
            }
        };
        if !(b.abs() < 1.0) {
            continue;
        }
        let u = rng.random::<f64>() * envelope;
        // H(ξ, b) ≥ 1 − 2ξ·6/π² accepts most box proposals without quadrature.
        if u < 1.0 - 2.0 * PHI0_MAX * xi {
            return Ok((xi, b));
        }
        if u < stationary_profile(xi, b, 1e-9)? {
            return Ok((xi, b));
        }
    }
    Err(Error::RejectionCap {
        iterations: REJECTION_CAP,
        context: "stationary law".into(),
    })
}

/// Source of collision-to-collision transitions for the flight process.
pub trait CollisionKernel: Sync + Send {
    /// `(ξ, b)` of the next leg given the exit parameter `s` of the last
    /// collision.
    fn sample_transition(&self, s: f64, rng: &mut dyn rand::RngCore) -> Result<(f64, f64)>;

    /// `(ξ, b)` from the stationary law, used for generic initial conditions.
    fn sample_stationary(&self, rng: &mut dyn rand::RngCore) -> Result<(f64, f64)>;

    /// Expected time between collisions under the stationary law.
    fn mean_free_time(&self) -> f64 {
        0.5
    }

    fn name(&self) -> &'static str;
}

/// The periodic-lattice kernel `Φ₀`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PeriodicKernel;

impl CollisionKernel for PeriodicKernel {
    fn sample_transition(&self, s: f64, rng: &mut dyn rand::RngCore) -> Result<(f64, f64)> {
        sample_xi_b(s, rng)
    }

    fn sample_stationary(&self, rng: &mut dyn rand::RngCore) -> Result<(f64, f64)> {
        sample_stationary_xi_b(rng)
    }

    fn name(&self) -> &'static str {
        "periodic"
    }
}

/// The Poisson kernel `e^{−2ξ}`, uniform in `b` and blind to `s`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExponentialKernel;

impl ExponentialKernel {
    fn draw(rng: &mut dyn rand::RngCore) -> (f64, f64) {
        let xi = -0.5 * (1.0 - rng.random::<f64>()).ln();
        let mut b = 2.0 * rng.random::<f64>() - 1.0;
        while b == -1.0 {
            b = 2.0 * rng.random::<f64>() - 1.0;
        }
        (xi.max(f64::MIN_POSITIVE), b)
    }
}

impl CollisionKernel for ExponentialKernel {
    fn sample_transition(&self, _s: f64, rng: &mut dyn rand::RngCore) -> Result<(f64, f64)> {
        Ok(Self::draw(rng))
    }

    fn sample_stationary(&self, rng: &mut dyn rand::RngCore) -> Result<(f64, f64)> {
        Ok(Self::draw(rng))
    }

    fn name(&self) -> &'static str {
        "exponential"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::profile::XiProfile;
    use crate::kernel::{CdfTable, FreePathLaw};
    use crate::quad;
    use crate::stats::{chi_square_2d, ks_one_sample, EmpiricalCdf, Partition2d};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn transition_marginal_of_xi() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &s in &[0.0, 0.6, -0.95] {
            let xs: Vec<f64> = (0..40_000).map(|_| sample_xi_b(s, &mut rng).unwrap().0).collect();
            // Oracle: ∫_{-1}^{1} ∫_0^ξ Φ₀(ξ', b, −s) dξ' db.
            let z = -s;
            let cdf = |xi: f64| {
                let pts = [-z.abs(), -z, 0.0, z.abs(), 1.0 / xi - 1.0, 1.0 - 1.0 / xi];
                quad::integrate(|b| XiProfile::new(b, z).mass(0.0, xi), -1.0, 1.0, &pts, 1e-11)
                    .unwrap()
                    .value
            };
            let report = ks_one_sample(&EmpiricalCdf::new(xs), cdf, 0.01).unwrap();
            assert!(report.pass, "s = {s}: {report:?}");
        }
    }

    #[test]
    fn samples_lie_in_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..20_000 {
            let s = -1.0 + 2.0 * (i % 101) as f64 / 100.0;
            let (xi, b) = sample_xi_b(s, &mut rng).unwrap();
            assert!(phi0_raw(xi, b, -s) > 0.0);
            assert!(b.abs() < 1.0);
        }
    }

    #[test]
    fn b_is_symmetric_at_zero_exit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bs: Vec<f64> = (0..40_000).map(|_| sample_xi_b(0.0, &mut rng).unwrap().1).collect();
        let pos = bs.iter().filter(|&&b| b > 0.0).count() as f64 / bs.len() as f64;
        assert!((pos - 0.5).abs() < 4.0 * 0.5 / 200.0);
        let neg: Vec<f64> = bs.iter().map(|b| -b).collect();
        let r = crate::stats::ks_two_sample(&EmpiricalCdf::new(bs), &EmpiricalCdf::new(neg), 0.01).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn stationary_xi_marginal_is_f() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let xs: Vec<f64> = (0..20_000).map(|_| sample_stationary_xi_b(&mut rng).unwrap().0).collect();
        let table = CdfTable::build(FreePathLaw::Generic, 4.0, 0.05).unwrap();
        let r = ks_one_sample(&EmpiricalCdf::new(xs), |x| table.cdf(x), 0.01).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn stationary_b_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<(f64, f64)> = (0..20_000)
            .map(|_| (sample_stationary_xi_b(&mut rng).unwrap().1, 0.5))
            .collect();
        // Oracle: the b-marginal is the flight-time weighted ∫∫ ξ Φ₀(ξ, b, z) dz dξ.
        let density = |b: f64| {
            quad::integrate(
                |z| XiProfile::new(b, z).moment(0.0, f64::INFINITY),
                -1.0,
                1.0,
                &[-b.abs(), -b, 0.0, b.abs()],
                1e-10,
            )
            .unwrap()
            .value
        };
        let mass = |x0: f64, x1: f64, _: f64, _: f64| quad::integrate(density, x0, x1, &[], 1e-8).unwrap().value;
        let part = Partition2d::uniform((-1.0, 1.0), (0.0, 1.0), 20, 1);
        let r = chi_square_2d(&pts, mass, &part, 0.01).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn exponential_kernel_ignores_exit() {
        let k = ExponentialKernel;
        let mut r1 = ChaCha8Rng::seed_from_u64(1);
        let mut r2 = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            k.sample_transition(0.9, &mut r1).unwrap(),
            k.sample_transition(-0.3, &mut r2).unwrap()
        );
    }

    #[test]
    fn rejects_bad_exit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_xi_b(1.5, &mut rng).is_err());
    }
}
