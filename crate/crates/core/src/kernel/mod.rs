//! The limiting two-dimensional transition kernel `Φ₀(ξ, w, z)` and the
//! densities and distribution functions built from it.
//!
//! `ξ` is the macroscopic flight time to the next scatterer, `w` the impact
//! parameter there and `z` the negated exit parameter of the collision just
//! left. `Φ₀` is a joint density in `(ξ, w)` for every fixed `z`.

mod asymptotics;
mod cdf;
mod profile;
mod sampler;

pub use asymptotics::{asymptotic_constants, riemann_zeta, unit_ball_volume, AsymptoticConstants};
pub use cdf::{
    f0_density, f0_quadrature, f_density, f_quadrature, f_survival, normalization,
    CdfTable, FreePathLaw,
};
pub use profile::XiProfile;
pub use sampler::{sample_stationary_xi_b, sample_xi_b, CollisionKernel, ExponentialKernel, PeriodicKernel, REJECTION_CAP};

use crate::error::{Error, Result};
use crate::geometry::{diff_cross_section, exit_parameter, impact_parameter, Direction};

/// `6/π²`, the height of `Φ₀` and `1/ζ(2)`.
pub const PHI0_MAX: f64 = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);

/// Total cross section of a two-dimensional hard disk in units of `ρ`.
pub const NU_2: f64 = 2.0;

/// Arguments `(ξ, w, z)` of `Φ₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelArgs {
    pub xi: f64,
    pub w: f64,
    pub z: f64,
}

impl KernelArgs {
    pub fn new(xi: f64, w: f64, z: f64) -> Result<Self> {
        if !(xi > 0.0) || !(w.abs() <= 1.0) || !(z.abs() <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "kernel arguments need xi > 0, |w| <= 1, |z| <= 1; got ({xi}, {w}, {z})"
            )));
        }
        Ok(KernelArgs { xi, w, z })
    }
}

/// The clamp `Υ(x) = min(1, max(0, x))`.
#[inline]
pub fn upsilon(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < 1.0 {
        x
    } else {
        1.0
    }
}

/// `Φ₀(ξ, w, z) = (6/π²) Υ(1 + (ξ⁻¹ − max(|w|,|z|) − 1)/|w+z|)`.
///
/// On the line `w + z = 0` the one-sided limit is used, which is the
/// indicator of `ξ⁻¹ − max(|w|,|z|) − 1 > 0`.
pub fn phi0(args: KernelArgs) -> f64 {
    phi0_raw(args.xi, args.w, args.z)
}

#[inline]
pub(crate) fn phi0_raw(xi: f64, w: f64, z: f64) -> f64 {
    let numerator = 1.0 / xi - w.abs().max(z.abs()) - 1.0;
    let sum = (w + z).abs();
    if sum == 0.0 {
        return if numerator > 0.0 { PHI0_MAX } else { 0.0 };
    }
    PHI0_MAX * upsilon(1.0 + numerator / sum)
}

/// Smallest `ξ_max` with `Φ₀(ξ, w, z) = 0` for all `ξ ≥ ξ_max`;
/// `+∞` at the corners `w = z = ±1`.
pub fn phi0_support_bound(w: f64, z: f64) -> f64 {
    let denom = (w.abs().max(z.abs()) + 1.0 - (w + z).abs()).max(0.0);
    if denom == 0.0 {
        f64::INFINITY
    } else {
        1.0 / denom
    }
}

/// Collision kernel `p₀(V₀, V, ξ, V₊) = σ(V, V₊) Φ₀(ξ, b(V, V₊), −s(V, V₀))`.
pub fn p0(v0: &Direction, v: &Direction, xi: f64, v_plus: &Direction) -> Result<f64> {
    let b = impact_parameter(v, v_plus)?;
    let s = exit_parameter(v, v0)?;
    if !(xi > 0.0) {
        return Ok(0.0);
    }
    Ok(diff_cross_section(v, v_plus) * phi0_raw(xi, b, -s))
}

/// Memoryless kernel of a Poisson scatterer configuration, `e^{−2ξ}`.
pub fn exp_kernel(xi: f64) -> f64 {
    (-NU_2 * xi).exp()
}

/// `p₀` with the exponential kernel: `σ(V, V₊) e^{−2ξ}`, independent of `V₀`.
pub fn p0_exponential(v: &Direction, xi: f64, v_plus: &Direction) -> f64 {
    diff_cross_section(v, v_plus) * exp_kernel(xi)
}

/// Stationary density `p(V, ξ, V₊)` of the generalized kinetic equation.
///
/// Writing the `V₀` integral in the exit parameter (whose Jacobian is the
/// cross section `σ(V₀, V)`) gives `p = σ(V, V₊) ∫_ξ^∞ ∫ Φ₀(ξ', b, z) dz dξ'`;
/// the `ξ'` integral is closed form and the `z` integral adaptive.
pub fn stationary_p(v: &Direction, xi: f64, v_plus: &Direction) -> Result<f64> {
    let b = impact_parameter(v, v_plus)?;
    let h = cdf::stationary_profile(xi.max(0.0), b, 1e-11)?;
    Ok(diff_cross_section(v, v_plus) * h)
}

/// Exponential-kernel stationary density, identical to [`p0_exponential`].
pub fn stationary_p_exponential(v: &Direction, xi: f64, v_plus: &Direction) -> f64 {
    p0_exponential(v, xi, v_plus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn upsilon_examples() {
        assert_eq!(upsilon(-1.0), 0.0);
        assert_eq!(upsilon(0.5), 0.5);
        assert_eq!(upsilon(2.0), 1.0);
        assert_eq!(upsilon(0.0), 0.0);
        assert_eq!(upsilon(1.0), 1.0);
    }

    #[test]
    fn phi0_examples() {
        let v = phi0(KernelArgs::new(0.8, 0.5, -0.2).unwrap());
        assert_abs_diff_eq!(v, PHI0_MAX / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.101_321_183_642_337_77, epsilon = 1e-12);
        assert_eq!(phi0(KernelArgs::new(2.0, 0.0, 0.3).unwrap()), 0.0);
        assert_abs_diff_eq!(phi0(KernelArgs::new(0.5, 0.0, 0.0).unwrap()), PHI0_MAX, epsilon = 1e-15);
        assert_abs_diff_eq!(PHI0_MAX, 0.607_927_101_854_026_6, epsilon = 1e-15);
    }

    #[test]
    fn kernel_args_validation() {
        assert!(KernelArgs::new(0.0, 0.0, 0.0).is_err());
        assert!(KernelArgs::new(1.0, 1.5, 0.0).is_err());
        assert!(KernelArgs::new(1.0, 0.0, -1.01).is_err());
        assert!(KernelArgs::new(1.0, 1.0, -1.0).is_ok());
    }

    #[test]
    fn support_bound_examples() {
        assert_abs_diff_eq!(phi0_support_bound(0.0, 0.7), 1.0, epsilon = 1e-15);
        assert_eq!(phi0_support_bound(1.0, 1.0), f64::INFINITY);
        assert_abs_diff_eq!(phi0_support_bound(0.5, 0.5), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn exp_kernel_examples() {
        assert_eq!(exp_kernel(0.0), 1.0);
        // ∫₀^∞ ∫_{-1}^{1} e^{-2ξ} db dξ = 1
        let r = quad::integrate(|x| 2.0 * exp_kernel(x / (1.0 - x)) / ((1.0 - x) * (1.0 - x)), 0.0, 1.0, &[], 1e-12)
            .unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn p0_exponential_variant() {
        let v = Direction::new(1.0, 0.0);
        let vp = Direction::from_angle(2.0);
        assert_abs_diff_eq!(
            p0_exponential(&v, 0.7, &vp),
            diff_cross_section(&v, &vp) * (-1.4f64).exp(),
            epsilon = 1e-15
        );
    }

    /// Integrate p₀ over ξ and the outgoing angle directly; the inner ξ
    /// integral uses the analytic kinks of Φ₀ as panel boundaries.
    fn p0_total(v0: &Direction, v: &Direction) -> f64 {
        let base = v.angle();
        let s = exit_parameter(v, v0).unwrap();
        let inner = |theta: f64| {
            let vp = Direction::from_angle(base + theta);
            let b = impact_parameter(v, &vp).unwrap();
            let m = b.abs().max(s.abs());
            let flat = 1.0 / (m + 1.0);
            let cut = phi0_support_bound(b, -s);
            quad::integrate(|xi| p0(v0, v, xi, &vp).unwrap(), 0.0, cut, &[flat], 1e-13)
                .unwrap()
                .value
        };
        // b(θ) = cos(θ/2) on (0, 2π); kinks where |b| = |s| or b = s.
        let mut pts = vec![PI];
        let theta_of = |b: f64| 2.0 * b.acos();
        for cand in [s, -s] {
            if cand.abs() < 1.0 {
                pts.push(theta_of(cand));
            }
        }
        quad::integrate(inner, 1e-300, 2.0 * PI - 1e-300, &pts, 1e-10).unwrap().value
    }

    #[test]
    fn p0_is_a_transition_density() {
        let v = Direction::from_angle(0.4);
        for &d in &[0.5, 1.7, 3.0, 4.4] {
            let v0 = Direction::from_angle(0.4 - d);
            assert_abs_diff_eq!(p0_total(&v0, &v), 1.0, epsilon = 1e-4);
        }
    }

    #[test]
    fn stationary_p_exponential_matches_p0() {
        let v = Direction::from_angle(1.0);
        let vp = Direction::from_angle(2.5);
        assert_eq!(stationary_p_exponential(&v, 0.3, &vp), p0_exponential(&v, 0.3, &vp));
    }

    #[test]
    fn stationary_p_rotation_invariant() {
        let a = stationary_p(&Direction::from_angle(0.1), 0.4, &Direction::from_angle(2.0)).unwrap();
        let b = stationary_p(&Direction::from_angle(1.6), 0.4, &Direction::from_angle(3.5)).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
    }

    #[test]
    fn stationary_p_is_normalized() {
        // ∫∫ p dξ dV₊ = ∫_{-1}^{1} ∫_0^∞ H(ξ, b) dξ db = ∫∫∫ ξ Φ₀.
        let total = cdf::mean_flight_integral(1e-8).unwrap();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-3);
    }

    proptest! {
        #[test]
        fn phi0_bounds_and_symmetries(xi in 1e-3..20.0f64, w in -1.0..1.0f64, z in -1.0..1.0f64) {
            let v = phi0_raw(xi, w, z);
            prop_assert!((0.0..=PHI0_MAX).contains(&v));
            prop_assert_eq!(v, phi0_raw(xi, z, w));
            prop_assert_eq!(v, phi0_raw(xi, -w, -z));
        }

        #[test]
        fn phi0_nonincreasing_in_xi(xi in 1e-3..20.0f64, dx in 0.0..5.0f64, w in -1.0..1.0f64, z in -1.0..1.0f64) {
            prop_assert!(phi0_raw(xi + dx, w, z) <= phi0_raw(xi, w, z));
        }

        #[test]
        fn vanishes_beyond_support(w in -1.0..1.0f64, z in -1.0..1.0f64, extra in 0.0..10.0f64) {
            let bound = phi0_support_bound(w, z);
            prop_assume!(bound.is_finite());
            prop_assert_eq!(phi0_raw(bound * (1.0 + 1e-12) + extra, w, z), 0.0);
        }

        #[test]
        fn p0_rotation_invariant(a in 0.0..std::f64::consts::TAU, d1 in 0.1..6.1f64, d2 in 0.1..6.1f64, r in 0.0..std::f64::consts::TAU, xi in 0.01..3.0f64) {
            let v = Direction::from_angle(a);
            let v0 = Direction::from_angle(a - d1);
            let vp = Direction::from_angle(a + d2);
            let base = p0(&v0, &v, xi, &vp).unwrap();
            let rot = crate::geometry::Rotation::from_angle(r);
            let turned = p0(&rot.apply(&v0), &rot.apply(&v), xi, &rot.apply(&vp)).unwrap();
            prop_assert!((base - turned).abs() < 1e-9);
        }
    }
}
