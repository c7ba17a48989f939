//! Planar geometry of hard-disk scattering.
//!
//! Directions are unit vectors (never angles) so that there are no branch
//! cuts in the scattering maps. Impact and exit parameters are measured in
//! units of the scatterer radius and carry the orientation of the left
//! normal `v⊥ = (-v_y, v_x)` of the ray: a ray passing to the left of a
//! scatterer center has positive impact parameter and is deflected
//! counterclockwise.

use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Unit vector on the circle.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Direction(Vec2);

impl Direction {
    pub const E1: Direction = Direction(Vec2::new(1.0, 0.0));

    /// Normalizes `(x, y)`. Panics on the zero vector.
    pub fn new(x: f64, y: f64) -> Self {
        Self::from_vec(Vec2::new(x, y))
    }

    pub fn from_vec(v: Vec2) -> Self {
        let n = v.norm();
        assert!(n > 0.0 && n.is_finite(), "direction from degenerate vector {v:?}");
        Direction(v / n)
    }

    pub fn try_from_vec(v: Vec2) -> Option<Self> {
        let n = v.norm();
        (n > 0.0 && n.is_finite()).then(|| Direction(v / n))
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Direction(Vec2::new(c, s))
    }

    /// Uniformly distributed on the circle.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::from_angle(rng.random::<f64>() * 2.0 * PI)
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.0.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.0.y
    }

    #[inline]
    pub fn vec(&self) -> Vec2 {
        self.0
    }

    /// Angle in `[0, 2π)`.
    pub fn angle(&self) -> f64 {
        let a = self.0.y.atan2(self.0.x);
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    }

    /// Left normal `(-y, x)`.
    #[inline]
    pub fn perp(&self) -> Vec2 {
        Vec2::new(-self.0.y, self.0.x)
    }

    #[inline]
    pub fn dot(&self, other: &Direction) -> f64 {
        self.0.dot(&other.0)
    }

    /// z-component of `self × other`.
    #[inline]
    pub fn cross(&self, other: &Direction) -> f64 {
        self.0.x * other.0.y - self.0.y * other.0.x
    }
}

impl std::ops::Neg for Direction {
    type Output = Direction;
    fn neg(self) -> Direction {
        Direction(-self.0)
    }
}

/// Proper rotation of the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Matrix2<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix2::identity())
    }

    /// Counterclockwise rotation by `theta`.
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Rotation(Matrix2::new(c, -s, s, c))
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }

    pub fn apply(&self, v: &Direction) -> Direction {
        Direction::from_vec(self.0 * v.0)
    }

    pub fn apply_vec(&self, v: &Vec2) -> Vec2 {
        self.0 * v
    }

    pub fn inverse(&self) -> Self {
        Rotation(self.0.transpose())
    }

    pub fn compose(&self, other: &Rotation) -> Self {
        Rotation(self.0 * other.0)
    }
}

/// The rotation `K(v)` with `K(v) v = e₁`.
pub fn rotate_to_e1(v: &Direction) -> Rotation {
    Rotation(Matrix2::new(v.x(), v.y(), -v.y(), v.x()))
}

/// Specular reflection `v - 2(v·n)n`.
pub fn reflect(v: &Direction, n: &Direction) -> Direction {
    Direction::from_vec(v.0 - 2.0 * v.0.dot(&n.0) * n.0)
}

/// Signed impact parameter `b(v_in, v_out)` of the collision that turns
/// `v_in` into `v_out`; `|b| = cos(θ/2)` for deflection angle `θ`.
pub fn impact_parameter(v_in: &Direction, v_out: &Direction) -> Result<f64> {
    let cross = v_in.cross(v_out);
    if cross == 0.0 && v_in.dot(v_out) > 0.0 {
        return Err(Error::NoDeflection);
    }
    // |v_in + v_out| = 2 cos(θ/2) without cancellation near head-on.
    let half = (0.5 * (v_in.0 + v_out.0).norm()).min(1.0);
    Ok(if cross < 0.0 { -half } else { half })
}

/// Outgoing direction after hitting a disk at signed impact parameter `b`.
pub fn scatter_from_impact(v_in: &Direction, b: f64) -> Result<Direction> {
    if !(b.abs() < 1.0) {
        return Err(Error::NoCollision(b));
    }
    let along = 2.0 * b * b - 1.0;
    let side = 2.0 * b * (1.0 - b * b).sqrt();
    Ok(Direction::from_vec(along * v_in.0 + side * v_in.perp()))
}

/// Signed exit parameter `s(v_out, v_prev)`: the offset, in units of the
/// radius and along the left normal of `v_out`, of the outgoing ray from the
/// center of the scatterer just left, for a particle that arrived with
/// `v_prev`. For a hard disk this equals the impact parameter of that
/// collision, and `s(V, V₀) = -b(-V, -V₀)` under time reversal.
pub fn exit_parameter(v_out: &Direction, v_prev: &Direction) -> Result<f64> {
    if v_out.cross(v_prev) == 0.0 && v_out.dot(v_prev) > 0.0 {
        return Err(Error::NoDeflection);
    }
    Ok(-impact_parameter(&(-*v_out), &(-*v_prev))?)
}

/// Hard-disk differential cross section in the plane, `¼‖v_in − v_out‖`.
pub fn diff_cross_section(v_in: &Direction, v_out: &Direction) -> f64 {
    0.25 * (v_in.0 - v_out.0).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn close(a: &Direction, b: &Direction, tol: f64) -> bool {
        (a.vec() - b.vec()).norm() < tol
    }

    #[test]
    fn rotate_to_e1_examples() {
        let r = rotate_to_e1(&Direction::E1);
        assert_abs_diff_eq!(*r.matrix(), Matrix2::identity(), epsilon = 1e-15);

        let r = rotate_to_e1(&Direction::new(0.0, 1.0));
        let expected = Rotation::from_angle(-PI / 2.0);
        assert_abs_diff_eq!(*r.matrix(), *expected.matrix(), epsilon = 1e-15);

        let v = Direction::new(3.0 / 5.0, 4.0 / 5.0);
        let r = rotate_to_e1(&v);
        assert_abs_diff_eq!(r.matrix()[(0, 0)], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(r.matrix()[(0, 1)], 0.8, epsilon = 1e-15);
        let image = r.apply(&v);
        assert!(close(&image, &Direction::E1, 1e-12));
        let m = r.matrix();
        assert_abs_diff_eq!(m.transpose() * m, Matrix2::identity(), epsilon = 1e-12);
        assert_abs_diff_eq!(m.determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reflect_examples() {
        let e1 = Direction::E1;
        let out = reflect(&e1, &Direction::new(-1.0, 0.0));
        assert!(close(&out, &Direction::new(-1.0, 0.0), 1e-15));
        let out = reflect(&e1, &Direction::new(0.0, 1.0));
        assert!(close(&out, &e1, 1e-15));
        let out = reflect(&e1, &Direction::new(-(3f64.sqrt()) / 2.0, 0.5));
        assert!(close(&out, &Direction::new(-0.5, 3f64.sqrt() / 2.0), 1e-15));
    }

    #[test]
    fn impact_parameter_examples() {
        let e1 = Direction::E1;
        assert_abs_diff_eq!(
            impact_parameter(&e1, &Direction::new(-1.0, 0.0)).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        let b: f64 = 0.6;
        let out = Direction::new(2.0 * b * b - 1.0, 2.0 * b * (1.0 - b * b).sqrt());
        assert_abs_diff_eq!(impact_parameter(&e1, &out).unwrap(), 0.6, epsilon = 1e-14);
        assert_abs_diff_eq!(
            impact_parameter(&e1, &Direction::new(0.0, 1.0)).unwrap(),
            2f64.sqrt() / 2.0,
            epsilon = 1e-15
        );
        assert!(matches!(impact_parameter(&e1, &e1), Err(Error::NoDeflection)));
    }

    /// Ray-trace a unit disk centered at the origin: the ray
    /// `(-10, b) + t e₁` hits it at `(-√(1-b²), b)`.
    #[test]
    fn impact_parameter_matches_ray_traced_disk() {
        for &b in &[-0.95, -0.6, -0.1, 0.0, 0.3, 0.6, 0.99] {
            let hit = Vec2::new(-(1.0f64 - b * b).sqrt(), b);
            let normal = Direction::from_vec(hit);
            let out = reflect(&Direction::E1, &normal);
            assert_abs_diff_eq!(impact_parameter(&Direction::E1, &out).unwrap(), b, epsilon = 1e-12);
            assert!(close(&scatter_from_impact(&Direction::E1, b).unwrap(), &out, 1e-12));
        }
    }

    #[test]
    fn scatter_from_impact_examples() {
        let e1 = Direction::E1;
        assert!(close(&scatter_from_impact(&e1, 0.0).unwrap(), &Direction::new(-1.0, 0.0), 1e-15));
        assert!(close(&scatter_from_impact(&e1, 0.6).unwrap(), &Direction::new(-0.28, 0.96), 1e-15));
        let up = Direction::new(0.0, 1.0);
        assert!(close(&scatter_from_impact(&up, 0.0).unwrap(), &Direction::new(0.0, -1.0), 1e-15));
        assert!(matches!(scatter_from_impact(&e1, 1.0), Err(Error::NoCollision(_))));
        assert!(matches!(scatter_from_impact(&e1, -1.5), Err(Error::NoCollision(_))));
    }

    #[test]
    fn exit_parameter_examples() {
        let e1 = Direction::E1;
        let back = Direction::new(-1.0, 0.0);
        assert_abs_diff_eq!(exit_parameter(&back, &e1).unwrap(), 0.0, epsilon = 1e-15);
        assert!(exit_parameter(&e1, &e1).is_err());
        // Geometric exit offset: leaving a unit disk at hit point h with
        // direction V, the offset along V⊥ is h·V⊥.
        for &b in &[-0.8, -0.2, 0.4, 0.9] {
            let h = Vec2::new(-(1.0f64 - b * b).sqrt(), b);
            let out = scatter_from_impact(&e1, b).unwrap();
            let offset = h.dot(&out.perp());
            assert_abs_diff_eq!(exit_parameter(&out, &e1).unwrap(), offset, epsilon = 1e-12);
        }
    }

    #[test]
    fn diff_cross_section_examples() {
        let e1 = Direction::E1;
        assert_abs_diff_eq!(diff_cross_section(&e1, &Direction::new(-1.0, 0.0)), 0.5, epsilon = 1e-15);
        assert_eq!(diff_cross_section(&e1, &e1), 0.0);
        assert_abs_diff_eq!(
            diff_cross_section(&e1, &Direction::new(0.0, 1.0)),
            0.25 * 2f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn total_cross_section_is_two() {
        let v = Direction::new(0.3, -0.7);
        let total = crate::quad::integrate(
            |theta| diff_cross_section(&v, &Direction::from_angle(theta)),
            0.0,
            2.0 * PI,
            &[v.angle()],
            1e-12,
        )
        .unwrap();
        assert_abs_diff_eq!(total.value, 2.0, epsilon = 1e-8);
    }

    /// |∂b/∂θ| = σ: finite differences of the impact parameter in the
    /// outgoing angle.
    #[test]
    fn cross_section_is_impact_parameter_jacobian() {
        let v = Direction::E1;
        for &theta in &[0.3, 1.0, 2.0, 2.9, 3.5, 5.0] {
            let h = 1e-6;
            let bp = impact_parameter(&v, &Direction::from_angle(theta + h)).unwrap();
            let bm = impact_parameter(&v, &Direction::from_angle(theta - h)).unwrap();
            let deriv = (bp - bm) / (2.0 * h);
            let sigma = diff_cross_section(&v, &Direction::from_angle(theta));
            assert_abs_diff_eq!(deriv.abs(), sigma, epsilon = 1e-7);
        }
    }

    proptest! {
        #[test]
        fn reflect_preserves_norm(a in 0.0..2.0 * PI, c in 0.0..2.0 * PI) {
            let out = reflect(&Direction::from_angle(a), &Direction::from_angle(c));
            prop_assert!((out.vec().norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn scatter_roundtrips(a in 0.0..2.0 * PI, b in -0.999_999..0.999_999f64) {
            let v = Direction::from_angle(a);
            let out = scatter_from_impact(&v, b).unwrap();
            prop_assert!((impact_parameter(&v, &out).unwrap() - b).abs() < 1e-10);
        }

        #[test]
        fn impact_roundtrips(a in 0.0..2.0 * PI, d in 1e-3..(2.0 * PI - 1e-3)) {
            let v = Direction::from_angle(a);
            let w = Direction::from_angle(a + d);
            let b = impact_parameter(&v, &w).unwrap();
            let back = scatter_from_impact(&v, b).unwrap();
            prop_assert!((back.vec() - w.vec()).norm() < 1e-10);
        }

        #[test]
        fn impact_parameter_rotation_equivariant(a in 0.0..2.0 * PI, d in 1e-3..(2.0 * PI - 1e-3), r in 0.0..2.0 * PI) {
            let v = Direction::from_angle(a);
            let w = Direction::from_angle(a + d);
            let rot = Rotation::from_angle(r);
            let b0 = impact_parameter(&v, &w).unwrap();
            let b1 = impact_parameter(&rot.apply(&v), &rot.apply(&w)).unwrap();
            prop_assert!((b0 - b1).abs() < 1e-10);
        }

        #[test]
        fn exit_parameter_is_time_reversed_impact(a in 0.0..2.0 * PI, d in 1e-3..(2.0 * PI - 1e-3)) {
            let v0 = Direction::from_angle(a);
            let v = Direction::from_angle(a + d);
            let s = exit_parameter(&v, &v0).unwrap();
            prop_assert_eq!(s, -impact_parameter(&(-v), &(-v0)).unwrap());
            prop_assert!((s - impact_parameter(&v0, &v).unwrap()).abs() < 1e-12);
        }
    }
}
