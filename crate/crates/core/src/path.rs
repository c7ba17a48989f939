//! Piecewise-linear unit-speed paths `Q₀ + S₁ + … + Sₙ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Direction, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathChain {
    pub origin: Vec2,
    pub segments: Vec<Vec2>,
}

impl PathChain {
    pub fn new(origin: Vec2) -> Self {
        PathChain {
            origin,
            segments: Vec::new(),
        }
    }

    pub fn push(&mut self, segment: Vec2) {
        self.segments.push(segment);
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Collision times `T₀ = 0, T₁, …, Tₙ`.
    pub fn times(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        let mut t = 0.0;
        out.push(t);
        for s in &self.segments {
            t += s.norm();
            out.push(t);
        }
        out
    }

    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|s| s.norm()).sum()
    }

    /// Positions `Q₀, Q₁, …, Qₙ` at the collision times.
    pub fn vertices(&self) -> Vec<Vec2> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        let mut q = self.origin;
        out.push(q);
        for s in &self.segments {
            q += s;
            out.push(q);
        }
        out
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.segments.iter().map(|s| Direction::from_vec(*s)).collect()
    }

    /// Lengths and positions multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> PathChain {
        PathChain {
            origin: self.origin * factor,
            segments: self.segments.iter().map(|s| s * factor).collect(),
        }
    }

    /// Position and velocity of the unit-speed traversal at each of the
    /// nondecreasing `times`. Right-continuous: at `t = Tₙ` the velocity is
    /// already `Ŝₙ₊₁`, so `t` must stay below the final collision time.
    pub fn evaluate_at_times(&self, times: &[f64]) -> Result<Vec<(Vec2, Direction)>> {
        let mut out = Vec::with_capacity(times.len());
        let mut idx = 0usize;
        let mut start = 0.0;
        let mut q = self.origin;
        let mut last = f64::NEG_INFINITY;
        for &t in times {
            if !(t >= last) || t < 0.0 {
                return Err(Error::InvalidParam(format!("evaluation times must be nonnegative and nondecreasing, got {t} after {last}")));
            }
            last = t;
            loop {
                let Some(seg) = self.segments.get(idx) else {
                    return Err(Error::ChainTooShort {
                        available: start,
                        required: t - start,
                    });
                };
                let len = seg.norm();
                if t < start + len {
                    let dir = Direction::from_vec(*seg);
                    out.push((q + (t - start) * dir.vec(), dir));
                    break;
                }
                start += len;
                q += seg;
                idx += 1;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn sample_chain() -> PathChain {
        PathChain {
            origin: Vec2::new(1.0, 2.0),
            segments: vec![Vec2::new(3.0, 0.0), Vec2::new(0.0, 2.0), Vec2::new(-1.0, -1.0)],
        }
    }

    #[test]
    fn times_and_vertices() {
        let c = sample_chain();
        let t = c.times();
        assert_eq!(t[..3], [0.0, 3.0, 5.0]);
        assert_abs_diff_eq!(t[3], 5.0 + 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(c.vertices()[2], Vec2::new(4.0, 4.0));
    }

    #[test]
    fn evaluation_conventions() {
        let c = sample_chain();
        let r = c.evaluate_at_times(&[0.0, 1.5, 3.0, 4.0]).unwrap();
        assert_eq!(r[0].0, c.origin);
        assert_eq!(r[0].1, Direction::new(1.0, 0.0));
        assert_eq!(r[1].0, Vec2::new(2.5, 2.0));
        // At T₁ the particle sits at Q₁ and already moves along Ŝ₂.
        assert_eq!(r[2].0, Vec2::new(4.0, 2.0));
        assert_eq!(r[2].1, Direction::new(0.0, 1.0));
        assert_eq!(r[3].0, Vec2::new(4.0, 3.0));
    }

    #[test]
    fn too_short_chain_reports_extension() {
        let c = sample_chain();
        match c.evaluate_at_times(&[10.0]) {
            Err(Error::ChainTooShort { available, required }) => {
                assert_abs_diff_eq!(available, c.total_time(), epsilon = 1e-12);
                assert_abs_diff_eq!(required, 10.0 - c.total_time(), epsilon = 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(c.evaluate_at_times(&[2.0, 1.0]).is_err());
    }

    #[test]
    fn scaling_roundtrip() {
        let c = sample_chain();
        assert_eq!(c.scaled(1.0), c);
        let back = c.scaled(0.1).scaled(10.0);
        for (a, b) in back.segments.iter().zip(&c.segments) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
        }
    }

    proptest! {
        #[test]
        fn unit_speed(ts in proptest::collection::vec(0.0..6.4f64, 2..20)) {
            let c = sample_chain();
            let mut ts = ts;
            ts.sort_by(f64::total_cmp);
            let r = c.evaluate_at_times(&ts).unwrap();
            for i in 1..ts.len() {
                prop_assert!((r[i].0 - r[i - 1].0).norm() <= ts[i] - ts[i - 1] + 1e-12);
            }
        }
    }
}
