//! Ray traversal of unit cells with per-cell candidate scatterers.

use crate::geometry::{Direction, Vec2};

use super::CollisionRecord;

/// Anything that can list the scatterer centers whose disks may intersect
/// the part of a ray inside a given cell of its cell grid.
pub(crate) trait CellSource {
    /// Linear map from physical to cell coordinates (cells are unit squares).
    fn to_cells(&self, p: Vec2) -> Vec2;
    fn candidates(&mut self, i: i64, j: i64, out: &mut Vec<Vec2>);
    fn rho(&self) -> f64;
}

/// Entry time of the ray `q + t v` into the disk `|x − c| < ρ`, if any.
/// Tangential contact is a miss; a start inside the disk within rounding
/// (moving inward) counts as an immediate hit.
#[inline]
pub(crate) fn ray_disk(q: Vec2, v: &Direction, c: Vec2, rho: f64) -> Option<f64> {
    let d = c - q;
    let along = d.dot(&v.vec());
    if along <= 0.0 {
        return None;
    }
    let perp2 = d.norm_squared() - along * along;
    let r2 = rho * rho;
    if perp2 >= r2 {
        return None;
    }
    let t = along - (r2 - perp2).sqrt();
    if t > -1e-9 {
        Some(t.max(0.0))
    } else {
        None
    }
}

pub(crate) fn record(q: Vec2, v: &Direction, c: Vec2, t: f64, rho: f64) -> CollisionRecord {
    let hit = q + t * v.vec();
    CollisionRecord {
        tau: t,
        center: c,
        hit_point: hit,
        b_in: ((q - c).dot(&v.perp()) / rho).clamp(-1.0, 1.0),
    }
}

/// First scatterer hit by `q + t v` with `0 ≤ t ≤ t_max`, skipping the
/// centers in `exclude`.
pub(crate) fn trace<S: CellSource>(src: &mut S, q: Vec2, v: &Direction, t_max: f64, exclude: &[Vec2]) -> Option<CollisionRecord> {
    let u0 = src.to_cells(q);
    let du = src.to_cells(v.vec());
    let rho = src.rho();
    let mut cell = [u0.x.floor() as i64, u0.y.floor() as i64];
    let mut step = [0i64; 2];
    let mut t_next = [f64::INFINITY; 2];
    let mut t_delta = [f64::INFINITY; 2];
    for k in 0..2 {
        if du[k] > 0.0 {
            step[k] = 1;
            t_next[k] = ((cell[k] + 1) as f64 - u0[k]) / du[k];
            t_delta[k] = 1.0 / du[k];
        } else if du[k] < 0.0 {
            step[k] = -1;
            t_next[k] = (cell[k] as f64 - u0[k]) / du[k];
            t_delta[k] = -1.0 / du[k];
        }
    }
    let mut best: Option<(f64, Vec2)> = None;
    let mut buf = Vec::with_capacity(16);
    loop {
        buf.clear();
        src.candidates(cell[0], cell[1], &mut buf);
        for &c in &buf {
            if exclude.contains(&c) {
                continue;
            }
            if let Some(t) = ray_disk(q, v, c, rho) {
                if t <= t_max && best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, c));
                }
            }
        }
        let t_out = t_next[0].min(t_next[1]);
        if let Some((bt, c)) = best {
            if bt <= t_out {
                return Some(record(q, v, c, bt, rho));
            }
        }
        if t_out > t_max {
            return best.map(|(bt, c)| record(q, v, c, bt, rho));
        }
        let k = if t_next[0] <= t_next[1] { 0 } else { 1 };
        cell[k] += step[k];
        t_next[k] += t_delta[k];
    }
}
