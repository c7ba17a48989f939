//! Lazily realized Poisson scatterer fields.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::traverse::CellSource;
use crate::geometry::Vec2;

fn mix(mut x: u64) -> u64 {
    // splitmix64 finalizer
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn cell_seed(seed: u64, i: i64, j: i64) -> u64 {
    mix(mix(seed ^ mix(i as u64)) ^ (j as u64).rotate_left(32))
}

/// Draws a Poisson(`mean`) count by sequential inversion.
pub(crate) fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let u: f64 = rng.random();
    let mut k = 0usize;
    let mut p = (-mean).exp();
    let mut cum = p;
    while u > cum && k < 10_000 {
        k += 1;
        p *= mean / k as f64;
        cum += p;
    }
    k
}

/// One realization of a Poisson point process of disk centers, generated
/// cell by cell on the unit grid the first time a ray needs a cell.
///
/// Every cell's points are a deterministic function of `(seed, cell)`, so
/// a realization is reproducible regardless of the order in which cells
/// are visited. Disks containing `start` are thinned away.
#[derive(Debug, Clone)]
pub struct PoissonField {
    seed: u64,
    intensity: f64,
    rho: f64,
    start: Vec2,
    cells: HashMap<(i64, i64), Vec<Vec2>>,
}

impl PoissonField {
    pub fn new(seed: u64, intensity: f64, rho: f64, start: Vec2) -> Self {
        PoissonField {
            seed,
            intensity,
            rho,
            start,
            cells: HashMap::new(),
        }
    }

    /// Centers in the unit cell `[i, i+1) × [j, j+1)`, before thinning.
    pub fn cell(&mut self, i: i64, j: i64) -> &[Vec2] {
        let (seed, intensity) = (self.seed, self.intensity);
        self.cells.entry((i, j)).or_insert_with(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(seed, i, j));
            let n = poisson_count(&mut rng, intensity);
            (0..n)
                .map(|_| Vec2::new(i as f64 + rng.random::<f64>(), j as f64 + rng.random::<f64>()))
                .collect()
        })
    }

    /// Thinned centers within the axis-aligned box `[x0, x1] × [y0, y1]`.
    pub fn realize(&mut self, x0: f64, x1: f64, y0: f64, y1: f64) -> Vec<Vec2> {
        let mut out = Vec::new();
        let (rho, start) = (self.rho, self.start);
        for i in x0.floor() as i64..=x1.floor() as i64 {
            for j in y0.floor() as i64..=y1.floor() as i64 {
                out.extend(
                    self.cell(i, j)
                        .iter()
                        .filter(|c| c.x >= x0 && c.x <= x1 && c.y >= y0 && c.y <= y1)
                        .filter(|c| (**c - start).norm() >= rho),
                );
            }
        }
        out
    }
}

impl CellSource for PoissonField {
    fn to_cells(&self, p: Vec2) -> Vec2 {
        p
    }

    fn candidates(&mut self, i: i64, j: i64, out: &mut Vec<Vec2>) {
        // A disk reaching into cell (i, j) has its center at most ρ < 1 away.
        let (rho, start) = (self.rho, self.start);
        for di in -1..=1 {
            for dj in -1..=1 {
                out.extend(self.cell(i + di, j + dj).iter().filter(|c| (**c - start).norm() >= rho));
            }
        }
    }

    fn rho(&self) -> f64 {
        self.rho
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_are_reproducible_in_any_order() {
        let mut a = PoissonField::new(7, 3.0, 0.01, Vec2::zeros());
        let mut b = PoissonField::new(7, 3.0, 0.01, Vec2::zeros());
        let first = a.cell(2, -5).to_vec();
        b.cell(0, 0);
        b.cell(9, 9);
        assert_eq!(b.cell(2, -5), first.as_slice());
    }

    #[test]
    fn mean_count_matches_intensity() {
        let mut f = PoissonField::new(1, 2.5, 0.01, Vec2::new(1e6, 1e6));
        let pts = f.realize(0.0, 99.999, 0.0, 99.999);
        let n = pts.len() as f64 / 1e4;
        assert!((n - 2.5).abs() < 4.0 * (2.5f64 / 1e4).sqrt(), "{n}");
        let mut empty = PoissonField::new(1, 0.0, 0.01, Vec2::zeros());
        assert!(empty.realize(0.0, 10.0, 0.0, 10.0).is_empty());
    }

    #[test]
    fn start_disk_is_thinned() {
        let mut f = PoissonField::new(3, 50.0, 0.2, Vec2::new(0.5, 0.5));
        let pts = f.realize(0.0, 0.999, 0.0, 0.999);
        assert!(pts.iter().all(|c| (c - Vec2::new(0.5, 0.5)).norm() >= 0.2));
        assert!(pts.len() < f.cell(0, 0).len());
    }
}
