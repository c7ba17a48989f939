//! Particle estimates of `P(Ξ(t) ∈ D)` and the semigroup comparison.

use std::f64::consts::PI;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{init_state, state_at, stationary_extension, InitMode, InitialDistribution};
use crate::error::{Error, Result};
use crate::geometry::{Direction, Vec2};
use crate::kernel::{CollisionKernel, ExponentialKernel};
use crate::stats::{ks_two_sample, EmpiricalCdf, Estimate, TestReport};

/// A rectangle in position times an angular interval `[a0, a1)` of the
/// velocity, with angles in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSet {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub angle: [f64; 2],
}

impl PhaseSet {
    pub fn full() -> Self {
        PhaseSet {
            x: [f64::NEG_INFINITY, f64::INFINITY],
            y: [f64::NEG_INFINITY, f64::INFINITY],
            angle: [0.0, 2.0 * PI],
        }
    }

    pub fn contains_position(&self, q: Vec2) -> bool {
        q.x >= self.x[0] && q.x < self.x[1] && q.y >= self.y[0] && q.y < self.y[1]
    }

    pub fn contains(&self, q: Vec2, v: &Direction) -> bool {
        let a = v.angle();
        self.contains_position(q) && a >= self.angle[0] && a < self.angle[1]
    }

    /// The four sets `{±x half-plane} × {velocity in upper/lower half}`
    /// relative to `center`; together they cover phase space.
    pub fn quadrants(center: Vec2) -> Vec<PhaseSet> {
        let (l, r) = ([f64::NEG_INFINITY, center.x], [center.x, f64::INFINITY]);
        let all_y = [f64::NEG_INFINITY, f64::INFINITY];
        let (up, down) = ([0.0, PI], [PI, 2.0 * PI]);
        vec![
            PhaseSet { x: l, y: all_y, angle: up },
            PhaseSet { x: l, y: all_y, angle: down },
            PhaseSet { x: r, y: all_y, angle: up },
            PhaseSet { x: r, y: all_y, angle: down },
        ]
    }
}

/// Estimates `P_Λ(Ξ(t) ∈ D)` for each of `sets` from `n_particles`
/// independent paths.
pub fn lt_estimate(
    kernel: &dyn CollisionKernel,
    dist: &InitialDistribution,
    mode: InitMode,
    t: f64,
    sets: &[PhaseSet],
    n_particles: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<Estimate>> {
    let mut hits = vec![0usize; sets.len()];
    for _ in 0..n_particles {
        let start = init_state(kernel, dist, mode, rng)?;
        let s = state_at(kernel, start, t, rng)?;
        for (h, set) in hits.iter_mut().zip(sets) {
            *h += usize::from(set.contains(s.q, &s.v));
        }
    }
    Ok(hits.into_iter().map(|h| Estimate::from_hits(h, n_particles)).collect())
}

/// KS comparison of the full process against its projected-and-restarted
/// version for one kernel.
#[derive(Debug, Clone, Serialize)]
pub struct Divergence {
    pub kernel: String,
    /// Time to the next collision at the final instant.
    pub free_time: TestReport,
    /// `‖Q(final) − Q(0)‖`.
    pub displacement: TestReport,
}

impl Divergence {
    pub fn max_statistic(&self) -> f64 {
        self.free_time.statistic.max(self.displacement.statistic)
    }

    pub fn significant(&self) -> bool {
        !self.free_time.pass || !self.displacement.pass
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SemigroupReport {
    pub s: f64,
    pub t: f64,
    pub n: usize,
    pub kernel: Divergence,
    pub control: Divergence,
    /// Larger of the control's observed KS distance and the mean null KS
    /// distance at this sample size.
    pub noise_floor: f64,
    /// `kernel.max_statistic() / noise_floor`.
    pub ratio: f64,
}

/// Mean of the two-sample KS distance under the null, `E sup|B| · √(2/n)`,
/// with `E sup|B| = √(π/2) ln 2` for the Brownian bridge.
pub fn null_ks_mean(n: usize, m: usize) -> f64 {
    (PI / 2.0).sqrt() * std::f64::consts::LN_2 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Observables of the two ensembles: `A` runs straight to `s + t`; `B` runs
/// to `s`, keeps `(Q, V)`, redraws `(ξ, V₊)` from the stationary law and
/// runs `t` further.
#[derive(Debug, Clone, Default)]
pub struct Ensembles {
    pub free_a: Vec<f64>,
    pub free_b: Vec<f64>,
    pub disp_a: Vec<f64>,
    pub disp_b: Vec<f64>,
}

impl Ensembles {
    pub fn extend(&mut self, other: Ensembles) {
        self.free_a.extend(other.free_a);
        self.free_b.extend(other.free_b);
        self.disp_a.extend(other.disp_a);
        self.disp_b.extend(other.disp_b);
    }
}

/// `n` particles of each ensemble.
pub fn semigroup_ensembles(
    kernel: &dyn CollisionKernel,
    dist: &InitialDistribution,
    s: f64,
    t: f64,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<Ensembles> {
    let mut e = Ensembles::default();
    for _ in 0..n {
        let start = init_state(kernel, dist, InitMode::Exact, rng)?;
        let a = state_at(kernel, start, s + t, rng)?;
        e.free_a.push(a.xi);
        e.disp_a.push((a.q - start.q).norm());
        let start = init_state(kernel, dist, InitMode::Exact, rng)?;
        let mid = state_at(kernel, start, s, rng)?;
        let restart = stationary_extension(kernel, mid.q, mid.v, rng)?;
        let b = state_at(kernel, restart, t, rng)?;
        e.free_b.push(b.xi);
        e.disp_b.push((b.q - start.q).norm());
    }
    Ok(e)
}

impl Divergence {
    pub fn from_ensembles(kernel: &str, e: &Ensembles, alpha: f64) -> Result<Self> {
        let cdf = |v: &Vec<f64>| EmpiricalCdf::new(v.clone());
        Ok(Divergence {
            kernel: kernel.to_string(),
            free_time: ks_two_sample(&cdf(&e.free_a), &cdf(&e.free_b), alpha)?,
            displacement: ks_two_sample(&cdf(&e.disp_a), &cdf(&e.disp_b), alpha)?,
        })
    }
}

impl SemigroupReport {
    pub fn new(s: f64, t: f64, kernel: Divergence, control: Divergence) -> Self {
        let n = kernel.free_time.n;
        let m = control.free_time.n;
        let noise_floor = control.max_statistic().max(null_ks_mean(m, m));
        SemigroupReport {
            s,
            t,
            n,
            ratio: kernel.max_statistic() / noise_floor,
            kernel,
            control,
            noise_floor,
        }
    }
}

fn check_times(s: f64, t: f64) -> Result<()> {
    if s > 0.0 && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!("semigroup times must be positive, got s = {s}, t = {t}")))
    }
}

/// Compares `L^{s+t}` with `L^t ∘ L^s` for `kernel` and for the
/// exponential-kernel control, `n` particles per ensemble.
///
/// Composition is realized by projecting the state at time `s` to `(Q, V)`
/// and re-initializing `(ξ, V₊)` from the stationary law.
pub fn semigroup_compare(
    kernel: &dyn CollisionKernel,
    dist: &InitialDistribution,
    s: f64,
    t: f64,
    n: usize,
    alpha: f64,
    rng: &mut dyn RngCore,
) -> Result<SemigroupReport> {
    check_times(s, t)?;
    let k = semigroup_ensembles(kernel, dist, s, t, n, rng)?;
    let c = semigroup_ensembles(&ExponentialKernel, dist, s, t, n, rng)?;
    Ok(SemigroupReport::new(
        s,
        t,
        Divergence::from_ensembles(kernel.name(), &k, alpha)?,
        Divergence::from_ensembles(ExponentialKernel.name(), &c, alpha)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flight::DirectionLaw;
    use crate::kernel::PeriodicKernel;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn time_zero_recovers_initial_measure() {
        let dist = InitialDistribution::UniformBox {
            min: [0.0, 0.0],
            max: [2.0, 1.0],
            directions: DirectionLaw::Uniform,
        };
        let sets = [
            PhaseSet { x: [0.0, 0.5], y: [0.0, 1.0], angle: [0.0, PI] },
            PhaseSet { x: [1.0, 3.0], y: [0.5, 2.0], angle: [0.5, 2.0] },
            PhaseSet::full(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let est = lt_estimate(&PeriodicKernel, &dist, InitMode::Exact, 0.0, &sets, 20_000, &mut rng).unwrap();
        for (e, set) in est.iter().zip(&sets) {
            let exact = dist.measure(set);
            assert!((e.p - exact).abs() < 4.0 * e.stderr.max(1e-9), "{e:?} vs {exact}");
        }
        assert_eq!(est[2].p, 1.0);
    }

    #[test]
    fn quadrants_partition() {
        let sets = PhaseSet::quadrants(Vec2::new(0.3, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let dist = InitialDistribution::fixed(Vec2::zeros(), DirectionLaw::Uniform);
        let est = lt_estimate(&PeriodicKernel, &dist, InitMode::Exact, 1.0, &sets, 5_000, &mut rng).unwrap();
        assert_abs_diff_eq!(est.iter().map(|e| e.p).sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn z_distance() {
        let a = Estimate::from_hits(50, 100);
        assert_eq!(a.z_distance(&a), 0.0);
        let b = Estimate { p: 0.6, stderr: 0.0, n: 1 };
        assert_abs_diff_eq!(a.z_distance(&b), 0.1 / 0.05, epsilon = 1e-12);
    }

    #[test]
    fn control_shows_no_divergence() {
        let dist = InitialDistribution::fixed(Vec2::zeros(), DirectionLaw::Uniform);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = semigroup_ensembles(&ExponentialKernel, &dist, 1.0, 1.0, 5_000, &mut rng).unwrap();
        let d = Divergence::from_ensembles("exponential", &e, 0.001).unwrap();
        assert!(!d.significant(), "{d:?}");
        assert!(semigroup_compare(&PeriodicKernel, &dist, 0.0, 1.0, 10, 0.01, &mut rng).is_err());
    }

    #[test]
    fn null_ks_scale() {
        assert_abs_diff_eq!(null_ks_mean(100_000, 100_000), 0.003885, epsilon = 1e-5);
    }
}
