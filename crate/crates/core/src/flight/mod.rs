//! The limiting random flight process `Ξ(t)`.
//!
//! A realization is a memory-two chain of path segments: each collision
//! produces an exit parameter from the last two directions, the kernel
//! draws the next flight time and impact parameter from it, and the impact
//! parameter fixes the direction after the following collision.

mod estimate;

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

pub use estimate::{lt_estimate, null_ks_mean, semigroup_compare, semigroup_ensembles, Divergence, Ensembles, PhaseSet, SemigroupReport};
pub use crate::stats::Estimate;

use crate::error::{Error, Result};
use crate::geometry::{exit_parameter, scatter_from_impact, Direction, Rotation, Vec2};
use crate::kernel::{CollisionKernel, ExponentialKernel};
use crate::path::PathChain;

/// A point `(Q, V, ξ, V₊)` of the extended phase space: position, velocity,
/// time to the next collision and velocity after it. Macroscopic units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtendedState {
    pub q: Vec2,
    pub v: Direction,
    pub xi: f64,
    pub v_plus: Direction,
}

impl ExtendedState {
    pub fn new(q: Vec2, v: Direction, xi: f64, v_plus: Direction) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::InvalidParam(format!("time to next collision must be positive, got {xi}")));
        }
        if v == v_plus {
            return Err(Error::NoDeflection);
        }
        Ok(ExtendedState { q, v, xi, v_plus })
    }

    /// Position of the next collision.
    pub fn next_collision(&self) -> Vec2 {
        self.q + self.xi * self.v.vec()
    }

    /// The same state seen through a rotation about `Q`.
    fn rotated(&self, r: &Rotation) -> Self {
        ExtendedState {
            v: r.apply(&self.v),
            v_plus: r.apply(&self.v_plus),
            ..*self
        }
    }
}

/// Absolutely continuous law of the initial direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DirectionLaw {
    Uniform,
    /// Angle uniform on `[from, to)` (radians, `from < to ≤ from + 2π`).
    Sector { from: f64, to: f64 },
}

impl DirectionLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DirectionLaw::Uniform => Ok(()),
            DirectionLaw::Sector { from, to } if from < to && to <= from + 2.0 * PI => Ok(()),
            DirectionLaw::Sector { from, to } => Err(Error::InvalidParam(format!("empty or overlapping sector [{from}, {to})"))),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Direction {
        match *self {
            DirectionLaw::Uniform => Direction::random(rng),
            DirectionLaw::Sector { from, to } => Direction::from_angle(from + (to - from) * rng.random::<f64>()),
        }
    }

    /// Probability that the angle in `[0, 2π)` falls in `[a0, a1]`.
    pub fn measure(&self, a0: f64, a1: f64) -> f64 {
        let (from, to) = match *self {
            DirectionLaw::Uniform => (0.0, 2.0 * PI),
            DirectionLaw::Sector { from, to } => (from, to),
        };
        // Unroll the sector onto [0, 2π) as at most two intervals.
        let start = from.rem_euclid(2.0 * PI);
        let end = start + (to - from);
        let parts = [(start, end.min(2.0 * PI)), (0.0, (end - 2.0 * PI).max(0.0))];
        let overlap: f64 = parts.iter().map(|&(l, u)| (u.min(a1) - l.max(a0)).max(0.0)).sum();
        overlap / (to - from)
    }
}

/// Initial law `Λ` of `(Q, V)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialDistribution {
    /// `Q` uniform in the box `[min, max]`.
    UniformBox {
        min: [f64; 2],
        max: [f64; 2],
        directions: DirectionLaw,
    },
    FixedPosition { q: [f64; 2], directions: DirectionLaw },
}

impl InitialDistribution {
    pub fn fixed(q: Vec2, directions: DirectionLaw) -> Self {
        InitialDistribution::FixedPosition { q: [q.x, q.y], directions }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InitialDistribution::UniformBox { min, max, directions } => {
                if !(min[0] < max[0] && min[1] < max[1]) {
                    return Err(Error::InvalidParam(format!("empty box {min:?}..{max:?}")));
                }
                directions.validate()
            }
            InitialDistribution::FixedPosition { directions, .. } => directions.validate(),
        }
    }

    pub fn directions(&self) -> &DirectionLaw {
        match self {
            InitialDistribution::UniformBox { directions, .. } | InitialDistribution::FixedPosition { directions, .. } => directions,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec2, Direction) {
        match self {
            InitialDistribution::UniformBox { min, max, directions } => {
                let q = Vec2::new(
                    min[0] + (max[0] - min[0]) * rng.random::<f64>(),
                    min[1] + (max[1] - min[1]) * rng.random::<f64>(),
                );
                (q, directions.sample(rng))
            }
            InitialDistribution::FixedPosition { q, directions } => (Vec2::new(q[0], q[1]), directions.sample(rng)),
        }
    }

    /// `Λ(D)` for a rectangle-times-sector set.
    pub fn measure(&self, set: &PhaseSet) -> f64 {
        let spatial = match self {
            InitialDistribution::UniformBox { min, max, .. } => {
                let fx = ((max[0].min(set.x[1]) - min[0].max(set.x[0])).max(0.0)) / (max[0] - min[0]);
                let fy = ((max[1].min(set.y[1]) - min[1].max(set.y[0])).max(0.0)) / (max[1] - min[1]);
                fx * fy
            }
            InitialDistribution::FixedPosition { q, .. } => f64::from(set.contains_position(Vec2::new(q[0], q[1])) as u8),
        };
        spatial * self.directions().measure(set.angle[0], set.angle[1])
    }
}

/// How `init_state` obtains `(ξ, V₊)` given `(Q, V)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    /// Rejection sampling from the stationary law.
    Exact,
    /// Run the chain from an exponential-kernel start for `n` mean free
    /// times and read off the state at that instant.
    BurnIn(usize),
}

/// Draws `(ξ, V₊)` from the stationary law for a particle moving along `v`.
pub fn stationary_extension(kernel: &dyn CollisionKernel, q: Vec2, v: Direction, rng: &mut dyn RngCore) -> Result<ExtendedState> {
    let (xi, b) = kernel.sample_stationary(rng)?;
    let v_plus = scatter_from_impact(&v, b)?;
    ExtendedState::new(q, v, xi, v_plus)
}

/// Initial extended state with `(Q, V) ~ Λ` and `(ξ, V₊)` stationary given `V`.
///
/// In burn-in mode the chain is run for `n · mean_free_time` from an
/// exponential-kernel start; the state at that fixed time is then rotated so
/// its velocity is `V`. Reading the state at a fixed time (rather than just
/// after a collision) is what makes the flight-time law the time-stationary
/// one.
pub fn init_state(kernel: &dyn CollisionKernel, dist: &InitialDistribution, mode: InitMode, rng: &mut dyn RngCore) -> Result<ExtendedState> {
    let (q, v) = dist.sample(rng);
    match mode {
        InitMode::Exact => stationary_extension(kernel, q, v, rng),
        InitMode::BurnIn(n) => {
            let start = stationary_extension(&ExponentialKernel, Vec2::zeros(), Direction::E1, rng)?;
            let burned = state_at(kernel, start, n as f64 * kernel.mean_free_time(), rng)?;
            let r = Rotation::from_angle(v.angle() - burned.v.angle());
            let mut s = burned.rotated(&r);
            s.q = q;
            s.v = v;
            Ok(s)
        }
    }
}

/// Advances through the collision at `cur.next_collision()`.
///
/// The exit parameter of that collision is computed from `(V₊, V)`, so the
/// direction before `cur.v` is not needed: the pair `(V, V₊)` already carries
/// the two-segment memory.
pub fn step(kernel: &dyn CollisionKernel, cur: &ExtendedState, rng: &mut dyn RngCore) -> Result<ExtendedState> {
    let v = cur.v_plus;
    let s = exit_parameter(&v, &cur.v)?.clamp(-1.0, 1.0);
    let (xi, b) = kernel.sample_transition(s, rng)?;
    let v_plus = scatter_from_impact(&v, b)?;
    ExtendedState::new(cur.next_collision(), v, xi, v_plus)
}

/// Extended state at time `t` after `start` (right-continuous at
/// collisions).
pub fn state_at(kernel: &dyn CollisionKernel, start: ExtendedState, t: f64, rng: &mut dyn RngCore) -> Result<ExtendedState> {
    let mut cur = start;
    let mut left = t;
    while left >= cur.xi {
        left -= cur.xi;
        cur = step(kernel, &cur, rng)?;
    }
    Ok(ExtendedState {
        q: cur.q + left * cur.v.vec(),
        xi: cur.xi - left,
        ..cur
    })
}

/// The first `n` segments of the path starting at `start`.
pub fn generate_chain(kernel: &dyn CollisionKernel, start: ExtendedState, n: usize, rng: &mut dyn RngCore) -> Result<PathChain> {
    let mut chain = PathChain::new(start.q);
    let mut cur = start;
    for k in 0..n {
        chain.push(cur.xi * cur.v.vec());
        if k + 1 < n {
            cur = step(kernel, &cur, rng)?;
        }
    }
    Ok(chain)
}

/// Segments up to and including the one in progress at time `t`, so that
/// `T_n > t`. Consumes random numbers exactly as `state_at(.., t, ..)` does.
pub fn chain_until(kernel: &dyn CollisionKernel, start: ExtendedState, t: f64, rng: &mut dyn RngCore) -> Result<PathChain> {
    let mut chain = PathChain::new(start.q);
    let mut cur = start;
    let mut left = t;
    chain.push(cur.xi * cur.v.vec());
    while left >= cur.xi {
        left -= cur.xi;
        cur = step(kernel, &cur, rng)?;
        chain.push(cur.xi * cur.v.vec());
    }
    Ok(chain)
}

/// Chain CSV: `path_id, j, Sx, Sy, T_j`, with `j = 0` the origin row.
pub fn write_chains_csv<W: Write>(mut w: W, chains: &[PathChain]) -> Result<()> {
    writeln!(w, "path_id,j,Sx,Sy,T_j")?;
    for (id, c) in chains.iter().enumerate() {
        writeln!(w, "{id},0,{},{},0", c.origin.x, c.origin.y)?;
        let mut t = 0.0;
        for (j, s) in c.segments.iter().enumerate() {
            t += s.norm();
            writeln!(w, "{id},{},{},{},{t}", j + 1, s.x, s.y)?;
        }
    }
    Ok(())
}
