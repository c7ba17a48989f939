//! Estimates the time-t phase-space distribution of the flight process on
//! four sets, for the periodic and the exponential kernel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lorentz::flight::{lt_estimate, DirectionLaw, InitMode, InitialDistribution, PhaseSet};
use lorentz::geometry::Vec2;
use lorentz::kernel::{CollisionKernel, ExponentialKernel, PeriodicKernel};

fn main() -> lorentz::Result<()> {
    let dist = InitialDistribution::fixed(Vec2::zeros(), DirectionLaw::Sector { from: 0.0, to: 1.0 });
    let sets = PhaseSet::quadrants(Vec2::new(0.3, 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let kernels: [&dyn CollisionKernel; 2] = [&PeriodicKernel, &ExponentialKernel];
    for kernel in kernels {
        let est = lt_estimate(kernel, &dist, InitMode::Exact, 1.0, &sets, 50_000, &mut rng)?;
        let row: Vec<String> = est.iter().map(|e| format!("{:.4}±{:.4}", e.p, e.stderr)).collect();
        println!("{:<12} {}", kernel.name(), row.join("  "));
    }
    Ok(())
}
