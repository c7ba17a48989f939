//! Compares the flight process run for s + t with the process run for s,
//! projected to (Q, V), restarted and run for t.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lorentz::flight::{semigroup_compare, DirectionLaw, InitialDistribution};
use lorentz::geometry::Vec2;
use lorentz::kernel::PeriodicKernel;

fn main() -> lorentz::Result<()> {
    let dist = InitialDistribution::fixed(Vec2::zeros(), DirectionLaw::Uniform);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let rep = semigroup_compare(&PeriodicKernel, &dist, 1.0, 1.0, 30_000, 0.01, &mut rng)?;
    for d in [&rep.kernel, &rep.control] {
        println!(
            "{:<12} free time KS {:.4} (p {:.2e}), displacement KS {:.4} (p {:.2e})",
            d.kernel, d.free_time.statistic, d.free_time.p_value, d.displacement.statistic, d.displacement.p_value
        );
    }
    println!("noise floor {:.4}, ratio {:.2}", rep.noise_floor, rep.ratio);
    Ok(())
}
