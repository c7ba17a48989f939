//! Generates paths of the limiting random flight process and evaluates one
//! of them at fixed times.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lorentz::flight::{generate_chain, init_state, write_chains_csv, DirectionLaw, InitMode, InitialDistribution};
use lorentz::geometry::Vec2;
use lorentz::kernel::PeriodicKernel;

fn main() -> lorentz::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let dist = InitialDistribution::fixed(Vec2::zeros(), DirectionLaw::Uniform);
    let chains = (0..3)
        .map(|_| {
            let start = init_state(&PeriodicKernel, &dist, InitMode::Exact, &mut rng)?;
            generate_chain(&PeriodicKernel, start, 8, &mut rng)
        })
        .collect::<lorentz::Result<Vec<_>>>()?;

    for (t, (q, v)) in [0.5, 1.0, 2.0].iter().zip(chains[0].evaluate_at_times(&[0.5, 1.0, 2.0])?) {
        println!("t = {t}: Q = ({:+.4}, {:+.4}), V angle {:.4}", q.x, q.y, v.angle());
    }
    write_chains_csv(std::io::stdout().lock(), &chains)
}
