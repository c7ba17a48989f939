//! Checks that the long thin microscopic cylinder and its renormalized unit
//! cylinder meet the lattice together, and compares with the billiard.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lorentz::billiard::{free_path, random_generic_position, MicroState, ScattererConfig};
use lorentz::geometry::Direction;
use lorentz::lattice_space::renormalize;

fn main() -> lorentz::Result<()> {
    let rho = 0.01;
    let cfg = ScattererConfig::square(rho)?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut mismatch, mut agree, n) = (0, 0, 5000);
    for _ in 0..n {
        let q = random_generic_position(&cfg, &mut rng);
        let v = Direction::random(&mut rng);
        let xi = rng.random_range(0.1..3.0);
        let (long, renorm) = renormalize(&cfg, q, &v, rho, xi)?;
        mismatch += usize::from(long != renorm);
        let hit = free_path(&cfg, &MicroState::new(q, v), xi / rho)?.is_some();
        agree += usize::from(hit == renorm);
    }
    println!("identity mismatches: {mismatch} of {n}");
    println!("agreement with the billiard free path: {:.4}", agree as f64 / n as f64);
    Ok(())
}
