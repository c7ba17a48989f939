//! Traces a particle through square-lattice scatterers and prints each
//! collision, then the macroscopic path in CSV form.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lorentz::billiard::{random_generic_position, to_macroscopic, MicroState, Scene, ScattererConfig};
use lorentz::geometry::Direction;

fn main() -> lorentz::Result<()> {
    let rho = 0.05;
    let cfg = ScattererConfig::square(rho)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = MicroState::new(random_generic_position(&cfg, &mut rng), Direction::random(&mut rng));
    let traj = Scene::new(&cfg, 0, start.q).trajectory(&start, 10, 1e4);

    println!("collision  tau        center          b_in");
    for (k, r) in traj.records.iter().enumerate() {
        println!("{k:>9}  {:<9.4}  ({:>4}, {:>4})  {:+.4}", r.tau, r.center.x, r.center.y, r.b_in);
    }
    let macro_path = to_macroscopic(&traj.chain, rho);
    println!("macroscopic flight times: {:?}", macro_path.times());

    traj.write_csv(std::io::stdout().lock())
}
