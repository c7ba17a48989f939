//! Splits a Monte Carlo run into seeded blocks and shows that the merged
//! result does not depend on the worker count; then runs a configured
//! experiment without writing files.

use rand::Rng;

use lorentz::experiments::{run_one, ExperimentConfig};
use lorentz::parallel::{derive_seed, Dispatch};

fn main() -> lorentz::Result<()> {
    let seed = derive_seed(42, "example");
    let sums: Vec<Vec<f64>> = [1, 4]
        .iter()
        .map(|&w| Dispatch { workers: w, block: 1000 }.run(10_500, seed, |count, rng| Ok((0..count).map(|_| rng.random::<f64>()).sum())))
        .collect::<lorentz::Result<_>>()?;
    println!("blocks: {}, identical across worker counts: {}", sums[0].len(), sums[0] == sums[1]);

    let cfg = ExperimentConfig::from_toml("workers = 0\n")?;
    let out = run_one("kernel-tables", &cfg, 1)?;
    for c in &out.checks {
        println!("{} = {:.4} ({})", c.name, c.value, if c.pass { "pass" } else { "fail" });
    }
    Ok(())
}
