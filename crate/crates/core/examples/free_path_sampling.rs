//! Samples macroscopic free paths from generic points and from a lattice
//! point and compares them with the limiting laws F and F₀.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lorentz::billiard::{sample_fpl, FplSource, ScattererConfig, DEFAULT_XI_MAX};
use lorentz::kernel::{CdfTable, FreePathLaw};
use lorentz::stats::ks_one_sample;

fn main() -> lorentz::Result<()> {
    let f = CdfTable::build(FreePathLaw::Generic, DEFAULT_XI_MAX, 0.02)?;
    let f0 = CdfTable::build(FreePathLaw::Center, DEFAULT_XI_MAX, 0.02)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    println!("rho     source   KS       p");
    for rho in [0.05, 0.02, 0.01] {
        let cfg = ScattererConfig::square(rho)?;
        for (name, source, law) in [("generic", FplSource::Generic, &f), ("center", FplSource::LatticeCenter, &f0)] {
            let s = sample_fpl(&cfg, source, 20_000, DEFAULT_XI_MAX, &mut rng);
            let r = ks_one_sample(&s.ecdf(), |x| law.cdf(x), 0.01)?;
            println!("{rho:<6}  {name:<7}  {:.5}  {:.3}", r.statistic, r.p_value);
        }
    }
    Ok(())
}
