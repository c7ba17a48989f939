//! Free paths among Poisson-distributed scatterers against the exponential
//! law, next to the periodic case.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lorentz::billiard::{sample_fpl, FplSource, ScattererConfig, DEFAULT_XI_MAX};
use lorentz::stats::ks_one_sample;

fn main() -> lorentz::Result<()> {
    let exact = |x: f64| 1.0 - (-2.0 * x).exp();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for (name, cfg) in [("poisson", ScattererConfig::poisson(1.0, 0.01)?), ("square", ScattererConfig::square(0.01)?)] {
        let s = sample_fpl(&cfg, FplSource::Generic, 20_000, DEFAULT_XI_MAX, &mut rng);
        let r = ks_one_sample(&s.ecdf(), exact, 0.01)?;
        println!("{name:<8} KS to 1 - exp(-2 xi): {:.4} (p {:.3e})", r.statistic, r.p_value);
    }
    Ok(())
}
