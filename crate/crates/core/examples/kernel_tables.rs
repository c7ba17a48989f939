//! Evaluates the transition kernel, the free-path laws and their
//! asymptotic constants, and draws from the transition sampler.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lorentz::kernel::{asymptotic_constants, f0_quadrature, f_quadrature, normalization, phi0, sample_xi_b, KernelArgs};

fn main() -> lorentz::Result<()> {
    println!("Phi0(1, 0.2, 0.3) = {:.6}", phi0(KernelArgs::new(1.0, 0.2, 0.3)?));
    for s in [-0.9, 0.0, 0.9] {
        println!("normalization at s = {s:+}: {:.10}", normalization(s)?);
    }

    println!("xi     F0        F");
    for xi in [0.1, 0.25, 0.5, 1.0, 2.0, 5.0] {
        println!("{xi:<5}  {:.6}  {:.6}", f0_quadrature(xi)?, f_quadrature(xi)?);
    }
    let k = asymptotic_constants(2)?;
    println!("F0 slope {:.6}, F slope {:.6}, F tail {:.6}", k.f0_slope, k.f_slope, k.f_tail);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 100_000;
    let mean_xi: f64 = (0..n).map(|_| sample_xi_b(0.5, &mut rng).map(|(xi, _)| xi)).sum::<lorentz::Result<f64>>()? / n as f64;
    println!("mean flight after exit parameter 0.5, {n} draws: {mean_xi:.4}");
    Ok(())
}
