//! Estimates F₀ and F by counting Haar-random (affine) lattices that meet
//! the cylinder, against the kernel quadratures.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lorentz::kernel::{f0_quadrature, f_quadrature};
use lorentz::lattice_space::{cylinder_hit, estimate_curve_mc, sample_x1, Cylinder};

fn main() -> lorentz::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lat = sample_x1(&mut rng);
    println!("one lattice: rows {:?}, meets Z(0.5): {}", lat.reduced().basis, cylinder_hit(&lat, &Cylinder::new(0.5)?));

    let xis = [0.25, 0.5, 1.0, 2.0];
    let n = 200_000;
    let linear = estimate_curve_mc(&xis, n, false, &mut rng);
    let affine = estimate_curve_mc(&xis, n, true, &mut rng);
    println!("xi     F0_mc             F0       F_mc              F");
    for (k, &xi) in xis.iter().enumerate() {
        let (a, b) = (linear.estimates[k], affine.estimates[k]);
        println!(
            "{xi:<5}  {:.4} ± {:.4}   {:.4}   {:.4} ± {:.4}   {:.4}",
            a.p,
            a.stderr,
            f0_quadrature(xi)?,
            b.p,
            b.stderr,
            f_quadrature(xi)?
        );
    }
    println!("boundary hits: {}", linear.boundary + affine.boundary);
    Ok(())
}
