//! The heat kernel in real and complex time, its spectral sum, and the transform kernel.

use num_complex::Complex64;

use gko::semigroup::{bkernel, heat_kernel, heat_kernel_real};
use gko::spectral::heat_spectral_sum;
use gko::Setting;

fn main() -> gko::Result<()> {
    let s = Setting::rank_one(1.0)?;
    for t in [0.1, 1.0, 3.0] {
        println!("Lambda(0,0;{t}) = {:.10}  sinh^-2 = {:.10}", heat_kernel_real(&s, &[0.0], &[0.0], t)?, t.sinh().powi(-2));
    }
    let c = s.norm_constant()?;
    let (x, y, t) = (1.2, -0.4, 0.7);
    println!(
        "c Lambda = {:.12}, spectral sum = {:.12}",
        c * heat_kernel_real(&s, &[x], &[y], t)?,
        heat_spectral_sum(&s, x, y, t, 60)?
    );
    let z = heat_kernel(&s, &[x], &[y], Complex64::new(0.5, 1.0))?;
    println!("Lambda at z = 0.5 + i: {} (error {:.1e})", z.value, z.est_error);
    for y in [0.0, 2.0, 10.0] {
        println!("B(1.5, {y}) = {:.10}", bkernel(&s, &[1.5], &[y])?);
    }
    Ok(())
}
