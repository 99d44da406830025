//! Imaginary powers: subordination, the singular kernel, and spectral vs kernel paths.

use gko::imagpow::{imagpow_kernel, imagpow_spectral, kernel_k, kernel_k_split, subordination_check};
use gko::semigroup::LineFunction;
use gko::Setting;

fn main() -> gko::Result<()> {
    for (lambda, sigma) in [(1.0, 0.5), (2.0, 1.0), (5.0, 3.0)] {
        println!("subordination at lambda = {lambda}, sigma = {sigma}: {:.2e}", subordination_check(lambda, sigma)?);
    }

    let s = Setting::rank_one(1.0)?;
    let k = kernel_k(&s, &[1.0], &[4.0], 1.0)?;
    let (near, far) = kernel_k_split(&s, &[1.0], &[4.0], 1.0)?;
    println!("K(1,4) = {} = {} + {}", k.value, near, far);

    let f = LineFunction::gaussian_bump(4.0, 0.4)?;
    let spectral = imagpow_spectral(&s, &f, 1.0, 0.5, 400)?;
    let kernel = imagpow_kernel(&s, &f, 1.0, 0.5, 1)?;
    println!("spectral {spectral:.8}\nkernel   {:.8}", kernel.value);
    Ok(())
}
