//! The rank-one eigenbasis: Gram matrix, eigen-relation and a spectral expansion.

use num_complex::Complex64;

use gko::semigroup::LineFunction;
use gko::spectral::{apply_multiplier, delta_k1, eigenvalue, expand, gram_matrix, phi};
use gko::Setting;

fn main() -> gko::Result<()> {
    let s = Setting::rank_one(1.0)?;
    let g = gram_matrix(&s, 4)?;
    for row in &g {
        println!("{}", row.iter().map(|v| format!("{v:9.2e}")).collect::<Vec<_>>().join(" "));
    }

    let (l, m) = (3, 1);
    let mu = eigenvalue(&s, l, m)?;
    let f = |y: f64| phi(&s, l, m, y).unwrap();
    let x = 1.3;
    println!("-Delta phi = {:.8}, mu phi = {:.8}", -delta_k1(&s, &f, x)?, mu * f(x));

    let bump = LineFunction::gaussian_bump(1.0, 0.6)?;
    let e = expand(&s, &bump, 80)?;
    println!("truncation gap {:.2e}", e.truncation_gap());
    let back = apply_multiplier(&e, |_| Complex64::new(1.0, 0.0), 1.2)?;
    println!("reconstruction at 1.2: {:.8} vs {:.8}", back.re, bump.eval(1.2));
    Ok(())
}
