//! The intertwining operator on monomials and a Dunkl-operator spot check.

use gko::intertwine::{monomial_factor, vk_apply};
use gko::spectral::dunkl_op;
use gko::Setting;

fn main() -> gko::Result<()> {
    let s = Setting::rank_one(0.8)?;
    let x = 1.7;
    for n in 0..6u32 {
        let v = vk_apply(&s, &[x], |e| e[0].powi(n as i32))?;
        println!("V(y^{n})({x}) = {v:.12}   gamma_n x^n = {:.12}", monomial_factor(0.8, n) * x.powi(n as i32));
    }

    // T V = V d/dx on y^3
    let lhs = dunkl_op(&s, &|y| vk_apply(&s, &[y], |e| e[0].powi(3)).unwrap(), x)?;
    let rhs = vk_apply(&s, &[x], |e| 3.0 * e[0] * e[0])?;
    println!("T(V y^3) = {lhs:.10}, V(3y^2) = {rhs:.10}");

    let plane = Setting::new(vec![0.5, 1.5])?;
    let mass = vk_apply(&plane, &[2.0, -1.0], |_| 1.0)?;
    println!("V 1 at (2, -1) = {mass:.15}");
    Ok(())
}
