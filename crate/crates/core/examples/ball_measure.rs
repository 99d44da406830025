//! Ball measures by two routes, the scaling law and doubling.

use gko::measure::{ball_measure_euclidean, ball_measure_origin, ball_measure_polar, doubling_ratio, doubling_sup, scaling_check};
use gko::Setting;

fn main() -> gko::Result<()> {
    let s = Setting::new(vec![0.5, 1.2])?;
    let x = [1.5, -0.7];
    for r in [0.2, 1.0, 3.0] {
        let polar = ball_measure_polar(&s, &x, r)?;
        let euclid = ball_measure_euclidean(&s, &x, r)?;
        println!("r = {r}: polar {:.12}  euclidean {:.12}", polar.value, euclid.value);
    }
    println!("m(B(0,1)) closed form {:.12}", ball_measure_origin(&s, 1.0)?);
    println!("scaling defect at t = 9: {:.2e}", scaling_check(&s, &x, 0.8, 9.0)?);

    let line = Setting::rank_one(1.0)?;
    println!("doubling ratio at the origin: {}", doubling_ratio(&line, &[0.0], 1.0)?);
    println!("doubling sup over a grid: {:.4}", doubling_sup(&line, &[1.0], 10.0, 0.05, 10.0, 12)?);
    Ok(())
}
