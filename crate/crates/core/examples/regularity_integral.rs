//! The regularity integral of the imaginary-power kernel over a scale family.

use gko::imagpow::hormander_integral;
use gko::Setting;

fn main() -> gko::Result<()> {
    let s = Setting::rank_one(1.0)?;
    let sigma = 1.0;
    for scale in [0.25f64, 1.0, 4.0] {
        let (y, y0) = (4.0 * scale, 4.41 * scale);
        let v = hormander_integral(&s, y, y0, sigma, (16.0 * y0).max(40.0), 1)?;
        println!(
            "y = {y:5.2}, y0 = {y0:5.2}: {:.6} + tail {:.1e} ({} nodes)",
            v.value, v.tail_bound, v.nodes
        );
    }
    Ok(())
}
