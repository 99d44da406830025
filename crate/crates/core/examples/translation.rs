//! Generalized translations of radial profiles.

use gko::translate::{mass_check, support_check, translate_exponential, translate_radial, RadialProfile};
use gko::Setting;

fn main() -> gko::Result<()> {
    let s = Setting::new(vec![0.6, 1.1])?;
    let (x, y) = ([1.0, 2.0], [-0.5, 1.0]);
    let f = RadialProfile::exponential(0.8)?;
    println!("radial formula      {:.12}", translate_radial(&s, &f, &y, &x)?);
    println!("exponential formula {:.12}", translate_exponential(&s, 0.8, &x, &y)?);

    let line = Setting::rank_one(1.0)?;
    let bump = RadialProfile::bump(4.0)?;
    let m = mass_check(&line, &bump, &[3.0])?;
    println!("mass: translated {:.12}, original {:.12}", m.translated, m.original);

    let probes: Vec<Vec<f64>> = (0..9).map(|i| vec![-4.0 + i as f64]).collect();
    let r = support_check(&line, &RadialProfile::bump(1.0)?, &[2.0], &probes)?;
    for p in &r.probes {
        println!("  y = {:>5.1}  d_G = {:.3}  value {:.3e}  {:?}", p.point[0], p.orbit_distance, p.value, p.region);
    }
    Ok(())
}
