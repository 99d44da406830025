//! Calderón–Zygmund decomposition of a sampled function.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gko::czdecomp::{cz_decompose, cz_verify, Samples};
use gko::Setting;

fn main() -> gko::Result<()> {
    let s = Setting::rank_one(1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = Samples::spike_train(&mut rng, 800)?;
    let (mass, total) = f.mass(1.0);
    let lambda = 4.0 * mass / total;
    let dec = cz_decompose(&s, &f, lambda)?;
    for b in &dec.bad_parts {
        println!(
            "cells {:>3}..{:<3} average {:8.3}  ball centre {:7.3} radius {:.3}",
            b.start, b.end, b.average, b.ball.center, b.ball.radius
        );
    }
    let r = cz_verify(&dec)?;
    println!("{r:#?}");
    Ok(())
}
