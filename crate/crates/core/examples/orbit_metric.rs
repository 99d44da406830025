//! Distances in the orbit metric and the two-branch formula on the line.

use gko::metric::{dist, dist_orbit, dist_rank_one, generalized_dist, triangle_slack};

fn main() {
    let (x, y) = ([-1.0], [1.0]);
    println!("d(-1, 1)   = {:.10}", dist(&x, &y));
    println!("d_G(-1, 1) = {:.10}", dist_orbit(&x, &y));
    for (a, b) in [(4.0, 1.0), (4.0, -1.0), (0.0, 9.0)] {
        println!("d({a}, {b}) = {:.6}  (branch formula {:.6})", dist(&[a], &[b]), dist_rank_one(a, b));
    }

    let (p, q, r) = ([1.0, -2.0], [0.5, 3.0], [-2.0, 0.1]);
    println!("triangle slack at three plane points: {:.3e}", triangle_slack(&p, &q, &r));
    // η in the hull of p and u in [-1, 1] give a distance dominating d_G
    let g = generalized_dist(&p, &q, &[0.3, 1.0], 0.2).unwrap();
    println!("generalized distance {g:.6} >= d_G {:.6}", dist_orbit(&p, &q));
}
