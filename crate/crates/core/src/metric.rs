//! The metric `d(x,y) = √(‖x‖+‖y‖ − √(2(‖x‖‖y‖+⟨x,y⟩)))`, its orbit version and
//! the inequality checks built on them.
//!
//! All distances are evaluated through the cancellation-free identity
//! `d(x,y)² = ‖x−y‖² / (‖x‖+‖y‖+√(2(‖x‖‖y‖+⟨x,y⟩)))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn dist2_euclid(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `√(2(‖x‖‖y‖ + c))` with the radicand clamped at zero.
pub(crate) fn cross_root(nx: f64, ny: f64, c: f64) -> f64 {
    (2.0 * (nx * ny + c)).max(0.0).sqrt()
}

/// `d(x,y)²`.
pub fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    let (nx, ny) = (norm(x), norm(y));
    let denom = nx + ny + cross_root(nx, ny, dot(x, y));
    if denom == 0.0 {
        return 0.0;
    }
    dist2_euclid(x, y) / denom
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    dist_sq(x, y).sqrt()
}

/// `d_G(x,y)² = min_g d(gx,y)²`; the minimizing sign pattern aligns `x_j` with `y_j`.
pub fn dist_orbit_sq(x: &[f64], y: &[f64]) -> f64 {
    let (nx, ny) = (norm(x), norm(y));
    let aligned: f64 = x.iter().zip(y).map(|(a, b)| (a * b).abs()).sum();
    let denom = nx + ny + cross_root(nx, ny, aligned);
    if denom == 0.0 {
        return 0.0;
    }
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a.abs() - b.abs()).powi(2)).sum();
    num / denom
}

pub fn dist_orbit(x: &[f64], y: &[f64]) -> f64 {
    dist_orbit_sq(x, y).sqrt()
}

/// The orbit distance by enumerating all `2^N` sign patterns.
pub fn dist_orbit_brute(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut gx = x.to_vec();
    (0..1u64 << n)
        .map(|g| {
            for j in 0..n {
                gx[j] = if g >> j & 1 == 1 { -x[j] } else { x[j] };
            }
            dist(&gx, y)
        })
        .fold(f64::INFINITY, f64::min)
}

/// The one-dimensional two-branch formula: `|√|x| − √|y||` when `xy ≥ 0`, `√|x−y|` otherwise.
pub fn dist_rank_one(x: f64, y: f64) -> f64 {
    if x * y >= 0.0 {
        (x.abs().sqrt() - y.abs().sqrt()).abs()
    } else {
        (x - y).abs().sqrt()
    }
}

/// `sign(x)·√|x|`; on the line `d(x,y) ≤ |u_x − u_y| ≤ √2·d(x,y)`.
pub fn u_coordinate(x: f64) -> f64 {
    x.signum() * x.abs().sqrt()
}

/// Inverse of [`u_coordinate`].
pub fn from_u_coordinate(u: f64) -> f64 {
    u * u.abs()
}

pub fn in_hull(x: &[f64], eta: &[f64]) -> bool {
    x.len() == eta.len() && x.iter().zip(eta).all(|(a, e)| e.abs() <= a.abs())
}

/// `‖x‖+‖y‖ − √(2(‖x‖‖y‖+⟨η,y⟩))·u` for `η` in the coordinate box of `x`, computed
/// as `(a−s) + s(1−u)` with `a² − s² = ‖η−y‖² + ‖x‖² − ‖η‖²`.
pub(crate) fn generalized_dist_sq_unchecked(x: &[f64], y: &[f64], eta: &[f64], u: f64) -> f64 {
    let (nx, ny) = (norm(x), norm(y));
    let s = cross_root(nx, ny, dot(eta, y));
    let a = nx + ny;
    let deficit: f64 = x.iter().zip(eta).map(|(xj, ej)| (xj.abs() - ej.abs()) * (xj.abs() + ej.abs())).sum();
    let diff = dist2_euclid(eta, y) + deficit;
    let gap = if a + s > 0.0 { diff / (a + s) } else { 0.0 };
    (gap + s * (1.0 - u)).max(0.0)
}

/// `√(‖x‖+‖y‖ − √(2(‖x‖‖y‖+⟨η,y⟩))·u)`, bounded below by `d_G(x,y)`.
pub fn generalized_dist(x: &[f64], y: &[f64], eta: &[f64], u: f64) -> Result<f64> {
    check_admissible(x, eta, u)?;
    if y.len() != x.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(generalized_dist_sq_unchecked(x, y, eta, u).sqrt())
}

fn check_admissible(x: &[f64], eta: &[f64], u: f64) -> Result<()> {
    if eta.len() != x.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            got: eta.len(),
        });
    }
    if !in_hull(x, eta) {
        return Err(Error::Precondition(format!("η = {eta:?} lies outside the hull of x = {x:?}")));
    }
    if !(-1.0..=1.0).contains(&u) {
        return Err(Error::Precondition(format!("u = {u} outside [-1, 1]")));
    }
    Ok(())
}

/// `d(y,z) − |gd(x,y,η,u) − gd(x,z,η,u)|`, nonnegative by the enhanced triangle inequality.
pub fn lemma51_slack(x: &[f64], y: &[f64], z: &[f64], eta: &[f64], u: f64) -> Result<f64> {
    let gy = generalized_dist(x, y, eta, u)?;
    let gz = generalized_dist(x, z, eta, u)?;
    Ok(dist(y, z) - (gy - gz).abs())
}

/// `d(x,z) + d(z,y) − d(x,y)`.
pub fn triangle_slack(x: &[f64], y: &[f64], z: &[f64]) -> f64 {
    dist(x, z) + dist(z, y) - dist(x, y)
}

/// Closed ball `{y : d(center, y) ≤ radius}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricBall {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl MetricBall {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::Domain(format!("ball radius {radius} must be nonnegative")));
        }
        Ok(MetricBall { center, radius })
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        dist(&self.center, y) <= self.radius
    }
}

/// A point `z` with `d(y,z) ≤ ε` and `d(x,z) < d(x,y)`: a witness that `y` lies in the
/// closure of the open ball of radius `d(x,y)` about `x`.
///
/// Golden-section search along candidate rays from `y` (towards `x`, towards the
/// origin, then seeded random directions).
pub fn closure_probe(x: &[f64], y: &[f64], eps: f64, seed: u64) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            got: y.len(),
        });
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("probe radius {eps} must be positive")));
    }
    let r = dist(x, y);
    if r == 0.0 {
        return Err(Error::Precondition("closure probe needs x ≠ y".into()));
    }
    let n = x.len();
    let mut directions: Vec<Vec<f64>> = Vec::new();
    let towards: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    directions.push(towards);
    if norm(y) > 0.0 {
        directions.push(y.iter().map(|v| -v).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..64 {
        directions.push((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    for v in directions {
        let nv = norm(&v);
        if nv == 0.0 {
            continue;
        }
        let v: Vec<f64> = v.iter().map(|c| c / nv).collect();
        let point = |t: f64| -> Vec<f64> { y.iter().zip(&v).map(|(a, b)| a + t * b).collect() };
        // largest step keeping the probe within d-distance ε of y
        let mut hi = eps * eps;
        while dist(y, &point(2.0 * hi)) <= eps && hi < 1e12 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        if dist(y, &point(hi)) > eps {
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if dist(y, &point(mid)) <= eps {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi = lo;
        }
        let t = golden_section(|t| dist(x, &point(t)), 0.0, hi);
        let z = point(t);
        let dz = dist(x, &z);
        if dz < r && dist(y, &z) <= eps && best.as_ref().is_none_or(|(b, _)| dz < *b) {
            best = Some((dz, z));
        }
    }
    best.map(|(_, z)| z).ok_or_else(|| {
        Error::NonConvergence(format!("no descent witness within ε = {eps} of y = {y:?} for x = {x:?}"))
    })
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    // the endpoint b is the full step; prefer it when it is at least as good
    let mid = 0.5 * (a + b);
    [mid, b].into_iter().fold(mid, |best, t| if f(t) < f(best) { t } else { best })
}

/// A uniform sample from the coordinate box `Π[−|x_j|, |x_j|]`, the hull of the orbit of `x`.
pub fn sample_hull<R: Rng>(rng: &mut R, x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|v| if *v == 0.0 { 0.0 } else { rng.gen_range(-v.abs()..=v.abs()) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // d(x,y)² straight from the defining expression
    fn naive(x: &[f64], y: &[f64]) -> f64 {
        let (nx, ny) = (norm(x), norm(y));
        (nx + ny - (2.0 * (nx * ny + dot(x, y))).max(0.0).sqrt()).max(0.0).sqrt()
    }

    #[test]
    fn spec_values() {
        assert!((dist(&[-1.0], &[1.0]) - 2f64.sqrt()).abs() < 1e-15);
        assert!((dist(&[4.0, 0.0], &[1.0, 0.0]) - 1.0).abs() < 1e-15);
        assert_eq!(dist(&[0.3, -2.0], &[0.3, -2.0]), 0.0);
        let y = [2.0, -3.0, 1.0];
        assert!((dist(&[0.0; 3], &y) - norm(&y).sqrt()).abs() < 1e-15);
        assert_eq!(dist_orbit(&[1.0], &[-1.0]), 0.0);
        assert!((dist_orbit(&[1.0], &[4.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn generalized_dist_cases() {
        let x = [1.0, -2.0];
        let y = [0.5, 3.0];
        assert!((generalized_dist(&x, &y, &x, 1.0).unwrap() - dist(&x, &y)).abs() < 1e-14);
        let expected = (norm(&x) + norm(&y)).sqrt();
        assert!((generalized_dist(&x, &y, &[0.3, 1.0], 0.0).unwrap() - expected).abs() < 1e-14);
        assert!(generalized_dist(&x, &y, &[1.5, 0.0], 0.2).is_err());
        assert!(generalized_dist(&x, &y, &[0.5, 0.0], 1.2).is_err());
        assert!(lemma51_slack(&x, &y, &y, &[0.5, 1.0], 0.4).unwrap() == 0.0);
    }

    #[test]
    fn closure_probe_rank_one() {
        let z = closure_probe(&[0.0], &[1.0], 0.1, 1).unwrap();
        assert!(dist(&[0.0], &z) < 1.0);
        assert!(dist(&[1.0], &z) <= 0.1);
        let z = closure_probe(&[3.0, 1.0], &[0.0, 0.0], 1e-2, 2).unwrap();
        assert!(dist(&[3.0, 1.0], &z) < dist(&[3.0, 1.0], &[0.0, 0.0]));
    }

    #[test]
    fn ball_membership() {
        let b = MetricBall::new(vec![1.0], 0.5).unwrap();
        assert!(b.contains(&[1.0]));
        assert!(b.contains(&[2.25]));
        assert!(!b.contains(&[2.3]));
        assert!(MetricBall::new(vec![0.0], -1.0).is_err());
    }

    fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0..10.0f64, n)
    }

    proptest! {
        #[test]
        fn stable_form_matches_definition(x in point(3), y in point(3)) {
            let d = dist(&x, &y);
            prop_assert!((d - naive(&x, &y)).abs() <= 1e-7 * (1.0 + d));
            prop_assert!((d - dist(&y, &x)).abs() <= 1e-15 * (1.0 + d));
            prop_assert!(d + 1e-12 >= (norm(&x).sqrt() - norm(&y).sqrt()).abs());
        }

        #[test]
        fn triangle(x in point(2), y in point(2), z in point(2)) {
            prop_assert!(triangle_slack(&x, &y, &z) >= -1e-12);
        }

        #[test]
        fn orbit_closed_form_matches_enumeration(x in point(3), y in point(3)) {
            let a = dist_orbit(&x, &y);
            let b = dist_orbit_brute(&x, &y);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
            prop_assert!(a <= dist(&x, &y) + 1e-15);
        }

        #[test]
        fn rank_one_branches(x in -20.0..20.0f64, y in -20.0..20.0f64) {
            let d = dist(&[x], &[y]);
            prop_assert!((d - dist_rank_one(x, y)).abs() <= 1e-12 * (1.0 + d));
            let du = (u_coordinate(x) - u_coordinate(y)).abs();
            prop_assert!(d <= du * (1.0 + 1e-12) + 1e-15);
            prop_assert!(du <= 2f64.sqrt() * d * (1.0 + 1e-12) + 1e-15);
        }

        #[test]
        fn orbit_lower_bound(x in point(2), y in point(2), t in prop::collection::vec(-1.0..1.0f64, 2), u in -1.0..1.0f64) {
            let eta: Vec<f64> = x.iter().zip(&t).map(|(a, b)| a * b).collect();
            let g = generalized_dist(&x, &y, &eta, u).unwrap();
            prop_assert!(g + 1e-12 >= dist_orbit(&x, &y));
        }

        #[test]
        fn enhanced_triangle(x in point(2), y in point(2), z in point(2), t in prop::collection::vec(-1.0..1.0f64, 2), u in -1.0..1.0f64) {
            let eta: Vec<f64> = x.iter().zip(&t).map(|(a, b)| a * b).collect();
            prop_assert!(lemma51_slack(&x, &y, &z, &eta, u).unwrap() >= -1e-12);
        }
    }
}
