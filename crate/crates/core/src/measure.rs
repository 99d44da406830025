//! Measures `m(B(x,r))` of metric balls under `dm = ϑ(y) dy`.
//!
//! In polar coordinates `y = ρω` the ball is, for each direction, an interval in
//! `v = √ρ`: `v² − 2v√‖x‖ cos(θ/2) + ‖x‖ ≤ r²` with `θ` the angle between `x` and `ω`.
//! The radial integral of `ρ^{q−1}` over that interval is elementary, leaving an
//! integral over the sphere. Spheres are handled for `N ≤ 2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::metric::{dot, norm};
use crate::params::Setting;
use crate::specfun::{gauss_jacobi, gauss_legendre, integrate_adaptive_with_points, Integral, Tolerance};
use crate::{Error, Result};

const ANGULAR_TOL: f64 = 1e-12;
const CHORD_ORDER: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureMethod {
    Polar,
    EuclideanBall,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureResult {
    pub value: f64,
    pub method: MeasureMethod,
    pub est_error: f64,
}

fn check(s: &Setting, x: &[f64], r: f64) -> Result<()> {
    s.require_valid()?;
    s.check_point(x)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("ball radius {r} must be positive")));
    }
    if s.dim() > 2 {
        return Err(Error::Unsupported(format!("ball measures for N = {} (N ≤ 2 only)", s.dim())));
    }
    Ok(())
}

/// `m(B(0,r)) = A_s r^{2q} / q`.
pub fn ball_measure_origin(s: &Setting, r: f64) -> Result<f64> {
    s.require_valid()?;
    let q = s.q();
    Ok(s.sphere_integral() * r.powf(2.0 * q) / q)
}

/// Interval of `v = √ρ` inside the ball along a direction with `cos(θ/2) = c`.
fn radial_interval(a: f64, c: f64, r: f64) -> Option<(f64, f64)> {
    let disc = r * r - a * a * (1.0 - c * c);
    if disc < 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let hi = a * c + root;
    if hi <= 0.0 {
        return None;
    }
    Some(((a * c - root).max(0.0), hi))
}

// breakpoints of a full turn of directions starting opposite to x: the axes and,
// when the origin lies outside the ball, the edges of the cone of directions meeting it
fn angular_breakpoints(x: &[f64], r: f64) -> Vec<f64> {
    let phi_x = x[1].atan2(x[0]);
    let (lo, hi) = (phi_x - PI, phi_x + PI);
    let mut pts = vec![lo, hi];
    let mut axis = (lo / (0.5 * PI)).ceil() * 0.5 * PI;
    while axis < hi {
        pts.push(axis);
        axis += 0.5 * PI;
    }
    let a = norm(x).sqrt();
    if r < a {
        let half = 2.0 * (r / a).asin();
        pts.push(phi_x - half);
        pts.push(phi_x + half);
    }
    pts.retain(|p| *p >= lo && *p <= hi);
    pts.sort_by(|p, q| p.total_cmp(q));
    pts.dedup();
    pts
}

fn over_sphere(s: &Setting, x: &[f64], r: f64, mut along: impl FnMut(&[f64]) -> f64) -> Integral<f64> {
    if s.dim() == 1 {
        let value = along(&[1.0]) + along(&[-1.0]);
        return Integral {
            value,
            error: 0.0,
            evaluations: 2,
            intervals: 1,
            converged: true,
        };
    }
    let pts = if norm(x) == 0.0 {
        vec![-PI, -0.5 * PI, 0.0, 0.5 * PI, PI]
    } else {
        angular_breakpoints(x, r)
    };
    integrate_adaptive_with_points(
        |phi: f64| {
            let omega = [phi.cos(), phi.sin()];
            along(&omega) * s.weight_h(&omega)
        },
        &pts,
        Tolerance::relative(ANGULAR_TOL),
    )
}

/// `m(B(x,r))` by the polar formula with the radial integral in closed form.
pub fn ball_measure_polar(s: &Setting, x: &[f64], r: f64) -> Result<MeasureResult> {
    check(s, x, r)?;
    let q = s.q();
    let nx = norm(x);
    let a = nx.sqrt();
    let res = over_sphere(s, x, r, |omega| {
        let c = if nx == 0.0 {
            1.0
        } else {
            (0.5 * (1.0 + dot(x, omega) / nx)).clamp(0.0, 1.0).sqrt()
        };
        match radial_interval(a, c, r) {
            Some((lo, hi)) => (hi.powf(2.0 * q) - lo.powf(2.0 * q)) / q,
            None => 0.0,
        }
    });
    if !res.converged {
        return Err(Error::NonConvergence(format!(
            "polar ball measure at x = {x:?}, r = {r}: error {} on {}",
            res.error, res.value
        )));
    }
    Ok(MeasureResult {
        value: res.value,
        method: MeasureMethod::Polar,
        est_error: res.error.max(f64::EPSILON * res.value),
    })
}

/// `x_ω = √‖x‖ (x + ‖x‖ω) / ‖x + ‖x‖ω‖`, the centre of the Euclidean ball seen along `ω`.
///
/// `None` for `ω = −x/‖x‖`, where only the limits `‖x_ω‖² = ‖x‖` and `⟨x_ω, ω⟩ = 0` exist.
pub fn ball_center_along(x: &[f64], omega: &[f64]) -> Option<Vec<f64>> {
    let nx = norm(x);
    if nx == 0.0 {
        return Some(vec![0.0; x.len()]);
    }
    let v: Vec<f64> = x.iter().zip(omega).map(|(a, w)| a + nx * w).collect();
    let nv = norm(&v);
    if nv == 0.0 {
        return None;
    }
    Some(v.iter().map(|c| nx.sqrt() * c / nv).collect())
}

/// `m(B(x,r))` as `2 ∫ u^{2q−1} h_k(ω)` over `z = uω` in the Euclidean balls
/// `|z − x_ω| ≤ r`; each chord is found by intersecting the ray with the ball and
/// integrated by a Gauss rule.
pub fn ball_measure_euclidean(s: &Setting, x: &[f64], r: f64) -> Result<MeasureResult> {
    check(s, x, r)?;
    let q = s.q();
    let p = 2.0 * q - 1.0;
    let gl = gauss_legendre(CHORD_ORDER)?;
    // chords starting at the origin carry the power u^p as a Jacobi weight
    let gj = gauss_jacobi(CHORD_ORDER, 0.0, p)?;
    let res = over_sphere(s, x, r, |omega| {
        let (proj, perp2) = match ball_center_along(x, omega) {
            Some(centre) => {
                let proj = dot(&centre, omega);
                (proj, (dot(&centre, &centre) - proj * proj).max(0.0))
            }
            None => (0.0, norm(x)),
        };
        let disc = r * r - perp2;
        if disc < 0.0 {
            return 0.0;
        }
        let (lo, hi) = ((proj - disc.sqrt()).max(0.0), proj + disc.sqrt());
        if hi <= 0.0 {
            return 0.0;
        }
        let chord = if lo == 0.0 {
            // u = hi (1+ξ)/2
            (0.5 * hi).powf(p + 1.0) * gj.integrate(|_| 1.0)
        } else {
            let half = 0.5 * (hi - lo);
            half * gl.integrate(|xi| (lo + half * (1.0 + xi)).powf(p))
        };
        2.0 * chord
    });
    if !res.converged {
        return Err(Error::NonConvergence(format!(
            "Euclidean-ball measure at x = {x:?}, r = {r}: error {} on {}",
            res.error, res.value
        )));
    }
    Ok(MeasureResult {
        value: res.value,
        method: MeasureMethod::EuclideanBall,
        est_error: res.error.max(1e-13 * res.value),
    })
}

/// `|m(B(tx, √t r)) − t^q m(B(x,r))| / (t^q m(B(x,r)))`.
pub fn scaling_check(s: &Setting, x: &[f64], r: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("scale factor {t} must be positive")));
    }
    let base = ball_measure_polar(s, x, r)?.value;
    let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
    let scaled = ball_measure_polar(s, &tx, t.sqrt() * r)?.value;
    let expect = t.powf(s.q()) * base;
    Ok((scaled - expect).abs() / expect)
}

/// `m(B(x,2r)) / m(B(x,r))`.
pub fn doubling_ratio(s: &Setting, x: &[f64], r: f64) -> Result<f64> {
    let small = ball_measure_polar(s, x, r)?.value;
    let large = ball_measure_polar(s, x, 2.0 * r)?.value;
    Ok(large / small)
}

/// Largest doubling ratio over a grid of centres `|x| ∈ [0, x_max]` along `direction`
/// and radii `r ∈ [r_min, r_max]`, with `n` geometric radii and `n` centres.
pub fn doubling_sup(
    s: &Setting,
    direction: &[f64],
    x_max: f64,
    r_min: f64,
    r_max: f64,
    n: usize,
) -> Result<f64> {
    let nd = norm(direction);
    if nd == 0.0 {
        return Err(Error::Domain("grid direction must be nonzero".into()));
    }
    let n = n.max(2);
    let mut sup: f64 = 0.0;
    for i in 0..n {
        let scale = x_max * i as f64 / (n - 1) as f64 / nd;
        let x: Vec<f64> = direction.iter().map(|d| d * scale).collect();
        for j in 0..n {
            let r = r_min * (r_max / r_min).powf(j as f64 / (n - 1) as f64);
            sup = sup.max(doubling_ratio(s, &x, r)?);
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // one-dimensional oracle: ∫ |y|^{2k−1} over {y : d(x,y) ≤ r} in closed form,
    // the ball being [x−..] pieces found from the two-branch distance
    fn rank_one_oracle(k: f64, x: f64, r: f64) -> f64 {
        let e = 2.0 * k;
        let prim = |y: f64| y.abs().powf(e) / e * y.signum();
        let a = x.abs().sqrt();
        // same side: |√|y| − a| ≤ r
        let same_lo = (a - r).max(0.0).powi(2);
        let same_hi = (a + r).powi(2);
        // opposite side: |x| + |y| ≤ r²
        let opp_hi = (r * r - x.abs()).max(0.0);
        let same = prim(same_hi) - prim(same_lo);
        let opp = prim(opp_hi);
        if x == 0.0 {
            // both sides are "same side"
            return 2.0 * prim(r.powi(2));
        }
        same + opp
    }

    #[test]
    fn rank_one_examples() {
        let s = Setting::rank_one(1.0).unwrap();
        let m = ball_measure_polar(&s, &[0.0], 1.3).unwrap().value;
        assert!((m - 1.3f64.powi(4)).abs() < 1e-13);
        assert!((ball_measure_origin(&s, 1.3).unwrap() - m).abs() < 1e-13);
        assert!((doubling_ratio(&s, &[0.0], 0.7).unwrap() - 16.0).abs() < 1e-12);
        for &(k, x, r) in &[(1.0, 1.0, 0.5), (0.7, -3.0, 1.1), (2.5, 4.0, 3.0), (0.6, 0.2, 0.1)] {
            let s = Setting::rank_one(k).unwrap();
            let polar = ball_measure_polar(&s, &[x], r).unwrap().value;
            let euclid = ball_measure_euclidean(&s, &[x], r).unwrap().value;
            let exact = rank_one_oracle(k, x, r);
            assert!((polar / exact - 1.0).abs() < 1e-12, "k={k} x={x} r={r}: {polar} vs {exact}");
            assert!((euclid / exact - 1.0).abs() < 1e-12, "euclid k={k} x={x} r={r}: {euclid} vs {exact}");
        }
    }

    #[test]
    fn origin_matches_closed_form_in_the_plane() {
        let s = Setting::new(vec![0.4, 1.3]).unwrap();
        let exact = ball_measure_origin(&s, 0.8).unwrap();
        for m in [
            ball_measure_polar(&s, &[0.0, 0.0], 0.8).unwrap(),
            ball_measure_euclidean(&s, &[0.0, 0.0], 0.8).unwrap(),
        ] {
            assert!((m.value / exact - 1.0).abs() < 1e-10, "{m:?} vs {exact}");
        }
    }

    #[test]
    fn polar_and_euclidean_agree_in_the_plane() {
        let s = Setting::new(vec![0.5, 0.9]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
            let r = rng.gen_range(0.1..3.0);
            let p = ball_measure_polar(&s, &x, r).unwrap().value;
            let e = ball_measure_euclidean(&s, &x, r).unwrap().value;
            assert!((p / e - 1.0).abs() < 1e-9, "x={x:?} r={r}: {p} vs {e}");
        }
    }

    #[test]
    fn scaling_and_monotonicity() {
        let s = Setting::new(vec![0.3, 0.6]).unwrap();
        for t in [0.25, 2.0, 9.0] {
            assert!(scaling_check(&s, &[1.0, -2.0], 0.9, t).unwrap() < 1e-9);
        }
        assert_eq!(scaling_check(&s, &[1.0, -2.0], 0.9, 1.0).unwrap(), 0.0);
        let mut prev = 0.0;
        for i in 0..12 {
            let t = 0.5 * i as f64;
            let m = ball_measure_polar(&s, &[t, 0.5 * t], 1.0).unwrap().value;
            assert!(m >= prev * (1.0 - 1e-12), "t={t}");
            prev = m;
        }
    }

    #[test]
    fn rejects_bad_input() {
        let s = Setting::rank_one(1.0).unwrap();
        assert!(ball_measure_polar(&s, &[1.0], 0.0).is_err());
        assert!(ball_measure_polar(&s, &[1.0, 2.0], 1.0).is_err());
        assert!(ball_measure_polar(&Setting::rank_one(0.2).unwrap(), &[1.0], 1.0).is_err());
        let s3 = Setting::new(vec![1.0; 3]).unwrap();
        assert!(matches!(ball_measure_polar(&s3, &[1.0; 3], 1.0), Err(Error::Unsupported(_))));
    }
}
