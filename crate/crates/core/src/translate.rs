//! Generalized translations `τ_y f` of radial functions `f(x) = f₀(‖x‖)`.
//!
//! The radial formula
//! `τ_y f(x) = C V_k[η ↦ ∫ f₀(‖x‖+‖y‖ − √(2(‖x‖‖y‖+⟨η,y⟩)) u) (1−u²)^{ν−1/2} du](x)`
//! with `C = Γ(ν+1)/(√π Γ(ν+1/2))` is evaluated by nested quadrature. The argument of
//! `f₀` is written `gap + s(1−u)` with `gap = ‖x‖+‖y‖−s ≥ d_G(x,y)²` computed without
//! cancellation, so compactly supported profiles are cut exactly where the formula
//! says they vanish.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::intertwine::{vk_apply_nodes, vk_rank_one_restricted, Grading, HullNode};
use crate::metric::{cross_root, dist_orbit, dot, norm};
use crate::params::Setting;
use crate::specfun::{integrate_adaptive, integrate_adaptive_with_points, QuadratureRule, Tolerance};
use crate::{Error, Result};

const OUTER_TOL: f64 = 1e-12;
const MASS_TOL: f64 = 1e-10;
// e^{-45} relative tail for profiles that only decay
const DECAY_WIDTH: f64 = 45.0;

/// A radial profile `f₀` with its support `[0, support_radius_sq]` and an optional
/// exponential decay rate `f₀(t) ≲ e^{−rate·t}`.
#[derive(Clone)]
pub struct RadialProfile {
    f0: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support_radius_sq: f64,
    decay_rate: Option<f64>,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("support_radius_sq", &self.support_radius_sq)
            .field("decay_rate", &self.decay_rate)
            .finish_non_exhaustive()
    }
}

impl RadialProfile {
    /// A profile vanishing beyond `support_radius_sq` (which may be infinite).
    pub fn new(f0: impl Fn(f64) -> f64 + Send + Sync + 'static, support_radius_sq: f64) -> Result<Self> {
        if !(support_radius_sq >= 0.0) {
            return Err(Error::Domain(format!("support radius² {support_radius_sq} must be nonnegative")));
        }
        Ok(RadialProfile {
            f0: Arc::new(f0),
            support_radius_sq,
            decay_rate: None,
        })
    }

    /// Declares `f₀(t) ≤ C e^{−rate·t}`; used for truncation and rule orders.
    pub fn with_decay(mut self, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Domain(format!("decay rate {rate} must be positive")));
        }
        self.decay_rate = Some(rate);
        Ok(self)
    }

    /// `f₀(t) = e^{−λt}`.
    pub fn exponential(lambda: f64) -> Result<Self> {
        Self::new(move |t| (-lambda * t).exp(), f64::INFINITY)?.with_decay(lambda)
    }

    /// `f₀(t) = (1 − t/R²)³` on `[0, R²]`, a C² bump positive inside its support.
    pub fn bump(radius_sq: f64) -> Result<Self> {
        if !(radius_sq > 0.0 && radius_sq.is_finite()) {
            return Err(Error::Domain(format!("bump radius² {radius_sq} must be positive and finite")));
        }
        Self::new(move |t| (1.0 - t / radius_sq).max(0.0).powi(3), radius_sq)
    }

    /// `f₀(t)`, exactly zero outside the declared support.
    pub fn eval(&self, t: f64) -> f64 {
        if t > self.support_radius_sq {
            0.0
        } else {
            (self.f0)(t)
        }
    }

    pub fn support_radius_sq(&self) -> f64 {
        self.support_radius_sq
    }

    pub fn decay_rate(&self) -> Option<f64> {
        self.decay_rate
    }

    pub fn is_compact(&self) -> bool {
        self.support_radius_sq.is_finite()
    }

    // radius² beyond which the profile is negligible at the e^{-45} level
    fn effective_radius_sq(&self) -> Option<f64> {
        if self.is_compact() {
            Some(self.support_radius_sq)
        } else {
            self.decay_rate.map(|r| DECAY_WIDTH / r)
        }
    }
}

/// `(gap, s)` at a node `η` of the hull of `base`: `s = √(2(‖b‖‖o‖+⟨η,o⟩))` and
/// `gap = ‖b‖+‖o‖−s`, from `(‖b‖+‖o‖)² − s² = ‖o−η‖² + Σ b_j²(1−t_j²)`.
pub(crate) fn gap_and_cross(base: &[f64], other: &[f64], node: &HullNode) -> (f64, f64) {
    let (nb, no) = (norm(base), norm(other));
    let s = cross_root(nb, no, dot(node.eta, other));
    let a = nb + no;
    let diff: f64 = other.iter().zip(node.eta).map(|(o, e)| (o - e) * (o - e)).sum::<f64>()
        + base.iter().zip(node.one_minus_t2).map(|(b, d)| b * b * d).sum::<f64>();
    let gap = if a + s > 0.0 { diff / (a + s) } else { 0.0 };
    (gap, s)
}

/// Graded rules for integrands peaking where `s` is largest, i.e. at `t_j = sign(b_j o_j)`,
/// with log-derivative `rate·|b_j o_j|/s` there.
pub(crate) fn peak_grading(base: &[f64], other: &[f64], rate: f64) -> Vec<Grading> {
    let aligned: f64 = base.iter().zip(other).map(|(b, o)| (b * o).abs()).sum();
    let s_max = cross_root(norm(base), norm(other), aligned);
    base.iter()
        .zip(other)
        .map(|(b, o)| {
            if s_max == 0.0 {
                return Grading::default();
            }
            Grading::for_sharpness(rate * (b * o).abs() / s_max, b * o >= 0.0)
        })
        .collect()
}

// Gauss–Jacobi order resolving e^{w u} on [−1, 1]
pub(crate) fn exponential_order(w: f64) -> usize {
    let n = (3.0 * w.abs().sqrt() + 24.0).max(48.0).ceil() as usize;
    n.div_ceil(16) * 16
}

/// The inner integral `∫ f₀(gap + s(1−u)) (1−u²)^α du`.
struct InnerIntegral<'a> {
    f: &'a RadialProfile,
    alpha: f64,
    full: Arc<QuadratureRule>,
    upper: Arc<QuadratureRule>,
    mass: f64,
}

impl<'a> InnerIntegral<'a> {
    fn new(s: &Setting, f: &'a RadialProfile, s_max: f64) -> Result<Self> {
        let alpha = s.nu() - 0.5;
        let order = exponential_order(f.decay_rate.unwrap_or(0.0) * 2.0 * s_max);
        let full = s.jacobi_rule(order, alpha, alpha)?;
        let upper = s.jacobi_rule(order, alpha, 0.0)?;
        let mass = full.total_mass();
        Ok(InnerIntegral {
            f,
            alpha,
            full,
            upper,
            mass,
        })
    }

    fn eval(&self, gap: f64, s: f64) -> f64 {
        let r2 = self.f.support_radius_sq;
        if gap > r2 {
            return 0.0;
        }
        if s == 0.0 {
            return self.f.eval(gap) * self.mass;
        }
        let u_min = 1.0 - (r2 - gap) / s;
        if u_min <= -1.0 {
            return self.full.integrate(|u| self.f.eval(gap + s * (1.0 - u)));
        }
        let alpha = self.alpha;
        // [lo, 1] with 1 − u = (1−lo)(1−ξ)/2 and the weight (1−u)^α in the rule
        let lo = u_min.max(0.0);
        let half = 0.5 * (1.0 - lo);
        let upper = half.powf(alpha + 1.0)
            * self.upper.integrate(|xi| {
                let om = half * (1.0 - xi);
                self.f.eval(gap + s * om) * (2.0 - om).powf(alpha)
            });
        if u_min >= 0.0 {
            return upper;
        }
        // [u_min, 0] in p = (1+u)^{α+1}, which absorbs the weight (1+u)^α
        let p_lo = (1.0 + u_min).powf(alpha + 1.0);
        let lower = integrate_adaptive(
            |p: f64| {
                let op = p.powf(1.0 / (alpha + 1.0));
                let om = 2.0 - op;
                self.f.eval(gap + s * om) * om.powf(alpha)
            },
            p_lo,
            1.0,
            Tolerance {
                abs: 1e-300,
                rel: 1e-13,
                max_intervals: 500,
            },
        );
        upper + lower.value / (alpha + 1.0)
    }
}

/// `τ_y f(x)` for a radial `f` by the radial formula (`V_k` acting in `x`).
pub fn translate_radial(s: &Setting, f: &RadialProfile, y: &[f64], x: &[f64]) -> Result<f64> {
    s.require_valid()?;
    s.check_point(x)?;
    s.check_point(y)?;
    let (nx, ny) = (norm(x), norm(y));
    if nx == 0.0 || ny == 0.0 {
        return Ok(f.eval(nx + ny));
    }
    let aligned: f64 = x.iter().zip(y).map(|(a, b)| (a * b).abs()).sum();
    let s_max = cross_root(nx, ny, aligned);
    let inner = InnerIntegral::new(s, f, s_max)?;
    let c = s.translation_constant()?;

    if s.dim() == 1 && f.is_compact() {
        let (x1, y1) = (x[0], y[0]);
        let a = nx + ny;
        let excess = a - f.support_radius_sq;
        // gap < R² ⟺ 2(|x||y| + t·xy) > (a − R²)², an interval in t
        let (mut lo, mut hi) = (-1.0, 1.0);
        if excess > 0.0 {
            let xy = x1 * y1;
            if xy == 0.0 {
                return Ok(0.0);
            }
            let t_star = (0.5 * excess * excess - nx * ny) / xy;
            if xy > 0.0 {
                lo = t_star;
            } else {
                hi = t_star;
            }
        }
        let k = s.k()[0];
        let v = vk_rank_one_restricted(k, lo, hi, Tolerance::relative(OUTER_TOL), |t, omt2| {
            let eta = [t * x1];
            let node = HullNode {
                eta: &eta,
                t: &[t],
                one_minus_t2: &[omt2],
            };
            let (gap, sc) = gap_and_cross(x, y, &node);
            inner.eval(gap, sc)
        })?;
        return Ok(c * v);
    }

    let grading = peak_grading(x, y, f.decay_rate.unwrap_or(0.0));
    let v = vk_apply_nodes(s, x, &grading, |node| {
        let (gap, sc) = gap_and_cross(x, y, node);
        inner.eval(gap, sc)
    })?;
    Ok(c * v)
}

/// `τ_y(e^{−λ‖·‖})(x) = Γ(ν+1) e^{−λ(‖x‖+‖y‖)} V_k[Ĩ_ν(λ√(2(‖x‖‖y‖+⟨x,·⟩)))](y)`.
pub fn translate_exponential(s: &Setting, lambda: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    s.require_valid()?;
    s.check_point(x)?;
    s.check_point(y)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("exponential rate {lambda} must be positive")));
    }
    let bessel = s.bessel()?;
    let grading = peak_grading(y, x, lambda);
    let v = vk_apply_nodes(s, y, &grading, |node| {
        let (gap, sc) = gap_and_cross(y, x, node);
        (-lambda * gap).exp() * bessel.scaled(lambda * sc)
    })?;
    Ok(s.gamma_nu1() * v)
}

/// Relative symmetry defect `|τ_y f(x) − τ_x f(y)| / |τ_y f(x)|`.
pub fn symmetry_gap(s: &Setting, f: &RadialProfile, x: &[f64], y: &[f64]) -> Result<f64> {
    let a = translate_radial(s, f, y, x)?;
    let b = translate_radial(s, f, x, y)?;
    Ok(relative(a, b))
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Both sides of the mass identity `∫ τ_y f ϑ = ∫ f ϑ` at `N = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    pub translated: f64,
    pub original: f64,
    pub rel_error: f64,
    /// The integrals run over `|x| ≤ truncation`.
    pub truncation: f64,
    /// Bound on the part of `∫ τ_y f ϑ` beyond the truncation.
    pub tail_bound: f64,
}

// the translated profile vanishes (or is below e^{-45}) for |x| beyond this
fn truncation_radius(f: &RadialProfile, y_norm: f64) -> Result<f64> {
    let r2 = f.effective_radius_sq().ok_or_else(|| {
        Error::Domain("profile has neither compact support nor a declared decay rate".into())
    })?;
    Ok((y_norm.sqrt() + r2.sqrt()).powi(2))
}

// breakpoints on [0, X] for |x|: the annulus of the translated support
fn radial_breakpoints(f: &RadialProfile, y_norm: f64, x_max: f64) -> Vec<f64> {
    let mut pts = vec![0.0, x_max];
    if let Some(r2) = f.effective_radius_sq() {
        let r = r2.sqrt();
        let a = y_norm.sqrt();
        pts.push((a - r).max(0.0).powi(2));
        pts.push(y_norm);
        pts.push((a + r).powi(2));
    }
    pts.retain(|p| *p >= 0.0 && *p <= x_max);
    pts.sort_by(|p, q| p.total_cmp(q));
    pts.dedup();
    pts
}

// ∫_R g(x) |x|^{2k−1} dx over |x| ≤ X, split at the origin
fn integrate_line(k: f64, pts: &[f64], mut g: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let mut failure = None;
    let mut side = |sign: f64| {
        integrate_adaptive_with_points(
            |r: f64| {
                if r == 0.0 {
                    return 0.0;
                }
                match g(sign * r) {
                    Ok(v) => v * r.powf(2.0 * k - 1.0),
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            },
            pts,
            Tolerance::relative(MASS_TOL),
        )
        .value
    };
    let total = side(1.0) + side(-1.0);
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// `∫ τ_y f ϑ` against `∫ f ϑ` at `N = 1`, over a truncated line with a tail bound.
pub fn mass_check(s: &Setting, f: &RadialProfile, y: &[f64]) -> Result<MassReport> {
    s.require_valid()?;
    s.require_rank_one()?;
    s.check_point(y)?;
    let k = s.k()[0];
    let ny = norm(y);
    let x_max = truncation_radius(f, ny)?;
    let pts = radial_breakpoints(f, ny, x_max);
    let translated = integrate_line(k, &pts, |x| translate_radial(s, f, y, &[x]))?;
    let pts0 = radial_breakpoints(f, 0.0, truncation_radius(f, 0.0)?);
    let original = integrate_line(k, &pts0, |x| Ok(f.eval(x.abs())))?;
    let tail_bound = match (f.is_compact(), f.decay_rate) {
        (true, _) => 0.0,
        (false, Some(rate)) => decay_tail(rate, k, ny, x_max),
        (false, None) => unreachable!("truncation_radius rejects such profiles"),
    };
    Ok(MassReport {
        translated,
        original,
        rel_error: relative(translated, original),
        truncation: x_max,
        tail_bound,
    })
}

// 2∫_{|x|>X} e^{−λ(√|x|−√|y|)²} |x|^{2k−1} dx, which bounds the tail of τ_y f ϑ
// when f₀(t) ≤ e^{−λt}, since the argument of f₀ is at least d_G(x,y)²
fn decay_tail(rate: f64, k: f64, y_norm: f64, x_max: f64) -> f64 {
    let b = y_norm.sqrt();
    let v0 = x_max.sqrt() - b;
    // in v = √|x| − √|y|: 2 ∫ e^{−λv²} (v+b)^{4k−1} · 2 dv
    let width = 40.0 / rate.sqrt() + 10.0;
    4.0 * integrate_adaptive(
        |v: f64| (-rate * v * v).exp() * (v + b).powf(4.0 * k - 1.0),
        v0,
        v0 + width,
        Tolerance::relative(1e-6),
    )
    .value
}

/// `|∫ (τ_y f) g ϑ − ∫ f (τ_y g) ϑ|` relative to the larger side, at `N = 1`.
pub fn adjoint_gap(s: &Setting, f: &RadialProfile, g: &RadialProfile, y: &[f64]) -> Result<f64> {
    s.require_valid()?;
    s.require_rank_one()?;
    s.check_point(y)?;
    let k = s.k()[0];
    let ny = norm(y);
    // (τ_y f)·g vanishes where either factor does
    let limit = |p: &RadialProfile, q: &RadialProfile| -> Result<(f64, Vec<f64>)> {
        let x_max = truncation_radius(p, ny)?.min(truncation_radius(q, 0.0)?);
        let mut pts = radial_breakpoints(p, ny, x_max);
        pts.extend(radial_breakpoints(q, 0.0, x_max));
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        Ok((x_max, pts))
    };
    let (_, pts_l) = limit(f, g)?;
    let (_, pts_r) = limit(g, f)?;
    let lhs = integrate_line(k, &pts_l, |x| Ok(translate_radial(s, f, y, &[x])? * g.eval(x.abs())))?;
    let rhs = integrate_line(k, &pts_r, |x| Ok(f.eval(x.abs()) * translate_radial(s, g, y, &[x])?))?;
    Ok(relative(lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeRegion {
    Inside,
    Outside,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportProbe {
    pub point: Vec<f64>,
    pub orbit_distance: f64,
    pub value: f64,
    pub region: ProbeRegion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub probes: Vec<SupportProbe>,
    /// Largest `|τ_x f(y)|` over probes with `d_G(x,y) > r`.
    pub max_outside: f64,
    /// Smallest `τ_x f(y)` over probes with `d_G(x,y) < r`.
    pub min_inside: f64,
}

/// Checks that `τ_x f` vanishes off `⋃_g B(gx, r)` for a profile supported on `[0, r²]`,
/// and records its values inside.
pub fn support_check(s: &Setting, f: &RadialProfile, x: &[f64], probes: &[Vec<f64>]) -> Result<SupportReport> {
    if !f.is_compact() {
        return Err(Error::Precondition("support check needs a compactly supported profile".into()));
    }
    let r = f.support_radius_sq().sqrt();
    let mut out = Vec::with_capacity(probes.len());
    let (mut max_outside, mut min_inside) = (0.0f64, f64::INFINITY);
    for y in probes {
        let d = dist_orbit(x, y);
        let value = translate_radial(s, f, x, y)?;
        let region = if (d - r).abs() <= 1e-12 * r.max(1.0) {
            ProbeRegion::Boundary
        } else if d > r {
            max_outside = max_outside.max(value.abs());
            ProbeRegion::Outside
        } else {
            min_inside = min_inside.min(value);
            ProbeRegion::Inside
        };
        out.push(SupportProbe {
            point: y.clone(),
            orbit_distance: d,
            value,
            region,
        });
    }
    Ok(SupportReport {
        probes: out,
        max_outside,
        min_inside,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_at_origin() {
        let s = Setting::new(vec![0.5, 0.8]).unwrap();
        let f = RadialProfile::bump(2.0).unwrap();
        for x in [[0.3, -0.4], [1.0, 1.0], [2.0, 0.5]] {
            let v = translate_radial(&s, &f, &[0.0, 0.0], &x).unwrap();
            assert!((v - f.eval(norm(&x))).abs() < 1e-15);
        }
        let s1 = Setting::rank_one(1.0).unwrap();
        let e = translate_exponential(&s1, 0.7, &[2.5], &[0.0]).unwrap();
        assert!((e - (-0.7f64 * 2.5).exp()).abs() < 1e-14);
        assert!((translate_exponential(&s1, 3.0, &[0.0], &[0.0]).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn radial_formula_matches_exponential_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in [vec![1.0], vec![0.6], vec![0.4, 0.7]] {
            let s = Setting::new(k).unwrap();
            for _ in 0..8 {
                let lambda = rng.gen_range(0.2..3.0);
                let f = RadialProfile::exponential(lambda).unwrap();
                let x: Vec<f64> = (0..s.dim()).map(|_| rng.gen_range(-4.0..4.0)).collect();
                let y: Vec<f64> = (0..s.dim()).map(|_| rng.gen_range(-4.0..4.0)).collect();
                let a = translate_radial(&s, &f, &y, &x).unwrap();
                let b = translate_exponential(&s, lambda, &x, &y).unwrap();
                assert!(relative(a, b) < 1e-10, "k={:?} x={x:?} y={y:?}: {a} vs {b}", s.k());
            }
        }
    }

    #[test]
    fn symmetric_and_positive() {
        let s = Setting::rank_one(0.8).unwrap();
        let f = RadialProfile::bump(1.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = [rng.gen_range(-3.0..3.0)];
            let y = [rng.gen_range(-3.0..3.0)];
            assert!(symmetry_gap(&s, &f, &x, &y).unwrap() < 1e-9);
            assert!(translate_radial(&s, &f, &y, &x).unwrap() >= 0.0);
        }
    }

    #[test]
    fn mass_is_preserved() {
        let s = Setting::rank_one(1.0).unwrap();
        let f = RadialProfile::exponential(1.0).unwrap();
        let m = mass_check(&s, &f, &[2.0]).unwrap();
        assert!(m.rel_error < 1e-8, "{m:?}");
        assert!(m.tail_bound < 1e-12 * m.original);
        assert_eq!(mass_check(&s, &f, &[0.0]).unwrap().rel_error, 0.0);
        let b = RadialProfile::bump(1.2).unwrap();
        let m = mass_check(&Setting::rank_one(0.7).unwrap(), &b, &[-2.3]).unwrap();
        assert!(m.rel_error < 1e-8, "{m:?}");
    }

    #[test]
    fn self_adjoint() {
        let s = Setting::rank_one(1.3).unwrap();
        let f = RadialProfile::bump(2.0).unwrap();
        let g = RadialProfile::exponential(0.8).unwrap();
        assert!(adjoint_gap(&s, &f, &g, &[1.7]).unwrap() < 1e-8);
    }

    #[test]
    fn vanishes_outside_the_orbit_balls() {
        let s = Setting::new(vec![0.6, 0.9]).unwrap();
        let f = RadialProfile::bump(0.25).unwrap();
        let x = vec![1.5, -0.7];
        let probes = vec![vec![-1.5, 0.7], vec![1.5, 0.7], vec![4.0, 3.0], vec![0.0, 0.0], vec![-1.6, -0.6]];
        let rep = support_check(&s, &f, &x, &probes).unwrap();
        assert_eq!(rep.max_outside, 0.0);
        assert!(rep.min_inside > 0.0);
        assert_eq!(rep.probes[0].region, ProbeRegion::Inside);
        assert_eq!(rep.probes[2].region, ProbeRegion::Outside);
    }

    #[test]
    fn profile_errors() {
        assert!(RadialProfile::bump(0.0).is_err());
        assert!(RadialProfile::exponential(-1.0).is_err());
        let s = Setting::rank_one(1.0).unwrap();
        let f = RadialProfile::new(|t| 1.0 / (1.0 + t * t), f64::INFINITY).unwrap();
        assert!(mass_check(&s, &f, &[1.0]).is_err());
    }
}
