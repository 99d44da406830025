//! The heat kernel `Λ(x,y;z)` of the (k,1)-generalized oscillator, the transform
//! kernel `B(x,y)` and the heat semigroup on the line.
//!
//! `Λ(x,y;z) = Γ(ν+1) sinh(z)^{−q} V_k[e^{−(‖x‖+‖y‖) coth z} Ĩ_ν(√(2(‖x‖‖y‖+⟨x,·⟩))/sinh z)](y)`.
//! For real times the exponent is regrouped as `−gap·coth t − s·tanh(t/2)` with
//! `gap = ‖x‖+‖y‖−s ≥ 0`, so nothing overflows and the small-time peak of the
//! integrand is resolved by graded rules.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::intertwine::{vk_apply_nodes, Grading};
use crate::metric::{cross_root, norm};
use crate::params::Setting;
use crate::specfun::{gauss_jacobi, gauss_legendre, integrate_adaptive_with_points, Tolerance};
use crate::translate::{exponential_order, gap_and_cross, peak_grading, translate_exponential};
use crate::{Error, Result};

const APPLY_TOL: f64 = 1e-10;
// relative size of the integrand at a truncation end that is still tolerated
const TAIL_BUDGET: f64 = 1e-10;

/// A complex kernel value with an a-posteriori error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: Complex64,
    pub est_error: f64,
}

/// `ln sinh t` for `t > 0` without overflow.
pub fn ln_sinh(t: f64) -> f64 {
    if t > 20.0 {
        t - std::f64::consts::LN_2 + (-(-2.0 * t).exp()).ln_1p()
    } else {
        t.sinh().ln()
    }
}

fn check_pair(s: &Setting, x: &[f64], y: &[f64]) -> Result<()> {
    s.require_valid()?;
    s.check_point(x)?;
    s.check_point(y)
}

fn max_cross(x: &[f64], y: &[f64]) -> f64 {
    let aligned: f64 = x.iter().zip(y).map(|(a, b)| (a * b).abs()).sum();
    cross_root(norm(x), norm(y), aligned)
}

/// `Λ(x,y;t)` for real `t > 0`.
pub fn heat_kernel_real(s: &Setting, x: &[f64], y: &[f64], t: f64) -> Result<f64> {
    check_pair(s, x, y)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("heat time {t} must be positive")));
    }
    let bessel = s.bessel()?;
    let ls = ln_sinh(t);
    let inv_sinh = (-ls).exp();
    let coth = 1.0 / t.tanh();
    let th = (0.5 * t).tanh();
    let lead = -s.q() * ls;
    let grading = peak_grading(y, x, inv_sinh);
    let v = vk_apply_nodes(s, y, &grading, |node| {
        let (gap, sc) = gap_and_cross(y, x, node);
        (lead - gap * coth - sc * th).exp() * bessel.scaled(sc * inv_sinh)
    })?;
    Ok(s.gamma_nu1() * v)
}

/// `Λ(x,y;t)` through `sinh(t)^{−q} e^{−tanh(t/2)(‖x‖+‖y‖)} τ_y(e^{−‖·‖/sinh t})(x)`.
pub fn heat_kernel_via_translation(s: &Setting, x: &[f64], y: &[f64], t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("heat time {t} must be positive")));
    }
    let ls = ln_sinh(t);
    let a = norm(x) + norm(y);
    let tau = translate_exponential(s, (-ls).exp(), x, y)?;
    Ok((-s.q() * ls - (0.5 * t).tanh() * a).exp() * tau)
}

/// `Λ(x,y;z)` for `Re z ≥ 0`, `sinh z ≠ 0`, on the principal branch of `sinh(z)^{−q}`,
/// with `V_k` rules of the given order in every coordinate.
pub fn heat_kernel_complex(s: &Setting, x: &[f64], y: &[f64], z: Complex64, order: Option<usize>) -> Result<Complex64> {
    check_pair(s, x, y)?;
    if !(z.re >= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("heat time {z} must have nonnegative real part")));
    }
    let sh = z.sinh();
    if sh.norm() < 1e-300 {
        return Err(Error::Domain(format!("sinh({z}) vanishes")));
    }
    let bessel = s.bessel()?;
    let inv_sinh = 1.0 / sh;
    let coth = z.cosh() * inv_sinh;
    let sigma = if inv_sinh.re >= 0.0 { 1.0 } else { -1.0 };
    // coth z − σ/sinh z: tanh(z/2) or coth(z/2), both with nonnegative real part
    let damping = coth - sigma * inv_sinh;
    let lead = -s.q() * sh.ln();
    let s_max = max_cross(x, y);
    let order = order.unwrap_or_else(|| exponential_order(s_max * inv_sinh.im).max(64));
    let grading: Vec<Grading> = peak_grading(y, x, inv_sinh.re.abs())
        .into_iter()
        .map(|g| if g.left == 0 && g.right == 0 { g.with_order(order) } else { g })
        .collect();
    let v = vk_apply_nodes(s, y, &grading, |node| {
        let (gap, sc) = gap_and_cross(y, x, node);
        let w = sc * inv_sinh;
        let e = lead - gap * coth - sc * damping - Complex64::new(0.0, sigma * w.im);
        e.exp() * bessel.scaled_complex(w)
    })?;
    Ok(v * s.gamma_nu1())
}

/// `Λ(x,y;z)` with an error estimate: for real `z` the distance to the translation
/// route, otherwise the change under doubling the `V_k` order.
pub fn heat_kernel(s: &Setting, x: &[f64], y: &[f64], z: Complex64) -> Result<KernelValue> {
    if z.im == 0.0 {
        let a = heat_kernel_real(s, x, y, z.re)?;
        let b = heat_kernel_via_translation(s, x, y, z.re)?;
        return Ok(KernelValue {
            value: Complex64::new(a, 0.0),
            est_error: (a - b).abs(),
        });
    }
    let s_max = max_cross(x, y);
    let order = exponential_order(s_max / z.sinh().norm()).max(64);
    let a = heat_kernel_complex(s, x, y, z, Some(order))?;
    let b = heat_kernel_complex(s, x, y, z, Some(2 * order))?;
    Ok(KernelValue {
        value: b,
        est_error: (a - b).norm(),
    })
}

/// `B(x,y) = e^{iπq/2} Λ(x,y; iπ/2) = Γ(ν+1) V_k[Ĩ_ν(−i√(2(‖x‖‖y‖+⟨x,·⟩)))](y)`, a real number.
pub fn bkernel(s: &Setting, x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(s, x, y)?;
    let bessel = s.bessel()?;
    let order = exponential_order(max_cross(x, y)).max(64);
    let grading = vec![Grading::default().with_order(order); s.dim()];
    let v = vk_apply_nodes(s, y, &grading, |node| {
        let (_, sc) = gap_and_cross(y, x, node);
        bessel.value_complex(Complex64::new(0.0, sc)).re
    })?;
    Ok(s.gamma_nu1() * v)
}

/// `|Λ|` over the small- and large-time majorants
/// `t^{−q} τ_y(e^{−b‖·‖/t})(x)` (for `t ≤ 1`) and `e^{−qt} τ_y(e^{−b‖·‖})(x)` (for `t ≥ 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundRatios {
    pub small_time: Option<f64>,
    pub large_time: Option<f64>,
}

pub fn kernel_bounds_check(s: &Setting, x: &[f64], y: &[f64], t: f64, b: f64) -> Result<KernelBoundRatios> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!("majorant constant {b} must be positive")));
    }
    let lambda = heat_kernel_real(s, x, y, t)?.abs();
    let q = s.q();
    let small_time = if t <= 1.0 {
        Some(lambda / (t.powf(-q) * translate_exponential(s, b / t, x, y)?))
    } else {
        None
    };
    let large_time = if t >= 1.0 {
        Some(lambda / ((-q * t).exp() * translate_exponential(s, b, x, y)?))
    } else {
        None
    };
    Ok(KernelBoundRatios { small_time, large_time })
}

/// A function on the line, declared to vanish (or to be negligible) outside `[lo, hi]`.
#[derive(Clone)]
pub struct LineFunction {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    lo: f64,
    hi: f64,
}

impl std::fmt::Debug for LineFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LineFunction")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .finish_non_exhaustive()
    }
}

impl LineFunction {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::Domain(format!("support [{lo}, {hi}] must be a finite interval")));
        }
        Ok(LineFunction { f: Arc::new(f), lo, hi })
    }

    /// `exp(−1/(1−s²))` in `s = (x−c)/w`, smooth with support `[c−w, c+w]`.
    pub fn smooth_bump(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::Domain(format!("bump half-width {half_width} must be positive")));
        }
        Self::new(
            move |x| {
                let u = (x - center) / half_width;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - u * u)).exp()
                }
            },
            center - half_width,
            center + half_width,
        )
    }

    /// `exp(−(x−c)²/(2w²))` cut off at `|x−c| = 7.5w`, where it is below `1e−12`.
    pub fn gaussian_bump(center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::Domain(format!("bump width {width} must be positive")));
        }
        Self::new(
            move |x| (-0.5 * ((x - center) / width).powi(2)).exp(),
            center - 7.5 * width,
            center + 7.5 * width,
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            0.0
        } else {
            (self.f)(x)
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Breakpoints of `[lo, hi]`: the ends, the origin and the given points inside.
    pub(crate) fn breakpoints(&self, extra: &[f64]) -> Vec<f64> {
        let mut pts = vec![self.lo, self.hi, 0.0];
        pts.extend_from_slice(extra);
        pts.retain(|p| *p >= self.lo && *p <= self.hi);
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        pts
    }
}

/// `e^{tΔ} f(x) = c ∫ f(y) Λ(x,y;t) ϑ(y) dy` at `N = 1`.
///
/// Fails with [`Error::Inconclusive`] when `f` is not negligible at the ends of its
/// declared interval.
pub fn heat_apply(s: &Setting, f: &LineFunction, t: f64, x: f64) -> Result<f64> {
    s.require_rank_one()?;
    let k = s.k()[0];
    let c = s.norm_constant()?;
    let mut failure = None;
    let pts = f.breakpoints(&[x, -x]);
    let res = integrate_adaptive_with_points(
        |y: f64| {
            if y == 0.0 {
                return 0.0;
            }
            match heat_kernel_real(s, &[x], &[y], t) {
                Ok(kern) => f.eval(y) * kern * y.abs().powf(2.0 * k - 1.0),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        &pts,
        Tolerance::relative(APPLY_TOL),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    check_ends(f)?;
    Ok(c * res.value)
}

pub(crate) fn check_ends(f: &LineFunction) -> Result<()> {
    let (lo, hi) = f.support();
    let rule = gauss_legendre(32)?;
    let scale = rule
        .nodes
        .iter()
        .map(|u| f.eval(lo + 0.5 * (hi - lo) * (1.0 + u)).abs())
        .fold(0.0, f64::max);
    let ends = f.eval(lo).abs().max(f.eval(hi).abs());
    if ends > TAIL_BUDGET * scale {
        return Err(Error::Inconclusive(format!(
            "function is {ends:e} at the ends of [{lo}, {hi}], above the tail budget"
        )));
    }
    Ok(())
}

/// `B(ξ,y)` at `N = 1` tabulated in `v = √(|ξ||y|)` for both signs of `ξy`, with
/// local cubic interpolation.
#[derive(Debug, Clone)]
pub struct RankOneTransformKernel {
    step: f64,
    same_sign: Vec<f64>,
    opposite_sign: Vec<f64>,
}

impl RankOneTransformKernel {
    /// Table covering `|ξ||y| ≤ product_max` with spacing `step` in `√(|ξ||y|)`.
    pub fn new(s: &Setting, product_max: f64, step: f64) -> Result<Self> {
        s.require_rank_one()?;
        if !(step > 0.0 && product_max > 0.0) {
            return Err(Error::Domain("table extent and step must be positive".into()));
        }
        let n = (product_max.sqrt() / step).ceil() as usize + 3;
        let mut same_sign = Vec::with_capacity(n + 1);
        let mut opposite_sign = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let v = i as f64 * step;
            same_sign.push(bkernel(s, &[v], &[v])?);
            opposite_sign.push(bkernel(s, &[v], &[-v])?);
        }
        Ok(RankOneTransformKernel {
            step,
            same_sign,
            opposite_sign,
        })
    }

    pub fn eval(&self, xi: f64, y: f64) -> f64 {
        let table = if xi * y >= 0.0 { &self.same_sign } else { &self.opposite_sign };
        let v = (xi * y).abs().sqrt() / self.step;
        let i = (v.floor() as usize).clamp(1, table.len() - 3);
        let p = v - i as f64;
        // cubic through nodes i−1 .. i+2
        let (f0, f1, f2, f3) = (table[i - 1], table[i], table[i + 1], table[i + 2]);
        let a = -p * (p - 1.0) * (p - 2.0) / 6.0;
        let b = (p + 1.0) * (p - 1.0) * (p - 2.0) / 2.0;
        let c = -(p + 1.0) * p * (p - 2.0) / 2.0;
        let d = (p + 1.0) * p * (p - 1.0) / 6.0;
        a * f0 + b * f1 + c * f2 + d * f3
    }
}

/// Composite rule for `∫ g(y) ϑ(y) dy` at `N = 1` over `y ∈ [lo, hi]`, built in
/// `u = sign(y)√|y|` where `ϑ(y)dy = 2|u|^{4k−1} du`. Panels touching `u = 0` carry
/// that weight through Gauss–Jacobi rules. Returns `(y, weight)` pairs.
pub(crate) fn theta_line_rule(k: f64, lo: f64, hi: f64, panel: f64) -> Result<Vec<(f64, f64)>> {
    const ORDER: usize = 20;
    let gl = gauss_legendre(ORDER)?;
    let beta = 4.0 * k - 1.0;
    let to_zero = gauss_jacobi(ORDER, beta, 0.0)?;
    let from_zero = gauss_jacobi(ORDER, 0.0, beta)?;
    let u_of = |y: f64| y.signum() * y.abs().sqrt();
    let (u_lo, u_hi) = (u_of(lo), u_of(hi));
    let mut pieces = vec![(u_lo, u_hi)];
    if u_lo < 0.0 && u_hi > 0.0 {
        pieces = vec![(u_lo, 0.0), (0.0, u_hi)];
    }
    let mut out = Vec::new();
    for (a0, b0) in pieces {
        let panels = ((b0 - a0) / panel).ceil().max(1.0) as usize;
        let h = (b0 - a0) / panels as f64;
        for p in 0..panels {
            let a = a0 + p as f64 * h;
            let b = a + h;
            let half = 0.5 * h;
            if a == 0.0 || b == 0.0 {
                let rule = if a == 0.0 { &from_zero } else { &to_zero };
                for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                    let u = a + half * (1.0 + t);
                    out.push((u * u.abs(), 2.0 * half * w * half.powf(beta)));
                }
            } else {
                for (t, w) in gl.nodes.iter().zip(&gl.weights) {
                    let u = a + half * (1.0 + t);
                    out.push((u * u.abs(), 2.0 * half * w * u.abs().powf(beta)));
                }
            }
        }
    }
    Ok(out)
}

/// Applies the transform `F f(ξ) = c ∫ f(y) B(ξ,y) ϑ(y) dy` twice at `N = 1`, with the
/// intermediate transform truncated to `|ξ| ≤ xi_max`; returns `F(F f)` at `points`.
pub fn fourier_twice(s: &Setting, f: &LineFunction, xi_max: f64, points: &[f64]) -> Result<Vec<f64>> {
    s.require_rank_one()?;
    let k = s.k()[0];
    let c = s.norm_constant()?;
    let (lo, hi) = f.support();
    let y_max = lo.abs().max(hi.abs());
    let x_max = points.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let table = RankOneTransformKernel::new(s, xi_max * y_max.max(x_max), 0.01)?;
    // oscillation in u has frequency about 2√ξ_max
    let panel = 0.5 / xi_max.sqrt().max(1.0);
    let y_rule = theta_line_rule(k, lo, hi, panel)?;
    let xi_panel = 0.5 / y_max.max(x_max).sqrt().max(1.0);
    let xi_rule = theta_line_rule(k, -xi_max, xi_max, xi_panel)?;
    let transform: Vec<f64> = xi_rule
        .iter()
        .map(|&(xi, _)| c * y_rule.iter().map(|&(y, w)| w * f.eval(y) * table.eval(xi, y)).sum::<f64>())
        .collect();
    Ok(points
        .iter()
        .map(|&x| {
            c * xi_rule
                .iter()
                .zip(&transform)
                .map(|(&(xi, w), g)| w * g * table.eval(x, xi))
                .sum::<f64>()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn origin_values() {
        let s = Setting::rank_one(1.0).unwrap();
        let v = heat_kernel(&s, &[0.0], &[0.0], Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.value.re - 1f64.sinh().powi(-2)).abs() < 1e-14);
        assert!((v.value.re - 0.724_062).abs() < 1e-6);
        let s2 = Setting::new(vec![0.3, 0.9]).unwrap();
        for t in [0.05, 0.7, 3.0] {
            let v = heat_kernel_real(&s2, &[0.0, 0.0], &[0.0, 0.0], t).unwrap();
            assert!((v / t.sinh().powf(-s2.q()) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn routes_agree_and_kernel_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in [vec![1.0], vec![0.7], vec![0.5, 1.2]] {
            let s = Setting::new(k).unwrap();
            for _ in 0..6 {
                let x: Vec<f64> = (0..s.dim()).map(|_| rng.gen_range(-4.0..4.0)).collect();
                let y: Vec<f64> = (0..s.dim()).map(|_| rng.gen_range(-4.0..4.0)).collect();
                let t = rng.gen_range(0.05..3.0);
                let a = heat_kernel(&s, &x, &y, Complex64::new(t, 0.0)).unwrap();
                let b = heat_kernel_real(&s, &y, &x, t).unwrap();
                assert!(a.value.re > 0.0);
                assert!(a.est_error <= 1e-10 * a.value.re, "{a:?}");
                assert!((a.value.re - b).abs() <= 1e-10 * b, "x={x:?} y={y:?} t={t}");
            }
        }
    }

    #[test]
    fn complex_time_continues_real_time() {
        let s = Setting::rank_one(0.9).unwrap();
        let (x, y) = ([1.3], [-0.4]);
        let real = heat_kernel_real(&s, &x, &y, 0.8).unwrap();
        let cplx = heat_kernel_complex(&s, &x, &y, Complex64::new(0.8, 0.0), None).unwrap();
        assert!((cplx.re - real).abs() < 1e-12 * real && cplx.im.abs() < 1e-14);
        // B(x,y) is e^{iπq/2} Λ(x,y; iπ/2)
        let z = Complex64::new(0.0, 0.5 * std::f64::consts::PI);
        let lam = heat_kernel(&s, &x, &y, z).unwrap();
        let phase = Complex64::new(0.0, 0.5 * std::f64::consts::PI * s.q()).exp();
        let b = bkernel(&s, &x, &y).unwrap();
        assert!((lam.value * phase - b).norm() < 1e-11, "{lam:?} vs {b}");
    }

    // B at N = 1 as an alternating power series in P = |ξ||y|:
    // Γ(ν+1) Σ (−P/2)^n E[(1 ± t)^n] / (n! Γ(n+ν+1)), E[(1±t)^n] = 2^n (k + [±=+])_n / (2k+1)_n
    fn bkernel_series(k: f64, xi: f64, y: f64) -> f64 {
        let nu = k - 1.0;
        let p = (xi * y).abs();
        let shift = if xi * y >= 0.0 { 1.0 } else { 0.0 };
        let mut sum = 0.0;
        let mut term = 1.0 / gamma(nu + 1.0);
        for n in 0..200 {
            sum += term;
            let nf = n as f64;
            term *= -p / 2.0 * 2.0 * (k + shift + nf) / (2.0 * k + 1.0 + nf) / ((nf + 1.0) * (nf + nu + 1.0));
        }
        gamma(nu + 1.0) * sum
    }

    #[test]
    fn bkernel_properties() {
        let s = Setting::rank_one(1.4).unwrap();
        for (xi, y) in [(0.5, 2.0), (-1.5, 2.0), (3.0, 3.0), (-2.0, -4.5)] {
            let b = bkernel(&s, &[xi], &[y]).unwrap();
            let oracle = bkernel_series(1.4, xi, y);
            assert!((b - oracle).abs() < 1e-10, "ξ={xi} y={y}: {b} vs {oracle}");
            assert!((b - bkernel(&s, &[y], &[xi]).unwrap()).abs() < 1e-12);
        }
        let s2 = Setting::new(vec![0.4, 0.9]).unwrap();
        assert!((bkernel(&s2, &[0.0, 0.0], &[3.0, -7.0]).unwrap() - 1.0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let x = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
            let y = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
            assert!(bkernel(&s2, &x, &y).unwrap().abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn bounds_are_finite() {
        let s = Setting::rank_one(1.0).unwrap();
        let b = 1.0 / 1f64.sinh();
        let r = kernel_bounds_check(&s, &[2.0], &[-1.0], 1.0, b).unwrap();
        assert!(r.small_time.unwrap() <= 1.0 + 1e-12 && r.large_time.unwrap().is_finite());
        let r = kernel_bounds_check(&s, &[2.0], &[3.0], 0.1, b).unwrap();
        assert!(r.small_time.unwrap() <= 1.0 + 1e-12 && r.large_time.is_none());
    }

    #[test]
    fn heat_flow_of_the_ground_state() {
        // Φ_{0,0} ∝ e^{−|x|} decays at rate 2k under the flow
        let k = 1.0;
        let s = Setting::rank_one(k).unwrap();
        let f = LineFunction::new(|x: f64| (-x.abs()).exp(), -40.0, 40.0).unwrap();
        for x in [0.5, -1.7, 3.0] {
            let v = heat_apply(&s, &f, 0.6, x).unwrap();
            let exact = (-2.0 * k * 0.6f64).exp() * (-x.abs()).exp();
            assert!((v / exact - 1.0).abs() < 1e-8, "x={x}: {v} vs {exact}");
        }
        let cut = LineFunction::new(|x: f64| (-x.abs()).exp(), -3.0, 3.0).unwrap();
        assert!(matches!(heat_apply(&s, &cut, 0.6, 0.5), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn spectral_sum_matches_kernel() {
        for k in [1.0, 0.65] {
            let s = Setting::rank_one(k).unwrap();
            let c = s.norm_constant().unwrap();
            for (x, y, t) in [(1.0, 2.5, 0.8), (-3.0, 0.7, 0.5), (4.0, -4.0, 1.5), (0.2, 0.0, 0.6)] {
                let kern = c * heat_kernel_real(&s, &[x], &[y], t).unwrap();
                let sum = crate::spectral::heat_spectral_sum(&s, x, y, t, 60).unwrap();
                assert!((kern - sum).abs() <= 1e-9 * kern.abs(), "k={k} x={x} y={y}: {kern} vs {sum}");
            }
        }
    }

    #[test]
    fn semigroup_composition() {
        let s = Setting::rank_one(1.0).unwrap();
        let f = LineFunction::smooth_bump(0.8, 1.2).unwrap();
        let s2 = s.clone();
        let f2 = f.clone();
        let once = LineFunction::new(move |y| heat_apply(&s2, &f2, 0.4, y).unwrap(), -25.0, 25.0).unwrap();
        for x in [-0.9, 0.3, 1.6] {
            let twice = heat_apply(&s, &once, 0.4, x).unwrap();
            let direct = heat_apply(&s, &f, 0.8, x).unwrap();
            assert!((twice / direct - 1.0).abs() < 1e-6, "x={x}: {twice} vs {direct}");
        }
    }

    #[test]
    fn small_time_approaches_identity() {
        let s = Setting::rank_one(1.0).unwrap();
        let f = LineFunction::smooth_bump(1.0, 1.5).unwrap();
        let errs: Vec<f64> = [0.02, 0.005]
            .iter()
            .map(|&t| (heat_apply(&s, &f, t, 1.2).unwrap() - f.eval(1.2)).abs())
            .collect();
        assert!(errs[1] < errs[0] && errs[1] < 2e-2, "{errs:?}");
    }

    #[test]
    fn transform_is_an_involution() {
        let s = Setting::rank_one(1.0).unwrap();
        let f = LineFunction::smooth_bump(1.0, 1.5).unwrap();
        let pts = [-0.3, 0.8, 1.3];
        let back = fourier_twice(&s, &f, 400.0, &pts).unwrap();
        for (x, v) in pts.iter().zip(back) {
            assert!((v - f.eval(*x)).abs() < 5e-3, "x={x}: {v} vs {}", f.eval(*x));
        }
    }
}
