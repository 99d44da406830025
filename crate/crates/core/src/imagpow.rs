//! Imaginary powers `(−Δ_{k,1})^{−iσ}`: the time integral defining their kernel
//! `K(x,y) = ∫₀^∞ Λ(x,y;t) t^{iσ−1} dt`, the spectral realization, the subordination
//! identity and the regularity integrals behind the singular-integral bounds.
//!
//! Time integrals run in `s = ln t` on panels whose phase increment `σ·Δs` stays
//! below a budget. The discarded ends are bounded with
//! `Λ(x,y;t) ≤ sinh(t)^{−q} e^{−tanh(t/2)(‖x‖+‖y‖)} e^{−d_G(x,y)²/sinh t}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::metric::{dist_orbit_sq, dist_rank_one, norm};
use crate::params::Setting;
use crate::semigroup::{heat_kernel_real, ln_sinh, theta_line_rule, KernelValue, LineFunction};
use crate::specfun::{gamma, gamma_complex, gauss_jacobi, gauss_laguerre, gauss_legendre, gk15, integrate_adaptive, Tolerance};
use crate::spectral::{apply_multiplier, expand};
use crate::translate::translate_exponential;
use crate::{Error, Result};

type Panels = Vec<(f64, f64)>;

/// Smallest orbit distance at which the kernel is evaluated.
pub const NEAR_DIAGONAL: f64 = 1e-3;
pub const OSC_BUDGET: f64 = PI / 8.0;
// widest panel in ln t regardless of σ
const MAX_PANEL: f64 = 0.25;
// remainders must stay below this fraction of the value
const REMAINDER_BUDGET: f64 = 1e-12;
const HORMANDER_TAIL_BUDGET: f64 = 0.1;

/// Panel layout for `∫₀^∞ g(t) t^{iσ−1} dt` in `s = ln t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeIntegralPlan {
    pub split_point: f64,
    pub osc_budget: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Panel width in `s`.
    pub panel: f64,
}

impl TimeIntegralPlan {
    pub fn new(sigma: f64, t_min: f64, t_max: f64, refinement: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min) {
            return Err(Error::Domain(format!("time range [{t_min}, {t_max}] is empty")));
        }
        let mut panel = MAX_PANEL;
        if sigma != 0.0 {
            panel = panel.min(OSC_BUDGET / sigma.abs());
        }
        Ok(TimeIntegralPlan {
            split_point: 1.0,
            osc_budget: OSC_BUDGET,
            t_min,
            t_max,
            panel: panel / refinement.max(1) as f64,
        })
    }

    fn uniform(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        if b <= a {
            return Vec::new();
        }
        let n = ((b - a) / self.panel).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        (0..n).map(|i| (a + i as f64 * h, a + (i + 1) as f64 * h)).collect()
    }

    /// Panels of `[ln t_min, ln t_max]` with no regard to the split point.
    pub fn log_grid(&self) -> Vec<(f64, f64)> {
        self.uniform(self.t_min.ln(), self.t_max.ln())
    }

    /// Panels of `[ln t_min, ln split]` and `[ln split, ln t_max]`.
    pub fn split_grid(&self) -> (Panels, Panels) {
        let mid = self.split_point.ln().clamp(self.t_min.ln(), self.t_max.ln());
        (self.uniform(self.t_min.ln(), mid), self.uniform(mid, self.t_max.ln()))
    }
}

// ∫ g(e^s) e^{iσs} ds over the panels with GK15; returns (value, error estimate)
fn log_time_integral(panels: &[(f64, f64)], sigma: f64, g: &dyn Fn(f64) -> Result<f64>) -> Result<(Complex64, f64)> {
    let mut failure = None;
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for &(a, b) in panels {
        let (v, e) = gk15(
            |s: f64| match g(s.exp()) {
                Ok(v) => Complex64::from_polar(v, sigma * s),
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            },
            a,
            b,
        );
        total += v;
        err += e;
    }
    match failure {
        Some(e) => Err(e),
        None => Ok((total, err)),
    }
}

// ∫_0^τ sinh(t)^{−q} e^{−D coth t} dt/t ≤ D^{−q} Γ(q, D/τ), with the incomplete gamma bounded
fn small_time_remainder(q: f64, orbit_sq: f64, t_min: f64) -> f64 {
    let v0 = orbit_sq / t_min;
    let tail = if q <= 1.0 {
        v0.powf(q - 1.0) * (-v0).exp()
    } else if v0 > q - 1.0 {
        v0.powf(q - 1.0) * (-v0).exp() / (1.0 - (q - 1.0) / v0)
    } else {
        gamma(q)
    };
    orbit_sq.powf(-q) * tail
}

// ∫_T^∞ sinh(t)^{−q} e^{−tanh(t/2)A} dt/t
fn large_time_remainder(q: f64, a: f64, t_max: f64) -> f64 {
    let lead = q * (std::f64::consts::LN_2 - (-(-2.0 * t_max).exp()).ln_1p()) - q * t_max - (0.5 * t_max).tanh() * a;
    lead.exp() / (q * t_max)
}

/// `∫₀^∞ (Λ(x,y;t) − Λ(x,y₀;t)) t^{iσ−1} dt` (or `K(x,y)` when `y₀` is absent),
/// split at `t = 1` if `split` is set. Returns the pieces and the total error.
fn kernel_integral(
    s: &Setting,
    x: &[f64],
    y: &[f64],
    y0: Option<&[f64]>,
    sigma: f64,
    refinement: usize,
    split: bool,
) -> Result<(Vec<Complex64>, f64)> {
    s.require_valid()?;
    if sigma == 0.0 {
        return Err(Error::Domain("σ must be nonzero".into()));
    }
    let mut orbit_sq = dist_orbit_sq(x, y);
    let mut a = norm(x) + norm(y);
    if let Some(y0) = y0 {
        orbit_sq = orbit_sq.min(dist_orbit_sq(x, y0));
        a = a.min(norm(x) + norm(y0));
    }
    if orbit_sq.sqrt() < NEAR_DIAGONAL {
        return Err(Error::Precondition(format!(
            "orbit distance {:e} is below the near-diagonal threshold {NEAR_DIAGONAL:e}",
            orbit_sq.sqrt()
        )));
    }
    let q = s.q();
    let g = |t: f64| -> Result<f64> {
        let v = heat_kernel_real(s, x, y, t)?;
        match y0 {
            Some(y0) => Ok(v - heat_kernel_real(s, x, y0, t)?),
            None => Ok(v),
        }
    };
    let copies = if y0.is_some() { 2.0 } else { 1.0 };
    let mut v0 = 60.0 + 3.0 * q;
    let mut t_max = (40.0 + q * std::f64::consts::LN_2) / q + 2.0;
    for _ in 0..6 {
        let plan = TimeIntegralPlan::new(sigma, orbit_sq / v0, t_max.max(2.0 * orbit_sq / v0), refinement)?;
        let (pieces, err) = if split {
            let (lo, hi) = plan.split_grid();
            let (v1, e1) = log_time_integral(&lo, sigma, &g)?;
            let (v2, e2) = log_time_integral(&hi, sigma, &g)?;
            (vec![v1, v2], e1 + e2)
        } else {
            let (v, e) = log_time_integral(&plan.log_grid(), sigma, &g)?;
            (vec![v], e)
        };
        let small = copies * small_time_remainder(q, orbit_sq, plan.t_min);
        let large = copies * large_time_remainder(q, a, plan.t_max);
        let total: Complex64 = pieces.iter().sum();
        let budget = REMAINDER_BUDGET * total.norm();
        if small <= budget && large <= budget {
            return Ok((pieces, err + small + large));
        }
        if small > budget {
            v0 *= 1.5;
        }
        if large > budget {
            t_max *= 1.5;
        }
    }
    Err(Error::Inconclusive(
        "time-integral remainders stay above budget; the kernel is too small to resolve".into(),
    ))
}

/// `K(x,y) = ∫₀^∞ Λ(x,y;t) t^{iσ−1} dt` for `d_G(x,y) ≥ NEAR_DIAGONAL`.
pub fn kernel_k(s: &Setting, x: &[f64], y: &[f64], sigma: f64) -> Result<KernelValue> {
    kernel_k_refined(s, x, y, sigma, 1)
}

/// [`kernel_k`] with panels `refinement` times narrower.
pub fn kernel_k_refined(s: &Setting, x: &[f64], y: &[f64], sigma: f64, refinement: usize) -> Result<KernelValue> {
    let (v, err) = kernel_integral(s, x, y, None, sigma, refinement, false)?;
    Ok(KernelValue {
        value: v[0],
        est_error: err,
    })
}

/// `(K⁽¹⁾, K⁽²⁾)`: the parts of the time integral over `t < 1` and `t > 1`.
pub fn kernel_k_split(s: &Setting, x: &[f64], y: &[f64], sigma: f64) -> Result<(Complex64, Complex64)> {
    let (v, _) = kernel_integral(s, x, y, None, sigma, 1, true)?;
    Ok((v[0], v[1]))
}

/// `|K(x,y)| d_G(x,y)^{2q}`, bounded near the diagonal by the singular-kernel estimate.
pub fn decay_product(s: &Setting, x: &[f64], y: &[f64], sigma: f64, refinement: usize) -> Result<f64> {
    let kv = kernel_k_refined(s, x, y, sigma, refinement)?;
    Ok(kv.value.norm() * dist_orbit_sq(x, y).powf(s.q()))
}

/// Relative error of `Γ(iσ)^{−1} ∫₀^∞ e^{−tλ} t^{iσ−1} dt` against `λ^{−iσ}`.
///
/// The integral is read as its analytic continuation: the part over `t < 1` is
/// `∫₀¹ (e^{−tλ} − 1) t^{iσ−1} dt + 1/(iσ)`.
pub fn subordination_check(lambda: f64, sigma: f64) -> Result<f64> {
    Ok((subordination_value(lambda, sigma, 1)? - Complex64::from_polar(1.0, -sigma * lambda.ln())).norm())
}

/// `Γ(iσ)^{−1} ∫₀^∞ e^{−tλ} t^{iσ−1} dt` by the time-integral panels.
pub fn subordination_value(lambda: f64, sigma: f64, refinement: usize) -> Result<Complex64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("λ = {lambda} must be positive")));
    }
    if sigma == 0.0 {
        return Err(Error::Domain("σ must be nonzero".into()));
    }
    // |expm1(−λt)| ≤ λt below t_min; e^{−λt}/(λt) above t_max
    let plan = TimeIntegralPlan::new(sigma, 1e-18 / lambda, 45.0 / lambda + 1.0, refinement)?;
    let (lo, hi) = plan.split_grid();
    let (v1, _) = log_time_integral(&lo, sigma, &|t| Ok((-lambda * t).exp_m1()))?;
    let (v2, _) = log_time_integral(&hi, sigma, &|t| Ok((-lambda * t).exp()))?;
    let i_sigma = Complex64::new(0.0, sigma);
    Ok((v1 + v2 + 1.0 / i_sigma) / gamma_complex(i_sigma)?)
}

/// `(−Δ_{k,1})^{−iσ} f(x)` through the spectral expansion of `f` truncated at `l_max`.
pub fn imagpow_spectral(s: &Setting, f: &LineFunction, sigma: f64, x: f64, l_max: usize) -> Result<Complex64> {
    let e = expand(s, f, l_max)?;
    apply_multiplier(&e, |mu| Complex64::from_polar(1.0, -sigma * mu.ln()), x)
}

/// `(c_{k,1}/Γ(iσ)) ∫ K(x,y) f(y) ϑ(y) dy` at `N = 1` for `f` supported away from `±x`.
pub fn imagpow_kernel(s: &Setting, f: &LineFunction, sigma: f64, x: f64, refinement: usize) -> Result<KernelValue> {
    s.require_rank_one()?;
    let k = s.k()[0];
    let (lo, hi) = f.support();
    let (a, b) = if lo <= 0.0 && hi >= 0.0 {
        (0.0, lo.abs().max(hi.abs()))
    } else {
        (lo.abs().min(hi.abs()), lo.abs().max(hi.abs()))
    };
    let r = x.abs();
    if r >= a && r <= b {
        return Err(Error::Precondition(format!("support [{lo}, {hi}] meets the orbit of x = {x}")));
    }
    let rule = theta_line_rule(k, lo, hi, 0.05 / refinement.max(1) as f64)?;
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for (y, w) in rule {
        let fy = f.eval(y);
        if fy == 0.0 {
            continue;
        }
        let kv = kernel_k_refined(s, &[x], &[y], sigma, refinement)?;
        total += kv.value * (w * fy);
        err += kv.est_error * (w * fy).abs();
    }
    let scale = s.norm_constant()? / gamma_complex(Complex64::new(0.0, sigma))?;
    Ok(KernelValue {
        value: total * scale,
        est_error: err * scale.norm(),
    })
}

/// `|Λ(x,y;t) − Λ(x,y₀;t)| / d(y,y₀)` over
/// `t^{−(q+1/2)} (τ_{y₀}(e^{−c‖·‖/t})(x) + τ_y(e^{−c‖·‖/t})(x))`.
pub fn lemma52_ratio(s: &Setting, x: &[f64], y: &[f64], y0: &[f64], t: f64, c: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("t = {t} must lie in (0, 1)")));
    }
    if !(c > 0.0) {
        return Err(Error::Domain(format!("c = {c} must be positive")));
    }
    let d = crate::metric::dist(y, y0);
    if d == 0.0 {
        return Err(Error::Precondition("y and y₀ coincide".into()));
    }
    let diff = (heat_kernel_real(s, x, y, t)? - heat_kernel_real(s, x, y0, t)?).abs();
    let majorant = t.powf(-(s.q() + 0.5))
        * (translate_exponential(s, c / t, x, y0)? + translate_exponential(s, c / t, x, y)?);
    Ok(diff / d / majorant)
}

/// Truncated regularity integral with its certified remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HormanderValue {
    pub value: f64,
    pub tail_bound: f64,
    pub est_error: f64,
    pub nodes: usize,
}

impl HormanderValue {
    pub fn total(&self) -> f64 {
        self.value + self.tail_bound
    }
}

// nodes of ∫ g(u) 2u^{4k−1} du over panels of [a, b] ⊂ [0, ∞), graded toward `focus`
fn graded_u_rule(k: f64, a: f64, b: f64, focus: f64, first: f64, refinement: usize) -> Result<Vec<(f64, f64)>> {
    const ORDER: usize = 10;
    if b <= a {
        return Ok(Vec::new());
    }
    let mut cuts = vec![focus];
    let mut w = first;
    let toward_b = focus == a;
    loop {
        let last = *cuts.last().unwrap_or(&focus);
        let next = if toward_b { last + w } else { last - w };
        if (toward_b && next >= b) || (!toward_b && next <= a) {
            cuts.push(if toward_b { b } else { a });
            break;
        }
        cuts.push(next);
        w *= 1.5;
    }
    cuts.sort_by(|p, q| p.total_cmp(q));
    let gl = gauss_legendre(ORDER)?;
    let gj = gauss_jacobi(ORDER, 0.0, 4.0 * k - 1.0)?;
    let mut out = Vec::new();
    for pair in cuts.windows(2) {
        let n = refinement.max(1);
        let h = (pair[1] - pair[0]) / n as f64;
        for i in 0..n {
            let lo = pair[0] + i as f64 * h;
            let half = 0.5 * h;
            if lo == 0.0 {
                for (t, wt) in gj.nodes.iter().zip(&gj.weights) {
                    out.push((half * (1.0 + t), 2.0 * half * wt * half.powf(4.0 * k - 1.0)));
                }
            } else {
                for (t, wt) in gl.nodes.iter().zip(&gl.weights) {
                    let u = lo + half * (1.0 + t);
                    out.push((u, 2.0 * half * wt * u.powf(4.0 * k - 1.0)));
                }
            }
        }
    }
    Ok(out)
}

/// `∫_{d_G(x,y) > 2d(y,y₀), |x| ≤ R} |K(x,y) − K(x,y₀)| ϑ(x) dx` at `N = 1`, with a
/// certified bound on the part `|x| > R`. Requires `R ≥ 4 max(|y|, |y₀|)`.
///
/// Fails with [`Error::Inconclusive`] when the tail bound exceeds 10% of the value.
pub fn hormander_integral(
    s: &Setting,
    y: f64,
    y0: f64,
    sigma: f64,
    truncation: f64,
    refinement: usize,
) -> Result<HormanderValue> {
    s.require_rank_one()?;
    let k = s.k()[0];
    let delta = dist_rank_one(y, y0);
    if delta == 0.0 {
        return Err(Error::Precondition("y and y₀ coincide".into()));
    }
    if truncation < 4.0 * y.abs().max(y0.abs()) {
        return Err(Error::Domain(format!("truncation {truncation} must be at least 4 max(|y|, |y₀|)")));
    }
    let root_y = y.abs().sqrt();
    let u_max = truncation.sqrt();
    let mut rule = graded_u_rule(k, 0.0, root_y - 2.0 * delta, root_y - 2.0 * delta, 0.5 * delta, refinement)?;
    rule.extend(graded_u_rule(k, root_y + 2.0 * delta, u_max, root_y + 2.0 * delta, 0.5 * delta, refinement)?);
    let mut value = 0.0;
    let mut err = 0.0;
    for &(u, w) in &rule {
        for sign in [1.0, -1.0] {
            let x = [sign * u * u];
            let (v, e) = kernel_integral(s, &x, &[y], Some(&[y0]), sigma, refinement, false)?;
            value += w * v[0].norm();
            err += w * e;
        }
    }
    let tail_bound = hormander_tail(s, y, truncation)? + hormander_tail(s, y0, truncation)?;
    if tail_bound > HORMANDER_TAIL_BUDGET * value {
        return Err(Error::Inconclusive(format!(
            "tail bound {tail_bound:e} exceeds 10% of the truncated integral {value:e}; raise the truncation"
        )));
    }
    Ok(HormanderValue {
        value,
        tail_bound,
        est_error: err,
        nodes: 2 * rule.len(),
    })
}

// 2 ∫_{|x|>R} ∫₀^∞ sinh(t)^{−q} e^{−tanh(t/2)(|x|+|y|)} e^{−|x|/(4 sinh t)} dt/t ϑ(x) dx,
// which dominates ∫_{|x|>R} |K(x,y)| ϑ since d_G(x,y)² ≥ |x|/4 once |x| ≥ 4|y|
fn hormander_tail(s: &Setting, y: f64, truncation: f64) -> Result<f64> {
    let k = s.k()[0];
    let q = s.q();
    let lag = gauss_laguerre(32, 0.0)?;
    let inner = |t: f64| {
        let beta = (0.5 * t).tanh() + 0.25 * (-ln_sinh(t)).exp();
        // ∫_R^∞ r^{2k−1} e^{−βr} dr = e^{−βR}/β ∫₀^∞ (R + v/β)^{2k−1} e^{−v} dv
        let moment: f64 = lag
            .nodes
            .iter()
            .zip(&lag.weights)
            .map(|(v, w)| w * (truncation + v / beta).powf(2.0 * k - 1.0))
            .sum();
        (-q * ln_sinh(t) - (0.5 * t).tanh() * y.abs() - beta * truncation).exp() / beta * moment
    };
    let res = integrate_adaptive(|sl: f64| inner(sl.exp()), (1e-4f64).ln(), 60f64.ln(), Tolerance::relative(1e-8));
    Ok(2.0 * res.value)
}
