//! The rank-one eigenbasis `Φ_{l,m}` of `−Δ_{k,1}`, the Dunkl operator and
//! spectral multipliers.
//!
//! At `N = 1` the sphere is `{±1}`, so `m ∈ {0, 1}` with `Y⁰ = 1/√2` and
//! `Y¹(x) = x/√2`, and
//! `Φ_{l,m}(x) = √(2^{λ+1} l!/Γ(λ+l+1)) Y^m(x) L_l^λ(2|x|) e^{−|x|}`, `λ = 2m+2k−1`.
//! These are orthonormal in `L²(|x|^{2k−1}dx)` and `−Δ_{k,1}Φ_{l,m} = (2l+λ+1)Φ_{l,m}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::params::Setting;
use crate::semigroup::{check_ends, theta_line_rule, LineFunction};
use crate::specfun::ln_gamma;
use crate::{Error, Result};

/// Closest distance to the origin at which Dunkl derivatives are evaluated.
pub const X_MIN: f64 = 0.05;
pub const DEFAULT_L_MAX: usize = 60;
// panel width in u = sign(x)√|x| for expansion quadrature
const EXPAND_PANEL: f64 = 0.05;

fn rank_one_k(s: &Setting) -> Result<f64> {
    s.require_rank_one()?;
    s.require_valid()?;
    Ok(s.k()[0])
}

/// `λ_{k,m} = 2m + 2k − 1`.
pub fn laguerre_index(k: f64, m: usize) -> f64 {
    2.0 * m as f64 + 2.0 * k - 1.0
}

/// Eigenvalue `2l + λ_{k,m} + 1` of `−Δ_{k,1}` on `Φ_{l,m}`.
pub fn eigenvalue(s: &Setting, l: usize, m: usize) -> Result<f64> {
    let k = rank_one_k(s)?;
    if m > 1 {
        return Err(Error::Domain(format!("m = {m}: only m ∈ {{0, 1}} occur at N = 1")));
    }
    Ok(2.0 * l as f64 + laguerre_index(k, m) + 1.0)
}

/// `[Φ_{l,0}(x), Φ_{l,1}(x)]` for `l = 0..=l_max`.
pub fn phi_all(s: &Setting, l_max: usize, x: f64) -> Result<Vec<[f64; 2]>> {
    let k = rank_one_k(s)?;
    let mut out = vec![[0.0; 2]; l_max + 1];
    let u = 2.0 * x.abs();
    for m in 0..2 {
        let lam = laguerre_index(k, m);
        let y_m = if m == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { x * std::f64::consts::FRAC_1_SQRT_2 };
        // orthonormal Laguerre functions √(l!/Γ(l+λ+1)) L_l^λ(u), carrying √(2^{λ+1}) e^{−|x|}
        let mut prev = 0.0;
        let mut cur = (0.5 * ((lam + 1.0) * std::f64::consts::LN_2 - ln_gamma(lam + 1.0)) - x.abs()).exp();
        for (l, slot) in out.iter_mut().enumerate() {
            slot[m] = y_m * cur;
            let lf = l as f64;
            let next = ((2.0 * lf + 1.0 + lam - u) * cur - (lf * (lf + lam)).sqrt() * prev)
                / ((lf + 1.0) * (lf + lam + 1.0)).sqrt();
            prev = cur;
            cur = next;
        }
    }
    Ok(out)
}

/// `Φ_{l,m}(x)`.
pub fn phi(s: &Setting, l: usize, m: usize, x: f64) -> Result<f64> {
    if m > 1 {
        return Err(Error::Domain(format!("m = {m}: only m ∈ {{0, 1}} occur at N = 1")));
    }
    Ok(phi_all(s, l, x)?[l][m])
}

// f′(x) and f″(x) by central differences with two Richardson steps
fn derivatives(f: &dyn Fn(f64) -> f64, x: f64) -> (f64, f64) {
    let h0 = (0.25 * x.abs()).min(0.05);
    let fx = f(x);
    let level = |h: f64| {
        let (a, b) = (f(x + h), f(x - h));
        ((a - b) / (2.0 * h), (a - 2.0 * fx + b) / (h * h))
    };
    let d: Vec<(f64, f64)> = (0..3).map(|i| level(h0 / f64::powi(2.0, i))).collect();
    let r1 = |a: f64, b: f64| (4.0 * b - a) / 3.0;
    let r2 = |a: f64, b: f64| (16.0 * b - a) / 15.0;
    let first = r2(r1(d[0].0, d[1].0), r1(d[1].0, d[2].0));
    let second = r2(r1(d[0].1, d[1].1), r1(d[1].1, d[2].1));
    (first, second)
}

fn check_x(x: f64) -> Result<()> {
    if x.abs() < X_MIN {
        return Err(Error::Domain(format!("|x| = {} is inside the excluded region |x| < {X_MIN}", x.abs())));
    }
    Ok(())
}

/// `T f(x) = f′(x) + k (f(x) − f(−x))/x`.
pub fn dunkl_op(s: &Setting, f: &dyn Fn(f64) -> f64, x: f64) -> Result<f64> {
    let k = rank_one_k(s)?;
    check_x(x)?;
    let (d1, _) = derivatives(f, x);
    Ok(d1 + k * (f(x) - f(-x)) / x)
}

/// `T² f(x) = f″(x) + 2k f′(x)/x − k (f(x) − f(−x))/x²`.
pub fn dunkl_laplacian(s: &Setting, f: &dyn Fn(f64) -> f64, x: f64) -> Result<f64> {
    let k = rank_one_k(s)?;
    check_x(x)?;
    let (d1, d2) = derivatives(f, x);
    Ok(d2 + 2.0 * k * d1 / x - k * (f(x) - f(-x)) / (x * x))
}

/// `Δ_{k,1} f(x) = |x| T² f(x) − |x| f(x)`.
pub fn delta_k1(s: &Setting, f: &dyn Fn(f64) -> f64, x: f64) -> Result<f64> {
    Ok(x.abs() * (dunkl_laplacian(s, f, x)? - f(x)))
}

/// Coefficients `⟨f, Φ_{l,m}⟩` of a function on the line, `l ≤ l_max`, `m ∈ {0,1}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralExpansion {
    pub k: f64,
    pub l_max: usize,
    pub coeffs: Vec<[f64; 2]>,
    /// `‖f‖²` under the same quadrature.
    pub norm_sq: f64,
}

impl SpectralExpansion {
    pub fn setting(&self) -> Result<Setting> {
        Setting::rank_one(self.k)
    }

    pub fn coeff_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c[0] * c[0] + c[1] * c[1]).sum()
    }

    /// `‖f‖² − Σ c²`, the part of `f` beyond the truncation.
    pub fn truncation_gap(&self) -> f64 {
        self.norm_sq - self.coeff_norm_sq()
    }

    /// Coefficients after the multiplier `φ(eigenvalue)`.
    pub fn multiplied(&self, phi: impl Fn(f64) -> Complex64) -> Result<Vec<[Complex64; 2]>> {
        let s = self.setting()?;
        (0..=self.l_max)
            .map(|l| {
                Ok([
                    phi(eigenvalue(&s, l, 0)?) * self.coeffs[l][0],
                    phi(eigenvalue(&s, l, 1)?) * self.coeffs[l][1],
                ])
            })
            .collect()
    }
}

/// Expands `f` in the eigenbasis. Fails with [`Error::Inconclusive`] when `f` is not
/// negligible at the ends of its declared interval.
pub fn expand(s: &Setting, f: &LineFunction, l_max: usize) -> Result<SpectralExpansion> {
    let k = rank_one_k(s)?;
    check_ends(f)?;
    let (lo, hi) = f.support();
    // Φ_{l,m} oscillates in u with frequency about 2√(2l)
    let panel = EXPAND_PANEL.min(1.0 / (2.0 * l_max as f64).sqrt().max(1.0));
    let rule = theta_line_rule(k, lo, hi, panel)?;
    let mut coeffs = vec![[0.0; 2]; l_max + 1];
    let mut norm_sq = 0.0;
    for (y, w) in rule {
        let fy = f.eval(y);
        if fy == 0.0 {
            continue;
        }
        norm_sq += w * fy * fy;
        for (c, p) in coeffs.iter_mut().zip(phi_all(s, l_max, y)?) {
            c[0] += w * fy * p[0];
            c[1] += w * fy * p[1];
        }
    }
    Ok(SpectralExpansion {
        k,
        l_max,
        coeffs,
        norm_sq,
    })
}

/// `Σ φ(2l+λ_{k,m}+1) c_{l,m} Φ_{l,m}(x)`.
pub fn apply_multiplier(e: &SpectralExpansion, phi: impl Fn(f64) -> Complex64, x: f64) -> Result<Complex64> {
    let s = e.setting()?;
    let basis = phi_all(&s, e.l_max, x)?;
    let coeffs = e.multiplied(phi)?;
    Ok(coeffs
        .iter()
        .zip(&basis)
        .map(|(c, p)| c[0] * p[0] + c[1] * p[1])
        .sum())
}

/// `Σ_{l ≤ l_max} e^{−t(2l+λ_{k,m}+1)} Φ_{l,m}(x) Φ_{l,m}(y)`, which is `c_{k,1} Λ(x,y;t)`.
pub fn heat_spectral_sum(s: &Setting, x: f64, y: f64, t: f64, l_max: usize) -> Result<f64> {
    let px = phi_all(s, l_max, x)?;
    let py = phi_all(s, l_max, y)?;
    let mut sum = 0.0;
    for l in 0..=l_max {
        for m in 0..2 {
            sum += (-t * eigenvalue(s, l, m)?).exp() * px[l][m] * py[l][m];
        }
    }
    Ok(sum)
}

/// Gram matrix `∫ Φ_{l,m} Φ_{l',m'} ϑ` for `l, l' ≤ l_max`, indexed by `2l + m`,
/// computed by Gauss–Laguerre quadrature in `u = 2|x|`.
pub fn gram_matrix(s: &Setting, l_max: usize) -> Result<Vec<Vec<f64>>> {
    let k = rank_one_k(s)?;
    let n = 2 * (l_max + 1);
    // integrands are polynomial in u times u^{2k−1} e^{−u} up to degree 2 l_max + 2
    let rule = crate::specfun::gauss_laguerre(l_max + 4, 2.0 * k - 1.0)?;
    let mut g = vec![vec![0.0; n]; n];
    for (u, w) in rule.nodes.iter().zip(&rule.weights) {
        let x = 0.5 * u;
        // ϑ dx = |x|^{2k−1} dx = 2^{−2k} u^{2k−1} du on each half line; undo the rule's e^{−u}
        let weight = w * u.exp() * f64::powf(2.0, -2.0 * k);
        for sign in [1.0, -1.0] {
            let p = phi_all(s, l_max, sign * x)?;
            let flat: Vec<f64> = p.iter().flat_map(|v| [v[0], v[1]]).collect();
            for i in 0..n {
                for j in 0..n {
                    g[i][j] += weight * flat[i] * flat[j];
                }
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{gamma, laguerre};

    // Φ from the explicit formula with Laguerre polynomials
    fn phi_direct(k: f64, l: usize, m: usize, x: f64) -> f64 {
        let lam = laguerre_index(k, m);
        let norm = (f64::powf(2.0, lam + 1.0) * gamma(l as f64 + 1.0) / gamma(lam + l as f64 + 1.0)).sqrt();
        let y = if m == 0 { 1.0 } else { x } / 2f64.sqrt();
        norm * y * laguerre(l, lam, 2.0 * x.abs()).unwrap() * (-x.abs()).exp()
    }

    #[test]
    fn recurrence_matches_formula_and_parity() {
        for k in [1.0, 0.7, 2.5] {
            let s = Setting::rank_one(k).unwrap();
            for x in [0.3, 1.1, 4.0, 9.0] {
                let all = phi_all(&s, 12, x).unwrap();
                let neg = phi_all(&s, 12, -x).unwrap();
                for l in 0..=12 {
                    for (m, &v) in all[l].iter().enumerate() {
                        let d = phi_direct(k, l, m, x);
                        assert!((v - d).abs() < 1e-11 * d.abs().max(1e-3), "k={k} l={l} m={m} x={x}");
                    }
                    assert_eq!(neg[l][0], all[l][0]);
                    assert_eq!(neg[l][1], -all[l][1]);
                }
            }
        }
    }

    #[test]
    fn gram_is_identity() {
        for k in [1.0, 0.6, 1.8] {
            let s = Setting::rank_one(k).unwrap();
            let g = gram_matrix(&s, 10).unwrap();
            for (i, row) in g.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((v - target).abs() < 1e-10, "k={k} ({i},{j}) = {v}");
                }
            }
        }
    }

    #[test]
    fn dunkl_operator_on_polynomials() {
        let s = Setting::rank_one(1.0).unwrap();
        for x in [0.3, -1.7, 2.0] {
            assert!((dunkl_op(&s, &|y| y, x).unwrap() - 3.0).abs() < 1e-10);
            // even f: T f = f′
            assert!((dunkl_op(&s, &|y| y * y, x).unwrap() - 2.0 * x).abs() < 1e-9);
            // T(y³) = 3y² + 2k y²
            assert!((dunkl_op(&s, &|y| y * y * y, x).unwrap() - 5.0 * x * x).abs() < 1e-8);
            // T²(y²) = T(2y) = 2(1+2k)
            assert!((dunkl_laplacian(&s, &|y| y * y, x).unwrap() - 6.0).abs() < 1e-8);
        }
        assert!(dunkl_op(&s, &|y| y, 0.01).is_err());
    }

    #[test]
    fn laplacian_is_dunkl_squared() {
        let s = Setting::rank_one(0.8).unwrap();
        let f = |y: f64| (0.3 * y).sin() * (-0.2 * y * y).exp() + 0.5 * y.cos();
        let s2 = s.clone();
        let tf = move |y: f64| dunkl_op(&s2, &f, y).unwrap();
        for x in [0.7, -1.3, 2.2] {
            let nested = dunkl_op(&s, &tf, x).unwrap();
            assert!((nested - dunkl_laplacian(&s, &f, x).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn eigen_relation() {
        for k in [1.0, 0.6] {
            let s = Setting::rank_one(k).unwrap();
            for l in 0..=5 {
                for m in 0..2 {
                    let mu = eigenvalue(&s, l, m).unwrap();
                    let s2 = s.clone();
                    let f = move |y: f64| phi(&s2, l, m, y).unwrap();
                    for i in 0..60 {
                        let x = 0.1 + 0.1 * i as f64;
                        for x in [x, -x] {
                            let r = -delta_k1(&s, &f, x).unwrap() - mu * f(x);
                            assert!(r.abs() < 1e-6, "k={k} l={l} m={m} x={x}: {r}");
                        }
                    }
                }
            }
        }
        assert_eq!(eigenvalue(&Setting::rank_one(1.0).unwrap(), 0, 0).unwrap(), 2.0);
    }

    #[test]
    fn expansion_of_a_basis_function() {
        let s = Setting::rank_one(1.0).unwrap();
        let s2 = s.clone();
        let f = LineFunction::new(move |y| phi(&s2, 2, 1, y).unwrap(), -60.0, 60.0).unwrap();
        let e = expand(&s, &f, 20).unwrap();
        for (l, c) in e.coeffs.iter().enumerate() {
            for (m, v) in c.iter().enumerate() {
                let target = if (l, m) == (2, 1) { 1.0 } else { 0.0 };
                assert!((v - target).abs() < 1e-8, "({l},{m}) = {v}");
            }
        }
        assert!(e.truncation_gap().abs() < 1e-8);
    }

    #[test]
    fn parseval_gap_shrinks() {
        let s = Setting::rank_one(1.0).unwrap();
        let f = LineFunction::smooth_bump(1.0, 1.5).unwrap();
        let gaps: Vec<f64> = [20, 40, 60]
            .iter()
            .map(|&l| expand(&s, &f, l).unwrap().truncation_gap())
            .collect();
        assert!(gaps[0] >= gaps[1] && gaps[1] >= gaps[2] && gaps[2] >= -1e-8, "{gaps:?}");
        assert!(gaps[2] < 1e-3 * expand(&s, &f, 0).unwrap().norm_sq, "{gaps:?}");
    }

    #[test]
    fn spectral_sum_at_origin() {
        let k = 1.3;
        let s = Setting::rank_one(k).unwrap();
        let c = s.norm_constant().unwrap();
        for t in [0.5, 1.0, 2.0] {
            let sum = heat_spectral_sum(&s, 0.0, 0.0, t, 60).unwrap();
            assert!((sum / (c * t.sinh().powf(-2.0 * k)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_multiplier_reconstructs() {
        let s = Setting::rank_one(1.0).unwrap();
        let f = LineFunction::new(|y: f64| (-(y - 0.5).powi(2)).exp(), -12.0, 12.0).unwrap();
        let e = expand(&s, &f, 60).unwrap();
        for x in [-1.0, 0.5, 2.0] {
            let v = apply_multiplier(&e, |_| Complex64::new(1.0, 0.0), x).unwrap();
            assert!((v.re - f.eval(x)).abs() < 1e-4 && v.im == 0.0, "x={x}: {v}");
        }
    }
}
