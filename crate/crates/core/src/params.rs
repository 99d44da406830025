//! The reflection-group setting `G = Z_2^N` with multiplicity vector `k`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use crate::intertwine::CoordinateRule;
use crate::specfun::{gauss_jacobi, ln_gamma, NormalizedBessel, QuadratureRule};
use crate::{Error, Result};

type RuleKey = (usize, usize, usize, usize);

#[derive(Debug, Default)]
struct Caches {
    coordinate: Mutex<HashMap<RuleKey, Arc<CoordinateRule>>>,
    jacobi: Mutex<HashMap<(u64, u64, usize), Arc<QuadratureRule>>>,
}

/// Dimension, multiplicities and every constant derived from them.
///
/// Cloning is cheap; clones share the quadrature-rule caches.
#[derive(Debug, Clone)]
pub struct Setting {
    k: Vec<f64>,
    k_total: f64,
    q: f64,
    nu: f64,
    valid: bool,
    sphere_integral: f64,
    gamma_nu1: f64,
    bessel: Option<Arc<NormalizedBessel>>,
    caches: Arc<Caches>,
}

impl PartialEq for Setting {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k
    }
}

impl Setting {
    pub fn new(k: Vec<f64>) -> Result<Self> {
        if k.is_empty() {
            return Err(Error::Domain("the multiplicity vector must be nonempty".into()));
        }
        if let Some(bad) = k.iter().find(|&&kj| !(kj > 0.0 && kj.is_finite())) {
            return Err(Error::Domain(format!("multiplicities must be positive and finite, got {bad}")));
        }
        let n = k.len() as f64;
        let k_total: f64 = k.iter().sum();
        let q = 2.0 * k_total + n - 1.0;
        let nu = k_total + (n - 3.0) / 2.0;
        let valid = 2.0 * k_total + n - 2.0 > 0.0;
        let ln_sphere = std::f64::consts::LN_2 + k.iter().map(|&kj| ln_gamma(kj + 0.5)).sum::<f64>()
            - ln_gamma(k_total + n / 2.0);
        let bessel = if valid {
            Some(Arc::new(NormalizedBessel::new(nu)?))
        } else {
            None
        };
        Ok(Setting {
            k_total,
            q,
            nu,
            valid,
            sphere_integral: ln_sphere.exp(),
            gamma_nu1: if valid { ln_gamma(nu + 1.0).exp() } else { f64::NAN },
            bessel,
            caches: Arc::default(),
            k,
        })
    }

    /// The rank-one setting `N = 1` with multiplicity `k`.
    pub fn rank_one(k: f64) -> Result<Self> {
        Self::new(vec![k])
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// `⟨k⟩ = Σ k_j`.
    pub fn k_total(&self) -> f64 {
        self.k_total
    }

    /// Homogeneity exponent `2⟨k⟩ + N − 1` of the measure.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Bessel order `⟨k⟩ + (N−3)/2` of the kernel formulas.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `2⟨k⟩ + N − 2 > 0`, required by every measure and kernel operation.
    pub fn is_valid(&self) -> bool {
        self.valid
    }

    pub fn require_valid(&self) -> Result<()> {
        if self.valid {
            Ok(())
        } else {
            Err(Error::InvalidSetting(2.0 * self.k_total + self.dim() as f64 - 2.0))
        }
    }

    pub fn require_rank_one(&self) -> Result<()> {
        if self.dim() == 1 {
            Ok(())
        } else {
            Err(Error::Unsupported(format!(
                "this operation is implemented for N = 1 only (N = {})",
                self.dim()
            )))
        }
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite point {x:?}")));
        }
        Ok(())
    }

    /// `h_k(x) = Π |x_j|^{2k_j}`.
    ///
    /// # Panics
    /// If `x` does not have `N` coordinates.
    pub fn weight_h(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "point dimension");
        x.iter().zip(&self.k).map(|(xj, kj)| xj.abs().powf(2.0 * kj)).product()
    }

    /// `ϑ(x) = ‖x‖^{-1} h_k(x)`; undefined at the origin.
    pub fn weight_theta(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let r = crate::metric::norm(x);
        if r == 0.0 {
            return Err(Error::Domain("the weight ‖x‖^{-1} h_k(x) is singular at the origin".into()));
        }
        Ok(self.weight_h(x) / r)
    }

    /// `∫_{S^{N-1}} h_k dσ = 2 Π Γ(k_j + 1/2) / Γ(⟨k⟩ + N/2)`.
    pub fn sphere_integral(&self) -> f64 {
        self.sphere_integral
    }

    /// `c_{k,1} = (∫ e^{-‖x‖} ϑ(x) dx)^{-1} = (Γ(q) A_s)^{-1}`.
    pub fn norm_constant(&self) -> Result<f64> {
        self.require_valid()?;
        Ok((-(ln_gamma(self.q) + self.sphere_integral.ln())).exp())
    }

    /// `Γ(ν+1)`, the prefactor of the exponential translation and of the heat kernel.
    pub fn gamma_nu1(&self) -> f64 {
        self.gamma_nu1
    }

    /// `Γ(ν+1) / (√π Γ(ν+1/2))`, normalizing the radial translation formula.
    pub fn translation_constant(&self) -> Result<f64> {
        self.require_valid()?;
        Ok((ln_gamma(self.nu + 1.0) - 0.5 * PI.ln() - ln_gamma(self.nu + 0.5)).exp())
    }

    pub fn bessel(&self) -> Result<&NormalizedBessel> {
        self.require_valid()?;
        self.bessel
            .as_deref()
            .ok_or_else(|| Error::InvalidSetting(2.0 * self.k_total + self.dim() as f64 - 2.0))
    }

    pub(crate) fn coordinate_rule(
        &self,
        coord: usize,
        left: usize,
        right: usize,
        order: usize,
    ) -> Result<Arc<CoordinateRule>> {
        let key = (coord, left, right, order);
        if let Some(r) = self.caches.coordinate.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(r.clone());
        }
        let rule = Arc::new(CoordinateRule::graded(self.k[coord], left, right, order)?);
        self.caches
            .coordinate
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key, rule.clone());
        Ok(rule)
    }

    pub(crate) fn jacobi_rule(&self, order: usize, alpha: f64, beta: f64) -> Result<Arc<QuadratureRule>> {
        let key = (alpha.to_bits(), beta.to_bits(), order);
        if let Some(r) = self.caches.jacobi.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(r.clone());
        }
        let rule = Arc::new(gauss_jacobi(order, alpha, beta)?);
        self.caches
            .jacobi
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key, rule.clone());
        Ok(rule)
    }
}

/// `c_{k,1}` by direct quadrature of `∫ e^{-‖x‖} ϑ(x) dx` in spherical coordinates:
/// adaptive rules in the radius and in the angles (`N ≤ 3`).
pub fn norm_constant_quadrature(s: &Setting) -> Result<f64> {
    use crate::specfun::{integrate_adaptive, integrate_adaptive_with_points, Tolerance};
    s.require_valid()?;
    let tol = Tolerance::relative(1e-13);
    let q = s.q();
    let radial = integrate_adaptive_with_points(
        |r: f64| (-r).exp() * r.powf(q - 1.0),
        &[0.0, 1.0, 10.0, 100.0, 800.0],
        tol,
    )
    .value;
    let angular = match s.dim() {
        1 => 2.0,
        2 => {
            let pts: Vec<f64> = (0..=4).map(|i| i as f64 * PI / 2.0).collect();
            let f = |phi: f64| s.weight_h(&[phi.cos(), phi.sin()]);
            integrate_adaptive_with_points(f, &pts, tol).value
        }
        3 => {
            let pts: Vec<f64> = (0..=4).map(|i| i as f64 * PI / 2.0).collect();
            let inner = |theta: f64| {
                let (st, ct) = theta.sin_cos();
                let f = |phi: f64| {
                    let (sp, cp) = phi.sin_cos();
                    s.weight_h(&[st * cp, st * sp, ct])
                };
                integrate_adaptive_with_points(f, &pts, tol).value * st
            };
            integrate_adaptive(inner, 0.0, PI / 2.0, tol).value
                + integrate_adaptive(inner, PI / 2.0, PI, tol).value
        }
        n => return Err(Error::Unsupported(format!("direct normalization quadrature for N = {n}"))),
    };
    Ok(1.0 / (radial * angular))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn derived_constants() {
        let s = Setting::new(vec![0.5, 1.5]).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.k_total(), 2.0);
        assert_eq!(s.q(), 5.0);
        assert_eq!(s.nu(), 1.5);
        assert!(s.is_valid());
        // λ_{k,m} = 2m + 2⟨k⟩ + N − 2 must equal 2m + q − 1
        assert_eq!(2.0 * s.k_total() + s.dim() as f64 - 2.0, s.q() - 1.0);
        let small = Setting::rank_one(0.25).unwrap();
        assert!(!small.is_valid());
        assert!(small.norm_constant().is_err());
        assert!(Setting::new(vec![1.0, 0.0]).is_err());
        assert!(Setting::new(vec![]).is_err());
    }

    #[test]
    fn weights() {
        let s = Setting::rank_one(1.0).unwrap();
        assert_eq!(s.weight_h(&[2.0]), 4.0);
        assert_eq!(s.weight_theta(&[3.0]).unwrap(), 3.0);
        assert!(s.weight_theta(&[0.0]).is_err());
        let s2 = Setting::new(vec![0.6, 0.6]).unwrap();
        assert_eq!(s2.weight_theta(&[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(Setting::new(vec![0.3, 2.0, 1.0]).unwrap().weight_h(&[1.0, 1.0, 1.0]), 1.0);
    }

    #[test]
    fn weight_h_invariant_under_sign_flips() {
        let s = Setting::new(vec![0.3, 1.7, 0.9]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let h = s.weight_h(&x);
            for g in 0..8u32 {
                let gx: Vec<f64> =
                    x.iter().enumerate().map(|(j, v)| if g >> j & 1 == 1 { -v } else { *v }).collect();
                assert_eq!(s.weight_h(&gx), h);
            }
        }
    }

    #[test]
    fn theta_homogeneity() {
        let s = Setting::new(vec![0.7, 1.2]).unwrap();
        let x = [0.8, -1.3];
        let base = s.weight_theta(&x).unwrap();
        for t in [0.5, 2.0, 10.0] {
            let scaled = s.weight_theta(&[t * x[0], t * x[1]]).unwrap();
            let expected = t.powf(2.0 * s.k_total() - 1.0) * base;
            assert!((scaled / expected - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn norm_constant_rank_one() {
        assert!((Setting::rank_one(1.0).unwrap().norm_constant().unwrap() - 0.5).abs() < 1e-15);
        assert!((Setting::rank_one(1.5).unwrap().norm_constant().unwrap() - 0.25).abs() < 1e-15);
        let k = 0.8;
        let c = Setting::rank_one(k).unwrap().norm_constant().unwrap();
        assert!((c * 2.0 * gamma(2.0 * k) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn norm_constant_matches_quadrature() {
        for k in [vec![1.0], vec![0.6], vec![0.5, 1.0], vec![0.3, 0.75], vec![0.5, 0.5, 0.5], vec![1.2, 0.2, 0.7]] {
            let s = Setting::new(k.clone()).unwrap();
            let closed = s.norm_constant().unwrap();
            let quad = norm_constant_quadrature(&s).unwrap();
            assert!((closed / quad - 1.0).abs() < 1e-10, "k = {k:?}: {closed} vs {quad}");
        }
    }
}
