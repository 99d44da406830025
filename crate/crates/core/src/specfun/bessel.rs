//! Normalized modified Bessel function
//! `Ĩ_ν(w) = (w/2)^{-ν} I_ν(w) = Σ_n (w²/4)^n / (n! Γ(n+ν+1))`,
//! an entire even function of `w`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use super::gamma::ln_gamma;
use super::quadrature::{gauss_jacobi, QuadratureRule};
use crate::{Error, Result};

const SERIES_RADIUS: f64 = 40.0;
const COMPLEX_SERIES_RADIUS: f64 = 8.0;

/// Evaluator of `Ĩ_ν` for a fixed order `ν > -1/2`, caching its quadrature rules.
#[derive(Debug)]
pub struct NormalizedBessel {
    nu: f64,
    ln_gamma_nu1: f64,
    inv_gamma_nu1: f64,
    // 1 / (√π Γ(ν+1/2)), the normalization of the Poisson integral
    poisson_norm: f64,
    rules: Mutex<HashMap<usize, Arc<QuadratureRule>>>,
}

impl NormalizedBessel {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu > -0.5) || !nu.is_finite() {
            return Err(Error::Domain(format!("Bessel order {nu} must exceed -1/2")));
        }
        let ln_gamma_nu1 = ln_gamma(nu + 1.0);
        Ok(NormalizedBessel {
            nu,
            ln_gamma_nu1,
            inv_gamma_nu1: (-ln_gamma_nu1).exp(),
            poisson_norm: (-(0.5 * PI.ln() + ln_gamma(nu + 0.5))).exp(),
            rules: Mutex::new(HashMap::new()),
        })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `Ĩ_ν(w)` for real `w`.
    pub fn value(&self, w: f64) -> f64 {
        let w = w.abs();
        if w <= SERIES_RADIUS {
            self.series_real(w)
        } else {
            self.scaled(w) * w.exp()
        }
    }

    /// `e^{-|w|} Ĩ_ν(w)` for real `w`; bounded by `1/Γ(ν+1)`.
    pub fn scaled(&self, w: f64) -> f64 {
        let w = w.abs();
        if w <= SERIES_RADIUS {
            return self.series_real(w) * (-w).exp();
        }
        self.asymptotic(w).unwrap_or_else(|| self.log_series(w))
    }

    fn series_real(&self, w: f64) -> f64 {
        let z = 0.25 * w * w;
        let mut term = self.inv_gamma_nu1;
        let mut sum = term;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= z / (n * (n + self.nu));
            sum += term;
            if term <= 1e-17 * sum && n > 0.5 * w {
                return sum;
            }
        }
    }

    // Hankel expansion of e^{-w} I_ν(w); None when it cannot reach full precision.
    fn asymptotic(&self, w: f64) -> Option<f64> {
        let four_nu2 = 4.0 * self.nu * self.nu;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut prev = f64::INFINITY;
        let mut k = 0.0f64;
        loop {
            k += 1.0;
            term *= -(four_nu2 - (2.0 * k - 1.0).powi(2)) / (8.0 * k * w);
            if term.abs() > prev {
                return None;
            }
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
            prev = term.abs();
            if k > 200.0 {
                return None;
            }
        }
        let prefactor = (-self.nu * (0.5 * w).ln()).exp() / (2.0 * PI * w).sqrt();
        Some(prefactor * sum)
    }

    // power series with each term carried in logarithmic form, scaled by e^{-w}
    fn log_series(&self, w: f64) -> f64 {
        let lz = 2.0 * (0.5 * w).ln();
        let mut lt = -self.ln_gamma_nu1 - w;
        let mut sum = lt.exp();
        let mut n = 0.0;
        loop {
            n += 1.0;
            lt += lz - (n * (n + self.nu)).ln();
            let t = lt.exp();
            sum += t;
            if n > 0.5 * w && t <= 1e-17 * sum {
                return sum;
            }
        }
    }

    /// `Ĩ_ν(w)` for complex `w`.
    pub fn value_complex(&self, w: Complex64) -> Complex64 {
        let scale = w.re.abs();
        self.scaled_complex(w) * scale.exp()
    }

    /// `e^{-|Re w|} Ĩ_ν(w)`.
    pub fn scaled_complex(&self, w: Complex64) -> Complex64 {
        if w.im == 0.0 {
            return Complex64::new(self.scaled(w.re), 0.0);
        }
        if w.norm() <= COMPLEX_SERIES_RADIUS {
            return self.series_complex(w) * (-w.re.abs()).exp();
        }
        let order = auto_order(w);
        match self.quadrature_scaled(w, order) {
            Ok(v) => v,
            // orders produced by auto_order are always admissible
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }
    }

    fn series_complex(&self, w: Complex64) -> Complex64 {
        let z = 0.25 * w * w;
        let mut term = Complex64::new(self.inv_gamma_nu1, 0.0);
        let mut sum = term;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= z / (n * (n + self.nu));
            sum += term;
            if term.norm() <= 1e-17 * sum.norm().max(self.inv_gamma_nu1 * 1e-3) && n > 0.5 * w.norm() {
                return sum;
            }
        }
    }

    fn rule(&self, order: usize) -> Result<Arc<QuadratureRule>> {
        let mut cache = self.rules.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(r) = cache.get(&order) {
            return Ok(r.clone());
        }
        let a = self.nu - 0.5;
        let r = Arc::new(gauss_jacobi(order, a, a)?);
        cache.insert(order, r.clone());
        Ok(r)
    }

    /// `e^{-|Re w|} Ĩ_ν(w)` from the Poisson integral
    /// `(√π Γ(ν+1/2))^{-1} ∫ e^{wu} (1-u²)^{ν-1/2} du` with a Gauss–Jacobi rule of the given order.
    pub fn quadrature_scaled(&self, w: Complex64, order: usize) -> Result<Complex64> {
        let rule = self.rule(order)?;
        let shift = w.re.abs();
        let v = rule.integrate(|u| (w * u - shift).exp());
        Ok(v * self.poisson_norm)
    }
}

fn auto_order(w: Complex64) -> usize {
    let n = (0.7 * w.im.abs()).max(3.0 * w.re.abs().sqrt()).max(64.0) + 40.0;
    let n = n.ceil() as usize;
    n.div_ceil(16) * 16
}

/// `Ĩ_ν(w)`.
pub fn bessel_i_norm(nu: f64, w: Complex64) -> Result<Complex64> {
    Ok(NormalizedBessel::new(nu)?.value_complex(w))
}

/// `Ĩ_ν(w)` by a Gauss–Jacobi rule of the given order, independent of the series paths.
pub fn bessel_i_norm_quadrature(nu: f64, w: Complex64, order: usize) -> Result<Complex64> {
    let b = NormalizedBessel::new(nu)?;
    Ok(b.quadrature_scaled(w, order)? * w.re.abs().exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma::gamma;

    #[test]
    fn value_at_origin() {
        for nu in [-0.4, 0.0, 0.5, 2.5, 7.0] {
            let b = NormalizedBessel::new(nu).unwrap();
            assert!((b.value(0.0) - 1.0 / gamma(nu + 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn half_order_closed_form() {
        let b = NormalizedBessel::new(0.5).unwrap();
        let exact = 2.0 * 1f64.sinh() / PI.sqrt();
        assert!((b.value(1.0) - exact).abs() < 1e-14);
        assert!((exact - 1.326_072_5).abs() < 1e-7);
        // Ĩ_{1/2}(w) = 2 sinh(w) / (√π w) on every path
        for w in [3.0f64, 39.0, 41.0, 120.0, 900.0] {
            let exact_scaled = (1.0 - (-2.0 * w).exp()) / (PI.sqrt() * w);
            assert!((b.scaled(w) / exact_scaled - 1.0).abs() < 1e-13, "w={w}");
        }
        // on the imaginary axis Ĩ_{1/2}(iy) = 2 sin(y)/(√π y)
        for y in [0.5, 7.0, 30.0, 200.0] {
            let v = b.value_complex(Complex64::new(0.0, y));
            let exact = 2.0 * y.sin() / (PI.sqrt() * y);
            assert!((v.re - exact).abs() < 1e-12 && v.im.abs() < 1e-12, "y={y}");
        }
    }

    #[test]
    fn real_paths_agree_with_quadrature() {
        for nu in [-0.3, 0.0, 0.5, 1.5, 4.0] {
            let b = NormalizedBessel::new(nu).unwrap();
            for w in [0.3, 5.0, 25.0, 39.9, 40.1, 60.0, 200.0] {
                let series = b.scaled(w);
                let quad = b.quadrature_scaled(Complex64::new(w, 0.0), 160).unwrap();
                assert!(
                    (series - quad.re).abs() <= 1e-11 * series.abs(),
                    "nu={nu} w={w}: {series} vs {}",
                    quad.re
                );
            }
        }
    }

    #[test]
    fn complex_paths_agree() {
        let b = NormalizedBessel::new(1.25).unwrap();
        for &(re, im) in &[(1.0, 2.0), (5.0, -6.0), (0.0, 7.9), (3.0, 20.0), (-12.0, 40.0)] {
            let w = Complex64::new(re, im);
            let auto = b.scaled_complex(w);
            let series = b.series_complex(w) * (-w.re.abs()).exp();
            let quad = b.quadrature_scaled(w, 256).unwrap();
            assert!((auto - quad).norm() < 1e-11, "w={w}");
            if w.norm() < 25.0 {
                assert!((series - quad).norm() < 1e-11, "w={w}");
            }
        }
    }

    #[test]
    fn conjugation_and_parity() {
        let b = NormalizedBessel::new(0.75).unwrap();
        let w = Complex64::new(2.5, 11.0);
        let v = b.value_complex(w);
        assert!((b.value_complex(w.conj()) - v.conj()).norm() < 1e-13 * v.norm());
        assert!((b.value_complex(-w) - v).norm() < 1e-12 * v.norm());
    }

    #[test]
    fn quadrature_stable_under_order_doubling() {
        let w = Complex64::new(10.0, 60.0);
        let a = bessel_i_norm_quadrature(2.0, w, 128).unwrap();
        let b = bessel_i_norm_quadrature(2.0, w, 256).unwrap();
        assert!((a - b).norm() < 1e-11 * a.norm().max(1.0));
    }

    #[test]
    fn rejects_small_order() {
        assert!(NormalizedBessel::new(-0.5).is_err());
    }
}
