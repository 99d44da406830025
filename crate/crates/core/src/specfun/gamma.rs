use num_complex::Complex64;
use std::f64::consts::PI;

use crate::{Error, Result};

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_P: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln Γ(x)` for real `x` that is not a nonpositive integer. For negative
/// arguments this is `ln |Γ(x)|`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin().abs()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_P[0];
    for (i, p) in LANCZOS_P.iter().enumerate().skip(1) {
        acc += p / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + acc.ln()
}

/// `Γ(x)` for real `x`.
pub fn gamma(x: f64) -> f64 {
    if x == x.floor() && x <= 0.0 {
        return f64::NAN;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    ln_gamma(x).exp()
}

/// Log-Gamma on the complex plane, continued from the real axis.
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor() {
        return Err(Error::Domain(format!("Gamma has a pole at {}", z.re)));
    }
    Ok(ln_gamma_c(z))
}

fn ln_gamma_c(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let pi = Complex64::new(PI, 0.0);
        return pi.ln() - (pi * z).sin().ln() - ln_gamma_c(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_P[0], 0.0);
    for (i, p) in LANCZOS_P.iter().enumerate().skip(1) {
        acc += *p / (z + i as f64);
    }
    let t = z + (LANCZOS_G + 0.5);
    (z + 0.5) * t.ln() - t + acc.ln() + LN_SQRT_2PI
}

pub fn gamma_complex(z: Complex64) -> Result<Complex64> {
    ln_gamma_complex(z).map(|l| l.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        assert!(ln_gamma(1.0).abs() < 1e-15);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-14);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        for n in 1..20 {
            let fact: f64 = (1..n).map(|i| i as f64).product();
            assert!((gamma(n as f64) / fact - 1.0).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn complex_matches_real_axis() {
        for &x in &[0.3, 1.7, 4.25, 11.5] {
            let z = ln_gamma_complex(Complex64::new(x, 0.0)).unwrap();
            assert!((z.re - ln_gamma(x)).abs() < 1e-13);
            assert!(z.im.abs() < 1e-13);
        }
        let z5 = ln_gamma_complex(Complex64::new(5.0, 0.0)).unwrap();
        assert!((z5.re - 24f64.ln()).abs() < 1e-13);
        assert!(ln_gamma_complex(Complex64::new(1.0, 0.0)).unwrap().norm() < 1e-15);
    }

    #[test]
    fn reflection_modulus_on_imaginary_axis() {
        // |Γ(iσ)|² = π / (σ sinh πσ)
        for &s in &[0.25, 0.5, 1.0, 2.0, 3.0, 7.5] {
            let g = gamma_complex(Complex64::new(0.0, s)).unwrap();
            let exact = (PI / (s * (PI * s).sinh())).sqrt();
            assert!((g.norm() / exact - 1.0).abs() < 1e-12, "sigma={s}");
        }
        let g = gamma_complex(Complex64::new(0.0, 1.0)).unwrap();
        assert!((g.norm() - 0.521_564_046_9).abs() < 1e-9);
    }

    #[test]
    fn conjugation_and_recurrence() {
        let z = Complex64::new(0.7, 2.3);
        let a = gamma_complex(z).unwrap();
        let b = gamma_complex(z.conj()).unwrap();
        assert!((a - b.conj()).norm() < 1e-13 * a.norm());
        let c = gamma_complex(z + 1.0).unwrap();
        assert!((c - z * a).norm() < 1e-13 * c.norm());
    }

    #[test]
    fn poles_rejected() {
        assert!(ln_gamma_complex(Complex64::new(0.0, 0.0)).is_err());
        assert!(ln_gamma_complex(Complex64::new(-3.0, 0.0)).is_err());
    }
}
