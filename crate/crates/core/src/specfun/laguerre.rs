use crate::{Error, Result};

/// Generalized Laguerre polynomials `L_0^μ(t), ..., L_{lmax}^μ(t)`.
pub fn laguerre_all(lmax: usize, mu: f64, t: f64) -> Result<Vec<f64>> {
    if mu <= -1.0 || !mu.is_finite() {
        return Err(Error::Domain(format!("Laguerre parameter {mu} must exceed -1")));
    }
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(1.0);
    if lmax == 0 {
        return Ok(out);
    }
    out.push(1.0 + mu - t);
    for l in 1..lmax {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0 + mu - t) * out[l] - (lf + mu) * out[l - 1]) / (lf + 1.0);
        out.push(next);
    }
    Ok(out)
}

pub fn laguerre(l: usize, mu: f64, t: f64) -> Result<f64> {
    Ok(laguerre_all(l, mu, t)?[l])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma::gamma;

    // explicit sum  Σ_j (-1)^j Γ(l+μ+1) / (Γ(l-j+1) Γ(μ+j+1) j!) t^j
    // returns the sum and the sum of term magnitudes
    fn explicit(l: usize, mu: f64, t: f64) -> (f64, f64) {
        (0..=l)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * gamma(l as f64 + mu + 1.0)
                    / (gamma((l - j) as f64 + 1.0) * gamma(mu + j as f64 + 1.0) * gamma(j as f64 + 1.0))
                    * t.powi(j as i32)
            })
            .fold((0.0, 0.0), |(s, m), x| (s + x, m + x.abs()))
    }

    #[test]
    fn matches_explicit_sum() {
        for &mu in &[0.0, 0.5, 3.0] {
            for l in 0..=12 {
                for i in 0..=40 {
                    let t = 0.5 * i as f64;
                    let a = laguerre(l, mu, t).unwrap();
                    let (b, magnitude) = explicit(l, mu, t);
                    let scale = magnitude.max(1.0);
                    assert!((a - b).abs() <= 1e-10 * scale, "l={l} mu={mu} t={t}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn rejects_bad_parameter() {
        assert!(laguerre(3, -1.0, 0.2).is_err());
    }
}
