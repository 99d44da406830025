//! The intertwining operator `V_k` for `G = Z_2^N`.
//!
//! `V_k f(x) = ∫ f(t_1 x_1, …, t_N x_N) Π_j c_{k_j} (1−t_j)^{k_j−1} (1+t_j)^{k_j} dt`,
//! `c_k = Γ(k+1/2) / (√π Γ(k))`: a tensor product of one-dimensional probability
//! densities on `[−1, 1]`.
//!
//! Integrands built from the heat kernel concentrate sharply at one end of
//! `[−1, 1]` at small times, so every coordinate rule can be geometrically graded
//! towards either endpoint. Nodes carry `1 − t` and `1 + t` computed directly,
//! since `1 − t` loses all precision by subtraction at the deepest grading levels.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::params::Setting;
use crate::specfun::{gauss_jacobi, gauss_legendre, integrate_adaptive, ln_gamma, Scalar, Tolerance};
use crate::{Error, Result};

/// Deepest grading level; panels never get narrower than `2^-48`.
pub const MAX_LEVEL: usize = 48;
/// Default order of the ungraded rule.
pub const DEFAULT_ORDER: usize = 64;
const END_ORDER: usize = 32;
const INTERIOR_ORDER: usize = 24;

/// The coordinate box `Π[−|x_j|, |x_j|]`, which is the convex hull of the orbit `G·x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullBox {
    pub halfwidths: Vec<f64>,
}

impl HullBox {
    pub fn contains(&self, eta: &[f64]) -> bool {
        eta.len() == self.halfwidths.len() && self.halfwidths.iter().zip(eta).all(|(h, e)| e.abs() <= *h)
    }

    /// All `2^N` sign images of the corner `(h_1, …, h_N)`.
    pub fn orbit(&self) -> Vec<Vec<f64>> {
        let n = self.halfwidths.len();
        (0..1u64 << n)
            .map(|g| {
                self.halfwidths
                    .iter()
                    .enumerate()
                    .map(|(j, h)| if g >> j & 1 == 1 { -h } else { *h })
                    .collect()
            })
            .collect()
    }
}

pub fn hull(x: &[f64]) -> HullBox {
    HullBox {
        halfwidths: x.iter().map(|v| v.abs()).collect(),
    }
}

/// A one-dimensional rule for the probability density `c_k (1−t)^{k−1} (1+t)^k`.
#[derive(Debug, Clone)]
pub struct CoordinateRule {
    pub t: Vec<f64>,
    pub one_minus: Vec<f64>,
    pub one_plus: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Number of geometric grading levels at the two ends, plus the order of an ungraded rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grading {
    pub left: usize,
    pub right: usize,
    pub order: usize,
}

impl Default for Grading {
    fn default() -> Self {
        Grading {
            left: 0,
            right: 0,
            order: DEFAULT_ORDER,
        }
    }
}

impl Grading {
    /// Levels for an integrand behaving like `exp(β t)` (peak at `+1`) or `exp(−β t)`.
    pub fn for_sharpness(beta: f64, peak_right: bool) -> Self {
        let level = sharpness_level(beta);
        Grading {
            left: if peak_right { 0 } else { level },
            right: if peak_right { level } else { 0 },
            order: DEFAULT_ORDER,
        }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }
}

/// `⌈log₂(β/4)⌉` for `β > 8`, else `0`, capped at [`MAX_LEVEL`].
pub fn sharpness_level(beta: f64) -> usize {
    if !(beta > 8.0) {
        return 0;
    }
    ((beta / 4.0).log2().ceil() as usize).min(MAX_LEVEL)
}

fn density_constant(k: f64) -> f64 {
    (ln_gamma(k + 0.5) - 0.5 * PI.ln() - ln_gamma(k)).exp()
}

enum Anchor {
    // (lo, hi) offsets from −1
    Left(f64, f64),
    // (hi, lo) offsets from +1
    Right(f64, f64),
    Plain(f64, f64),
}

impl CoordinateRule {
    pub fn graded(k: f64, left: usize, right: usize, order: usize) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::Domain(format!("multiplicity {k} must be positive")));
        }
        let (left, right) = (left.min(MAX_LEVEL), right.min(MAX_LEVEL));
        let ck = density_constant(k);
        let mut rule = CoordinateRule {
            t: Vec::new(),
            one_minus: Vec::new(),
            one_plus: Vec::new(),
            weights: Vec::new(),
        };
        if left == 0 && right == 0 {
            let r = gauss_jacobi(order.max(1), k - 1.0, k)?;
            for (&xi, &w) in r.nodes.iter().zip(&r.weights) {
                rule.push(xi, 1.0 - xi, 1.0 + xi, ck * w);
            }
            return Ok(rule);
        }

        // offsets of the left panels are measured from −1, of the right ones from +1
        let mut panels = Vec::new();
        if left > 0 {
            panels.push(Anchor::Left(0.0, 0.5f64.powi(left as i32)));
            for j in (1..left as i32).rev() {
                panels.push(Anchor::Left(0.5f64.powi(j + 1), 0.5f64.powi(j)));
            }
        } else {
            panels.push(Anchor::Left(0.0, 1.5));
        }
        if left > 0 && right > 0 {
            panels.push(Anchor::Plain(-0.5, 0.5));
        }
        if right > 0 {
            for j in 1..right as i32 {
                panels.push(Anchor::Right(0.5f64.powi(j), 0.5f64.powi(j + 1)));
            }
            panels.push(Anchor::Right(0.5f64.powi(right as i32), 0.0));
        } else {
            panels.push(Anchor::Right(1.5, 0.0));
        }

        let gl_mid = gauss_legendre(END_ORDER)?;
        let gl = gauss_legendre(INTERIOR_ORDER)?;
        let gj_left = gauss_jacobi(END_ORDER, 0.0, k)?;
        let gj_right = gauss_jacobi(END_ORDER, k - 1.0, 0.0)?;
        for p in &panels {
            match *p {
                Anchor::Left(0.0, h) => {
                    let scale = (0.5 * h).powf(k + 1.0);
                    for (&xi, &w) in gj_left.nodes.iter().zip(&gj_left.weights) {
                        let e = 0.5 * h * (1.0 + xi);
                        let om = 2.0 - e;
                        rule.push(e - 1.0, om, e, ck * scale * w * om.powf(k - 1.0));
                    }
                }
                Anchor::Right(h, 0.0) => {
                    let scale = (0.5 * h).powf(k);
                    for (&xi, &w) in gj_right.nodes.iter().zip(&gj_right.weights) {
                        let d = 0.5 * h * (1.0 - xi);
                        let op = 2.0 - d;
                        rule.push(1.0 - d, d, op, ck * scale * w * op.powf(k));
                    }
                }
                Anchor::Left(lo, hi) => {
                    for (&xi, &w) in gl.nodes.iter().zip(&gl.weights) {
                        let e = lo + 0.5 * (hi - lo) * (1.0 + xi);
                        let om = 2.0 - e;
                        rule.push(e - 1.0, om, e, ck * 0.5 * (hi - lo) * w * om.powf(k - 1.0) * e.powf(k));
                    }
                }
                Anchor::Right(hi, lo) => {
                    for (&xi, &w) in gl.nodes.iter().zip(&gl.weights) {
                        let d = lo + 0.5 * (hi - lo) * (1.0 - xi);
                        let op = 2.0 - d;
                        rule.push(1.0 - d, d, op, ck * 0.5 * (hi - lo) * w * d.powf(k - 1.0) * op.powf(k));
                    }
                }
                Anchor::Plain(lo, hi) => {
                    for (&xi, &w) in gl_mid.nodes.iter().zip(&gl_mid.weights) {
                        let t = lo + 0.5 * (hi - lo) * (1.0 + xi);
                        let (om, op) = (1.0 - t, 1.0 + t);
                        rule.push(t, om, op, ck * 0.5 * (hi - lo) * w * om.powf(k - 1.0) * op.powf(k));
                    }
                }
            }
        }
        Ok(rule)
    }

    fn push(&mut self, t: f64, one_minus: f64, one_plus: f64, w: f64) {
        self.t.push(t);
        self.one_minus.push(one_minus);
        self.one_plus.push(one_plus);
        self.weights.push(w);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// A node of the product rule: `η = (t_j x_j)` together with `1 − t_j²` per coordinate.
#[derive(Debug)]
pub struct HullNode<'a> {
    pub eta: &'a [f64],
    pub t: &'a [f64],
    pub one_minus_t2: &'a [f64],
}

/// `V_k f(x)` with the default rules.
pub fn vk_apply<T: Scalar>(s: &Setting, x: &[f64], mut f: impl FnMut(&[f64]) -> T) -> Result<T> {
    let grading = vec![Grading::default(); s.dim()];
    vk_apply_nodes(s, x, &grading, |node| f(node.eta))
}

/// `V_k` with per-coordinate graded rules; the integrand sees the full node data.
pub fn vk_apply_nodes<T: Scalar>(
    s: &Setting,
    x: &[f64],
    grading: &[Grading],
    mut f: impl FnMut(&HullNode) -> T,
) -> Result<T> {
    s.check_point(x)?;
    let n = s.dim();
    if grading.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: grading.len(),
        });
    }
    let rules = grading
        .iter()
        .enumerate()
        .map(|(j, g)| {
            // a vanishing coordinate makes the integrand constant in t_j
            if x[j] == 0.0 {
                s.coordinate_rule(j, 0, 0, 1)
            } else {
                s.coordinate_rule(j, g.left, g.right, g.order)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut idx = vec![0usize; n];
    let mut eta = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut deficit = vec![0.0; n];
    let mut acc = T::zero();
    loop {
        let mut w = 1.0;
        for j in 0..n {
            let r = &rules[j];
            let i = idx[j];
            t[j] = r.t[i];
            eta[j] = r.t[i] * x[j];
            deficit[j] = r.one_minus[i] * r.one_plus[i];
            w *= r.weights[i];
        }
        acc += f(&HullNode {
            eta: &eta,
            t: &t,
            one_minus_t2: &deficit,
        }) * w;
        // odometer over the product grid
        let mut j = 0;
        loop {
            if j == n {
                return Ok(acc);
            }
            idx[j] += 1;
            if idx[j] < rules[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Rank-one `V_k` restricted to `t ∈ [t_lo, t_hi]`, for integrands vanishing outside it.
///
/// Adaptive quadrature after the substitutions `w = (1−t)^k` on `[0, 1]` and
/// `w = (1+t)^{k+1}` on `[−1, 0]`, which remove the endpoint behaviour of the density.
/// The integrand receives `t` and `1 − t²`.
pub fn vk_rank_one_restricted(
    k: f64,
    t_lo: f64,
    t_hi: f64,
    tol: Tolerance,
    mut f: impl FnMut(f64, f64) -> f64,
) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("multiplicity {k} must be positive")));
    }
    let (lo, hi) = (t_lo.max(-1.0), t_hi.min(1.0));
    if lo >= hi {
        return Ok(0.0);
    }
    let ck = density_constant(k);
    let mut total = 0.0;
    if hi > 0.0 {
        // (1−t)^{k−1} dt = −dw / k with 1 − t = w^{1/k}
        let a = (1.0 - lo.max(0.0)).powf(k);
        let b = (1.0 - hi).powf(k);
        let res = integrate_adaptive(
            |w: f64| {
                let d = w.powf(1.0 / k);
                let t = 1.0 - d;
                let op = 2.0 - d;
                op.powf(k) * f(t, d * op)
            },
            b,
            a,
            tol,
        );
        total += res.value / k;
    }
    if lo < 0.0 {
        // (1+t)^k dt = dw / (k+1) with 1 + t = w^{1/(k+1)}
        let a = (1.0 + lo).powf(k + 1.0);
        let b = (1.0 + hi.min(0.0)).powf(k + 1.0);
        let res = integrate_adaptive(
            |w: f64| {
                let e = w.powf(1.0 / (k + 1.0));
                let t = e - 1.0;
                let om = 2.0 - e;
                om.powf(k - 1.0) * f(t, e * om)
            },
            a,
            b,
            tol,
        );
        total += res.value / (k + 1.0);
    }
    Ok(ck * total)
}

/// `γ_n` with `V_k(y ↦ y^n)(x) = γ_n x^n` at `N = 1`.
pub fn monomial_factor(k: f64, n: u32) -> f64 {
    // γ_{2m} = (1/2)_m / (k+1/2)_m and γ_{2m+1} = (1/2)_{m+1} / (k+1/2)_{m+1}
    let m = n.div_ceil(2);
    (0..m).map(|i| (0.5 + i as f64) / (k + 0.5 + i as f64)).product()
}
