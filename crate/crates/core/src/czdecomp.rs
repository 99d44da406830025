//! Calderón–Zygmund decomposition of sampled functions on `(ℝ, d, m)` at `N = 1`,
//! with `dm = |x|^{2k−1} dx`.
//!
//! Samples are step functions on cells bounded by midpoints of the grid. The
//! dyadic hierarchy bisects cell ranges in `u = sign(x)√|x|`, where the metric is
//! comparable to `|u_x − u_y|`. Maximal nodes with average above `λ` become the bad
//! cubes; each is enclosed in a metric ball.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::measure::ball_measure_polar;
use crate::metric::{dist_rank_one, from_u_coordinate, u_coordinate};
use crate::params::Setting;
use crate::{Error, Result};

// h + b_j reproduces f up to this many units in the last place of max |f|
pub const RECONSTRUCTION_ULPS: f64 = 4.0;

/// Nonnegative samples `f(x_i)` on an increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl Samples {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if grid.len() < 2 {
            return Err(Error::Domain("at least two samples are required".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("grid must be strictly increasing".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain(format!("sample value {v} must be finite and nonnegative")));
        }
        Ok(Samples { grid, values })
    }

    /// Reads `grid,value` rows after a header row.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |j: usize| -> Result<f64> {
                rec.get(j)
                    .ok_or_else(|| Error::Config(format!("{}: row {} has fewer than two columns", path.display(), i + 2)))?
                    .trim()
                    .parse()
                    .map_err(|e| Error::Config(format!("{}: row {}: {e}", path.display(), i + 2)))
            };
            grid.push(field(0)?);
            values.push(field(1)?);
        }
        Samples::new(grid, values)
    }

    /// A random sum of one to five Gaussian spikes sampled at `n` points of `[−20, 20]`.
    pub fn spike_train<R: Rng>(rng: &mut R, n: usize) -> Result<Self> {
        let grid: Vec<f64> = (0..n).map(|i| -20.0 + 40.0 * (i as f64 + 0.5) / n as f64).collect();
        let spikes: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..6))
            .map(|_| (rng.gen_range(-15.0..15.0), rng.gen_range(0.05..1.5), rng.gen_range(1.0..50.0)))
            .collect();
        let values = grid
            .iter()
            .map(|x| {
                spikes
                    .iter()
                    .map(|(c, w, a)| a * (-0.5 * ((x - c) / w).powi(2)).exp())
                    .sum::<f64>()
            })
            .collect();
        Samples::new(grid, values)
    }

    /// `∫ f dm` over the cells, together with `m` of their union.
    pub fn mass(&self, k: f64) -> (f64, f64) {
        let b = self.boundaries();
        let cells: Vec<f64> = b.windows(2).map(|w| cell_measure(k, w[0], w[1])).collect();
        (
            self.values.iter().zip(&cells).map(|(v, m)| v * m).sum(),
            cells.iter().sum(),
        )
    }

    /// Cell boundaries: midpoints between samples, the outer cells mirrored.
    pub fn boundaries(&self) -> Vec<f64> {
        let g = &self.grid;
        let n = g.len();
        let mut b = Vec::with_capacity(n + 1);
        b.push(g[0] - 0.5 * (g[1] - g[0]));
        b.extend(g.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        b.push(g[n - 1] + 0.5 * (g[n - 1] - g[n - 2]));
        b
    }
}

// ∫_a^b |x|^{2k−1} dx
fn cell_measure(k: f64, a: f64, b: f64) -> f64 {
    let prim = |x: f64| x.signum() * x.abs().powf(2.0 * k) / (2.0 * k);
    prim(b) - prim(a)
}

/// A metric ball `B(center, radius)` with its measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallRecord {
    pub center: f64,
    pub radius: f64,
    pub measure: f64,
}

/// One bad part `b_j = (f − avg_Q) 1_Q` on the cell range `[start, end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadPart {
    pub start: usize,
    pub end: usize,
    pub average: f64,
    pub profile: Vec<f64>,
    pub ball: BallRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzDecomposition {
    pub k: f64,
    pub lambda: f64,
    pub samples: Samples,
    pub cell_measures: Vec<f64>,
    pub good_part: Vec<f64>,
    pub bad_parts: Vec<BadPart>,
}

/// Constants of properties (i)–(v) and the exactness residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzReport {
    /// `max h / λ`.
    pub good_bound: f64,
    /// Cells of some `b_j` outside its ball.
    pub support_violations: usize,
    /// `max |∫ b_j dm| / ‖f 1_{Q_j}‖₁`.
    pub mean_zero_residual: f64,
    /// `max ‖b_j‖₁ / (λ m(B_j))`.
    pub bad_mass_bound: f64,
    /// `λ Σ m(B_j) / ‖f‖₁`.
    pub ball_measure_bound: f64,
    /// `max |h + Σ b_j − f| / max |f|` on the grid; zero up to rounding.
    pub reconstruction_residual: f64,
    pub bad_count: usize,
}

impl CzReport {
    /// Whether every property holds with constants at most `bound`.
    pub fn holds(&self, bound: f64, mean_zero_tol: f64) -> bool {
        self.good_bound <= bound
            && self.support_violations == 0
            && self.mean_zero_residual <= mean_zero_tol
            && self.bad_mass_bound <= bound
            && self.ball_measure_bound <= bound
            && self.reconstruction_residual <= RECONSTRUCTION_ULPS * f64::EPSILON
    }
}

struct Tree<'a> {
    u_bounds: Vec<f64>,
    values: &'a [f64],
    measures: &'a [f64],
    lambda: f64,
    selected: Vec<(usize, usize)>,
}

impl Tree<'_> {
    fn average(&self, start: usize, end: usize) -> f64 {
        let (mut mass, mut meas) = (0.0, 0.0);
        for i in start..end {
            mass += self.values[i] * self.measures[i];
            meas += self.measures[i];
        }
        mass / meas
    }

    fn split(&self, start: usize, end: usize) -> usize {
        let mid = 0.5 * (self.u_bounds[start] + self.u_bounds[end]);
        let j = self.u_bounds[start + 1..end].partition_point(|u| *u < mid) + start + 1;
        // nearest interior boundary to the u-midpoint
        let j = if j > start + 1 && (mid - self.u_bounds[j - 1]) < (self.u_bounds[j] - mid) { j - 1 } else { j };
        j.clamp(start + 1, end - 1)
    }

    // children of a node whose average is at most λ
    fn descend(&mut self, start: usize, end: usize) {
        if end - start < 2 {
            return;
        }
        let j = self.split(start, end);
        for (a, b) in [(start, j), (j, end)] {
            if self.average(a, b) > self.lambda {
                self.selected.push((a, b));
            } else {
                self.descend(a, b);
            }
        }
    }
}

/// Decomposes `f = h + Σ b_j` at level `λ`, which must exceed the average of `f`
/// over the sampled domain.
pub fn cz_decompose(s: &Setting, f: &Samples, lambda: f64) -> Result<CzDecomposition> {
    s.require_rank_one()?;
    s.require_valid()?;
    let k = s.k()[0];
    let bounds = f.boundaries();
    let measures: Vec<f64> = bounds.windows(2).map(|w| cell_measure(k, w[0], w[1])).collect();
    let mut tree = Tree {
        u_bounds: bounds.iter().map(|b| u_coordinate(*b)).collect(),
        values: &f.values,
        measures: &measures,
        lambda,
        selected: Vec::new(),
    };
    let avg = tree.average(0, measures.len());
    if !(lambda > avg) {
        return Err(Error::Precondition(format!(
            "λ = {lambda} must exceed the average {avg} of f over the sampled domain"
        )));
    }
    tree.descend(0, measures.len());
    let mut selected = tree.selected.clone();
    selected.sort_unstable();
    let mut good_part = f.values.clone();
    let mut bad_parts = Vec::with_capacity(selected.len());
    for (start, end) in selected {
        let average = tree.average(start, end);
        let profile: Vec<f64> = f.values[start..end].iter().map(|v| v - average).collect();
        for (i, (h, b)) in good_part[start..end].iter_mut().zip(&profile).enumerate() {
            *h = f.values[start + i] - b;
        }
        let ball = enclosing_ball(s, bounds[start], bounds[end])?;
        bad_parts.push(BadPart {
            start,
            end,
            average,
            profile,
            ball,
        });
    }
    Ok(CzDecomposition {
        k,
        lambda,
        samples: f.clone(),
        cell_measures: measures,
        good_part,
        bad_parts,
    })
}

// the smallest ball about the u-midpoint of [a, b] that contains both ends
fn enclosing_ball(s: &Setting, a: f64, b: f64) -> Result<BallRecord> {
    let center = from_u_coordinate(0.5 * (u_coordinate(a) + u_coordinate(b)));
    let radius = dist_rank_one(center, a).max(dist_rank_one(center, b));
    let measure = ball_measure_polar(s, &[center], radius)?.value;
    Ok(BallRecord { center, radius, measure })
}

/// Checks properties (i)–(v) and reports their constants.
pub fn cz_verify(dec: &CzDecomposition) -> Result<CzReport> {
    let lambda = dec.lambda;
    let bounds = dec.samples.boundaries();
    let f = &dec.samples.values;
    let m = &dec.cell_measures;
    let good_bound = dec.good_part.iter().fold(0.0f64, |a, h| a.max(h.abs())) / lambda;
    let mut support_violations = 0;
    let mut mean_zero_residual = 0.0f64;
    let mut bad_mass_bound = 0.0f64;
    let mut ball_total = 0.0;
    let mut rebuilt = dec.good_part.clone();
    for bp in &dec.bad_parts {
        let (mut integral, mut l1) = (0.0, 0.0);
        for (i, b) in bp.profile.iter().enumerate() {
            let cell = bp.start + i;
            integral += b * m[cell];
            l1 += b.abs() * m[cell];
            rebuilt[cell] += b;
            let ball_has = |x: f64| dist_rank_one(bp.ball.center, x) <= bp.ball.radius * (1.0 + 1e-12);
            if !(ball_has(bounds[cell]) && ball_has(bounds[cell + 1])) {
                support_violations += 1;
            }
        }
        // ‖b_j‖₁ ≤ 2‖f 1_Q‖₁, and unlike ‖b_j‖₁ it does not vanish with b_j
        let mass: f64 = (bp.start..bp.end).map(|i| f[i] * m[i]).sum();
        if mass > 0.0 {
            mean_zero_residual = mean_zero_residual.max(integral.abs() / mass);
        }
        bad_mass_bound = bad_mass_bound.max(l1 / (lambda * bp.ball.measure));
        ball_total += bp.ball.measure;
    }
    let f_l1: f64 = f.iter().zip(m).map(|(v, w)| v * w).sum();
    let f_max = f.iter().fold(0.0f64, |a, v| a.max(*v));
    let reconstruction_residual = rebuilt.iter().zip(f).fold(0.0f64, |a, (r, v)| a.max((r - v).abs()))
        / if f_max > 0.0 { f_max } else { 1.0 };
    Ok(CzReport {
        good_bound,
        support_violations,
        mean_zero_residual,
        bad_mass_bound,
        ball_measure_bound: if f_l1 > 0.0 { lambda * ball_total / f_l1 } else { 0.0 },
        reconstruction_residual,
        bad_count: dec.bad_parts.len(),
    })
}
