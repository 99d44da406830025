//! Named verification suites and their machine-readable reports.
//!
//! Each suite evaluates the invariants of one module and records one case per
//! property: the observed worst value and the bound it must not exceed. Sampled
//! properties are reduced to their worst sample in a fixed order, so a fixed seed
//! gives identical reports.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::Config;
use crate::czdecomp::{cz_decompose, cz_verify, Samples};
use crate::imagpow::{
    decay_product, hormander_integral, imagpow_kernel, imagpow_spectral, kernel_k, kernel_k_split, lemma52_ratio,
    subordination_check,
};
use crate::intertwine::{monomial_factor, vk_apply};
use crate::measure::{ball_measure_euclidean, ball_measure_origin, ball_measure_polar, doubling_ratio, doubling_sup, scaling_check};
use crate::metric::{
    closure_probe, dist, dist_orbit, dist_orbit_brute, dist_rank_one, generalized_dist, lemma51_slack, norm,
    sample_hull, triangle_slack,
};
use crate::params::Setting;
use crate::semigroup::{
    bkernel, fourier_twice, heat_apply, heat_kernel, heat_kernel_real, kernel_bounds_check, LineFunction,
};
use crate::spectral::{apply_multiplier, delta_k1, eigenvalue, expand, gram_matrix, heat_spectral_sum, phi};
use crate::translate::{adjoint_gap, mass_check, support_check, symmetry_gap, translate_exponential, translate_radial, RadialProfile};
use crate::{Error, Result};

pub const SUITES: [&str; 10] = [
    "metric",
    "measure",
    "intertwine",
    "translate",
    "semigroup",
    "spectral",
    "imagpow",
    "hormander",
    "cz",
    "all",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub id: String,
    pub inputs: Value,
    /// `None` when the computation itself failed; see `note`.
    pub observed: Option<f64>,
    pub bound: f64,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub cases: Vec<CaseRecord>,
    /// Largest `observed − bound` over the cases, or zero.
    pub max_violation: f64,
    pub empirical_constants: BTreeMap<String, f64>,
    pub runtime_ms: u64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.status == Status::Pass)
    }

    /// 0 when every case passes, 1 on any failure, else 3 when some case is inconclusive.
    pub fn exit_code(&self) -> i32 {
        if self.cases.iter().any(|c| c.status == Status::Fail) {
            1
        } else if self.cases.iter().any(|c| c.status == Status::Inconclusive) {
            3
        } else {
            0
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per case: `id,observed,bound,status`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["id", "observed", "bound", "status"])?;
        for c in &self.cases {
            let observed = c.observed.map(|v| format!("{v:e}")).unwrap_or_default();
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Inconclusive => "inconclusive",
            };
            w.write_record([c.id.as_str(), &observed, &format!("{:e}", c.bound), status])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs a named suite. `all` runs the others in order, prefixing case ids with the suite name.
pub fn run_suite(name: &str, cfg: &Config) -> Result<VerificationReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut rec = Recorder::default();
    if name == "all" {
        for sub in SUITES.iter().filter(|s| **s != "all") {
            let mut inner = Recorder::default();
            dispatch(sub, cfg, &mut inner)?;
            rec.absorb(sub, inner);
        }
    } else {
        dispatch(name, cfg, &mut rec)?;
    }
    let max_violation = rec
        .cases
        .iter()
        .map(|c| match c.observed {
            Some(v) if v.is_finite() => (v - c.bound).max(0.0),
            _ if c.status == Status::Pass => 0.0,
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max);
    Ok(VerificationReport {
        suite: name.to_string(),
        cases: rec.cases,
        max_violation,
        empirical_constants: rec.constants,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

fn dispatch(name: &str, cfg: &Config, rec: &mut Recorder) -> Result<()> {
    match name {
        "metric" => metric_suite(cfg, rec),
        "measure" => measure_suite(cfg, rec),
        "intertwine" => intertwine_suite(cfg, rec),
        "translate" => translate_suite(cfg, rec),
        "semigroup" => semigroup_suite(cfg, rec),
        "spectral" => spectral_suite(cfg, rec),
        "imagpow" => imagpow_suite(cfg, rec),
        "hormander" => hormander_suite(cfg, rec),
        "cz" => cz_suite(cfg, rec),
        _ => Err(Error::Config(format!("unknown suite {name:?}; expected one of {}", SUITES.join(", ")))),
    }
}

#[derive(Default)]
struct Recorder {
    cases: Vec<CaseRecord>,
    constants: BTreeMap<String, f64>,
}

impl Recorder {
    /// Passes when `observed ≤ bound`; NaN fails.
    fn upper(&mut self, id: impl Into<String>, inputs: Value, observed: f64, bound: f64) {
        let status = if observed <= bound { Status::Pass } else { Status::Fail };
        self.cases.push(CaseRecord {
            id: id.into(),
            inputs,
            observed: Some(observed),
            bound,
            status,
            note: None,
        });
    }

    fn outcome(&mut self, id: impl Into<String>, inputs: Value, observed: Result<f64>, bound: f64) {
        match observed {
            Ok(v) => self.upper(id, inputs, v, bound),
            Err(e) => self.cases.push(CaseRecord {
                id: id.into(),
                inputs,
                observed: None,
                bound,
                status: if matches!(e, Error::Inconclusive(_)) {
                    Status::Inconclusive
                } else {
                    Status::Fail
                },
                note: Some(e.to_string()),
            }),
        }
    }

    fn constant(&mut self, name: impl Into<String>, value: f64) {
        self.constants.insert(name.into(), value);
    }

    fn absorb(&mut self, prefix: &str, other: Recorder) {
        for mut c in other.cases {
            c.id = format!("{prefix}.{}", c.id);
            self.cases.push(c);
        }
        for (k, v) in other.constants {
            self.constants.insert(format!("{prefix}.{k}"), v);
        }
    }
}

// the largest of a sequence of fallible values; NaN counts as +∞
fn worst(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    let mut m = f64::NEG_INFINITY;
    for v in values {
        let v = v?;
        m = m.max(if v.is_nan() { f64::INFINITY } else { v });
    }
    Ok(m)
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn suite_rng(cfg: &Config, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.sampling.seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

// a point at a random scale in [1e−2, 1e2], with occasional zero coordinates
fn scaled_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
    (0..dim)
        .map(|_| if rng.gen_bool(0.1) { 0.0 } else { scale * rng.gen_range(-1.0..1.0) })
        .collect()
}

fn box_point(rng: &mut ChaCha8Rng, dim: usize, half: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-half..half)).collect()
}

// checks that exist only on the line run with the first multiplicity
fn line_setting(s: &Setting) -> Result<Setting> {
    Setting::rank_one(s.k()[0])
}

fn metric_suite(cfg: &Config, rec: &mut Recorder) -> Result<()> {
    let n = cfg.sampling.n_samples;
    let mut rng = suite_rng(cfg, 1);
    let tol = |check: &str| cfg.tolerance("metric", check, 1e-12);
    for dim in 1..=3 {
        let mut tri = f64::NEG_INFINITY;
        let mut enh = f64::NEG_INFINITY;
        let mut lower = f64::NEG_INFINITY;
        let mut orbit = 0.0f64;
        for _ in 0..n {
            let x = scaled_point(&mut rng, dim);
            let y = scaled_point(&mut rng, dim);
            let z = if rng.gen_bool(0.05) {
                // a reflection of x: the orbit distance vanishes there
                x.iter().map(|v| if rng.gen_bool(0.5) { -v } else { *v }).collect()
            } else {
                scaled_point(&mut rng, dim)
            };
            tri = tri.max(-triangle_slack(&x, &y, &z));
            let eta = sample_hull(&mut rng, &x);
            let u = rng.gen_range(-1.0..=1.0);
            enh = enh.max(-lemma51_slack(&x, &y, &z, &eta, u)?);
            lower = lower.max(dist_orbit(&x, &y) - generalized_dist(&x, &y, &eta, u)?);
            orbit = orbit.max((dist_orbit(&x, &z) - dist_orbit_brute(&x, &z)).abs());
        }
        let inputs = json!({"N": dim, "samples": n});
        rec.upper(format!("triangle.N{dim}"), inputs.clone(), tri, tol("triangle"));
        rec.upper(format!("enhanced_triangle.N{dim}"), inputs.clone(), enh, tol("enhanced_triangle"));
        rec.upper(format!("orbit_lower_bound.N{dim}"), inputs.clone(), lower, tol("orbit_lower_bound"));
        rec.upper(format!("orbit_minimizer.N{dim}"), inputs, orbit, tol("orbit_minimizer"));
    }

    let mut branch = 0.0f64;
    for _ in 0..n {
        let x = scaled_point(&mut rng, 1)[0];
        let y = scaled_point(&mut rng, 1)[0];
        branch = branch.max((dist(&[x], &[y]) - dist_rank_one(x, y)).abs());
    }
    rec.upper("line_branches", json!({"samples": n}), branch, tol("line_branches"));
    rec.upper(
        "antipodal_pair",
        json!({"x": [-1.0], "y": [1.0]}),
        (dist(&[-1.0], &[1.0]) - 2f64.sqrt()).abs(),
        tol("antipodal_pair"),
    );

    // y lies in the closure of the open ball B(x, d(x,y))
    let mut misses = 0usize;
    for i in 0..20u64 {
        let dim = 1 + (i % 3) as usize;
        let x = box_point(&mut rng, dim, 3.0);
        let y = box_point(&mut rng, dim, 3.0);
        match closure_probe(&x, &y, 1e-3, cfg.sampling.seed.wrapping_add(i)) {
            Ok(z) if dist(&y, &z) <= 1e-3 && dist(&x, &z) < dist(&x, &y) => {}
            _ => misses += 1,
        }
    }
    rec.upper("closure_probe", json!({"pairs": 20, "eps": 1e-3}), misses as f64, 0.0);
    Ok(())
}

fn measure_suite(cfg: &Config, rec: &mut Recorder) -> Result<()> {
    let s = cfg.setting()?;
    if s.dim() > 2 {
        return Err(Error::Config(format!("the measure suite supports N ≤ 2, got N = {}", s.dim())));
    }
    let dim = s.dim();
    let mut rng = suite_rng(cfg, 2);
    let tol = |check: &str| cfg.tolerance("measure", check, 1e-7);

    let scaling = worst((0..20).flat_map(|_| {
        let x = box_point(&mut rng, dim, 5.0);
        let r = rng.gen_range(0.2..3.0);
        [0.25, 2.0, 9.0].map(|t| scaling_check(&s, &x, r, t)).into_iter().collect::<Vec<_>>()
    }));
    rec.outcome("scaling", json!({"cases": 20, "t": [0.25, 2.0, 9.0]}), scaling, tol("scaling"));

    let pairs: Vec<(Vec<f64>, f64)> = (0..100)
        .map(|_| (box_point(&mut rng, dim, 5.0), rng.gen_range(0.1..3.0)))
        .collect();
    let dual = worst(pairs.par_iter().map(|(x, r)| {
        Ok(rel(ball_measure_polar(&s, x, *r)?.value, ball_measure_euclidean(&s, x, *r)?.value))
    }).collect::<Vec<_>>());
    rec.outcome("dual_formula", json!({"cases": 100}), dual, tol("dual_formula"));

    let origin = vec![0.0; dim];
    let closed = worst([0.3, 1.0, 2.5].map(|r| Ok(rel(ball_measure_polar(&s, &origin, r)?.value, ball_measure_origin(&s, r)?))));
    rec.outcome("origin_closed_form", json!({"r": [0.3, 1.0, 2.5]}), closed, tol("origin_closed_form"));
    let expected = 2f64.powf(2.0 * s.q());
    let dbl = worst([0.3, 1.0, 2.5].map(|r| Ok(rel(doubling_ratio(&s, &origin, r)?, expected))));
    rec.outcome("origin_doubling", json!({"r": [0.3, 1.0, 2.5], "expected": expected}), dbl, tol("origin_doubling"));

    let mut direction = vec![0.0; dim];
    direction[0] = 1.0;
    let coarse = doubling_sup(&s, &direction, 10.0, 0.05, 10.0, 8);
    let fine = doubling_sup(&s, &direction, 10.0, 0.05, 10.0, 16);
    let stability = match (coarse, fine) {
        (Ok(a), Ok(b)) => {
            rec.constant("doubling", b);
            Ok(rel(a, b))
        }
        (Err(e), _) | (_, Err(e)) => Err(e),
    };
    rec.outcome(
        "doubling_grid_stability",
        json!({"x_max": 10.0, "r": [0.05, 10.0], "grid": [8, 16]}),
        stability,
        cfg.tolerance("measure", "doubling_grid_stability", 0.05),
    );
    Ok(())
}

fn intertwine_suite(cfg: &Config, rec: &mut Recorder) -> Result<()> {
    let s = cfg.setting()?;
    let dim = s.dim();
    let mut rng = suite_rng(cfg, 3);
    let points: Vec<Vec<f64>> = (0..50).map(|_| box_point(&mut rng, dim, 4.0)).collect();

    let unit = worst(points.iter().map(|x| Ok((vk_apply(&s, x, |_| 1.0)? - 1.0).abs())));
    rec.outcome("unit", json!({"points": 50}), unit, cfg.tolerance("intertwine", "unit", 1e-13));

    let f = |e: &[f64]| (-norm(e).powi(2) / 3.0).exp() * (e[0] + 0.4).cos();
    let g = |e: &[f64]| e[0].powi(3) + 1.0;
    let lin = worst(points.iter().map(|x| {
        let (a, b) = (1.7, -0.6);
        let both = vk_apply(&s, x, |e| a * f(e) + b * g(e))?;
        let split = a * vk_apply(&s, x, f)? + b * vk_apply(&s, x, g)?;
        Ok((both - split).abs() / (1.0 + split.abs()))
    }));
    rec.outcome("linearity", json!({"points": 50}), lin, cfg.tolerance("intertwine", "linearity", 1e-12));

    let pos = worst(points.iter().map(|x| Ok(-vk_apply(&s, x, |e| (e[0] - 0.3).powi(2) * (-norm(e)).exp())?)));
    rec.outcome("positivity", json!({"points": 50}), pos, 0.0);

    // V_k of a product monomial is Π γ_{n_j} x_j^{n_j}
    let mono = worst(points.iter().enumerate().map(|(i, x)| {
        let powers: Vec<u32> = (0..dim).map(|j| ((i + 3 * j) % 9) as u32).collect();
        let got = vk_apply(&s, x, |e| e.iter().zip(&powers).map(|(v, p)| v.powi(*p as i32)).product::<f64>())?;
        let expected: f64 = (0..dim)
            .map(|j| monomial_factor(s.k()[j], powers[j]) * x[j].powi(powers[j] as i32))
            .product();
        Ok((got - expected).abs() / expected.abs().max(1e-300).max(1e-12))
    }));
    rec.outcome("monomials", json!({"points": 50, "max_degree": 8}), mono, cfg.tolerance("intertwine", "monomials", 1e-12));

    // T_k(V_k p) = V_k(p′) on the line for p(y) = yⁿ
    let line = line_setting(&s)?;
    let inter = worst((1..=6u32).flat_map(|n| {
        let line = line.clone();
        [0.7, -1.3, 2.1].map(move |x| {
            let lhs = crate::spectral::dunkl_op(&line, &|y| vk_apply(&line, &[y], |e| e[0].powi(n as i32)).unwrap_or(f64::NAN), x)?;
            let rhs = vk_apply(&line, &[x], |e| n as f64 * e[0].powi(n as i32 - 1))?;
            Ok((lhs - rhs).abs() / rhs.abs().max(1.0))
        })
    }));
    rec.outcome(
        "intertwining",
        json!({"k": line.k()[0], "degrees": [1, 6], "x": [0.7, -1.3, 2.1]}),
        inter,
        cfg.tolerance("intertwine", "intertwining", 1e-9),
    );
    Ok(())
}

fn translate_suite(cfg: &Config, rec: &mut Recorder) -> Result<()> {
    let s = cfg.setting()?;
    let dim = s.dim();
    let mut rng = suite_rng(cfg, 4);
    let tol = |check: &str, d: f64| cfg.tolerance("translate", check, d);
    let origin = vec![0.0; dim];

    let ident = worst((0..20).flat_map(|_| {
        let x = box_point(&mut rng, dim, 5.0);
        [0.5, 2.0].map(|lambda| Ok(rel(translate_exponential(&s, lambda, &x, &origin)?, (-lambda * norm(&x)).exp())))
            .into_iter()
            .collect::<Vec<_>>()
    }));
    rec.outcome("identity_at_origin", json!({"points": 20, "lambda": [0.5, 2.0]}), ident, tol("identity_at_origin", 1e-10));

    let bump = RadialProfile::bump(4.0)?;
    let expo = RadialProfile::exponential(1.0)?;
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..100).map(|_| (box_point(&mut rng, dim, 4.0), box_point(&mut rng, dim, 4.0))).collect();

    let sym = worst(pairs[..20].par_iter().map(|(x, y)| {
        Ok(symmetry_gap(&s, &bump, x, y)?.max(symmetry_gap(&s, &expo, x, y)?))
    }).collect::<Vec<_>>());
    rec.outcome("symmetry", json!({"pairs": 20, "profiles": ["bump(4)", "exp(1)"]}), sym, tol("symmetry", 1e-7));

    let lambda = 0.8;
    let profile = RadialProfile::exponential(lambda)?;
    let dual = worst(pairs.par_iter().map(|(x, y)| {
        Ok(rel(translate_radial(&s, &profile, y, x)?, translate_exponential(&s, lambda, x, y)?))
    }).collect::<Vec<_>>());
    rec.outcome("dual_formula", json!({"pairs": 100, "lambda": lambda}), dual, tol("dual_formula", 1e-9));

    let line = line_setting(&s)?;
    let ys = [0.5, -2.0, 5.0];
    let mass = worst(ys.par_iter().flat_map(|y| {
        [&bump, &expo].into_par_iter().map(|f| {
            let m = mass_check(&line, f, &[*y])?;
            Ok(m.rel_error + m.tail_bound / m.original.abs())
        })
    }).collect::<Vec<_>>());
    rec.outcome("mass", json!({"k": line.k()[0], "y": ys}), mass, tol("mass", 1e-7));

    let other = RadialProfile::exponential(0.7)?;
    let adj = worst([1.5, -3.0].par_iter().map(|y| adjoint_gap(&line, &bump, &other, &[*y])).collect::<Vec<_>>());
    rec.outcome("adjoint", json!({"k": line.k()[0], "y": [1.5, -3.0]}), adj, tol("adjoint", 1e-7));

    let small = RadialProfile::bump(1.0)?;
    let centre = box_point(&mut rng, dim, 3.0);
    let probes: Vec<Vec<f64>> = (0..60).map(|_| box_point(&mut rng, dim, 5.0)).collect();
    match support_check(&s, &small, &centre, &probes) {
        Ok(r) => {
            rec.upper("support", json!({"x": centre, "probes": 60, "r": 1.0}), r.max_outside, tol("support", 1e-12));
            let most_negative = r.probes.iter().map(|p| -p.value).fold(f64::NEG_INFINITY, f64::max);
            rec.upper("positivity", json!({"probes": 60}), most_negative, 0.0);
            if r.min_inside.is_finite() {
                rec.constant("min_inside_support", r.min_inside);
            }
        }
        Err(e) => rec.outcome("support", json!({"x": centre}), Err(e), tol("support", 1e-12)),
    }
    Ok(())
}

fn semigroup_suite(cfg: &Config, rec: &mut Recorder) -> Result<()> {
    let s = cfg.setting()?;
    let dim = s.dim();
    let mut rng = suite_rng(cfg, 5);
    let tol = |check: &str, d: f64| cfg.tolerance("semigroup", check, d);
    let origin = vec![0.0; dim];

    let times = [0.05, 0.5, 1.0, 3.0];
    let at_origin = worst(times.map(|t| Ok((heat_kernel_real(&s, &origin, &origin, t)? * t.sinh().powf(s.q()) - 1.0).abs())));
    rec.outcome("origin", json!({"t": times}), at_origin, tol("origin", 1e-9));

    let triples: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..50)
        .map(|_| (box_point(&mut rng, dim, 4.0), box_point(&mut rng, dim, 4.0), rng.gen_range(0.05..3.0)))
        .collect();
    let sym = worst(triples.iter().map(|(x, y, t)| Ok(rel(heat_kernel_real(&s, x, y, *t)?, heat_kernel_real(&s, y, x, *t)?))));
    rec.outcome("symmetry", json!({"samples": 50}), sym, tol("symmetry", 1e-10));
    let routes = worst(triples.par_iter().map(|(x, y, t)| {
        let v = heat_kernel(&s, x, y, Complex64::new(*t, 0.0))?;
        Ok(v.est_error / v.value.norm())
    }).collect::<Vec<_>>());
    rec.outcome("translation_route", json!({"samples": 50}), routes, tol("translation_route", 1e-9));

    let line = line_setting(&s)?;
    let f = LineFunction::smooth_bump(0.8, 1.2)?;
    let composition = {
        let (s2, f2) = (line.clone(), f.clone());
        let once = LineFunction::new(move |y| heat_apply(&s2, &f2, 0.4, y).unwrap_or(f64::NAN), -25.0, 25.0)?;
        worst([-0.9, 0.3, 1.6].map(|x| Ok(rel(heat_apply(&line, &once, 0.4, x)?, heat_apply(&line, &f, 0.8, x)?))))
    };
    rec.outcome("composition", json!({"k": line.k()[0], "t": [0.4, 0.4, 0.8]}), composition, tol("composition", 1e-6));

    let c = line.norm_constant()?;
    let l_max = cfg.spectral.l_max;
    let spec = worst((0..20).map(|_| {
        let (x, y, t) = (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), rng.gen_range(0.5..3.0));
        Ok(rel(c * heat_kernel_real(&line, &[x], &[y], t)?, heat_spectral_sum(&line, x, y, t, l_max)?))
    }));
    rec.outcome("spectral_sum", json!({"k": line.k()[0], "samples": 20, "L_max": l_max}), spec, tol("spectral_sum", 1e-6));

    let b_origin = worst((0..20).map(|_| Ok((bkernel(&s, &origin, &box_point(&mut rng, dim, 20.0))? - 1.0).abs())));
    rec.outcome("b_kernel_origin", json!({"samples": 20}), b_origin, tol("b_kernel_origin", 1e-12));
    let nb = cfg.sampling.n_samples.min(10_000);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..nb).map(|_| (box_point(&mut rng, dim, 20.0), box_point(&mut rng, dim, 20.0))).collect();
    let bounded = worst(pairs.par_iter().map(|(x, y)| Ok(bkernel(&s, x, y)?.abs() - 1.0)).collect::<Vec<_>>());
    rec.outcome("b_kernel_bounded", json!({"samples": nb}), bounded, tol("b_kernel_bounded", 1e-10));

    // supremum of the kernel over its majorants, with sample doubling
    let samples: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..2000)
        .map(|_| (box_point(&mut rng, dim, 6.0), box_point(&mut rng, dim, 6.0), 10f64.powf(rng.gen_range(-2.0..0.7))))
        .collect();
    let ratios: Vec<Result<(f64, f64)>> = samples
        .par_iter()
        .map(|(x, y, t)| {
            let small = kernel_bounds_check(&s, x, y, *t, cfg.constants.b_small_time)?;
            let large = kernel_bounds_check(&s, x, y, *t, cfg.constants.b_large_time)?;
            Ok((small.small_time.unwrap_or(0.0), large.large_time.unwrap_or(0.0)))
        })
        .collect();
    for (name, pick) in [("small_time_bound", 0usize), ("large_time_bound", 1)] {
        let sup = |n: usize| worst(ratios[..n].iter().map(|r| r.as_ref().map(|p| if pick == 0 { p.0 } else { p.1 }).map_err(clone_err)));
        let drift = match (sup(1000), sup(2000)) {
            (Ok(a), Ok(b)) if b.is_finite() => {
                rec.constant(name, b);
                Ok(rel(a, b))
            }
            (Ok(_), Ok(b)) => Ok(b),
            (Err(e), _) | (_, Err(e)) => Err(e),
        };
        rec.outcome(name, json!({"samples": [1000, 2000]}), drift, tol(name, 0.1));
    }

    let g = LineFunction::smooth_bump(1.0, 1.5)?;
    let pts = [-0.3, 0.8, 1.3];
    let back = fourier_twice(&line, &g, 1600.0, &pts).map(|v| {
        v.iter().zip(&pts).map(|(b, x)| (b - g.eval(*x)).abs()).fold(0.0, f64::max)
    });
    rec.outcome("transform_involution", json!({"k": line.k()[0], "xi_max": 1600.0, "x": pts}), back, tol("transform_involution", 1e-2));
    Ok(())
}

fn clone_err(e: &Error) -> Error {
    match e {
        Error::Inconclusive(m) => Error::Inconclusive(m.clone()),
        other => Error::NonConvergence(other.to_string()),
    }
}

fn spectral_suite(cfg: &Config, rec: &mut Recorder) -> Result<()> {
    let line = line_setting(&cfg.setting()?)?;
    let k = line.k()[0];
    let tol = |check: &str, d: f64| cfg.tolerance("spectral", check, d);

    let gram = gram_matrix(&line, 10).map(|g| {
        g.iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, v)| (v - if i == j { 1.0 } else { 0.0 }).abs()))
            .fold(0.0, f64::max)
    });
    rec.outcome("gram", json!({"k": k, "l_max": 10}), gram, tol("gram", 1e-8));

    let eig = worst((0..=5).flat_map(|l| {
        let line = line.clone();
        (0..2).flat_map(move |m| {
            let line = line.clone();
            (1..=30).flat_map(move |i| {
                let line = line.clone();
                [0.2 * i as f64, -0.2 * i as f64].map(move |x| {
                    let mu = eigenvalue(&line, l, m)?;
                    let s2 = line.clone();
                    let f = move |y: f64| phi(&s2, l, m, y).unwrap_or(f64::NAN);
                    Ok((-delta_k1(&line, &f, x)? - mu * f(x)).abs())
                })
            })
        })
    }));
    rec.outcome("eigen_relation", json!({"k": k, "l": [0, 5], "m": [0, 1], "x": [-6.0, 6.0]}), eig, tol("eigen_relation", 1e-6));

    let f = LineFunction::new(|y: f64| (-(y - 0.5).powi(2)).exp(), -12.0, 12.0)?;
    let l_max = cfg.spectral.l_max;
    match expand(&line, &f, l_max) {
        Ok(e) => {
            let before = e.coeff_norm_sq();
            let unimodular = e.multiplied(|mu| Complex64::new(0.0, -1.3 * mu.ln()).exp()).map(|c| {
                let after: f64 = c.iter().map(|p| p[0].norm_sqr() + p[1].norm_sqr()).sum();
                (after - before).abs() / before
            });
            rec.outcome("unimodular_norm", json!({"k": k, "L_max": l_max, "sigma": 1.3}), unimodular, tol("unimodular_norm", 1e-13));
            rec.constant("truncation_gap", e.truncation_gap());
            let recon = worst([-1.0, 0.5, 2.0].map(|x| Ok((apply_multiplier(&e, |_| Complex64::new(1.0, 0.0), x)?.re - f.eval(x)).abs())));
            rec.outcome("reconstruction", json!({"k": k, "L_max": l_max}), recon, tol("reconstruction", 1e-4));
        }
        Err(e) => rec.outcome("unimodular_norm", json!({"k": k}), Err(e), tol("unimodular_norm", 1e-13)),
    }
    Ok(())
}

fn imagpow_suite(cfg: &Config, rec: &mut Recorder) -> Result<()> {
    let s = cfg.setting()?;
    let line = line_setting(&s)?;
    let k = line.k()[0];
    let refinement = cfg.quadrature.refinement;
    let tol = |check: &str, d: f64| cfg.tolerance("imagpow", check, d);
    let sigmas = [0.5, 1.0, 3.0];

    let sub = worst([1.0, 2.0, 5.0].into_iter().flat_map(|l| sigmas.map(|sg| subordination_check(l, sg))));
    rec.outcome("subordination", json!({"lambda": [1, 2, 5], "sigma": sigmas}), sub, tol("subordination", 1e-8));

    let f = LineFunction::gaussian_bump(4.0, 0.4)?;
    let l_dual = 400;
    let zero = expand(&line, &f, l_dual).and_then(|e| {
        let c = e.multiplied(|mu| Complex64::new(0.0, -0.0 * mu.ln()).exp())?;
        Ok(c.iter()
            .zip(&e.coeffs)
            .map(|(a, b)| (a[0].re - b[0]).abs().max((a[1].re - b[1]).abs()).max(a[0].im.abs()).max(a[1].im.abs()))
            .fold(0.0, f64::max))
    });
    rec.outcome("sigma_zero_identity", json!({"k": k, "L_max": l_dual}), zero, 0.0);

    let xs = [0.2, 0.5];
    let dual = worst(xs.par_iter().flat_map(|x| {
        let (line, f) = (&line, &f);
        sigmas.into_par_iter().map(move |sg| {
            let a = imagpow_spectral(line, f, sg, *x, l_dual)?;
            let b = imagpow_kernel(line, f, sg, *x, refinement)?.value;
            Ok((a - b).norm() / a.norm())
        })
    }).collect::<Vec<_>>());
    rec.outcome(
        "dual_path",
        json!({"k": k, "f": "gaussian_bump(4, 0.4)", "x": xs, "sigma": sigmas, "L_max": l_dual}),
        dual,
        tol("dual_path", 1e-4),
    );

    let pairs: [(f64, f64); 3] = [(1.0, 4.0), (-2.0, 3.0), (0.5, 9.0)];
    let products: Vec<Result<(f64, f64)>> = pairs
        .par_iter()
        .flat_map(|(x, y)| {
            let line = &line;
            sigmas.into_par_iter().map(move |sg| {
                Ok((
                    decay_product(line, &[*x], &[*y], sg, refinement)?,
                    decay_product(line, &[*x], &[*y], sg, 2 * refinement)?,
                ))
            })
        })
        .collect();
    let drift = worst(products.iter().map(|p| p.as_ref().map(|(a, b)| rel(*a, *b)).map_err(clone_err)));
    if let Ok(sup) = worst(products.iter().map(|p| p.as_ref().map(|(_, b)| *b).map_err(clone_err))) {
        rec.constant("decay_product", sup);
    }
    rec.outcome("decay_product_refinement", json!({"k": k, "pairs": pairs, "sigma": sigmas}), drift, tol("decay_product_refinement", 0.1));

    let dim = s.dim();
    let mut rng = suite_rng(cfg, 7);
    let split = worst((0..6).map(|_| {
        let x = box_point(&mut rng, dim, 3.0);
        let mut y = box_point(&mut rng, dim, 3.0);
        y[0] += 4.0;
        let whole = kernel_k(&s, &x, &y, 1.5)?.value;
        let (k1, k2) = kernel_k_split(&s, &x, &y, 1.5)?;
        Ok((k1 + k2 - whole).norm() / whole.norm())
    }));
    rec.outcome("split", json!({"pairs": 6, "sigma": 1.5}), split, tol("split", 1e-10));

    // difference quotient: supremum over samples and a t-sweep, then over twice the samples
    let c = cfg.constants.c_difference;
    let n = (cfg.sampling.n_samples / 100).clamp(10, 1000);
    let samples: Vec<[Vec<f64>; 3]> = (0..2 * n)
        .map(|_| [box_point(&mut rng, dim, 5.0), box_point(&mut rng, dim, 5.0), box_point(&mut rng, dim, 5.0)])
        .collect();
    let times: Vec<f64> = (1..=18).map(|i| 0.05 * i as f64).collect();
    let sups: Vec<Result<f64>> = samples
        .par_iter()
        .map(|[x, y, y0]| worst(times.iter().map(|t| lemma52_ratio(&s, x, y, y0, *t, c))))
        .collect();
    let first = worst(sups[..n].iter().map(|r| r.as_ref().copied().map_err(clone_err)));
    let all = worst(sups.iter().map(|r| r.as_ref().copied().map_err(clone_err)));
    let stability = match (first, all) {
        (Ok(a), Ok(b)) if b.is_finite() => {
            rec.constant("difference_quotient", b);
            Ok(rel(a, b))
        }
        (Ok(_), Ok(b)) => Ok(b),
        (Err(e), _) | (_, Err(e)) => Err(e),
    };
    rec.outcome(
        "difference_quotient",
        json!({"c": c, "samples": [n, 2 * n], "t": [0.05, 0.9]}),
        stability,
        tol("difference_quotient", 0.1),
    );
    Ok(())
}

fn hormander_suite(cfg: &Config, rec: &mut Recorder) -> Result<()> {
    let line = line_setting(&cfg.setting()?)?;
    let refinement = cfg.quadrature.refinement;
    let family: Vec<(f64, f64)> = [0.25, 1.0, 4.0]
        .into_iter()
        .flat_map(|scale| [0.5, 1.0, 3.0].map(|sg| (scale, sg)))
        .collect();
    let values: Vec<Result<(f64, f64)>> = family
        .par_iter()
        .map(|(scale, sg)| {
            let (y, y0) = (4.0 * scale, 4.41 * scale);
            let r = (cfg.domain.r_truncation * y0).max(40.0);
            let a = hormander_integral(&line, y, y0, *sg, r, refinement)?;
            let b = hormander_integral(&line, y, y0, *sg, r, 2 * refinement)?;
            Ok((a.total(), b.total()))
        })
        .collect();
    let bound = cfg.tolerance("hormander", "uniform_bound", 10.0);
    let mut sup = 0.0f64;
    for ((scale, sg), v) in family.iter().zip(&values) {
        let inputs = json!({"k": line.k()[0], "y": 4.0 * scale, "y0": 4.41 * scale, "sigma": sg});
        match v {
            Ok((a, b)) => {
                sup = sup.max(*b);
                rec.constant(format!("s={scale},sigma={sg}"), *b);
                rec.upper(format!("refinement.s={scale}.sigma={sg}"), inputs, rel(*a, *b), cfg.tolerance("hormander", "refinement", 0.05));
            }
            Err(e) => rec.outcome(format!("refinement.s={scale}.sigma={sg}"), inputs, Err(clone_err(e)), 0.05),
        }
    }
    rec.constant("uniform", sup);
    rec.upper("uniform_bound", json!({"family": family.len()}), sup, bound);
    Ok(())
}

fn cz_suite(cfg: &Config, rec: &mut Recorder) -> Result<()> {
    let line = line_setting(&cfg.setting()?)?;
    let k = line.k()[0];
    let mut rng = suite_rng(cfg, 9);
    let functions = (0..50).map(|_| Samples::spike_train(&mut rng, 800)).collect::<Result<Vec<_>>>()?;
    let reports: Vec<Result<crate::czdecomp::CzReport>> = functions
        .par_iter()
        .flat_map(|f| {
            let (mass, total) = f.mass(k);
            let line = &line;
            [2.0, 4.0, 8.0].into_par_iter().map(move |factor| cz_verify(&cz_decompose(line, f, factor * mass / total)?))
        })
        .collect();
    let field = |pick: fn(&crate::czdecomp::CzReport) -> f64| worst(reports.iter().map(|r| r.as_ref().map(pick).map_err(clone_err)));
    let constant_bound = cfg.tolerance("cz", "constant", 64.0);
    let inputs = json!({"k": k, "functions": 50, "lambda_over_average": [2, 4, 8]});
    for (name, pick, bound) in [
        ("good_part", (|r: &crate::czdecomp::CzReport| r.good_bound) as fn(&_) -> f64, constant_bound),
        ("support", |r| r.support_violations as f64, 0.0),
        ("mean_zero", |r| r.mean_zero_residual, cfg.tolerance("cz", "mean_zero", 1e-10)),
        ("bad_mass", |r| r.bad_mass_bound, constant_bound),
        ("ball_measure", |r| r.ball_measure_bound, constant_bound),
        (
            "reconstruction",
            |r| r.reconstruction_residual,
            cfg.tolerance("cz", "reconstruction", crate::czdecomp::RECONSTRUCTION_ULPS * f64::EPSILON),
        ),
    ] {
        let v = field(pick);
        if let Ok(m) = v {
            rec.constant(name, m);
        }
        rec.outcome(name, inputs.clone(), v, bound);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_suite_passes_and_is_deterministic() {
        let mut cfg = Config::default();
        cfg.sampling.n_samples = 2000;
        let a = run_suite("metric", &cfg).unwrap();
        let b = run_suite("metric", &cfg).unwrap();
        assert!(a.passed(), "{a:#?}");
        assert!(a.max_violation <= 1e-12);
        assert_eq!(a.cases, b.cases);
        assert_eq!(a.exit_code(), 0);
    }

    #[test]
    fn unknown_suite_is_a_config_error() {
        assert!(matches!(run_suite("nope", &Config::default()), Err(Error::Config(_))));
    }

    #[test]
    fn statuses_drive_the_exit_code() {
        let mut rec = Recorder::default();
        rec.upper("a", Value::Null, 1.0, 2.0);
        rec.outcome("b", Value::Null, Err(Error::Inconclusive("tail".into())), 1.0);
        let mut report = VerificationReport {
            suite: "x".into(),
            cases: rec.cases,
            max_violation: 0.0,
            empirical_constants: BTreeMap::new(),
            runtime_ms: 0,
        };
        assert_eq!(report.exit_code(), 3);
        report.cases[0].status = Status::Fail;
        assert_eq!(report.exit_code(), 1);
        let back: VerificationReport = serde_json::from_str(&report.to_json().unwrap()).unwrap();
        assert_eq!(back, report);
    }
}
