use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use gko::config::Config;
use gko::czdecomp::{cz_decompose, cz_verify, Samples};
use gko::verify::{run_suite, SUITES};
use gko::{imagpow, measure, metric, semigroup, translate, Error, Setting};

#[derive(Parser)]
#[command(name = "gko", version, about = "Verification harness for the (k,1)-generalized harmonic oscillator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and print or write its report.
    Run {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// JSON report path; a CSV table of the cases is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report a runtime of zero so reports are byte-identical across runs.
        #[arg(long)]
        no_timing: bool,
    },
    /// Evaluate a single quantity.
    #[command(allow_negative_numbers = true)]
    Eval {
        kind: Kind,
        /// Comma-separated coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Vec<f64>,
        /// Multiplicities, one per coordinate; defaults to 1 in every coordinate.
        #[arg(long, value_delimiter = ',')]
        k: Vec<f64>,
        #[arg(long)]
        t: Option<f64>,
        /// Imaginary part of the time for the heat kernel.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t_imag: f64,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        sigma: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Calderón–Zygmund decomposition of sampled data.
    Cz {
        #[arg(long)]
        lambda: f64,
        /// CSV with a header row and `grid,value` columns.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Dist,
    BallMeasure,
    HeatKernel,
    BKernel,
    KernelK,
    TranslateExp,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = std::env::var("GKO_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("gko: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::Domain(_) | Error::Dimension { .. } | Error::InvalidSetting(_) | Error::Io(_) | Error::Csv(_) => 2,
                Error::Inconclusive(_) => 3,
                _ => 1,
            })
        }
    }
}

fn dispatch(cmd: Command) -> gko::Result<u8> {
    match cmd {
        Command::Run {
            suite,
            config,
            seed,
            out,
            no_timing,
        } => {
            let mut cfg = match config {
                Some(p) => Config::load(&p)?,
                None => Config::default(),
            };
            if let Some(s) = seed {
                cfg.sampling.seed = s;
            }
            let mut report = run_suite(&suite, &cfg)?;
            if no_timing {
                report.runtime_ms = 0;
            }
            let text = report.to_json()?;
            match out {
                Some(path) => {
                    std::fs::write(&path, text + "\n")?;
                    report.write_csv(&path.with_extension("csv"))?;
                    for c in &report.cases {
                        println!("{:<48} {:?}", c.id, c.status);
                    }
                }
                None => println!("{text}"),
            }
            Ok(report.exit_code() as u8)
        }
        Command::Eval {
            kind,
            x,
            y,
            k,
            t,
            t_imag,
            r,
            sigma,
            lambda,
            json,
        } => {
            let (value, err) = evaluate(kind, &x, &y, &k, t, t_imag, r, sigma, lambda)?;
            if json {
                let v = if value.im == 0.0 {
                    json!(value.re)
                } else {
                    json!({"re": value.re, "im": value.im})
                };
                println!("{}", json!({"value": v, "est_error": err}));
            } else if value.im == 0.0 {
                println!("{:.10} ± {err:.1e}", value.re);
            } else {
                println!("{:.10} {:+.10}i ± {err:.1e}", value.re, value.im);
            }
            Ok(0)
        }
        Command::Cz { lambda, input, out, k } => {
            let s = Setting::rank_one(k)?;
            let samples = Samples::from_csv(&input)?;
            let dec = cz_decompose(&s, &samples, lambda)?;
            let report = cz_verify(&dec)?;
            write_json(&out, &json!({"decomposition": dec, "report": report}))?;
            let holds = report.holds(64.0, 1e-10);
            println!(
                "{} bad parts, good part ≤ {:.3}λ: {}",
                report.bad_count,
                report.good_bound,
                if holds { "all properties hold" } else { "property failure" }
            );
            Ok(if holds { 0 } else { 1 })
        }
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> gko::Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn need(v: Option<f64>, flag: &str) -> gko::Result<f64> {
    v.ok_or_else(|| Error::Config(format!("--{flag} is required")))
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    kind: Kind,
    x: &[f64],
    y: &[f64],
    k: &[f64],
    t: Option<f64>,
    t_imag: f64,
    r: Option<f64>,
    sigma: Option<f64>,
    lambda: Option<f64>,
) -> gko::Result<(Complex64, f64)> {
    if x.is_empty() {
        return Err(Error::Config("--x is required".into()));
    }
    let needs_y = !matches!(kind, Kind::BallMeasure);
    if needs_y && y.len() != x.len() {
        return Err(Error::Config(format!("--y needs {} coordinates", x.len())));
    }
    let k = if k.is_empty() { vec![1.0; x.len()] } else { k.to_vec() };
    if k.len() != x.len() {
        return Err(Error::Config(format!("--k needs {} entries", x.len())));
    }
    let s = Setting::new(k)?;
    let real = |v: f64, e: f64| (Complex64::new(v, 0.0), e);
    Ok(match kind {
        Kind::Dist => {
            let d = metric::dist(x, y);
            real(d, f64::EPSILON * d)
        }
        Kind::BallMeasure => {
            let m = measure::ball_measure_polar(&s, x, need(r, "r")?)?;
            real(m.value, m.est_error)
        }
        Kind::HeatKernel => {
            let v = semigroup::heat_kernel(&s, x, y, Complex64::new(need(t, "t")?, t_imag))?;
            (v.value, v.est_error)
        }
        Kind::BKernel => {
            let b = semigroup::bkernel(&s, x, y)?;
            real(b, 1e-12)
        }
        Kind::KernelK => {
            let v = imagpow::kernel_k(&s, x, y, need(sigma, "sigma")?)?;
            (v.value, v.est_error)
        }
        Kind::TranslateExp => {
            let lam = need(lambda, "lambda")?;
            let a = translate::translate_exponential(&s, lam, x, y)?;
            let b = translate::translate_radial(&s, &translate::RadialProfile::exponential(lam)?, y, x)?;
            real(a, (a - b).abs())
        }
    })
}
