//! Command-line front end: `eval`, `verify` and `bm-gen`.
//!
//! Exit codes: 0 when everything passes, 1 when a verification check fails,
//! 2 for usage, input and domain errors.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::berwald_moor::{bm_tensor, bm_theorem_check};
use crate::curvature::{compute_s, compute_u, s3_fit, S3Diagnosis};
use crate::dense::{Tens3, Tens4};
use crate::error::{CartanError, Result};
use crate::metric_core::{EvalContext, Signature};
use crate::report::{CheckRecord, CheckReport};
use crate::sampling;
use crate::suite::identity_checks;
use crate::symtensor::{Momentum, SymTensor};
use crate::tolerances::Tolerances;
use crate::ttensor;
use crate::vgeometry;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "cartan", version, about = "Evaluate and verify the geometry of m-th root Cartan spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every geometric object at one point and write a JSON report
    Eval(EvalArgs),
    /// Run the identity suite on seeded sample points
    Verify(VerifyArgs),
    /// Write the Berwald-Moor coefficient tensor as a JSON tensor file
    BmGen(BmGenArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// JSON tensor file
    #[arg(long)]
    pub metric: PathBuf,
    /// Momentum as comma-separated reals, e.g. 1,2,3,4
    #[arg(long, allow_hyphen_values = true)]
    pub p: String,
    /// Output path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Tolerance override, name=value (repeatable)
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// JSON tensor file
    #[arg(long, conflicts_with = "bm", required_unless_present = "bm")]
    pub metric: Option<PathBuf>,
    /// Use the Berwald-Moor metric of this dimension
    #[arg(long)]
    pub bm: Option<usize>,
    #[arg(long, default_value_t = 25)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance override, name=value (repeatable)
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BmGenArgs {
    #[arg(long)]
    pub dim: usize,
    /// Output path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse every `name=value` override on top of the defaults.
pub fn parse_tolerances(overrides: &[String]) -> Result<Tolerances> {
    let mut tol = Tolerances::default();
    for item in overrides {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| CartanError::InvalidArgument(format!("expected NAME=VALUE, got {item:?}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| CartanError::InvalidArgument(format!("bad tolerance value {value:?}: {e}")))?;
        tol.set(name.trim(), value)?;
    }
    Ok(tol)
}

fn nest3(t: &Tens3) -> Vec<Vec<Vec<f64>>> {
    let n = t.dim();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| t[[i, j, k]]).collect()).collect()).collect()
}

fn nest4(t: &Tens4) -> Vec<Vec<Vec<Vec<f64>>>> {
    let n = t.dim();
    (0..n)
        .map(|h| (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| t[[h, i, j, k]]).collect()).collect()).collect())
        .collect()
}

fn nest2(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Output of `eval`. Index order of every array is the natural `[i][j]...`
/// order of the component superscripts/subscripts as written in its name.
#[derive(Debug, Serialize)]
pub struct EvalReport {
    pub metric: String,
    pub dim: usize,
    pub rank: usize,
    pub p: Vec<f64>,
    #[serde(rename = "K")]
    pub k: f64,
    pub l_up: Vec<f64>,
    pub g_up: Vec<Vec<f64>>,
    pub g_dn: Vec<Vec<f64>>,
    pub g_dn_discrepancy: f64,
    pub h_up: Vec<Vec<f64>>,
    pub signature: Signature,
    pub c_up: Vec<Vec<Vec<f64>>>,
    pub c_mixed: Vec<Vec<Vec<f64>>>,
    pub torsion_covector: Vec<f64>,
    pub s_up: Vec<Vec<Vec<Vec<f64>>>>,
    pub s_route_discrepancy: f64,
    pub u_up: Vec<Vec<Vec<Vec<f64>>>>,
    /// Absent when `n < 4`.
    pub s3: Option<S3Diagnosis>,
    pub t_up: Vec<Vec<Vec<Vec<f64>>>>,
    pub t_definition_discrepancy: f64,
    pub engine_version: String,
}

pub fn evaluate(metric_name: &str, a: &SymTensor, p: &Momentum, tol: &Tolerances) -> Result<EvalReport> {
    let ctx = EvalContext::new(a, p)?;
    let s = compute_s(&ctx);
    let s3 = if ctx.n >= 4 { Some(s3_fit(&ctx, tol.s3)?) } else { None };
    let t = ttensor::t_tensor(a, &ctx, tol.fd_richardson_step)?;
    Ok(EvalReport {
        metric: metric_name.to_string(),
        dim: ctx.n,
        rank: ctx.m,
        p: p.to_vec(),
        k: ctx.k,
        l_up: ctx.l_up.clone(),
        g_up: nest2(&ctx.g_up),
        g_dn: nest2(&ctx.g_dn),
        g_dn_discrepancy: ctx.g_dn_discrepancy,
        h_up: nest2(&ctx.h_up),
        signature: ctx.signature,
        c_up: nest3(&vgeometry::c_up(&ctx)),
        c_mixed: nest3(&vgeometry::c_mixed(&ctx)),
        torsion_covector: vgeometry::torsion_covector(&ctx).values,
        s_route_discrepancy: s.route_discrepancy(),
        s_up: nest4(&s.by_definition),
        u_up: nest4(&compute_u(&ctx)),
        s3,
        t_up: nest4(&t.closed),
        t_definition_discrepancy: t.max_discrepancy,
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

/// Metric source for `verify`.
pub enum MetricSource {
    File(PathBuf),
    BerwaldMoor(usize),
}

impl MetricSource {
    fn describe(&self) -> String {
        match self {
            MetricSource::File(path) => path.display().to_string(),
            MetricSource::BerwaldMoor(n) => format!("berwald-moor:{n}"),
        }
    }
}

/// Sample `samples` points with `seed` and run the full suite on each.
pub fn verify(source: &MetricSource, samples: usize, seed: u64, tol: &Tolerances) -> Result<CheckReport> {
    if samples == 0 {
        return Err(CartanError::InvalidArgument("--samples must be at least 1".into()));
    }
    let (a, bm_dim) = match source {
        MetricSource::File(path) => (SymTensor::load(path)?, None),
        MetricSource::BerwaldMoor(n) => (bm_tensor(*n)?, Some(*n)),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = match bm_dim {
        Some(n) => (0..samples).map(|_| sampling::positive_point(&mut rng, n)).collect(),
        None => sampling::admissible_points(&mut rng, &a, samples)?,
    };
    let per_sample: Vec<Vec<CheckRecord>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut sample_rng = ChaCha8Rng::seed_from_u64(seed);
            sample_rng.set_stream(i as u64 + 1);
            let mut records = identity_checks(&a, p, tol, &mut sample_rng)
                .unwrap_or_else(|e| vec![CheckRecord::new(format!("sample.evaluation: {e}"), f64::NAN, 0.0)]);
            if let Some(n) = bm_dim {
                match bm_theorem_check(n, p, tol) {
                    Ok(r) => records.extend(r),
                    Err(e) => records.push(CheckRecord::new(format!("bm.evaluation: {e}"), f64::NAN, 0.0)),
                }
            }
            records.into_iter().map(|r| r.at(i)).collect()
        })
        .collect();
    Ok(CheckReport::new(
        source.describe(),
        points.into_iter().map(Momentum::into_inner).collect(),
        per_sample.into_iter().flatten().collect(),
        Some(seed),
        tol.clone(),
    ))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run_inner(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Eval(args) => {
            let tol = parse_tolerances(&args.tol)?;
            let a = SymTensor::load(&args.metric)?;
            let p = Momentum::parse_csv(&args.p)?;
            let report = evaluate(&args.metric.display().to_string(), &a, &p, &tol)?;
            write_output(args.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
            Ok(EXIT_OK)
        }
        Command::Verify(args) => {
            let tol = parse_tolerances(&args.tol)?;
            let source = match (args.metric, args.bm) {
                (Some(path), None) => MetricSource::File(path),
                (None, Some(n)) => MetricSource::BerwaldMoor(n),
                _ => return Err(CartanError::InvalidArgument("give exactly one of --metric or --bm".into())),
            };
            let report = verify(&source, args.samples, args.seed, &tol)?;
            write_output(args.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
            for failure in report.failures() {
                eprintln!(
                    "FAIL {} (sample {:?}): residual {:e} >= tolerance {:e}",
                    failure.name, failure.sample, failure.residual, failure.tolerance
                );
            }
            eprintln!(
                "{}: {} checks, {} passed, {} failed",
                report.metric, report.summary.total, report.summary.passed, report.summary.failed
            );
            Ok(if report.all_passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::BmGen(args) => {
            let text = bm_tensor(args.dim)?.to_json_string()?;
            write_output(args.out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
    }
}

/// Run a parsed command line, reporting errors on stderr. Returns the exit code.
pub fn run(cli: Cli) -> u8 {
    match run_inner(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
