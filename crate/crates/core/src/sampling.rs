//! Seeded generation of evaluation points and random coefficient tensors.

use rand::Rng;

use crate::berwald_moor::bm_tensor;
use crate::error::{CartanError, Result};
use crate::metric_core::{radicand, EvalContext};
use crate::symtensor::{Momentum, SymTensor};

/// Rejection attempts allowed per requested point.
pub const ATTEMPTS_PER_POINT: usize = 1000;

/// Minimum ratio `radicand(p) / |a|(|p|)` for a sampled point, keeping points
/// away from the null cone where every quantity blows up.
pub const RADICAND_MARGIN: f64 = 1e-1;

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Positive-orthant point with components log-uniform in `[0.1, 10]`.
pub fn positive_point<R: Rng>(rng: &mut R, n: usize) -> Momentum {
    Momentum::new((0..n).map(|_| log_uniform(rng, 0.1, 10.0)).collect())
}

/// Rejection-sample one admissible point for an arbitrary metric.
///
/// Proposals have log-uniform magnitudes in `[0.1, 10]`; the first
/// `attempts / 2` proposals lie in the positive orthant and the rest carry
/// random signs. A proposal is accepted when the radicand is positive with
/// margin [`RADICAND_MARGIN`] and the evaluation context builds.
pub fn admissible_point<R: Rng>(rng: &mut R, a: &SymTensor, attempts: usize) -> Result<Momentum> {
    let abs = a.abs();
    for attempt in 0..attempts {
        let mut p = positive_point(rng, a.dim()).into_inner();
        if attempt >= attempts / 2 {
            for v in p.iter_mut() {
                if rng.random_bool(0.5) {
                    *v = -*v;
                }
            }
        }
        let r = radicand(a, &p)?;
        let bound = radicand(&abs, &p.iter().map(|v| v.abs()).collect::<Vec<_>>())?;
        if r > RADICAND_MARGIN * bound {
            let p = Momentum::new(p);
            if EvalContext::new(a, &p).is_ok() {
                return Ok(p);
            }
        }
    }
    Err(CartanError::NoAdmissiblePoint(attempts))
}

/// `count` admissible points, drawn sequentially from `rng`.
pub fn admissible_points<R: Rng>(rng: &mut R, a: &SymTensor, count: usize) -> Result<Vec<Momentum>> {
    (0..count).map(|_| admissible_point(rng, a, ATTEMPTS_PER_POINT)).collect::<Result<Vec<_>>>().map_err(|e| match e {
        CartanError::NoAdmissiblePoint(_) => CartanError::NoAdmissiblePoint(ATTEMPTS_PER_POINT * count),
        other => other,
    })
}

/// Random symmetric tensor: every sorted index gets a coefficient uniform in
/// `[-spread, spread]`, and each pure power `a^{i...i}` is shifted by `+1` so
/// the positive orthant is typically admissible.
pub fn random_sym_tensor<R: Rng>(rng: &mut R, dim: usize, rank: usize, spread: f64) -> Result<SymTensor> {
    let mut entries = Vec::new();
    let mut idx = vec![0usize; rank];
    loop {
        let diagonal = idx.iter().all(|&i| i == idx[0]);
        let mut v = rng.random_range(-spread..=spread);
        if diagonal {
            v += 1.0;
        }
        entries.push((idx.clone(), v));
        // next non-decreasing index
        let Some(pos) = (0..rank).rev().find(|&s| idx[s] + 1 < dim) else {
            break;
        };
        let next = idx[pos] + 1;
        for slot in idx.iter_mut().skip(pos) {
            *slot = next;
        }
    }
    SymTensor::new(dim, rank, entries)
}

/// Berwald-Moor tensor with every unordered coefficient perturbed:
/// `a_I = (1/n!) (BM_I * n! + delta_I)` with `delta_I` uniform in `[-delta, delta]`.
pub fn perturbed_bm_tensor<R: Rng>(rng: &mut R, n: usize, delta: f64) -> Result<SymTensor> {
    let bm = bm_tensor(n)?;
    let factorial: f64 = (1..=n).map(|i| i as f64).product();
    let mut entries = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let base = bm.get(&idx);
        entries.push((idx.clone(), base + rng.random_range(-delta..=delta) / factorial));
        let Some(pos) = (0..n).rev().find(|&s| idx[s] + 1 < n) else {
            break;
        };
        let next = idx[pos] + 1;
        for slot in idx.iter_mut().skip(pos) {
            *slot = next;
        }
    }
    SymTensor::new(n, n, entries)
}
