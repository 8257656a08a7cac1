//! Independent reference computations: central finite differences in the
//! momenta and literal ordered-tuple contraction of a dense expansion.
//!
//! Nothing here calls into the closed-form geometry; fields are plain closures
//! that return an error outside their admissible domain.

use crate::error::{CartanError, Result};
use crate::symtensor::SymTensor;

/// Base step for first derivatives, `eps^(1/3)`, scaled per [`axis_steps`] with [`STEP_FLOOR`].
pub fn grad_step() -> f64 {
    f64::EPSILON.cbrt()
}

/// Base step for plain second differences, `eps^(1/4)`, scaled per [`axis_steps`] with [`STEP_FLOOR`].
pub fn hessian_step() -> f64 {
    f64::EPSILON.powf(0.25)
}

/// Base step for [`fd_hessian`]: `eps^(1/6)` rounded to the power of two `2^-9`,
/// scaled per [`axis_steps`] with [`STEP_FLOOR`].
pub fn hessian_richardson_step() -> f64 {
    1.0 / 512.0
}

/// Upper bound on `n^m` for [`dense_contract`].
pub const DENSE_GUARD: u128 = 10_000_000;

/// Fraction of `max|p|` below which a component's step stops shrinking.
pub const STEP_FLOOR: f64 = 0.1;

/// Per-axis steps `base * max(|p_i|, floor * max|p|)`. Scaling with `p`
/// keeps the relative stencil width the same under `p -> lambda p`.
pub fn axis_steps(base: f64, floor: f64, p: &[f64]) -> Vec<f64> {
    let floor = floor * p.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));
    p.iter().map(|v| base * v.abs().max(floor)).collect()
}

fn probe<T>(f: &impl Fn(&[f64]) -> Result<T>, q: &[f64], axis: usize) -> Result<T> {
    f(q).map_err(|_| CartanError::InadmissiblePerturbation { axis })
}

/// Central-difference gradient of a scalar field.
pub fn fd_grad(f: impl Fn(&[f64]) -> Result<f64>, p: &[f64]) -> Result<Vec<f64>> {
    fd_grad_with(f, p, grad_step())
}

pub fn fd_grad_with(f: impl Fn(&[f64]) -> Result<f64>, p: &[f64], base: f64) -> Result<Vec<f64>> {
    Ok(fd_jacobian_with(|q| f(q).map(|v| vec![v]), p, base)?.into_iter().map(|d| d[0]).collect())
}

/// Central-difference derivative of a vector-valued field, one output row per
/// momentum axis: `result[k][c] ~ d f_c / d p_k`.
pub fn fd_jacobian(f: impl Fn(&[f64]) -> Result<Vec<f64>>, p: &[f64]) -> Result<Vec<Vec<f64>>> {
    fd_jacobian_with(f, p, grad_step())
}

pub fn fd_jacobian_with(f: impl Fn(&[f64]) -> Result<Vec<f64>>, p: &[f64], base: f64) -> Result<Vec<Vec<f64>>> {
    fd_jacobian_steps(f, p, &axis_steps(base, STEP_FLOOR, p))
}

/// Central-difference Jacobian with an explicit step per axis.
pub fn fd_jacobian_steps(f: impl Fn(&[f64]) -> Result<Vec<f64>>, p: &[f64], steps: &[f64]) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::with_capacity(p.len());
    let mut q = p.to_vec();
    for (axis, &h) in steps.iter().enumerate() {
        q[axis] = p[axis] + h;
        let plus = probe(&f, &q, axis)?;
        q[axis] = p[axis] - h;
        let minus = probe(&f, &q, axis)?;
        q[axis] = p[axis];
        // Effective step after rounding of p +- h.
        let width = (p[axis] + h) - (p[axis] - h);
        rows.push(plus.iter().zip(&minus).map(|(a, b)| (a - b) / width).collect());
    }
    Ok(rows)
}

/// Base step for [`fd_jacobian_richardson`], `eps^(1/5)`.
pub fn richardson_step() -> f64 {
    f64::EPSILON.powf(0.2)
}

/// Central differences at steps `h` and `h/2` combined by one Richardson
/// extrapolation step, `(4 D(h/2) - D(h)) / 3`, cancelling the `h^2` error term.
pub fn fd_jacobian_richardson(
    f: impl Fn(&[f64]) -> Result<Vec<f64>>,
    p: &[f64],
    steps: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let coarse = fd_jacobian_steps(&f, p, steps)?;
    let half: Vec<f64> = steps.iter().map(|h| h / 2.0).collect();
    let fine = fd_jacobian_steps(&f, p, &half)?;
    Ok(coarse.iter().zip(&fine).map(|(c, f)| c.iter().zip(f).map(|(c, f)| (4.0 * f - c) / 3.0).collect()).collect())
}

/// Richardson-extrapolated central-difference Hessian, symmetrized by averaging.
pub fn fd_hessian(f: impl Fn(&[f64]) -> Result<f64>, p: &[f64]) -> Result<Vec<Vec<f64>>> {
    fd_hessian_with(f, p, hessian_richardson_step())
}

pub fn fd_hessian_with(f: impl Fn(&[f64]) -> Result<f64>, p: &[f64], base: f64) -> Result<Vec<Vec<f64>>> {
    let raw = fd_hessian_richardson(f, p, base)?;
    let n = p.len();
    Ok((0..n).map(|i| (0..n).map(|j| 0.5 * (raw[i][j] + raw[j][i])).collect()).collect())
}

/// [`fd_hessian_raw`] at `base` and `base/2`, combined as `(4 H(h/2) - H(h)) / 3`.
pub fn fd_hessian_richardson(f: impl Fn(&[f64]) -> Result<f64>, p: &[f64], base: f64) -> Result<Vec<Vec<f64>>> {
    let coarse = fd_hessian_raw(&f, p, base)?;
    let fine = fd_hessian_raw(&f, p, base / 2.0)?;
    Ok(coarse.iter().zip(&fine).map(|(c, f)| c.iter().zip(f).map(|(c, f)| (4.0 * f - c) / 3.0).collect()).collect())
}

/// Hessian before symmetrization. Off-diagonal entries use the four-point
/// stencil, diagonal entries the three-point second difference.
pub fn fd_hessian_raw(f: impl Fn(&[f64]) -> Result<f64>, p: &[f64], base: f64) -> Result<Vec<Vec<f64>>> {
    let n = p.len();
    let steps = axis_steps(base, STEP_FLOOR, p);
    let center = probe(&f, p, 0)?;
    let mut q = p.to_vec();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        let hi = steps[i];
        q[i] = p[i] + hi;
        let fp = probe(&f, &q, i)?;
        q[i] = p[i] - hi;
        let fm = probe(&f, &q, i)?;
        q[i] = p[i];
        out[i][i] = (fp - 2.0 * center + fm) / (hi * hi);
        for j in 0..n {
            if j == i {
                continue;
            }
            let hj = steps[j];
            let mut corner = |si: f64, sj: f64| {
                q[i] = p[i] + si * hi;
                q[j] = p[j] + sj * hj;
                let v = probe(&f, &q, i);
                q[i] = p[i];
                q[j] = p[j];
                v
            };
            let pp = corner(1.0, 1.0)?;
            let pm = corner(1.0, -1.0)?;
            let mp = corner(-1.0, 1.0)?;
            let mm = corner(-1.0, -1.0)?;
            out[i][j] = (pp - pm - mp + mm) / (4.0 * hi * hj);
        }
    }
    Ok(out)
}

/// Dense row-major tensor produced by [`dense_contract`].
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    pub dim: usize,
    pub rank: usize,
    pub data: Vec<f64>,
}

impl DenseTensor {
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[idx.iter().fold(0, |acc, &i| acc * self.dim + i)]
    }
}

/// Expand `a` to all `n^m` ordered components and contract the trailing `k`
/// slots with `p` by direct summation.
pub fn dense_contract(a: &SymTensor, p: &[f64], k: usize) -> Result<DenseTensor> {
    let n = a.dim();
    let m = a.rank();
    if p.len() != n {
        return Err(CartanError::DimensionMismatch { expected: n, got: p.len() });
    }
    if k > m {
        return Err(CartanError::ContractionOrder { k, rank: m });
    }
    let entries = (n as u128).pow(m as u32);
    if entries > DENSE_GUARD {
        return Err(CartanError::TooLarge { entries, max: DENSE_GUARD });
    }
    let mut data = Vec::with_capacity(entries as usize);
    let mut idx = vec![0usize; m];
    for flat in 0..entries as usize {
        let mut rem = flat;
        for slot in (0..m).rev() {
            idx[slot] = rem % n;
            rem /= n;
        }
        data.push(a.get(&idx));
    }
    for _ in 0..k {
        data = data.chunks(n).map(|row| row.iter().zip(p).map(|(x, y)| x * y).sum()).collect();
    }
    Ok(DenseTensor { dim: n, rank: m - k, data })
}
