//! The Berwald-Moor metric of momenta `K(p) = (p_1 p_2 ... p_n)^(1/n)`: its
//! coefficient tensor, analytic closed forms for every derived quantity, and
//! the theorem check (vanishing torsion covector, S3-likeness with `S = -1`,
//! vanishing T-tensor) run through the general engine.
//!
//! The angular metric diagonal is `h^ii = -(n-1) (a^i)^2`, with the
//! contravariant `a^i`; this is what `h^ij = (m-1)(a^ij - a^i a^j)` gives for
//! `a^ii = 0`, and it is the only reading that is 0-homogeneous.

use nalgebra::DMatrix;

use crate::curvature::{self, angular_basis, compute_u};
use crate::dense::{rel_diff, Tens3, Tens4};
use crate::error::{CartanError, Result};
use crate::metric_core::EvalContext;
use crate::report::CheckRecord;
use crate::symtensor::{Momentum, SymTensor};
use crate::tolerances::Tolerances;
use crate::ttensor;
use crate::vgeometry;

/// Coefficient tensor `a^{i1...in} = 1/n!` on distinct indices, zero otherwise.
pub fn bm_tensor(n: usize) -> Result<SymTensor> {
    if n < 4 {
        return Err(CartanError::DimTooSmall { dim: n, min: 4 });
    }
    let factorial: f64 = (1..=n).map(|i| i as f64).product();
    SymTensor::new(n, n, vec![((0..n).collect(), 1.0 / factorial)])
}

/// `lambda = -n^2 / ((n-1)^2 (n-2)^2)`.
pub fn bm_lambda(n: usize) -> f64 {
    let n = n as f64;
    -n * n / ((n - 1.0).powi(2) * (n - 2.0).powi(2))
}

/// Analytic values of the derived quantities at a point of the positive orthant.
#[derive(Debug, Clone)]
pub struct BmClosedForms {
    pub n: usize,
    pub k: f64,
    pub a_up1: Vec<f64>,
    pub a_dn1: Vec<f64>,
    pub a_up2: DMatrix<f64>,
    pub a_dn2: DMatrix<f64>,
    pub a_up3: Tens3,
    pub a_up4: Tens4,
    pub a_mixed3: Tens3,
    pub h_up: DMatrix<f64>,
}

fn all_distinct(idx: &[usize]) -> bool {
    (0..idx.len()).all(|a| (a + 1..idx.len()).all(|b| idx[a] != idx[b]))
}

pub fn bm_closed_forms(n: usize, p: &Momentum) -> Result<BmClosedForms> {
    if n < 4 {
        return Err(CartanError::DimTooSmall { dim: n, min: 4 });
    }
    if p.dim() != n {
        return Err(CartanError::DimensionMismatch { expected: n, got: p.dim() });
    }
    if let Some(bad) = p.iter().position(|&v| v <= 0.0 || v.is_nan()) {
        return Err(CartanError::InadmissiblePoint(format!("p_{} = {} is not positive", bad + 1, p[bad])));
    }
    let nf = n as f64;
    let k = p.iter().product::<f64>().powf(1.0 / nf);
    let up: Vec<f64> = p.iter().map(|pi| k / (nf * pi)).collect();
    let dn: Vec<f64> = p.iter().map(|pi| pi / k).collect();

    let a_up2 = DMatrix::from_fn(n, n, |i, j| if i != j { nf / (nf - 1.0) * up[i] * up[j] } else { 0.0 });
    let a_dn2 =
        DMatrix::from_fn(n, n, |i, j| if i != j { nf * dn[i] * dn[j] } else { -nf * (nf - 2.0) * dn[i] * dn[i] });
    let c3 = nf * nf / ((nf - 1.0) * (nf - 2.0));
    let a_up3 = Tens3::from_fn(n, |[i, j, l]| if all_distinct(&[i, j, l]) { c3 * up[i] * up[j] * up[l] } else { 0.0 });
    let c4 = nf.powi(3) / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0));
    let a_up4 = Tens4::from_fn(
        n,
        |[h, i, j, l]| {
            if all_distinct(&[h, i, j, l]) {
                c4 * up[h] * up[i] * up[j] * up[l]
            } else {
                0.0
            }
        },
    );
    let a_mixed3 = Tens3::from_fn(n, |[i, j, l]| {
        if all_distinct(&[i, j, l]) {
            -c3 * dn[i] * up[j] * up[l]
        } else if j == l {
            0.0
        } else if i == j {
            nf / (nf - 1.0) * up[l]
        } else if i == l {
            nf / (nf - 1.0) * up[j]
        } else {
            unreachable!()
        }
    });
    let h_up = DMatrix::from_fn(n, n, |i, j| if i != j { up[i] * up[j] } else { -(nf - 1.0) * up[i] * up[i] });
    Ok(BmClosedForms { n, k, a_up1: up, a_dn1: dn, a_up2, a_dn2, a_up3, a_up4, a_mixed3, h_up })
}

/// Run the general engine on the Berwald-Moor tensor and compare against the theorem
/// and against [`BmClosedForms`].
pub fn bm_theorem_check(n: usize, p: &Momentum, tol: &Tolerances) -> Result<Vec<CheckRecord>> {
    let a = bm_tensor(n)?;
    let closed = bm_closed_forms(n, p)?;
    let ctx = EvalContext::new(&a, p)?;
    let mut out = Vec::new();
    let nf = n as f64;

    let torsion = vgeometry::torsion_covector(&ctx);
    let c_max = crate::dense::max_abs(&torsion.values);
    out.push(CheckRecord::new("bm.torsion_covector_vanishes", c_max / (nf / ctx.k), tol.bm_torsion));

    let fit = curvature::s3_fit(&ctx, tol.s3)?;
    out.push(CheckRecord::flag("bm.s3_like", fit.is_s3_like));
    out.push(CheckRecord::new("bm.s_equals_minus_one", (fit.s + 1.0).abs(), tol.bm_s));
    let lambda = bm_lambda(n);
    out.push(CheckRecord::new("bm.lambda", ((fit.lambda - lambda) / lambda).abs(), tol.bm_lambda));

    let t = ttensor::t_closed(&ctx);
    out.push(CheckRecord::new("bm.t_tensor_vanishes", t.max_abs() / ttensor::t_term_scale(&ctx), tol.bm_t));

    let mut u_err = compute_u(&ctx);
    u_err.add_scaled(&angular_basis(&ctx), -lambda);
    out.push(CheckRecord::new("bm.u_closed_form", u_err.max_abs() / compute_u(&ctx).max_abs(), tol.bm_u));

    let trace: Vec<f64> = (0..n).map(|i| (0..n).map(|r| ctx.a_mixed3[[r, i, r]]).sum()).collect();
    let n_a: Vec<f64> = ctx.a_up1.iter().map(|v| nf * v).collect();
    out.push(CheckRecord::new("bm.trace_a_mixed", rel_diff(&trace, &n_a), tol.bm_trace));

    let rel = |name: &str, engine: &[f64], analytic: &[f64]| {
        CheckRecord::new(format!("bm.closed_form.{name}"), rel_diff(engine, analytic), tol.bm_closed_forms)
    };
    out.push(rel("k", &[ctx.k], &[closed.k]));
    out.push(rel("a_up1", &ctx.a_up1, &closed.a_up1));
    out.push(rel("a_dn1", &ctx.a_dn1, &closed.a_dn1));
    out.push(rel("a_up2", ctx.a_up2.as_slice(), closed.a_up2.as_slice()));
    out.push(rel("a_dn2", ctx.a_dn2.as_slice(), closed.a_dn2.as_slice()));
    out.push(rel("a_up3", ctx.a_up3.as_slice(), closed.a_up3.as_slice()));
    if let Some(a4) = &ctx.a_up4 {
        out.push(rel("a_up4", a4.as_slice(), closed.a_up4.as_slice()));
    }
    out.push(rel("a_mixed3", ctx.a_mixed3.as_slice(), closed.a_mixed3.as_slice()));
    out.push(rel("h_up", ctx.h_up.as_slice(), closed.h_up.as_slice()));
    Ok(out)
}
