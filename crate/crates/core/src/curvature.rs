//! The v-curvature `S^hijk`, the auxiliary tensor `U^hijk`, and pointwise
//! S3-likeness diagnosis.

use serde::Serialize;

use crate::dense::Tens4;
use crate::error::{CartanError, Result};
use crate::metric_core::EvalContext;
use crate::vgeometry::{c_mixed, c_up};

/// Default relative residual below which a point is declared S3-like.
pub const S3_TOLERANCE: f64 = 1e-8;

/// Basis components smaller than this are left out of the least-squares fit.
const BASIS_FLOOR: f64 = 1e-14;

/// `U^hijk = a_r^ij a^rhk - a_r^ik a^rhj`.
pub fn compute_u(ctx: &EvalContext) -> Tens4 {
    let n = ctx.n;
    let half = Tens4::from_fn(n, |[h, i, j, k]| (0..n).map(|r| ctx.a_mixed3[[r, i, j]] * ctx.a_up3[[r, h, k]]).sum());
    half.alternate_jk()
}

/// `B^hijk = h^hj h^ik - h^hk h^ij`.
pub fn angular_basis(ctx: &EvalContext) -> Tens4 {
    let h = &ctx.h_up;
    Tens4::from_fn(ctx.n, |[a, i, j, k]| h[(a, j)] * h[(i, k)] - h[(a, k)] * h[(i, j)])
}

/// The v-curvature evaluated three ways.
#[derive(Debug, Clone)]
pub struct VCurvature {
    /// `C_r^ij C^rhk - C_r^ik C^rhj`
    pub by_definition: Tens4,
    /// `(m-1)(m-2)^2/(4K^2)` times the alternating sum over `(j,k)` of
    /// `a_r^ij a^rhk - a^ij (a^hk - a^h a^k) + a^i a^j a^hk`.
    pub closed_form: Tens4,
    /// `(m-2)^2/(4K^2) [B/(m-1) + (m-1) U]`.
    pub decomposition: Tens4,
}

impl VCurvature {
    /// Largest pairwise difference of the three routes relative to `max|S|`.
    pub fn route_discrepancy(&self) -> f64 {
        let scale = self.by_definition.max_abs().max(f64::MIN_POSITIVE);
        let d1 = self.by_definition.max_abs_diff(&self.closed_form);
        let d2 = self.by_definition.max_abs_diff(&self.decomposition);
        let d3 = self.closed_form.max_abs_diff(&self.decomposition);
        d1.max(d2).max(d3) / scale
    }
}

pub fn compute_s(ctx: &EvalContext) -> VCurvature {
    let n = ctx.n;
    let m = ctx.mf();
    let k2 = ctx.k * ctx.k;
    let cu = c_up(ctx);
    let cm = c_mixed(ctx);
    let by_definition =
        Tens4::from_fn(n, |[h, i, j, k]| (0..n).map(|r| cm[[r, i, j]] * cu[[r, h, k]]).sum()).alternate_jk();

    let a1 = &ctx.a_up1;
    let a2 = &ctx.a_up2;
    let closed_form = Tens4::from_fn(n, |[h, i, j, k]| {
        let contracted: f64 = (0..n).map(|r| ctx.a_mixed3[[r, i, j]] * ctx.a_up3[[r, h, k]]).sum();
        contracted - a2[(i, j)] * (a2[(h, k)] - a1[h] * a1[k]) + a1[i] * a1[j] * a2[(h, k)]
    })
    .alternate_jk()
    .scale((m - 1.0) * (m - 2.0).powi(2) / (4.0 * k2));

    let mut decomposition = angular_basis(ctx).scale(1.0 / (m - 1.0));
    decomposition.add_scaled(&compute_u(ctx), m - 1.0);
    let decomposition = decomposition.scale((m - 2.0).powi(2) / (4.0 * k2));

    VCurvature { by_definition, closed_form, decomposition }
}

/// `S = (m-2)^2/4 ((m-1) lambda + 1/(m-1))`.
pub fn s_from_lambda(m: usize, lambda: f64) -> f64 {
    let m = m as f64;
    (m - 2.0).powi(2) / 4.0 * ((m - 1.0) * lambda + 1.0 / (m - 1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct S3Diagnosis {
    pub lambda: f64,
    /// Max deviation of `U` from `lambda B`, relative to `max|U|` (or to
    /// `max|B|` when `U` vanishes at round-off level).
    pub residual: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub is_s3_like: bool,
    pub tolerance: f64,
}

/// Fit `U = lambda B` by least squares over every index quadruple.
pub fn s3_fit(ctx: &EvalContext, tolerance: f64) -> Result<S3Diagnosis> {
    if ctx.n < 4 {
        return Err(CartanError::DimTooSmall { dim: ctx.n, min: 4 });
    }
    let u = compute_u(ctx);
    let b = angular_basis(ctx);
    let b_max = b.max_abs();
    let (mut num, mut den) = (0.0, 0.0);
    for (&uv, &bv) in u.as_slice().iter().zip(b.as_slice()) {
        if bv.abs() >= BASIS_FLOOR * b_max.max(1.0) {
            num += uv * bv;
            den += bv * bv;
        }
    }
    if den == 0.0 {
        return Err(CartanError::DegenerateBasis);
    }
    let lambda = num / den;
    let u_max = u.max_abs();
    let scale = if u_max > 1e-12 * b_max { u_max } else { b_max };
    let deviation =
        u.as_slice().iter().zip(b.as_slice()).fold(0.0_f64, |acc, (uv, bv)| acc.max((uv - lambda * bv).abs()));
    let residual = deviation / scale;
    Ok(S3Diagnosis { lambda, residual, s: s_from_lambda(ctx.m, lambda), is_s3_like: residual < tolerance, tolerance })
}

/// `max|K^2 S^hijk - S B^hijk| / max|K^2 S^hijk|` for a fitted scalar `S`.
pub fn s3_form_residual(ctx: &EvalContext, curvature: &VCurvature, s: f64) -> f64 {
    let k2s = curvature.by_definition.scale(ctx.k * ctx.k);
    let mut diff = k2s.clone();
    diff.add_scaled(&angular_basis(ctx), -s);
    diff.max_abs() / k2s.max_abs().max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::berwald_moor::bm_tensor;
    use crate::symtensor::{Momentum, SymTensor};

    fn bm_ctx(p: Vec<f64>) -> EvalContext {
        EvalContext::new(&bm_tensor(p.len()).unwrap(), &Momentum::new(p)).unwrap()
    }

    #[test]
    fn berwald_moor_u_is_proportional_to_basis() {
        let ctx = bm_ctx(vec![1.0; 4]);
        let mut expected = angular_basis(&ctx).scale(-4.0 / 9.0);
        expected.add_scaled(&compute_u(&ctx), -1.0);
        assert!(expected.max_abs() < 1e-12);
    }

    #[test]
    fn u_and_s_symmetries() {
        let ctx = bm_ctx(vec![1.0, 2.0, 3.0, 4.0]);
        let u = compute_u(&ctx);
        let antisym = |t: &Tens4| Tens4::from_fn(4, |[h, i, j, k]| t[[h, i, j, k]] + t[[h, i, k, j]]).max_abs();
        assert!(antisym(&u) < 1e-13);
        let s = compute_s(&ctx);
        let d = &s.by_definition;
        assert!(antisym(d) < 1e-12);
        assert!(d.asymmetry([1, 0, 3, 2]) < 1e-12);
        assert!(u.asymmetry([1, 0, 3, 2]) < 1e-12);
    }

    #[test]
    fn berwald_moor_curvature_is_minus_basis() {
        let ctx = bm_ctx(vec![1.0; 4]);
        let s = compute_s(&ctx);
        assert!(s.route_discrepancy() < 1e-12);
        let mut k2s = s.by_definition.scale(ctx.k * ctx.k);
        k2s.add_scaled(&angular_basis(&ctx), 1.0);
        assert!(k2s.max_abs() < 1e-12);
    }

    #[test]
    fn s3_fit_berwald_moor() {
        let d = s3_fit(&bm_ctx(vec![1.0; 4]), S3_TOLERANCE).unwrap();
        assert!((d.lambda + 4.0 / 9.0).abs() < 1e-12);
        assert!((d.s + 1.0).abs() < 1e-12);
        assert!(d.is_s3_like);
        let d = s3_fit(&bm_ctx(vec![0.5, 1.5, 2.0, 3.0, 0.7]), S3_TOLERANCE).unwrap();
        assert!((d.s + 1.0).abs() < 1e-10);
        assert!((d.lambda + 25.0 / 144.0).abs() < 1e-10);
    }

    #[test]
    fn s_lambda_relation() {
        assert!((s_from_lambda(4, -4.0 / 9.0) + 1.0).abs() < 1e-15);
        assert!((s_from_lambda(3, 0.0) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn diagonal_cubic_has_vanishing_u() {
        // U^hijk = delta^{hijk}(K/p_h - K/p_h) = 0, so the fit is exact with lambda = 0.
        let t = SymTensor::new(4, 3, (0..4).map(|i| (vec![i, i, i], 1.0))).unwrap();
        let ctx = EvalContext::new(&t, &Momentum::new(vec![1.0, 2.0, 1.5, 0.5])).unwrap();
        assert!(compute_u(&ctx).max_abs() < 1e-15);
        let d = s3_fit(&ctx, S3_TOLERANCE).unwrap();
        assert!(d.lambda.abs() < 1e-14);
        assert!(d.is_s3_like);
        assert!((d.s - 0.125).abs() < 1e-13);
    }

    #[test]
    fn s3_fit_needs_four_dimensions() {
        let t = SymTensor::new(3, 3, (0..3).map(|i| (vec![i, i, i], 1.0))).unwrap();
        let ctx = EvalContext::new(&t, &Momentum::new(vec![1.0; 3])).unwrap();
        assert!(matches!(s3_fit(&ctx, S3_TOLERANCE), Err(CartanError::DimTooSmall { .. })));
    }
}
