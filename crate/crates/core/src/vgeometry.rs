//! Vertical torsion, vertical derivation coefficients, the torsion covector and
//! the v-covariant derivatives of the `a`-tensors.

use nalgebra::DMatrix;

use crate::dense::{Tens3, Tens4};
use crate::metric_core::EvalContext;

/// `C^ijk = -(m-1)(m-2)/(2K) (a^ijk - a^ij a^k - a^jk a^i - a^ki a^j + 2 a^i a^j a^k)`.
pub fn c_up(ctx: &EvalContext) -> Tens3 {
    let m = ctx.mf();
    let a1 = &ctx.a_up1;
    let a2 = &ctx.a_up2;
    let coef = -(m - 1.0) * (m - 2.0) / (2.0 * ctx.k);
    Tens3::from_fn(ctx.n, |[i, j, k]| {
        coef * (ctx.a_up3[[i, j, k]] - a2[(i, j)] * a1[k] - a2[(j, k)] * a1[i] - a2[(k, i)] * a1[j]
            + 2.0 * a1[i] * a1[j] * a1[k])
    })
}

/// `C_i^jk = -(m-2)/(2K) [a_i^jk - (d_i^j a^k + d_i^k a^j) + a_i (2 a^j a^k - a^jk)]`.
pub fn c_mixed(ctx: &EvalContext) -> Tens3 {
    let m = ctx.mf();
    let a1 = &ctx.a_up1;
    let coef = -(m - 2.0) / (2.0 * ctx.k);
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    Tens3::from_fn(ctx.n, |[i, j, k]| {
        coef * (ctx.a_mixed3[[i, j, k]] - (delta(i, j) * a1[k] + delta(i, k) * a1[j])
            + ctx.a_dn1[i] * (2.0 * a1[j] * a1[k] - ctx.a_up2[(j, k)]))
    })
}

/// `g_is X^sjk` for a fully contravariant rank-3 array.
pub fn lower_first(g_dn: &DMatrix<f64>, x: &Tens3) -> Tens3 {
    let n = x.dim();
    Tens3::from_fn(n, |[i, j, k]| (0..n).map(|s| g_dn[(i, s)] * x[[s, j, k]]).sum())
}

/// Max componentwise difference between `C_i^jk` and `g_is C^sjk`.
pub fn c_mixed_lowering_residual(ctx: &EvalContext, c_up: &Tens3, c_mixed: &Tens3) -> f64 {
    lower_first(&ctx.g_dn, c_up).max_abs_diff(c_mixed)
}

#[derive(Debug, Clone)]
pub struct TorsionCovector {
    /// `C^i = -(m-2)/(2K) (a_r^ir - n a^i)`
    pub values: Vec<f64>,
    /// `C_r^ir` summed directly from the derivation coefficients.
    pub trace: Vec<f64>,
    /// Max difference between the two.
    pub residual: f64,
}

pub fn torsion_covector(ctx: &EvalContext) -> TorsionCovector {
    let n = ctx.n;
    let nf = n as f64;
    let coef = -(ctx.mf() - 2.0) / (2.0 * ctx.k);
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let tr: f64 = (0..n).map(|r| ctx.a_mixed3[[r, i, r]]).sum();
            coef * (tr - nf * ctx.a_up1[i])
        })
        .collect();
    let cm = c_mixed(ctx);
    let trace: Vec<f64> = (0..n).map(|i| (0..n).map(|r| cm[[r, i, r]]).sum()).collect();
    let residual = crate::dense::max_abs_diff(&values, &trace);
    TorsionCovector { values, trace, residual }
}

/// Closed forms of `K|^k`, `a^i|^k` and `a^ij|^k`.
#[derive(Debug, Clone)]
pub struct VDerivBasics {
    /// `K|^k = a^k = l^k`
    pub k_deriv: Vec<f64>,
    /// `a^i|^k = (m-1)/K (a^ik - a^i a^k)`, entry `(i, k)`.
    pub a1_deriv: DMatrix<f64>,
    /// `a^ij|^k = (m-2)/K (a^ik a^j + a^jk a^i - 2 a^i a^j a^k)`.
    pub a2_deriv: Tens3,
    /// `max|a^i|^k - h^ik / K|`
    pub h_residual: f64,
}

pub fn vderiv_basics(ctx: &EvalContext) -> VDerivBasics {
    let m = ctx.mf();
    let k = ctx.k;
    let a1 = &ctx.a_up1;
    let a2 = &ctx.a_up2;
    let a1_deriv = DMatrix::from_fn(ctx.n, ctx.n, |i, l| (m - 1.0) / k * (a2[(i, l)] - a1[i] * a1[l]));
    let a2_deriv = Tens3::from_fn(ctx.n, |[i, j, l]| {
        (m - 2.0) / k * (a2[(i, l)] * a1[j] + a2[(j, l)] * a1[i] - 2.0 * a1[i] * a1[j] * a1[l])
    });
    let h_residual = (&a1_deriv - &ctx.h_up / k).amax();
    VDerivBasics { k_deriv: ctx.l_up.clone(), a1_deriv, a2_deriv, h_residual }
}

/// `a^ij|^k` by the definition `d^k a^ij + a^rj C_r^ik + a^ir C_r^jk`, with
/// `d^k a^ij = (m-2)/K (a^ijk - a^ij a^k)`.
pub fn vderiv_a_ij_definitional(ctx: &EvalContext, c_mixed: &Tens3) -> Tens3 {
    let m = ctx.mf();
    let n = ctx.n;
    let a2 = &ctx.a_up2;
    Tens3::from_fn(n, |[i, j, l]| {
        let partial = (m - 2.0) / ctx.k * (ctx.a_up3[[i, j, l]] - a2[(i, j)] * ctx.a_up1[l]);
        let conn: f64 = (0..n).map(|r| a2[(r, j)] * c_mixed[[r, i, l]] + a2[(i, r)] * c_mixed[[r, j, l]]).sum();
        partial + conn
    })
}

/// `d a^hij / d p_k = (m-3)/K (a^hijk - a^hij a^k)`; identically zero for `m = 3`.
pub fn partial_a_hij(ctx: &EvalContext) -> Tens4 {
    let Some(a4) = &ctx.a_up4 else {
        return Tens4::zeros(ctx.n);
    };
    let coef = (ctx.mf() - 3.0) / ctx.k;
    Tens4::from_fn(ctx.n, |[h, i, j, k]| coef * (a4[[h, i, j, k]] - ctx.a_up3[[h, i, j]] * ctx.a_up1[k]))
}

/// Closed form of the v-covariant derivative `a^hij|^k`.
pub fn vderiv_a_hij(ctx: &EvalContext) -> Tens4 {
    let m = ctx.mf();
    let k_ = ctx.k;
    let n = ctx.n;
    let a1 = &ctx.a_up1;
    let a2 = &ctx.a_up2;
    let a3 = &ctx.a_up3;
    let am = &ctx.a_mixed3;
    let a4 = ctx.a_up4_or_zero();
    // a_r^{xy} a^{r..}
    let mixed = |x: usize, y: usize, u: usize, v: usize| -> f64 { (0..n).map(|r| am[[r, x, y]] * a3[[r, u, v]]).sum() };
    Tens4::from_fn(n, |[h, i, j, k]| {
        let bracket = mixed(h, k, i, j) + mixed(i, k, h, j) + mixed(j, k, h, i)
            - a3[[k, i, j]] * a1[h]
            - a3[[h, k, j]] * a1[i]
            - a3[[h, i, k]] * a1[j]
            - a2[(i, j)] * a2[(h, k)]
            - a2[(h, j)] * a2[(i, k)]
            - a2[(h, i)] * a2[(j, k)]
            + 2.0 * (a2[(i, j)] * a1[h] * a1[k] + a2[(h, j)] * a1[i] * a1[k] + a2[(h, i)] * a1[j] * a1[k]);
        (m - 3.0) / k_ * a4[[h, i, j, k]] + m / (2.0 * k_) * a3[[h, i, j]] * a1[k] - (m - 2.0) / (2.0 * k_) * bracket
    })
}

/// v-covariant derivative of a contravariant rank-3 array given its plain
/// momentum derivative `partial[[h,i,j,k]] = d^k X^hij`:
/// `X^hij|^k = d^k X^hij + X^rij C_r^hk + X^hrj C_r^ik + X^hir C_r^jk`.
pub fn vcov_deriv3(x: &Tens3, partial: &Tens4, c_mixed: &Tens3) -> Tens4 {
    let n = x.dim();
    Tens4::from_fn(n, |[h, i, j, k]| {
        partial[[h, i, j, k]]
            + (0..n)
                .map(|r| {
                    x[[r, i, j]] * c_mixed[[r, h, k]]
                        + x[[h, r, j]] * c_mixed[[r, i, k]]
                        + x[[h, i, r]] * c_mixed[[r, j, k]]
                })
                .sum::<f64>()
    })
}

/// `a^hij|^k` by the definition, from the closed-form partial derivative and `C_i^jk`.
pub fn vderiv_a_hij_definitional(ctx: &EvalContext) -> Tens4 {
    vcov_deriv3(&ctx.a_up3, &partial_a_hij(ctx), &c_mixed(ctx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::berwald_moor::bm_tensor;
    use crate::symtensor::{Momentum, SymTensor};

    fn bm_ctx(p: Vec<f64>) -> EvalContext {
        EvalContext::new(&bm_tensor(p.len()).unwrap(), &Momentum::new(p)).unwrap()
    }

    fn cubic_ctx() -> EvalContext {
        let t = SymTensor::new(4, 3, (0..4).map(|i| (vec![i, i, i], 1.0))).unwrap();
        EvalContext::new(&t, &Momentum::new(vec![1.0; 4])).unwrap()
    }

    #[test]
    fn c_up_unit_point_component() {
        // a^123 = 1/24, a^12 = 1/12, a^i = 1/4 at p = (1,1,1,1).
        let c = c_up(&bm_ctx(vec![1.0; 4]));
        assert!((c[[0, 1, 2]] + 1.0 / 32.0).abs() < 1e-15);
        assert!(c.max_asymmetry_all() < 1e-16);
    }

    #[test]
    fn c_up_diagonal_cubic() {
        let ctx = cubic_ctx();
        let c = c_up(&ctx);
        let k = ctx.k;
        let ai = 1.0 / (k * k);
        let aii = 1.0 / k;
        let expected = -(1.0 / k) * (1.0 - 3.0 * aii * ai + 2.0 * ai.powi(3));
        assert!((c[[2, 2, 2]] - expected).abs() < 1e-15);
    }

    #[test]
    fn derivation_coefficients_annihilate_momenta() {
        for ctx in [bm_ctx(vec![1.0, 2.0, 3.0, 4.0]), cubic_ctx()] {
            let cu = c_up(&ctx);
            let cm = c_mixed(&ctx);
            let scale_u = cu.max_abs() * ctx.p.iter().map(|v| v.abs()).sum::<f64>();
            let scale_m = cm.max_abs() * ctx.p.iter().map(|v| v.abs()).sum::<f64>();
            assert!(crate::dense::max_abs(&cu.contract_last(&ctx.p)) < 1e-11 * scale_u);
            assert!(crate::dense::max_abs(&cm.contract_last(&ctx.p)) < 1e-11 * scale_m);
            assert!(c_mixed_lowering_residual(&ctx, &cu, &cm) < 1e-12);
            assert!(cm.asymmetry([0, 2, 1]) < 1e-15);
        }
    }

    #[test]
    fn berwald_moor_mixed_a_values() {
        let ctx = bm_ctx(vec![1.0, 2.0, 3.0, 4.0]);
        for i in 0..4 {
            for k in 0..4 {
                if i != k {
                    assert!((ctx.a_mixed3[[i, i, k]] - 4.0 / 3.0 * ctx.a_up1[k]).abs() < 1e-12);
                }
                assert!(ctx.a_mixed3[[i, k, k]].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn torsion_covector_vanishes_for_berwald_moor() {
        for p in [vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 2.0, 1.0, 3.0, 1.0, 2.0]] {
            let tc = torsion_covector(&bm_ctx(p));
            assert!(crate::dense::max_abs(&tc.values) < 1e-12, "{:?}", tc.values);
            assert!(tc.residual < 1e-12);
        }
    }

    #[test]
    fn torsion_covector_of_diagonal_cubic() {
        let ctx = cubic_ctx();
        let tc = torsion_covector(&ctx);
        // a_r^ir = K / p_i and a^i = p_i^2 / K^2 at p = 1.
        let expected = -(1.0 / (2.0 * ctx.k)) * (ctx.k - 4.0 / (ctx.k * ctx.k));
        for v in &tc.values {
            assert!((v - expected).abs() < 1e-14);
        }
        assert!(tc.residual < 1e-14);
    }

    #[test]
    fn basic_vderivs() {
        let ctx = bm_ctx(vec![1.0; 4]);
        let b = vderiv_basics(&ctx);
        assert_eq!(b.k_deriv, ctx.l_up);
        assert!(b.h_residual < 1e-15);
        for i in 0..4 {
            for k in 0..4 {
                let expected = if i == k { -3.0 / 16.0 } else { 1.0 / 16.0 };
                assert!((b.a1_deriv[(i, k)] - expected).abs() < 1e-15);
            }
        }
        let ctx = bm_ctx(vec![1.0, 2.0, 3.0, 4.0]);
        let b = vderiv_basics(&ctx);
        let scale = b.a2_deriv.max_abs() * 10.0;
        assert!(crate::dense::max_abs(&b.a2_deriv.contract_last(&ctx.p)) < 1e-11 * scale);
        let def = vderiv_a_ij_definitional(&ctx, &c_mixed(&ctx));
        assert!(def.max_abs_diff(&b.a2_deriv) < 1e-12);
    }

    #[test]
    fn partial_a_hij_values() {
        assert_eq!(partial_a_hij(&cubic_ctx()).max_abs(), 0.0);
        // (1/K)(a^1234 - a^123 a^4) = 1/24 - 1/96 at p = (1,1,1,1).
        let d = partial_a_hij(&bm_ctx(vec![1.0; 4]));
        assert!((d[[0, 1, 2, 3]] - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn a3_vderiv_matches_definition() {
        for ctx in [bm_ctx(vec![1.0; 4]), bm_ctx(vec![1.0, 2.0, 3.0, 4.0, 5.0]), cubic_ctx()] {
            let closed = vderiv_a_hij(&ctx);
            let def = vderiv_a_hij_definitional(&ctx);
            assert!(closed.max_abs_diff(&def) < 1e-12 * closed.max_abs().max(1.0));
            assert!(closed.asymmetry([1, 0, 2, 3]) < 1e-12);
            assert!(closed.asymmetry([0, 2, 1, 3]) < 1e-12);
        }
    }
}
