//! The T-tensor `T^hijk`, from its closed form and from its definition with a
//! finite-difference vertical derivative of `C^hij`.

use crate::dense::Tens4;
use crate::error::{CartanError, Result};
use crate::metric_core::EvalContext;
use crate::oracle;
use crate::symtensor::{Momentum, SymTensor};
use crate::vgeometry::{c_mixed, c_up, vcov_deriv3};

/// The three coefficient groups of the closed form, in order:
/// the `a^hijk` term, the `a_r^.. a^r..` products, and the `a^... a^.` / `a^.. a^..` products.
pub fn t_closed_terms(ctx: &EvalContext) -> [Tens4; 3] {
    let n = ctx.n;
    let m = ctx.mf();
    let k = ctx.k;
    let a1 = &ctx.a_up1;
    let a2 = &ctx.a_up2;
    let a3 = &ctx.a_up3;
    let am = &ctx.a_mixed3;
    let quartic = ctx.a_up4_or_zero().scale(-(m - 1.0) * (m - 2.0) * (m - 3.0) / (2.0 * k));
    let mixed = |x: usize, y: usize, u: usize, v: usize| -> f64 { (0..n).map(|r| am[[r, x, y]] * a3[[r, u, v]]).sum() };
    let c2 = (m - 1.0) * (m - 2.0).powi(2) / (4.0 * k);
    let products = Tens4::from_fn(n, |[h, i, j, l]| c2 * (mixed(h, l, i, j) + mixed(i, l, h, j) + mixed(j, l, h, i)));
    let c3 = -m * (m - 1.0) * (m - 2.0) / (4.0 * k);
    let lower = Tens4::from_fn(n, |[h, i, j, l]| {
        c3 * (a3[[h, i, j]] * a1[l] + a3[[h, j, l]] * a1[i] + a3[[i, j, l]] * a1[h] + a3[[h, i, l]] * a1[j]
            - a2[(i, j)] * a2[(h, l)]
            - a2[(h, j)] * a2[(i, l)]
            - a2[(i, h)] * a2[(j, l)])
    });
    [quartic, products, lower]
}

/// Closed-form `T^hijk`.
pub fn t_closed(ctx: &EvalContext) -> Tens4 {
    let [mut t, b, c] = t_closed_terms(ctx);
    t.add_scaled(&b, 1.0);
    t.add_scaled(&c, 1.0);
    t
}

/// Largest entry over the individual closed-form groups; the magnitude scale
/// against which a vanishing `T` is judged.
pub fn t_term_scale(ctx: &EvalContext) -> f64 {
    t_closed_terms(ctx).iter().map(Tens4::max_abs).fold(0.0, f64::max)
}

/// Step floor for [`fd_partial_c_up`], below [`oracle::STEP_FLOOR`]: `C` can
/// vary like `1/p_k`, so small components need proportionally small steps.
pub const C_STEP_FLOOR: f64 = 1e-2;

/// `d^k C^hij` by Richardson-extrapolated central differences of the
/// closed-form `C^hij` over perturbed contexts; `result[[h,i,j,k]]`.
pub fn fd_partial_c_up(a: &SymTensor, p: &Momentum, base_step: f64) -> Result<Tens4> {
    let field = |q: &[f64]| -> Result<Vec<f64>> {
        let ctx = EvalContext::new(a, &Momentum::new(q.to_vec()))?;
        Ok(c_up(&ctx).as_slice().to_vec())
    };
    let steps = oracle::axis_steps(base_step, C_STEP_FLOOR, p);
    let rows = match oracle::fd_jacobian_richardson(field, p, &steps) {
        Err(CartanError::InadmissiblePerturbation { .. }) => {
            let shrunk: Vec<f64> = steps.iter().map(|h| h / 4.0).collect();
            oracle::fd_jacobian_richardson(field, p, &shrunk)?
        }
        other => other?,
    };
    let n = p.dim();
    Ok(Tens4::from_fn(n, |[h, i, j, k]| rows[k][(h * n + i) * n + j]))
}

/// Definition route with the largest magnitude among its summands
/// (`K d^k C`, `K C C`, `l C`), the scale of its finite-difference noise.
pub struct TDefinition {
    pub t: Tens4,
    pub summand_scale: f64,
}

/// `T^hijk = K C^hij|^k + l^h C^ijk + l^i C^jkh + l^j C^khi + l^k C^hij`.
pub fn t_definition(a: &SymTensor, ctx: &EvalContext, base_step: f64) -> Result<TDefinition> {
    let cu = c_up(ctx);
    let cm = c_mixed(ctx);
    let partial = fd_partial_c_up(a, &ctx.p, base_step)?;
    let cov = vcov_deriv3(&cu, &partial, &cm);
    let l = &ctx.l_up;
    let t = Tens4::from_fn(ctx.n, |[h, i, j, k]| {
        ctx.k * cov[[h, i, j, k]]
            + l[h] * cu[[i, j, k]]
            + l[i] * cu[[j, k, h]]
            + l[j] * cu[[k, h, i]]
            + l[k] * cu[[h, i, j]]
    });
    let mut products = cov.clone();
    products.add_scaled(&partial, -1.0);
    let summand_scale =
        (ctx.k * partial.max_abs()).max(ctx.k * products.max_abs()).max(crate::dense::max_abs(l) * cu.max_abs());
    Ok(TDefinition { t, summand_scale })
}

#[derive(Debug, Clone)]
pub struct TTensorResult {
    pub closed: Tens4,
    pub definition: Tens4,
    pub max_discrepancy: f64,
    /// Largest entry among the individual closed-form groups.
    pub term_scale: f64,
    /// Largest of `term_scale` and the definition route's summand scale.
    pub scale: f64,
}

impl TTensorResult {
    /// Worst componentwise ratio `|closed - def| / (atol + rtol * max(|closed|, |def|))`
    /// with `atol = atol_rel * scale`; the routes agree when this is at most 1.
    pub fn mixed_ratio(&self, atol_rel: f64, rtol: f64) -> f64 {
        let atol = atol_rel * self.scale;
        self.closed
            .as_slice()
            .iter()
            .zip(self.definition.as_slice())
            .map(|(c, d)| {
                let bound = atol + rtol * c.abs().max(d.abs());
                let diff = (c - d).abs();
                if bound > 0.0 {
                    diff / bound
                } else if diff == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }
}

pub fn t_tensor(a: &SymTensor, ctx: &EvalContext, base_step: f64) -> Result<TTensorResult> {
    let closed = t_closed(ctx);
    let definition = t_definition(a, ctx, base_step)?;
    let max_discrepancy = closed.max_abs_diff(&definition.t);
    let term_scale = t_term_scale(ctx);
    Ok(TTensorResult {
        closed,
        definition: definition.t,
        max_discrepancy,
        term_scale,
        scale: term_scale.max(definition.summand_scale),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::berwald_moor::bm_tensor;

    fn cubic() -> SymTensor {
        SymTensor::new(4, 3, (0..4).map(|i| (vec![i, i, i], 1.0))).unwrap()
    }

    #[test]
    fn berwald_moor_t_vanishes() {
        for p in [vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![0.3, 1.0, 2.0, 0.5, 4.0, 1.1]] {
            let ctx = EvalContext::new(&bm_tensor(p.len()).unwrap(), &Momentum::new(p)).unwrap();
            let t = t_closed(&ctx);
            assert!(t.max_abs() < 1e-11 * t_term_scale(&ctx), "{}", t.max_abs());
        }
    }

    #[test]
    fn diagonal_cubic_routes_agree() {
        let a = cubic();
        let ctx = EvalContext::new(&a, &Momentum::new(vec![1.0; 4])).unwrap();
        let res = t_tensor(&a, &ctx, oracle::richardson_step()).unwrap();
        assert!(res.closed.max_abs() > 0.1);
        assert!(res.max_discrepancy < 1e-9, "{}", res.max_discrepancy);
        assert!(res.mixed_ratio(1e-9, 1e-6) <= 1.0);
        assert!(res.closed.max_asymmetry_all() < 1e-11 * res.term_scale);
        assert!(res.definition.max_asymmetry_all() < 1e-6 * res.term_scale);
    }

    #[test]
    fn berwald_moor_definition_route_is_small() {
        let a = bm_tensor(4).unwrap();
        let ctx = EvalContext::new(&a, &Momentum::new(vec![1.0; 4])).unwrap();
        let def = t_definition(&a, &ctx, oracle::richardson_step()).unwrap().t;
        assert!(def.max_abs() < 1e-6, "{}", def.max_abs());
    }

    #[test]
    fn t_annihilates_momenta() {
        let a = cubic();
        let ctx = EvalContext::new(&a, &Momentum::new(vec![1.0, 2.0, 0.5, 1.5])).unwrap();
        let res = t_tensor(&a, &ctx, oracle::richardson_step()).unwrap();
        let scale = res.term_scale * ctx.p.iter().map(|v| v.abs()).sum::<f64>();
        let closed_p = crate::dense::max_abs(&res.closed.contract_last(&ctx.p));
        let def_p = crate::dense::max_abs(&res.definition.contract_last(&ctx.p));
        assert!(closed_p < 1e-10 * scale, "{closed_p}");
        assert!(def_p < 1e-6 * scale, "{def_p}");
    }

    #[test]
    fn stencil_outside_domain_fails() {
        let a = bm_tensor(4).unwrap();
        let ctx = EvalContext::new(&a, &Momentum::new(vec![1e-7, 1.0, 1.0, 1.0])).unwrap();
        assert!(matches!(
            t_definition(&a, &ctx, oracle::richardson_step()),
            Err(CartanError::InadmissiblePerturbation { .. })
        ));
    }
}
