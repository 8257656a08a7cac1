//! The generic identity suite: every relation that must hold for any
//! admissible m-th root metric at any admissible point, each checked against
//! an independent route (finite differences, inversion, or a second formula).

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;

use crate::curvature::{self, compute_s, compute_u};
use crate::dense::{max_abs, rel_diff, Tens3, Tens4};
use crate::error::Result;
use crate::metric_core::{eval_k, homogeneity_residuals, EvalContext};
use crate::oracle;
use crate::report::CheckRecord;
use crate::symtensor::{Momentum, SymTensor};
use crate::tolerances::Tolerances;
use crate::ttensor;
use crate::vgeometry;

/// Components drawn for each finite-difference spot check.
pub const FD_SPOT_COMPONENTS: usize = 20;

fn mat_rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    rel_diff(a.as_slice(), b.as_slice())
}

fn l1(p: &[f64]) -> f64 {
    p.iter().map(|v| v.abs()).sum()
}

/// `max|X^..k p_k| / (max|X| sum|p_k|)`
fn annihilation(contracted: &[f64], x_max: f64, p: &[f64]) -> f64 {
    let scale = x_max * l1(p);
    if scale > 0.0 {
        max_abs(contracted) / scale
    } else {
        max_abs(contracted)
    }
}

fn antisymmetry_jk(t: &Tens4) -> f64 {
    Tens4::from_fn(t.dim(), |[h, i, j, k]| t[[h, i, j, k]] + t[[h, i, k, j]]).max_abs()
}

/// Relative error of a closed-form rank-3 array on randomly chosen components.
fn spot_rel3<R: Rng>(closed: &Tens3, reference: &Tens3, scale: f64, rng: &mut R) -> f64 {
    let total = closed.as_slice().len();
    let worst = sample(rng, total, FD_SPOT_COMPONENTS.min(total))
        .iter()
        .map(|flat| (closed.as_slice()[flat] - reference.as_slice()[flat]).abs())
        .fold(0.0, f64::max);
    worst / scale.max(f64::MIN_POSITIVE)
}

fn spot_rel4<R: Rng>(closed: &Tens4, reference: &Tens4, scale: f64, rng: &mut R) -> f64 {
    let total = closed.as_slice().len();
    let worst = sample(rng, total, FD_SPOT_COMPONENTS.min(total))
        .iter()
        .map(|flat| (closed.as_slice()[flat] - reference.as_slice()[flat]).abs())
        .fold(0.0, f64::max);
    worst / scale.max(f64::MIN_POSITIVE)
}

/// Run every generic identity at `p`. Domain errors at `p` itself are returned
/// as `Err`; an identity that cannot be evaluated (e.g. a stencil leaving the
/// domain) is recorded as a failed check.
pub fn identity_checks<R: Rng>(a: &SymTensor, p: &Momentum, tol: &Tolerances, rng: &mut R) -> Result<Vec<CheckRecord>> {
    let ctx = EvalContext::new(a, p)?;
    let n = ctx.n;
    let mut out = Vec::new();
    let mut push = |r: CheckRecord| out.push(r);
    let failed = |name: &str| CheckRecord::new(name, f64::NAN, 0.0);

    // Metric and homogeneity.
    match homogeneity_residuals(a, p, 2.0) {
        Ok(h) => {
            push(CheckRecord::new("metric.k_homogeneity", h.k_scaling, tol.k_homogeneity));
            push(CheckRecord::new("metric.k2_equals_g_pp", h.g_quadratic, tol.quadratic_form));
            push(CheckRecord::new("metric.k2_equals_a_pp", h.a_quadratic, tol.quadratic_form));
            push(CheckRecord::new("metric.g_zero_homogeneity", h.g_zero_homogeneity, tol.g_zero_homogeneity));
        }
        Err(_) => push(failed("metric.homogeneity")),
    }
    let pairing: f64 = ctx.a_dn1.iter().zip(&ctx.a_up1).map(|(x, y)| x * y).sum();
    push(CheckRecord::new("metric.a_dn_a_up_pairing", (pairing - 1.0).abs(), tol.dual_pairing));
    let eye = DMatrix::<f64>::identity(n, n);
    push(CheckRecord::new("metric.a_inverse", (&ctx.a_dn2 * &ctx.a_up2 - &eye).amax(), tol.a_inverse));
    push(CheckRecord::new("metric.g_dn_closed_vs_inverse", ctx.g_dn_discrepancy / ctx.g_dn.amax(), tol.g_inverse));
    push(CheckRecord::new("metric.g_dn_g_up_identity", (&ctx.g_dn * &ctx.g_up - &eye).amax(), tol.g_identity));
    let pv = DVector::from_column_slice(p);
    let l = DVector::from_column_slice(&ctx.l_up);
    let g_l = &ctx.g_dn * &l;
    push(CheckRecord::new("metric.g_dn_l_equals_a_dn", rel_diff(g_l.as_slice(), &ctx.a_dn1), tol.g_lowering));
    let g_p = &ctx.g_up * &pv;
    let k_l: Vec<f64> = ctx.l_up.iter().map(|v| ctx.k * v).collect();
    push(CheckRecord::new("metric.g_up_p_equals_k_l", rel_diff(g_p.as_slice(), &k_l), tol.supporting_element));
    let h_p = &ctx.h_up * &pv;
    push(CheckRecord::new(
        "metric.h_annihilates_p",
        annihilation(h_p.as_slice(), ctx.h_up.amax(), p),
        tol.annihilation,
    ));

    // Metric against finite differences of K.
    let k_field = |q: &[f64]| eval_k(a, q);
    match oracle::fd_grad_with(k_field, p, tol.fd_grad_step) {
        Ok(g) => push(CheckRecord::new("oracle.l_vs_fd_gradient", rel_diff(&ctx.l_up, &g), tol.fd_gradient)),
        Err(_) => push(failed("oracle.l_vs_fd_gradient")),
    }
    let hess = |f: &dyn Fn(&[f64]) -> Result<f64>| -> Result<DMatrix<f64>> {
        let h = oracle::fd_hessian_with(f, p, tol.fd_hessian_step)?;
        Ok(DMatrix::from_fn(n, n, |i, j| h[i][j]))
    };
    match hess(&|q| eval_k(a, q).map(|k| 0.5 * k * k)) {
        Ok(h) => push(CheckRecord::new("oracle.g_vs_fd_hessian", mat_rel(&ctx.g_up, &h), tol.fd_metric)),
        Err(_) => push(failed("oracle.g_vs_fd_hessian")),
    }
    match hess(&|q| eval_k(a, q)) {
        Ok(h) => push(CheckRecord::new("oracle.h_vs_fd_hessian", mat_rel(&ctx.h_up, &(h * ctx.k)), tol.fd_metric)),
        Err(_) => push(failed("oracle.h_vs_fd_hessian")),
    }

    // v-torsion and v-derivation.
    let cu = vgeometry::c_up(&ctx);
    let cm = vgeometry::c_mixed(&ctx);
    let g_field = |q: &[f64]| -> Result<Vec<f64>> {
        let c = EvalContext::new(a, &Momentum::new(q.to_vec()))?;
        Ok(c.g_up.transpose().as_slice().to_vec())
    };
    match oracle::fd_jacobian_with(g_field, p, tol.fd_grad_step) {
        Ok(rows) => {
            let fd = Tens3::from_fn(n, |[i, j, k]| -0.5 * rows[k][i * n + j]);
            push(CheckRecord::new("vgeometry.c_up_vs_fd", spot_rel3(&cu, &fd, cu.max_abs(), rng), tol.fd_derivative));
        }
        Err(_) => push(failed("vgeometry.c_up_vs_fd")),
    }
    push(CheckRecord::new(
        "vgeometry.c_up_symmetry",
        cu.max_asymmetry_all() / cu.max_abs().max(f64::MIN_POSITIVE),
        tol.symmetry,
    ));
    push(CheckRecord::new(
        "vgeometry.c_mixed_symmetry",
        cm.asymmetry([0, 2, 1]) / cm.max_abs().max(f64::MIN_POSITIVE),
        tol.symmetry,
    ));
    push(CheckRecord::new(
        "vgeometry.c_mixed_lowering",
        vgeometry::c_mixed_lowering_residual(&ctx, &cu, &cm),
        tol.c_lowering,
    ));
    push(CheckRecord::new(
        "vgeometry.c_up_annihilates_p",
        annihilation(&cu.contract_last(p), cu.max_abs(), p),
        tol.annihilation,
    ));
    push(CheckRecord::new(
        "vgeometry.c_mixed_annihilates_p",
        annihilation(&cm.contract_last(p), cm.max_abs(), p),
        tol.annihilation,
    ));
    let torsion = vgeometry::torsion_covector(&ctx);
    push(CheckRecord::new("vgeometry.torsion_trace", torsion.residual, tol.torsion_trace));

    let basics = vgeometry::vderiv_basics(&ctx);
    push(CheckRecord::flag("vgeometry.k_deriv_is_l", basics.k_deriv == ctx.l_up));
    push(CheckRecord::new(
        "vgeometry.a1_deriv_is_h_over_k",
        basics.h_residual / (ctx.h_up.amax() / ctx.k),
        tol.vderiv_basics,
    ));
    let a2_def = vgeometry::vderiv_a_ij_definitional(&ctx, &cm);
    push(CheckRecord::new(
        "vgeometry.a2_deriv_closed_vs_definition",
        a2_def.max_abs_diff(&basics.a2_deriv) / a2_def.max_abs().max(f64::MIN_POSITIVE),
        tol.vderiv_basics,
    ));
    push(CheckRecord::new(
        "vgeometry.a2_deriv_annihilates_p",
        annihilation(&basics.a2_deriv.contract_last(p), basics.a2_deriv.max_abs(), p),
        tol.annihilation,
    ));

    let partial = vgeometry::partial_a_hij(&ctx);
    let a3_field = |q: &[f64]| -> Result<Vec<f64>> {
        Ok(EvalContext::new(a, &Momentum::new(q.to_vec()))?.a_up3.as_slice().to_vec())
    };
    match oracle::fd_jacobian_with(a3_field, p, tol.fd_grad_step) {
        Ok(rows) => {
            let fd = Tens4::from_fn(n, |[h, i, j, k]| rows[k][(h * n + i) * n + j]);
            let scale = partial.max_abs().max(ctx.a_up3.max_abs() / ctx.k);
            push(CheckRecord::new(
                "vgeometry.partial_a_hij_vs_fd",
                spot_rel4(&partial, &fd, scale, rng),
                tol.fd_derivative,
            ));
        }
        Err(_) => push(failed("vgeometry.partial_a_hij_vs_fd")),
    }
    let a3_vderiv = vgeometry::vderiv_a_hij(&ctx);
    let a3_vderiv_def = vgeometry::vderiv_a_hij_definitional(&ctx);
    push(CheckRecord::new(
        "vgeometry.a3_vderiv_closed_vs_definition",
        a3_vderiv.max_abs_diff(&a3_vderiv_def) / a3_vderiv_def.max_abs().max(f64::MIN_POSITIVE),
        tol.a3_vderiv,
    ));

    // Curvature.
    let s = compute_s(&ctx);
    let u = compute_u(&ctx);
    push(CheckRecord::new("curvature.s_routes_agree", s.route_discrepancy(), tol.curvature_routes));
    let s_scale = s.by_definition.max_abs().max(f64::MIN_POSITIVE);
    let u_scale = u.max_abs().max(f64::MIN_POSITIVE);
    push(CheckRecord::new(
        "curvature.s_antisymmetry",
        antisymmetry_jk(&s.by_definition) / s_scale,
        tol.curvature_symmetry,
    ));
    push(CheckRecord::new(
        "curvature.s_pair_symmetry",
        s.by_definition.asymmetry([1, 0, 3, 2]) / s_scale,
        tol.curvature_symmetry,
    ));
    // U may vanish identically; judge its symmetries against the angular basis scale then.
    let u_ref = u_scale.max(curvature::angular_basis(&ctx).max_abs());
    push(CheckRecord::new("curvature.u_antisymmetry", antisymmetry_jk(&u) / u_ref, tol.curvature_symmetry));
    push(CheckRecord::new("curvature.u_pair_symmetry", u.asymmetry([1, 0, 3, 2]) / u_ref, tol.curvature_symmetry));
    if n >= 4 {
        let fit = curvature::s3_fit(&ctx, tol.s3)?;
        if fit.is_s3_like {
            push(CheckRecord::new("curvature.s3_form", curvature::s3_form_residual(&ctx, &s, fit.s), tol.s3));
        }
        match EvalContext::new(a, &p.scaled(2.0)).and_then(|c| curvature::s3_fit(&c, tol.s3)) {
            Ok(fit2) => push(CheckRecord::new(
                "curvature.lambda_homogeneity",
                (fit2.lambda - fit.lambda).abs(),
                tol.lambda_homogeneity,
            )),
            Err(_) => push(failed("curvature.lambda_homogeneity")),
        }
    }

    // T-tensor.
    match ttensor::t_tensor(a, &ctx, tol.fd_richardson_step) {
        Ok(t) => {
            push(CheckRecord::new(
                "ttensor.closed_symmetry",
                t.closed.max_asymmetry_all() / t.term_scale,
                tol.t_symmetry,
            ));
            push(CheckRecord::new(
                "ttensor.closed_annihilates_p",
                max_abs(&t.closed.contract_last(p)) / (t.term_scale * l1(p)),
                tol.annihilation,
            ));
            push(CheckRecord::new("ttensor.closed_vs_definition", t.mixed_ratio(tol.t_fd_atol, tol.t_fd_rtol), 1.0));
            push(CheckRecord::new(
                "ttensor.definition_symmetry",
                t.definition.max_asymmetry_all() / t.scale,
                tol.t_definition,
            ));
            push(CheckRecord::new(
                "ttensor.definition_annihilates_p",
                max_abs(&t.definition.contract_last(p)) / (t.scale * l1(p)),
                tol.t_definition,
            ));
        }
        Err(_) => push(failed("ttensor.closed_vs_definition")),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::berwald_moor::bm_tensor;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn suite_passes_on_berwald_moor_and_cubic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tol = Tolerances::default();
        let cubic = SymTensor::new(4, 3, (0..4).map(|i| (vec![i, i, i], 1.0))).unwrap();
        for (a, p) in [
            (bm_tensor(4).unwrap(), vec![1.0, 2.0, 3.0, 4.0]),
            (bm_tensor(5).unwrap(), vec![0.3, 2.0, 1.0, 4.0, 7.5]),
            (cubic, vec![1.0, 1.0, 2.0, 3.0]),
        ] {
            let records = identity_checks(&a, &Momentum::new(p), &tol, &mut rng).unwrap();
            assert!(records.len() > 30);
            for r in &records {
                assert!(r.pass, "{r:?}");
            }
        }
    }
}
