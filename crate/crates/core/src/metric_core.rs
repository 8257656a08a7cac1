//! The metric `K = (a^{i1...im} p_{i1}...p_{im})^{1/m}` and every point-local
//! quantity derived from it.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::dense::{Tens3, Tens4};
use crate::error::{CartanError, Result};
use crate::symtensor::{Momentum, SymTensor};

/// Reciprocal condition estimate below which `a^ij` is treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-12;

/// Eigenvalue counts of `g^ij`. Positive definiteness is reported, not enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

/// Every point-local quantity needed by the geometry modules, evaluated once.
#[derive(Debug, Clone)]
pub struct EvalContext {
    pub n: usize,
    pub m: usize,
    pub p: Momentum,
    pub k: f64,
    /// `a^i`
    pub a_up1: Vec<f64>,
    /// `a^ij`
    pub a_up2: DMatrix<f64>,
    /// `a^ijk`
    pub a_up3: Tens3,
    /// `a^hijk`, only for `m >= 4`.
    pub a_up4: Option<Tens4>,
    /// `a_i = p_i / K`
    pub a_dn1: Vec<f64>,
    /// `a_ij`, the inverse of `a^ij`.
    pub a_dn2: DMatrix<f64>,
    /// `a_i^jk = a_is a^sjk`
    pub a_mixed3: Tens3,
    pub l_up: Vec<f64>,
    pub g_up: DMatrix<f64>,
    /// `g_ij` from the closed form in terms of `a_ij` and `a_i`.
    pub g_dn: DMatrix<f64>,
    /// Max componentwise difference between the closed-form `g_ij` and the LU inverse of `g^ij`.
    pub g_dn_discrepancy: f64,
    pub h_up: DMatrix<f64>,
    /// Reciprocal 1-norm condition estimate of `a^ij`.
    pub a_up2_rcond: f64,
    pub signature: Signature,
}

/// Full contraction `a^{i1...im} p_{i1}...p_{im}`.
pub fn radicand(a: &SymTensor, p: &[f64]) -> Result<f64> {
    Ok(a.contract(p, a.rank())?.scalar())
}

/// `K(p)`; fails outside the open domain where the radicand is positive.
pub fn eval_k(a: &SymTensor, p: &[f64]) -> Result<f64> {
    let r = radicand(a, p)?;
    if r > 0.0 && r.is_finite() {
        Ok(r.powf(1.0 / a.rank() as f64))
    } else {
        Err(CartanError::NonPositiveRadicand(r))
    }
}

/// Inverse by partial-pivot LU with a reciprocal 1-norm condition estimate.
pub(crate) fn invert(mat: &DMatrix<f64>) -> Option<(DMatrix<f64>, f64)> {
    let inv = mat.clone().lu().try_inverse()?;
    let rcond = 1.0 / (norm1(mat) * norm1(&inv));
    if inv.iter().all(|v| v.is_finite()) {
        Some((inv, rcond))
    } else {
        None
    }
}

fn norm1(mat: &DMatrix<f64>) -> f64 {
    mat.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn signature(g: &DMatrix<f64>) -> Signature {
    let eig = SymmetricEigen::new(g.clone()).eigenvalues;
    let scale = eig.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let mut sig = Signature { positive: 0, negative: 0, zero: 0 };
    for &v in eig.iter() {
        if v.abs() <= 1e-12 * scale {
            sig.zero += 1;
        } else if v > 0.0 {
            sig.positive += 1;
        } else {
            sig.negative += 1;
        }
    }
    sig
}

fn dense_matrix(t: &SymTensor) -> DMatrix<f64> {
    let n = t.dim();
    DMatrix::from_fn(n, n, |i, j| t.get(&[i, j]))
}

fn dense3(t: &SymTensor) -> Tens3 {
    Tens3::from_flat(t.dim(), t.to_dense())
}

fn dense4(t: &SymTensor) -> Tens4 {
    Tens4::from_flat(t.dim(), t.to_dense())
}

impl EvalContext {
    pub fn new(a: &SymTensor, p: &Momentum) -> Result<EvalContext> {
        let n = a.dim();
        let m = a.rank();
        if p.dim() != n {
            return Err(CartanError::DimensionMismatch { expected: n, got: p.dim() });
        }
        let k = eval_k(a, p)?;

        // Reuse each contraction for the next one.
        let c_m4 = if m >= 4 { Some(a.contract(p, m - 4)?) } else { None };
        let c_m3 = match &c_m4 {
            Some(t) => t.contract(p, 1)?,
            None => a.clone(),
        };
        let c_m2 = c_m3.contract(p, 1)?;
        let c_m1 = c_m2.contract(p, 1)?;

        let kp = |e: usize| k.powi(e as i32);
        let a_up1: Vec<f64> = (0..n).map(|i| c_m1.get(&[i]) / kp(m - 1)).collect();
        let a_up2 = dense_matrix(&c_m2) / kp(m - 2);
        let a_up3 = dense3(&c_m3).scale(1.0 / kp(m - 3));
        let a_up4 = c_m4.as_ref().map(|t| dense4(t).scale(1.0 / kp(m - 4)));

        let (a_dn2, a_up2_rcond) = match invert(&a_up2) {
            Some((inv, rcond)) if rcond >= SINGULAR_RCOND => (inv, rcond),
            Some((_, rcond)) => return Err(CartanError::SingularAij(rcond)),
            None => return Err(CartanError::SingularAij(0.0)),
        };
        let a_dn1: Vec<f64> = p.iter().map(|pi| pi / k).collect();

        let a_mixed3 = Tens3::from_fn(n, |[i, j, l]| (0..n).map(|s| a_dn2[(i, s)] * a_up3[[s, j, l]]).sum());

        let mf = m as f64;
        let l_up = a_up1.clone();
        let g_up = DMatrix::from_fn(n, n, |i, j| (mf - 1.0) * a_up2[(i, j)] - (mf - 2.0) * a_up1[i] * a_up1[j]);
        let h_up = DMatrix::from_fn(n, n, |i, j| (mf - 1.0) * (a_up2[(i, j)] - a_up1[i] * a_up1[j]));
        let g_dn =
            DMatrix::from_fn(n, n, |i, j| a_dn2[(i, j)] / (mf - 1.0) + (mf - 2.0) / (mf - 1.0) * a_dn1[i] * a_dn1[j]);
        let g_dn_discrepancy = match invert(&g_up) {
            Some((inv, _)) => (&inv - &g_dn).amax(),
            None => f64::INFINITY,
        };
        let signature = signature(&g_up);

        Ok(EvalContext {
            n,
            m,
            p: p.clone(),
            k,
            a_up1,
            a_up2,
            a_up3,
            a_up4,
            a_dn1,
            a_dn2,
            a_mixed3,
            l_up,
            g_up,
            g_dn,
            g_dn_discrepancy,
            h_up,
            a_up2_rcond,
            signature,
        })
    }

    pub fn mf(&self) -> f64 {
        self.m as f64
    }

    /// `a^hijk`, or zeros when `m = 3` (every consumer multiplies it by `m - 3`).
    pub fn a_up4_or_zero(&self) -> Tens4 {
        self.a_up4.clone().unwrap_or_else(|| Tens4::zeros(self.n))
    }
}

/// Residuals of the homogeneity identities at `p` under scaling by `lambda`.
#[derive(Debug, Clone, Serialize)]
pub struct HomogeneityResiduals {
    /// `|K(lambda p) - lambda K(p)| / (lambda K(p))`
    pub k_scaling: f64,
    /// `|g^ij p_i p_j - K^2| / K^2`
    pub g_quadratic: f64,
    /// `|a^ij p_i p_j - K^2| / K^2`
    pub a_quadratic: f64,
    /// `max|g^ij(lambda p) - g^ij(p)| / max|g^ij(p)|`
    pub g_zero_homogeneity: f64,
}

impl HomogeneityResiduals {
    pub fn max(&self) -> f64 {
        self.k_scaling.max(self.g_quadratic).max(self.a_quadratic).max(self.g_zero_homogeneity)
    }
}

pub fn homogeneity_residuals(a: &SymTensor, p: &Momentum, lambda: f64) -> Result<HomogeneityResiduals> {
    if lambda <= 0.0 || lambda.is_nan() {
        return Err(CartanError::InvalidArgument(format!("scale factor must be positive, got {lambda}")));
    }
    let ctx = EvalContext::new(a, p)?;
    let scaled = EvalContext::new(a, &p.scaled(lambda))?;
    let k2 = ctx.k * ctx.k;
    let quad = |mat: &DMatrix<f64>| {
        let mut s = 0.0;
        for i in 0..ctx.n {
            for j in 0..ctx.n {
                s += mat[(i, j)] * p[i] * p[j];
            }
        }
        s
    };
    Ok(HomogeneityResiduals {
        k_scaling: (scaled.k - lambda * ctx.k).abs() / (lambda * ctx.k),
        g_quadratic: (quad(&ctx.g_up) - k2).abs() / k2,
        a_quadratic: (quad(&ctx.a_up2) - k2).abs() / k2,
        g_zero_homogeneity: (&scaled.g_up - &ctx.g_up).amax() / ctx.g_up.amax(),
    })
}
