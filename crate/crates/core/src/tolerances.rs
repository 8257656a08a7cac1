//! Every threshold used by the identity suite, in one table.
//!
//! Unless noted, residuals are relative: max componentwise difference divided
//! by the max magnitude of the reference quantity. "Annihilation" residuals
//! are divided by `max|X| * sum|p_k|`, the natural bound on `X^..k p_k`.

use serde::{Deserialize, Serialize};

use crate::error::{CartanError, Result};

macro_rules! tolerance_table {
    ($( $(#[$doc:meta])* $name:ident = $default:expr; )*) => {
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        pub struct Tolerances {
            $( $(#[$doc])* pub $name: f64, )*
        }

        impl Default for Tolerances {
            fn default() -> Self {
                Tolerances { $( $name: $default, )* }
            }
        }

        impl Tolerances {
            pub const NAMES: &'static [&'static str] = &[$( stringify!($name), )*];

            /// Override one entry by name.
            pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(CartanError::InvalidArgument(format!("tolerance {name} must be positive, got {value}")));
                }
                match name {
                    $( stringify!($name) => self.$name = value, )*
                    _ => {
                        return Err(CartanError::InvalidArgument(format!(
                            "unknown tolerance {name:?}; known: {}",
                            Self::NAMES.join(", ")
                        )))
                    }
                }
                Ok(())
            }
        }
    };
}

tolerance_table! {
    /// `|K(lambda p) - lambda K(p)|`, relative.
    k_homogeneity = 1e-12;
    /// `K^2 = g^ij p_i p_j = a^ij p_i p_j`, relative to `K^2`.
    quadratic_form = 1e-11;
    /// `a_i a^i = 1`, absolute.
    dual_pairing = 1e-12;
    /// `a_ij a^jk = delta`, absolute.
    a_inverse = 1e-10;
    /// `g^ij(lambda p) = g^ij(p)`, relative.
    g_zero_homogeneity = 1e-12;
    /// Closed-form `g_ij` against the LU inverse of `g^ij`, relative.
    g_inverse = 1e-9;
    /// `g_ij g^jk = delta`, absolute.
    g_identity = 1e-10;
    /// `g_ij l^j = a_i`, relative.
    g_lowering = 1e-11;
    /// `g^ij p_j = K l^i`, relative to `K max|l|`.
    supporting_element = 1e-11;
    /// `h^ij p_j`, `C^ijk p_k`, `C_i^jk p_k`, `T^hijk p_k`, `a^ij|^k p_k`.
    annihilation = 1e-10;
    /// `g^ij` and `h^ij` against finite-difference Hessians.
    fd_metric = 1e-6;
    /// `l^i` against the finite-difference gradient of `K`.
    fd_gradient = 1e-7;
    /// `C^ijk` and `d a^hij / d p_k` against finite differences.
    fd_derivative = 1e-6;
    /// Full symmetry of `C^ijk`, `(j,k)` symmetry of `C_i^jk`.
    symmetry = 1e-13;
    /// `C_i^jk = g_is C^sjk`, absolute.
    c_lowering = 1e-10;
    /// Closed-form torsion covector against the trace `C_r^ir`, absolute.
    torsion_trace = 1e-11;
    /// `a^i|^k = h^ik / K` and `a^ij|^k` closed form against its definition.
    vderiv_basics = 1e-11;
    /// `a^hij|^k` closed form against the definitional route.
    a3_vderiv = 1e-9;
    /// Pairwise agreement of the three `S^hijk` routes.
    curvature_routes = 1e-10;
    /// Antisymmetry and pair symmetry of `S` and `U`.
    curvature_symmetry = 1e-12;
    /// Relative residual of `U - lambda B` below which a point is S3-like.
    s3 = 1e-8;
    /// `lambda(p) = lambda(2p)`, absolute.
    lambda_homogeneity = 1e-9;
    /// Full symmetry of the closed-form `T`, relative to the term scale.
    t_symmetry = 1e-11;
    /// Closed-form vs definition-route `T`: absolute part, times the term scale.
    t_fd_atol = 1e-9;
    /// Closed-form vs definition-route `T`: relative part.
    t_fd_rtol = 1e-6;
    /// Symmetry and annihilation of the definition-route `T`.
    t_definition = 1e-6;
    /// Berwald-Moor: `max|C^i|` in units of `n / K`.
    bm_torsion = 1e-11;
    /// Berwald-Moor: `|S + 1|`.
    bm_s = 1e-9;
    /// Berwald-Moor: `lambda` against `-n^2/((n-1)^2 (n-2)^2)`, relative.
    bm_lambda = 1e-10;
    /// Berwald-Moor: `max|T|` over the largest individual closed-form term.
    bm_t = 1e-10;
    /// Berwald-Moor: engine quantities against the analytic closed forms, relative.
    bm_closed_forms = 1e-11;
    /// Berwald-Moor: `sum_r a_r^ir = n a^i`, relative.
    bm_trace = 1e-12;
    /// Berwald-Moor: `U = lambda B` with the analytic lambda, relative.
    bm_u = 1e-11;
    /// Base step for first finite differences (`eps^(1/3)`).
    fd_grad_step = 6.055454452393343e-6;
    /// Base step for the extrapolated second finite differences (`eps^(1/6)` rounded to `2^-9`).
    fd_hessian_step = 1.953125e-3;
    /// Base step for the extrapolated derivative of `C^hij` in the T-tensor (`eps^(1/5)`).
    fd_richardson_step = 7.40095979741405e-4;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_steps_match_machine_epsilon() {
        let t = Tolerances::default();
        assert!((t.fd_grad_step - f64::EPSILON.cbrt()).abs() < 1e-18);
        assert_eq!(t.fd_hessian_step, crate::oracle::hessian_richardson_step());
        assert!((t.fd_richardson_step - f64::EPSILON.powf(0.2)).abs() < 1e-17);
    }

    #[test]
    fn overrides() {
        let mut t = Tolerances::default();
        t.set("s3", 1e-6).unwrap();
        assert_eq!(t.s3, 1e-6);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("s3", -1.0).is_err());
        assert!(t.set("s3", f64::NAN).is_err());
        assert!(Tolerances::NAMES.contains(&"t_fd_rtol"));
    }
}
