//! Geometry of m-th root Cartan spaces `K(p) = (a^{i1...im} p_{i1}...p_{im})^(1/m)`
//! with constant coefficients: metric, v-torsion, v-derivation, v-curvature,
//! S3-likeness and the T-tensor, each paired with an independent check.
//!
//! The Berwald-Moor metric of momenta is provided both as an input to the
//! general engine and as a set of analytic closed forms.

pub mod berwald_moor;
pub mod cli;
pub mod curvature;
pub mod dense;
pub mod error;
pub mod metric_core;
pub mod oracle;
pub mod report;
pub mod sampling;
pub mod suite;
pub mod symtensor;
pub mod tolerances;
pub mod ttensor;
pub mod vgeometry;

pub use error::{CartanError, Result};
pub use metric_core::EvalContext;
pub use symtensor::{Momentum, SymTensor};
