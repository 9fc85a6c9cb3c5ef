//! Copula-based Gaussianization of multivariate samples, with reference
//! baselines and goodness-of-fit measures.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod copula_emp;
pub mod data;
pub mod error;
pub mod evaluate;
pub mod linalg;
pub mod marginal;
pub mod model_io;
pub mod ng;
pub mod sampling;
pub mod specfn;

pub use data::DataMatrix;
pub use error::{Error, Result};
pub use ng::{fit_ng, ng_forward, ng_inverse_training, ng_synthesize, CopulaModel, NgModel};
