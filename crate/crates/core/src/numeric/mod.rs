//! Deterministic numerics shared by every other module: distribution
//! functions (central and noncentral), Kendall's tau-b, Fisher's exact test
//! for 2x2 tables and Huber IWLS regression.
//!
//! All routines are pure functions of their arguments.

mod dist;
mod fisher;
mod kendall;
mod noncentral;
pub(crate) mod nonfinite;
mod robust;
pub(crate) mod special;

pub use dist::{DistSpec, Family};
pub use fisher::{fisher_exact_2x2, FisherResult, Table2x2};
pub use kendall::{kendall_tau_b, KendallResult};
pub use robust::{huber_iwls, ols, HuberOptions, RobustFit};
pub use special::{normal_cdf, normal_quantile};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("degenerate table: {0}")]
    DegenerateTable(&'static str),

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("regressor is constant")]
    ConstantRegressor,
}

pub(crate) fn domain(msg: impl Into<String>) -> NumericError {
    NumericError::Domain(msg.into())
}
