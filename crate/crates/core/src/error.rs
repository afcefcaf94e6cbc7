use thiserror::Error;

use crate::states::ValidationReport;

/// Errors raised anywhere in the discord and dynamics pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator is not Hermitian (max |M - M^†| = {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e}, max {max_eigenvalue:.3e})")]
    NotPsd {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("invalid density matrix: {0}")]
    InvalidState(ValidationReport),

    #[error("constraint violated: {constraint} ({detail})")]
    Constraint {
        constraint: &'static str,
        detail: String,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("numerical failure at stage `{stage}`: {detail}")]
    Numerical { stage: &'static str, detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// True for failures caused by bad input rather than numerics.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Numerical { .. } | Error::NotPsd { .. })
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Error {
        match self {
            Error::Numerical { .. } => self,
            other => Error::Numerical {
                stage,
                detail: other.to_string(),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
