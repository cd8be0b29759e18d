use thiserror::Error;

/// Errors raised by the Gaussian engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mode {mode} out of range for a {modes}-mode state")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not symplectic (max deviation {deviation:e})")]
    NotSymplectic { deviation: f64 },

    #[error("map violates the complete-positivity condition (minimum eigenvalue {min_eigenvalue:e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("state is unphysical (minimum symplectic eigenvalue {min_symplectic_eigenvalue:e})")]
    Unphysical { min_symplectic_eigenvalue: f64 },

    #[error("covariance matrix is singular (eigenvalue {eigenvalue:e})")]
    SingularCovariance { eigenvalue: f64 },

    #[error("measured quadrature has degenerate variance {variance:e}")]
    DegenerateQuadrature { variance: f64 },

    #[error("unknown measurement label {0:?}")]
    UnknownLabel(String),

    #[error("duplicate measurement label {0:?}")]
    DuplicateLabel(String),

    #[error("instruction {index}: {source}")]
    Instruction {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("circuit failed validation: {0}")]
    Invalid(String),
}

impl Error {
    /// True for errors that signal a violated precondition (shape, index,
    /// label or CP validity) as opposed to a numerical breakdown.
    pub fn is_precondition(&self) -> bool {
        match self {
            Error::InvalidDimension(_)
            | Error::DimensionMismatch { .. }
            | Error::ModeOutOfRange { .. }
            | Error::InvalidParameter { .. }
            | Error::NotSymplectic { .. }
            | Error::NotCompletelyPositive { .. }
            | Error::UnknownLabel(_)
            | Error::DuplicateLabel(_)
            | Error::Invalid(_) => true,
            Error::Instruction { source, .. } => source.is_precondition(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
