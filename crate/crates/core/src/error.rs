use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("state has vanishing norm ({norm:e})")]
    ZeroNorm { norm: f64 },

    #[error("truncated tail probability {tail:e} exceeds tolerance {tol:e} at dim {dim}")]
    Truncation { tail: f64, tol: f64, dim: usize },

    #[error("loss channel lost {deficit:e} of the trace; raise the Kraus cutoff")]
    TraceLoss { deficit: f64 },

    #[error("matrix has eigenvalue {eigenvalue:e}, expected positive semidefinite")]
    NonPositive { eigenvalue: f64 },

    #[error("truncation mismatch: dim {left} vs dim {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl FockError {
    /// True for failures of the numerics themselves, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            FockError::ZeroNorm { .. }
                | FockError::Truncation { .. }
                | FockError::TraceLoss { .. }
                | FockError::NonPositive { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, FockError>;
