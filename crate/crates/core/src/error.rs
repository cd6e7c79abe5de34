use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RspError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("outcome probability {0:e} too small for a conditional state")]
    VanishingProbability(f64),

    #[error("parameter `{name}` = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("sharpness chain has {0} entries, at most {max} supported", max = crate::cascade::MAX_CHAIN)]
    ChainTooLong(usize),

    #[error("sharpness λ{index} = {value} outside [0, 1]")]
    InvalidSharpness { index: usize, value: f64 },

    #[error("observer index {index} invalid for a chain of {len} entries")]
    InvalidIndex { index: usize, len: usize },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("no feasible predecessor chain for observer {0}")]
    Infeasible(usize),
}

pub type Result<T> = std::result::Result<T, RspError>;
