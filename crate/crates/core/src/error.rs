use thiserror::Error;

/// Errors raised by the numerics layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested basis truncation cannot hold the state to the declared tolerance.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// An input violates a type contract (non-Hermitian matrix, unnormalized state, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The operation is not defined for this input (the "n.d." cells of the size table).
    #[error("not defined for this input: {0}")]
    Undefined(String),

    /// The operation only supports a restricted class of inputs.
    #[error("unsupported input: {0}")]
    Unsupported(String),

    /// A matrix would exceed the dimension cap of the dense kernels.
    #[error("dimension overflow: {0}")]
    DimensionOverflow(String),

    /// A numerical tolerance check failed.
    #[error("numerical tolerance failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
