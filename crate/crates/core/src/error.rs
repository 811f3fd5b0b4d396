//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    /// Operands have incompatible or non-square shapes.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A value left the representable / supported numeric range.
    #[error("range error: {0}")]
    Range(String),

    /// An input failed a model or configuration invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// The fixed-step integrator detected an unusable state.
    #[error("integrator error: {0}")]
    Integrator(String),

    /// A quadrature self-estimate exceeded the requested tolerance.
    #[error("quadrature error: {0}")]
    Quadrature(String),

    /// A sampling budget was inconsistent or inapplicable.
    #[error("budget error: {0}")]
    Budget(String),

    /// A counter-based random stream ran out of indices.
    #[error("rng counter exhausted")]
    RngExhausted,

    /// An internal consistency check failed; indicates a bug, not bad input.
    #[error("internal consistency error: {0}")]
    Internal(String),
}
