//! Numerical tolerances, collected in one place.
//!
//! Everything that compares floating-point results anywhere in the crate
//! pulls its threshold from here, so the error budget of a computation can
//! be read off from a single file.

/// Algebraic identities (unitarity, Hermiticity, norm invariance).
pub const ALGEBRAIC: f64 = 1e-10;

/// Fixed-step integrator acceptance (trace drift, unitary-limit agreement).
pub const INTEGRATOR: f64 = 1e-8;

/// Traceless/trace-preservation checks on generator output.
pub const TRACE: f64 = 1e-12;

/// Operator reconstruction from a Pauli decomposition.
pub const RECONSTRUCTION: f64 = 1e-12;

/// Pauli coefficients below this magnitude are dropped from a decomposition.
pub const COEFF_PRUNE: f64 = 1e-13;

/// Self-estimated quadrature error allowed in the series evaluation.
pub const QUADRATURE: f64 = 1e-6;

/// Eigenvalue floor for a state to count as positive semidefinite after
/// numerical integration.
pub const PSD_INTEGRATOR: f64 = 1e-6;

/// Eigenvalue floor for a validated input density matrix.
pub const PSD_STATE: f64 = 1e-10;

/// Number of sample points used when taking sups/means of rate functions
/// over a horizon.
pub const RATE_GRID: usize = 10_000;
