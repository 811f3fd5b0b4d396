//! Simulation of open-quantum-system and non-Hermitian dynamics built
//! entirely from unitary evolution plus perturbative dissipative corrections.
//!
//! The library evaluates observables of a Lindblad master equation
//! `dρ/dt = −i[H,ρ] + Σᵢ γᵢ(t)(Lᵢ ρ Lᵢ† − ½{Lᵢ†Lᵢ, ρ})` without ever
//! propagating the dissipator: the solution is expanded as a Volterra series
//! around the unitary flow, each order is reduced to multi-time correlation
//! functions of Pauli words, and those correlators are either integrated
//! deterministically or estimated by emulated single-shot (Hadamard-test
//! style) measurements with Bernstein-type sampling budgets. An exact
//! master-equation integrator serves as the oracle every result is checked
//! against.
//!
//! Module map:
//! - [`linalg`] — dense complex matrices, exponentials, singular values.
//! - [`pauli`] — Hermitian-unitary tensor-product basis and decompositions.
//! - [`model`] — Lindblad / non-Hermitian models and rate functions.
//! - [`oracle`] — exact reference propagation and distance measures.
//! - [`dyson`] — deterministic truncated-series evaluation (two routes).
//! - [`shots`] — correlator chains and single-shot statistics emulation.
//! - [`estimator`] — Monte Carlo estimator over channel words and time
//!   simplices.
//! - [`bounds`] — analytic truncation/sampling bounds and budget formulas.
//! - [`rng`] — counter-based random streams for reproducible parallelism.

pub mod bounds;
pub mod dyson;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod pauli;
pub mod rng;
pub mod shots;
#[cfg(test)]
pub(crate) mod testutil;
pub mod tol;

pub use error::{Result, SimError};
pub use linalg::CMat;
