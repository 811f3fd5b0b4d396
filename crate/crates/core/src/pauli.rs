//! Hermitian-unitary operator basis (tensor products of Pauli matrices),
//! power-of-two embedding, and operator decomposition.
//!
//! Basis ordering is the base-4 word over {I, X, Y, Z} per qubit with the
//! leftmost qubit most significant, so index ↔ word is a fixed bijection and
//! correlator chains are reproducible across runs.
//!
//! Single-qubit conventions used throughout the crate: `σz = diag(1, −1)`
//! and `σ⁻ = (σx − iσy)/2 = [[0,0],[1,0]]`, i.e. the first basis vector is
//! the σz = +1 (excited) state and σ⁻ maps it to the σz = −1 (ground) state.

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::linalg::{self, c64, identity, kron, trace, zeros, CMat, ONE};
use crate::tol;

pub fn sigma_x() -> CMat {
    linalg::from_rows(&[&[c64(0.0, 0.0), ONE], &[ONE, c64(0.0, 0.0)]])
}

pub fn sigma_y() -> CMat {
    linalg::from_rows(&[
        &[c64(0.0, 0.0), c64(0.0, -1.0)],
        &[c64(0.0, 1.0), c64(0.0, 0.0)],
    ])
}

pub fn sigma_z() -> CMat {
    linalg::from_rows(&[
        &[ONE, c64(0.0, 0.0)],
        &[c64(0.0, 0.0), c64(-1.0, 0.0)],
    ])
}

/// Lowering operator σ⁻ = (σx − iσy)/2.
pub fn sigma_minus() -> CMat {
    linalg::from_rows(&[
        &[c64(0.0, 0.0), c64(0.0, 0.0)],
        &[ONE, c64(0.0, 0.0)],
    ])
}

/// Raising operator σ⁺ = σ⁻†.
pub fn sigma_plus() -> CMat {
    linalg::dagger(&sigma_minus())
}

/// Projector onto the σz = +1 (excited) state.
pub fn excited_projector() -> CMat {
    linalg::from_rows(&[
        &[ONE, c64(0.0, 0.0)],
        &[c64(0.0, 0.0), c64(0.0, 0.0)],
    ])
}

/// Projector onto the σz = −1 (ground) state.
pub fn ground_projector() -> CMat {
    linalg::from_rows(&[
        &[c64(0.0, 0.0), c64(0.0, 0.0)],
        &[c64(0.0, 0.0), ONE],
    ])
}

/// The full basis {Q_j} for `qubits` qubits: 4^l operators, each Hermitian
/// and unitary with Tr(Q_i Q_j) = d·δ_ij.
#[derive(Debug, Clone)]
pub struct PauliBasis {
    qubits: usize,
    dim: usize,
    elements: Vec<CMat>,
}

const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

impl PauliBasis {
    pub fn new(qubits: usize) -> Result<Self> {
        if qubits == 0 || qubits > 4 {
            return Err(SimError::Validation(format!(
                "pauli basis supports 1..=4 qubits, got {qubits}"
            )));
        }
        let singles = [identity(2), sigma_x(), sigma_y(), sigma_z()];
        let count = 4usize.pow(qubits as u32);
        let mut elements = Vec::with_capacity(count);
        for idx in 0..count {
            let mut m: Option<CMat> = None;
            // leftmost qubit = most significant base-4 digit
            for q in (0..qubits).rev() {
                let digit = (idx >> (2 * q)) & 3;
                m = Some(match m {
                    None => singles[digit].clone(),
                    Some(acc) => kron(&acc, &singles[digit]),
                });
            }
            elements.push(m.unwrap());
        }
        Ok(PauliBasis {
            qubits,
            dim: 1 << qubits,
            elements,
        })
    }

    /// Basis for operators of dimension `dim`, which must be a power of two
    /// (embed first otherwise).
    pub fn for_dimension(dim: usize) -> Result<Self> {
        if !dim.is_power_of_two() {
            return Err(SimError::Validation(format!(
                "basis dimension {dim} is not a power of two; embed the operator first"
            )));
        }
        PauliBasis::new(dim.trailing_zeros() as usize)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn element(&self, index: usize) -> &CMat {
        &self.elements[index]
    }

    pub fn index_of_word(&self, word: &str) -> Result<usize> {
        if word.chars().count() != self.qubits {
            return Err(SimError::Validation(format!(
                "pauli word \"{word}\" has wrong length for {} qubit(s)",
                self.qubits
            )));
        }
        let mut idx = 0usize;
        for ch in word.chars() {
            let digit = LETTERS
                .iter()
                .position(|&l| l == ch.to_ascii_uppercase())
                .ok_or_else(|| {
                    SimError::Validation(format!(
                        "pauli word \"{word}\" contains invalid letter '{ch}'"
                    ))
                })?;
            idx = idx * 4 + digit;
        }
        Ok(idx)
    }

    pub fn word_of_index(&self, mut index: usize) -> String {
        let mut out = vec!['I'; self.qubits];
        for q in 0..self.qubits {
            out[self.qubits - 1 - q] = LETTERS[index & 3];
            index >>= 2;
        }
        out.into_iter().collect()
    }
}

/// Zero-pad a square operator to the next power-of-two dimension. Operators
/// act as zero on the padded subspace; density matrices keep their trace.
pub fn embed_dimension(a: &CMat) -> CMat {
    let d = a.nrows();
    let target = d.next_power_of_two().max(1);
    if target == d {
        return a.clone();
    }
    let mut out = zeros(target);
    for i in 0..d {
        for j in 0..d {
            out[[i, j]] = a[[i, j]];
        }
    }
    out
}

/// Sparse expansion A = Σ q_k Q_k over a [`PauliBasis`].
#[derive(Debug, Clone)]
pub struct PauliDecomposition {
    pub terms: Vec<(usize, Complex64)>,
    pub qubits: usize,
    pub dim: usize,
}

impl PauliDecomposition {
    /// Number of retained (nonzero) terms, the support size M.
    pub fn support(&self) -> usize {
        self.terms.len()
    }

    pub fn reconstruct(&self, basis: &PauliBasis) -> CMat {
        let mut m = zeros(self.dim);
        for &(idx, q) in &self.terms {
            m = m + basis.element(idx).mapv(|z| z * q);
        }
        m
    }
}

/// Expand A in the basis: q_k = Tr(Q_k A)/d, dropping coefficients below the
/// pruning threshold. The pruned support is the M that enters all sampling
/// budgets downstream.
pub fn decompose(a: &CMat, basis: &PauliBasis) -> Result<PauliDecomposition> {
    linalg::ensure_square(a, "decompose")?;
    if a.nrows() != basis.dim() {
        return Err(SimError::Dimension(format!(
            "decompose: operator dim {} vs basis dim {}",
            a.nrows(),
            basis.dim()
        )));
    }
    let d = basis.dim() as f64;
    let mut terms = Vec::new();
    for idx in 0..basis.len() {
        let q = trace(&basis.element(idx).dot(a)) / d;
        if q.norm() >= tol::COEFF_PRUNE {
            terms.push((idx, q));
        }
    }
    Ok(PauliDecomposition {
        terms,
        qubits: basis.qubits(),
        dim: basis.dim(),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct CoefficientBounds {
    /// Σ |q_k|²
    pub sum_sq: f64,
    /// Σ |q_k|
    pub sum_abs: f64,
    /// √M for the support size M
    pub sqrt_support: f64,
}

/// The coefficient-norm quantities constrained by the basis orthogonality:
/// for a unit-spectral-norm operator, Σ|q_k|² ≤ 1 and Σ|q_k| ≤ √M.
pub fn coefficient_bounds(dec: &PauliDecomposition) -> CoefficientBounds {
    let sum_sq = dec.terms.iter().map(|(_, q)| q.norm_sqr()).sum();
    let sum_abs = dec.terms.iter().map(|(_, q)| q.norm()).sum();
    CoefficientBounds {
        sum_sq,
        sum_abs,
        sqrt_support: (dec.support() as f64).sqrt(),
    }
}
