//! Model definitions: dissipation rates, Lindblad and non-Hermitian
//! generators, and validated density matrices.

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::linalg::{
    self, anticommutator, c64, commutator, dagger, eigvalsh, hermiticity_error, spectral_norm,
    trace, zeros, CMat, IM,
};
use crate::tol;

// ---------------------------------------------------------------------------
// Rate functions
// ---------------------------------------------------------------------------

/// A scalar dissipation rate γ(s). Rates may change sign (non-Markovian
/// case); validity of a sign-changing rate is checked separately.
#[derive(Debug, Clone, PartialEq)]
pub enum RateFunction {
    Constant(f64),
    Sinusoid {
        amplitude: f64,
        angular_frequency: f64,
        phase: f64,
    },
    /// Piecewise-linear interpolation through (times, values); constant
    /// extrapolation outside the grid.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl RateFunction {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            RateFunction::Constant(g) => *g,
            RateFunction::Sinusoid {
                amplitude,
                angular_frequency,
                phase,
            } => amplitude * (angular_frequency * s + phase).sin(),
            RateFunction::Tabulated { times, values } => {
                if times.is_empty() {
                    return 0.0;
                }
                if s <= times[0] {
                    return values[0];
                }
                if s >= *times.last().unwrap() {
                    return *values.last().unwrap();
                }
                let k = times.partition_point(|&t| t <= s).min(times.len() - 1);
                let (t0, t1) = (times[k - 1], times[k]);
                let (v0, v1) = (values[k - 1], values[k]);
                if t1 == t0 {
                    v1
                } else {
                    v0 + (v1 - v0) * (s - t0) / (t1 - t0)
                }
            }
        }
    }

    /// Multiply the rate by a scalar (used by Lindblad renormalization).
    pub fn scaled(&self, factor: f64) -> RateFunction {
        match self {
            RateFunction::Constant(g) => RateFunction::Constant(g * factor),
            RateFunction::Sinusoid {
                amplitude,
                angular_frequency,
                phase,
            } => RateFunction::Sinusoid {
                amplitude: amplitude * factor,
                angular_frequency: *angular_frequency,
                phase: *phase,
            },
            RateFunction::Tabulated { times, values } => RateFunction::Tabulated {
                times: times.clone(),
                values: values.iter().map(|v| v * factor).collect(),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            RateFunction::Constant(g) => g.is_finite(),
            RateFunction::Sinusoid {
                amplitude,
                angular_frequency,
                phase,
            } => amplitude.is_finite() && angular_frequency.is_finite() && phase.is_finite(),
            RateFunction::Tabulated { times, values } => {
                !times.is_empty()
                    && times.len() == values.len()
                    && times.windows(2).all(|w| w[0] < w[1])
                    && times.iter().chain(values.iter()).all(|v| v.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(SimError::Validation("invalid rate function".into()))
        }
    }

    fn grid_points(&self, t: f64) -> Vec<f64> {
        let n = tol::RATE_GRID;
        let mut pts: Vec<f64> = (0..=n).map(|k| t * k as f64 / n as f64).collect();
        if let RateFunction::Tabulated { times, .. } = self {
            pts.extend(times.iter().copied().filter(|&x| x > 0.0 && x < t));
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
        pts
    }

    /// γ̄ over the horizon: max_{s∈[0,t]} |γ(s)|, by dense sampling plus
    /// grid knots.
    pub fn gamma_bar(&self, t: f64) -> f64 {
        match self {
            RateFunction::Constant(g) => g.abs(),
            _ => self
                .grid_points(t)
                .iter()
                .map(|&s| self.eval(s).abs())
                .fold(0.0, f64::max),
        }
    }

    /// (1/t)·∫₀ᵗ |γ(s)| ds, the mean-value realization used by the tight
    /// truncation bound. At t = 0 this degenerates to |γ(0)|.
    pub fn mean_abs(&self, t: f64) -> f64 {
        if t == 0.0 {
            return self.eval(0.0).abs();
        }
        self.integrate_abs_pow(t, 0) / t
    }

    /// ∫₀ᵗ γ(s)² ds, for the Hölder bound.
    pub fn integral_square(&self, t: f64) -> f64 {
        trapezoid(&self.grid_points(t), |s| {
            let g = self.eval(s);
            g * g
        })
    }

    /// ∫₀ᵗ |γ(s)| sⁿ ds by direct quadrature.
    pub fn integrate_abs_pow(&self, t: f64, n: u32) -> f64 {
        trapezoid(&self.grid_points(t), |s| self.eval(s).abs() * s.powi(n as i32))
    }
}

fn trapezoid(points: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for w in points.windows(2) {
        acc += 0.5 * (w[1] - w[0]) * (f(w[0]) + f(w[1]));
    }
    acc
}

/// Classification of a rate over a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateValidity {
    /// γ(s) ≥ 0 everywhere on [0, t].
    Markovian,
    /// γ dips negative but the running integral ∫₀^τ γ stays positive.
    ValidNonMarkovian,
    /// The running integral goes non-positive somewhere.
    Invalid,
}

#[derive(Debug, Clone, Copy)]
pub struct RateValidityReport {
    pub flag: RateValidity,
    pub min_rate: f64,
    pub min_running_integral: f64,
}

/// Check whether a sign-indefinite rate still defines a completely positive
/// channel on [0, t]: γ may be negative as long as its running integral
/// stays positive.
pub fn check_nonmarkovian_validity(rate: &RateFunction, t: f64) -> RateValidityReport {
    assert!(t > 0.0, "validity horizon must be positive");
    let pts = rate.grid_points(t);
    let mut min_rate = f64::INFINITY;
    let mut min_integral = f64::INFINITY;
    let mut acc = 0.0;
    let mut prev = pts[0];
    let mut prev_v = rate.eval(prev);
    min_rate = min_rate.min(prev_v);
    for &s in &pts[1..] {
        let v = rate.eval(s);
        acc += 0.5 * (s - prev) * (prev_v + v);
        min_integral = min_integral.min(acc);
        min_rate = min_rate.min(v);
        prev = s;
        prev_v = v;
    }
    let flag = if min_rate >= -1e-12 {
        RateValidity::Markovian
    } else if min_integral > 1e-12 {
        RateValidity::ValidNonMarkovian
    } else {
        RateValidity::Invalid
    };
    RateValidityReport {
        flag,
        min_rate,
        min_running_integral: min_integral,
    }
}

// ---------------------------------------------------------------------------
// Lindblad model
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Channel {
    pub operator: CMat,
    pub rate: RateFunction,
}

/// dρ/dt = −i[H,ρ] + Σᵢ γᵢ(t)(Lᵢ ρ Lᵢ† − ½{Lᵢ†Lᵢ, ρ})
#[derive(Debug, Clone)]
pub struct LindbladModel {
    dim: usize,
    hamiltonian: CMat,
    channels: Vec<Channel>,
}

impl LindbladModel {
    pub fn new(hamiltonian: &CMat, lindblads: Vec<(CMat, RateFunction)>) -> Result<Self> {
        linalg::ensure_square(hamiltonian, "LindbladModel hamiltonian")?;
        let herr = hermiticity_error(hamiltonian);
        if herr > tol::ALGEBRAIC {
            return Err(SimError::Validation(format!(
                "hamiltonian is not Hermitian (deviation {herr:.2e})"
            )));
        }
        let dim = hamiltonian.nrows();
        let mut channels = Vec::with_capacity(lindblads.len());
        for (k, (op, rate)) in lindblads.into_iter().enumerate() {
            linalg::ensure_square(&op, "Lindblad operator")?;
            if op.nrows() != dim {
                return Err(SimError::Dimension(format!(
                    "Lindblad operator {k} has dim {} but H has dim {dim}",
                    op.nrows()
                )));
            }
            rate.validate()?;
            channels.push(Channel { operator: op, rate });
        }
        Ok(LindbladModel {
            dim,
            hamiltonian: hamiltonian.clone(),
            channels,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &CMat {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Rescale every channel to ‖Lᵢ‖∞ = 1, moving the norm into the rate as
    /// γᵢ → ‖Lᵢ‖∞²·γᵢ so the generator is unchanged. The rate picks up the
    /// square because γ multiplies L twice in the dissipator.
    pub fn normalized(&self) -> Result<LindbladModel> {
        let mut channels = Vec::with_capacity(self.channels.len());
        for (k, ch) in self.channels.iter().enumerate() {
            let norm = spectral_norm(&ch.operator)?;
            if norm < 1e-14 {
                return Err(SimError::Validation(format!(
                    "Lindblad operator {k} is zero; cannot normalize"
                )));
            }
            channels.push(Channel {
                operator: ch.operator.mapv(|z| z / c64(norm, 0.0)),
                rate: ch.rate.scaled(norm * norm),
            });
        }
        Ok(LindbladModel {
            dim: self.dim,
            hamiltonian: self.hamiltonian.clone(),
            channels,
        })
    }

    /// True when every ‖Lᵢ‖∞ is 1 within the algebraic tolerance.
    pub fn is_normalized(&self) -> Result<bool> {
        for ch in &self.channels {
            if (spectral_norm(&ch.operator)? - 1.0).abs() > tol::ALGEBRAIC {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Max over channels of γ̄ᵢ on [0, t].
    pub fn gamma_bar(&self, t: f64) -> f64 {
        self.channels
            .iter()
            .map(|ch| ch.rate.gamma_bar(t))
            .fold(0.0, f64::max)
    }
}

/// Full right-hand side of the master equation at time `s`.
pub fn lindblad_rhs(model: &LindbladModel, rho: &CMat, s: f64) -> Result<CMat> {
    linalg::ensure_same_dim(&model.hamiltonian, rho, "lindblad_rhs")?;
    let mut out = commutator(&model.hamiltonian, rho)?.mapv(|z| z * (-IM));
    out = out + dissipator_terms(model, rho, s, None)?;
    Ok(out)
}

/// Dissipator-only right-hand side restricted to the channel subset `which`
/// (all channels when `which` covers everything). Lets one model family be
/// re-read as the sub-family with some γᵢ = 0.
pub fn dissipator_only(model: &LindbladModel, rho: &CMat, s: f64, which: &[usize]) -> Result<CMat> {
    linalg::ensure_same_dim(&model.hamiltonian, rho, "dissipator_only")?;
    for &i in which {
        if i >= model.channels.len() {
            return Err(SimError::Validation(format!(
                "channel index {i} out of range (N = {})",
                model.channels.len()
            )));
        }
    }
    dissipator_terms(model, rho, s, Some(which))
}

fn dissipator_terms(
    model: &LindbladModel,
    rho: &CMat,
    s: f64,
    which: Option<&[usize]>,
) -> Result<CMat> {
    let mut out = zeros(model.dim);
    let indices: Vec<usize> = match which {
        Some(w) => w.to_vec(),
        None => (0..model.channels.len()).collect(),
    };
    for i in indices {
        let ch = &model.channels[i];
        let g = ch.rate.eval(s);
        if g == 0.0 {
            continue;
        }
        let l = &ch.operator;
        let l_dag = dagger(l);
        let ldl = l_dag.dot(l);
        let sandwich = l.dot(rho).dot(&l_dag);
        let anti = anticommutator(&ldl, rho)?;
        out = out + (sandwich - anti.mapv(|z| z * c64(0.5, 0.0))).mapv(|z| z * c64(g, 0.0));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Non-Hermitian model
// ---------------------------------------------------------------------------

/// Effective generator J = H − iΓ acting as dρ/dt = −i[H,ρ] − {Γ,ρ}.
#[derive(Debug, Clone)]
pub struct NonHermitianModel {
    hamiltonian: CMat,
    gamma_op: CMat,
    gamma_psd: bool,
}

impl NonHermitianModel {
    pub fn new(hamiltonian: &CMat, gamma_op: &CMat) -> Result<Self> {
        linalg::ensure_same_dim(hamiltonian, gamma_op, "NonHermitianModel")?;
        for (name, m) in [("H", hamiltonian), ("Γ", gamma_op)] {
            let e = hermiticity_error(m);
            if e > tol::ALGEBRAIC {
                return Err(SimError::Validation(format!(
                    "{name} is not Hermitian (deviation {e:.2e})"
                )));
            }
        }
        let min_eig = eigvalsh(gamma_op)?
            .first()
            .copied()
            .unwrap_or(0.0);
        Ok(NonHermitianModel {
            hamiltonian: hamiltonian.clone(),
            gamma_op: gamma_op.clone(),
            gamma_psd: min_eig >= -tol::ALGEBRAIC,
        })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMat {
        &self.hamiltonian
    }

    pub fn gamma_op(&self) -> &CMat {
        &self.gamma_op
    }

    /// Whether Γ is positive semidefinite; required for the trace norm of
    /// the state to be non-increasing.
    pub fn gamma_psd(&self) -> bool {
        self.gamma_psd
    }
}

/// dρ/dt = −i[H,ρ] − {Γ,ρ}.
pub fn non_hermitian_rhs(model: &NonHermitianModel, rho: &CMat) -> Result<CMat> {
    linalg::ensure_same_dim(&model.hamiltonian, rho, "non_hermitian_rhs")?;
    let unitary = commutator(&model.hamiltonian, rho)?.mapv(|z| z * (-IM));
    let damping = anticommutator(&model.gamma_op, rho)?;
    Ok(unitary - damping)
}

// ---------------------------------------------------------------------------
// Density matrices
// ---------------------------------------------------------------------------

/// A validated state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: CMat,
}

impl DensityMatrix {
    pub fn new(matrix: &CMat) -> Result<Self> {
        Self::with_tolerances(matrix, tol::ALGEBRAIC, tol::PSD_STATE)
    }

    /// Validation with caller-chosen slack; the integrators use a looser
    /// floor than hand-constructed inputs.
    pub fn with_tolerances(matrix: &CMat, trace_tol: f64, psd_floor: f64) -> Result<Self> {
        linalg::ensure_square(matrix, "DensityMatrix")?;
        let herr = hermiticity_error(matrix);
        if herr > tol::ALGEBRAIC {
            return Err(SimError::Validation(format!(
                "state is not Hermitian (deviation {herr:.2e})"
            )));
        }
        let tr = trace(matrix);
        if (tr - Complex64::new(1.0, 0.0)).norm() > trace_tol {
            return Err(SimError::Validation(format!(
                "state trace {} deviates from 1",
                tr.re
            )));
        }
        let min_eig = eigvalsh(matrix)?.first().copied().unwrap_or(0.0);
        if min_eig < -psd_floor {
            return Err(SimError::Validation(format!(
                "state has negative eigenvalue {min_eig:.2e}"
            )));
        }
        Ok(DensityMatrix {
            matrix: matrix.clone(),
        })
    }

    /// |ψ⟩⟨ψ| from an (unnormalized) state vector.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let d = amplitudes.len();
        if d == 0 {
            return Err(SimError::Validation("empty state vector".into()));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq < 1e-14 {
            return Err(SimError::Validation("zero state vector".into()));
        }
        let mut m = zeros(d);
        for i in 0..d {
            for j in 0..d {
                m[[i, j]] = amplitudes[i] * amplitudes[j].conj() / norm_sq;
            }
        }
        Ok(DensityMatrix { matrix: m })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}
