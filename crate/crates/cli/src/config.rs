//! Experiment configuration: a single TOML file (or preset) describing the
//! model as Pauli-word coefficient lists, the initial state, the observable,
//! and the run parameters. Validation turns the description into checked
//! core types; every error names the offending key or word.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use lindsim::estimator::EstimateMode;
use lindsim::linalg::{c64, zeros, CMat};
use lindsim::model::{DensityMatrix, LindbladModel, NonHermitianModel, RateFunction};
use lindsim::pauli::{decompose, PauliBasis, PauliDecomposition};
use lindsim::{Result, SimError};

/// (pauli word, [re, im]) pair; words like "ZI" with the leftmost qubit most
/// significant.
pub type PauliTerm = (String, [f64; 2]);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub initial: InitialSpec,
    pub observable: ObservableSpec,
    pub run: RunSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Lindblad,
    NonHermitian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub qubits: usize,
    #[serde(default = "default_kind")]
    pub kind: ModelKind,
    /// H as a Pauli coefficient list; empty means H = 0.
    #[serde(default)]
    pub hamiltonian: Vec<PauliTerm>,
    /// Dissipation channels (Lindblad models only).
    #[serde(default, rename = "lindblad")]
    pub lindblads: Vec<LindbladSpec>,
    /// Γ as a Pauli coefficient list (non-Hermitian models only).
    #[serde(default)]
    pub gamma: Vec<PauliTerm>,
}

fn default_kind() -> ModelKind {
    ModelKind::Lindblad
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladSpec {
    pub terms: Vec<PauliTerm>,
    pub rate: RateSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RateSpec {
    Constant {
        value: f64,
    },
    Sinusoid {
        amplitude: f64,
        angular_frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

impl RateSpec {
    pub fn to_rate(&self) -> RateFunction {
        match self {
            RateSpec::Constant { value } => RateFunction::Constant(*value),
            RateSpec::Sinusoid {
                amplitude,
                angular_frequency,
                phase,
            } => RateFunction::Sinusoid {
                amplitude: *amplitude,
                angular_frequency: *angular_frequency,
                phase: *phase,
            },
            RateSpec::Tabulated { times, values } => RateFunction::Tabulated {
                times: times.clone(),
                values: values.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    /// One of "excited", "ground", "plus", "mixed".
    Named { name: String },
    Pure { amplitudes: Vec<[f64; 2]> },
    Density { rows: Vec<Vec<[f64; 2]>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub terms: Vec<PauliTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    /// Strictly increasing positive time grid.
    pub times: Vec<f64>,
    /// Truncation order K. If absent, derived from `epsilon`.
    #[serde(default)]
    pub max_order: Option<usize>,
    /// Total error target ε driving K and the per-order budgets.
    #[serde(default)]
    pub epsilon: Option<f64>,
    pub mode: EstimateMode,
    pub seed: u64,
    #[serde(default = "default_oracle_steps")]
    pub oracle_steps_per_unit: usize,
    #[serde(default = "default_volterra_grid")]
    pub volterra_grid: usize,
    #[serde(default = "default_quad_points")]
    pub quad_points: usize,
    /// Budget split: ε′ = c·ε for truncation, (1−c)·ε for sampling.
    #[serde(default = "default_split")]
    pub budget_split_c: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Fixed per-order sample count; overrides the concentration-bound
    /// budgets when set.
    #[serde(default)]
    pub samples: Option<u64>,
}

fn default_oracle_steps() -> usize {
    2000
}
fn default_volterra_grid() -> usize {
    800
}
fn default_quad_points() -> usize {
    24
}
fn default_split() -> f64 {
    0.5
}
fn default_beta() -> f64 {
    2.0
}

/// Everything validated and converted into core types.
pub struct ValidatedExperiment {
    pub config: ExperimentConfig,
    pub kind: ModelKind,
    /// Normalized model (‖Lᵢ‖∞ = 1), for Lindblad kind.
    pub lindblad: Option<LindbladModel>,
    pub non_hermitian: Option<NonHermitianModel>,
    pub rho0: DensityMatrix,
    pub observable: CMat,
    pub observable_decomposition: PauliDecomposition,
    pub basis: PauliBasis,
    pub max_order: Option<usize>,
}

pub fn parse_toml(text: &str) -> Result<ExperimentConfig> {
    toml::from_str(text).map_err(|e| SimError::Validation(format!("config parse error: {e}")))
}

pub fn build_operator(terms: &[PauliTerm], basis: &PauliBasis) -> Result<CMat> {
    let mut m = zeros(basis.dim());
    for (word, coeff) in terms {
        let idx = basis.index_of_word(word)?;
        let z = Complex64::new(coeff[0], coeff[1]);
        m = m + basis.element(idx).mapv(|q| q * z);
    }
    Ok(m)
}

pub fn validate(config: &ExperimentConfig) -> Result<ValidatedExperiment> {
    let qubits = config.model.qubits;
    if !(1..=4).contains(&qubits) {
        return Err(SimError::Validation(format!(
            "model.qubits must lie in 1..=4, got {qubits}"
        )));
    }
    let basis = PauliBasis::new(qubits)?;
    let dim = basis.dim();
    let hamiltonian = build_operator(&config.model.hamiltonian, &basis)?;

    let (lindblad, non_hermitian) = match config.model.kind {
        ModelKind::Lindblad => {
            if !config.model.gamma.is_empty() {
                return Err(SimError::Validation(
                    "model.gamma is only valid for kind = \"non-hermitian\"".into(),
                ));
            }
            if config.model.lindblads.is_empty() {
                return Err(SimError::Validation(
                    "a lindblad model needs at least one [[model.lindblad]] channel".into(),
                ));
            }
            let mut channels = Vec::new();
            for spec in &config.model.lindblads {
                let op = build_operator(&spec.terms, &basis)?;
                channels.push((op, spec.rate.to_rate()));
            }
            let model = LindbladModel::new(&hamiltonian, channels)?.normalized()?;
            (Some(model), None)
        }
        ModelKind::NonHermitian => {
            if !config.model.lindblads.is_empty() {
                return Err(SimError::Validation(
                    "model.lindblad channels are only valid for kind = \"lindblad\"".into(),
                ));
            }
            let gamma = build_operator(&config.model.gamma, &basis)?;
            let model = NonHermitianModel::new(&hamiltonian, &gamma)?;
            (None, Some(model))
        }
    };

    let rho0 = build_initial(&config.initial, dim)?;
    let observable = build_operator(&config.observable.terms, &basis)?;
    let observable_decomposition = decompose(&observable, &basis)?;
    if observable_decomposition.terms.is_empty() {
        return Err(SimError::Validation("observable.terms sum to zero".into()));
    }

    let run = &config.run;
    if run.times.is_empty() {
        return Err(SimError::Validation("run.times must be nonempty".into()));
    }
    if run.times[0] <= 0.0 || run.times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SimError::Validation(
            "run.times must be positive and strictly increasing".into(),
        ));
    }
    if run.max_order.is_none() && run.epsilon.is_none() {
        return Err(SimError::Validation(
            "set run.max_order and/or run.epsilon".into(),
        ));
    }
    if let Some(eps) = run.epsilon {
        if !(0.0..1.0).contains(&eps) || eps == 0.0 {
            return Err(SimError::Validation("run.epsilon must lie in (0,1)".into()));
        }
    }
    if !(0.0 < run.budget_split_c && run.budget_split_c < 1.0) {
        return Err(SimError::Validation(
            "run.budget_split_c must lie in (0,1)".into(),
        ));
    }
    if run.mode != EstimateMode::DeterministicQuadrature {
        match config.model.kind {
            ModelKind::Lindblad => {
                if run.epsilon.is_none() && run.samples.is_none() {
                    return Err(SimError::Validation(
                        "sampling modes need run.samples or run.epsilon to size the budgets"
                            .into(),
                    ));
                }
            }
            ModelKind::NonHermitian => {
                return Err(SimError::Validation(
                    "non-hermitian models run deterministically; set mode = \
                     \"deterministic-quadrature\""
                        .into(),
                ));
            }
        }
    }

    Ok(ValidatedExperiment {
        config: config.clone(),
        kind: config.model.kind,
        lindblad,
        non_hermitian,
        rho0,
        observable,
        observable_decomposition,
        basis,
        max_order: run.max_order,
    })
}

fn build_initial(spec: &InitialSpec, dim: usize) -> Result<DensityMatrix> {
    match spec {
        InitialSpec::Named { name } => match name.as_str() {
            // all qubits in the σz = +1 state (first basis vector)
            "excited" => {
                let mut amps = vec![c64(0.0, 0.0); dim];
                amps[0] = c64(1.0, 0.0);
                DensityMatrix::pure(&amps)
            }
            // all qubits in the σz = −1 state (last basis vector)
            "ground" => {
                let mut amps = vec![c64(0.0, 0.0); dim];
                amps[dim - 1] = c64(1.0, 0.0);
                DensityMatrix::pure(&amps)
            }
            "plus" => {
                let a = 1.0 / (dim as f64).sqrt();
                DensityMatrix::pure(&vec![c64(a, 0.0); dim])
            }
            "mixed" => {
                let mut m = zeros(dim);
                for i in 0..dim {
                    m[[i, i]] = c64(1.0 / dim as f64, 0.0);
                }
                DensityMatrix::new(&m)
            }
            other => Err(SimError::Validation(format!(
                "unknown initial state preset \"{other}\" \
                 (expected excited | ground | plus | mixed)"
            ))),
        },
        InitialSpec::Pure { amplitudes } => {
            if amplitudes.len() != dim {
                return Err(SimError::Validation(format!(
                    "initial.amplitudes has length {}, expected {dim}",
                    amplitudes.len()
                )));
            }
            let amps: Vec<Complex64> = amplitudes.iter().map(|a| c64(a[0], a[1])).collect();
            DensityMatrix::pure(&amps)
        }
        InitialSpec::Density { rows } => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(SimError::Validation(format!(
                    "initial.rows must be a {dim}x{dim} matrix"
                )));
            }
            let mut m = zeros(dim);
            for (i, row) in rows.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    m[[i, j]] = c64(e[0], e[1]);
                }
            }
            DensityMatrix::new(&m)
        }
    }
}
