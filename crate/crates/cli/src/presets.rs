//! Built-in experiment presets. Each returns a complete config that runs in
//! seconds and exercises one corner of the machinery.

use crate::config::{
    ExperimentConfig, InitialSpec, LindbladSpec, ModelKind, ModelSpec, ObservableSpec, PauliTerm,
    RateSpec, RunSpec,
};
use lindsim::estimator::EstimateMode;
use lindsim::{Result, SimError};

pub const PRESET_NAMES: [&str; 6] = [
    "amplitude-damping",
    "two-qubit-local-decay",
    "non-markovian-sin",
    "dephasing-z",
    "non-hermitian-feshbach",
    "partial-dissipation",
];

pub fn preset_names() -> &'static [&'static str] {
    &PRESET_NAMES
}

fn sigma_minus_terms() -> Vec<PauliTerm> {
    // σ⁻ = (X − iY)/2
    vec![("X".into(), [0.5, 0.0]), ("Y".into(), [0.0, -0.5])]
}

fn run_defaults(times: Vec<f64>, max_order: usize, seed: u64) -> RunSpec {
    RunSpec {
        times,
        max_order: Some(max_order),
        epsilon: None,
        mode: EstimateMode::ExactMean,
        seed,
        oracle_steps_per_unit: 2000,
        volterra_grid: 800,
        quad_points: 24,
        budget_split_c: 0.5,
        beta: 2.0,
        samples: Some(2000),
    }
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match name {
        // single decaying qubit with the closed-form ⟨σz(t)⟩ = 2e^{−γt} − 1
        "amplitude-damping" => Ok(ExperimentConfig {
            model: ModelSpec {
                qubits: 1,
                kind: ModelKind::Lindblad,
                hamiltonian: vec![],
                lindblads: vec![LindbladSpec {
                    terms: sigma_minus_terms(),
                    rate: RateSpec::Constant { value: 0.1 },
                }],
                gamma: vec![],
            },
            initial: InitialSpec::Named {
                name: "excited".into(),
            },
            observable: ObservableSpec {
                terms: vec![("Z".into(), [1.0, 0.0])],
            },
            run: run_defaults(vec![0.5, 1.0, 2.0], 3, 7),
        }),

        // two qubits with local decay on each; ‖L_D†O‖∞ = 2γ analytically
        "two-qubit-local-decay" => Ok(ExperimentConfig {
            model: ModelSpec {
                qubits: 2,
                kind: ModelKind::Lindblad,
                hamiltonian: vec![("ZI".into(), [0.5, 0.0]), ("IZ".into(), [0.5, 0.0])],
                lindblads: vec![
                    LindbladSpec {
                        terms: vec![("XI".into(), [0.5, 0.0]), ("YI".into(), [0.0, -0.5])],
                        rate: RateSpec::Constant { value: 0.1 },
                    },
                    LindbladSpec {
                        terms: vec![("IX".into(), [0.5, 0.0]), ("IY".into(), [0.0, -0.5])],
                        rate: RateSpec::Constant { value: 0.1 },
                    },
                ],
                gamma: vec![],
            },
            initial: InitialSpec::Named {
                name: "excited".into(),
            },
            observable: ObservableSpec {
                terms: vec![("ZI".into(), [1.0, 0.0])],
            },
            run: run_defaults(vec![0.5, 1.0, 1.5, 2.0], 3, 11),
        }),

        // sign-changing rate γ(s) = 0.2 sin(2s), valid non-Markovian on t ≤ 2
        "non-markovian-sin" => Ok(ExperimentConfig {
            model: ModelSpec {
                qubits: 1,
                kind: ModelKind::Lindblad,
                hamiltonian: vec![("X".into(), [0.5, 0.0])],
                lindblads: vec![LindbladSpec {
                    terms: sigma_minus_terms(),
                    rate: RateSpec::Sinusoid {
                        amplitude: 0.2,
                        angular_frequency: 2.0,
                        phase: 0.0,
                    },
                }],
                gamma: vec![],
            },
            initial: InitialSpec::Named {
                name: "excited".into(),
            },
            observable: ObservableSpec {
                terms: vec![("Z".into(), [1.0, 0.0])],
            },
            run: run_defaults(vec![0.5, 1.0, 1.5, 2.0], 3, 13),
        }),

        // driven qubit dephasing along z; L = σz has single-Pauli support
        "dephasing-z" => Ok(ExperimentConfig {
            model: ModelSpec {
                qubits: 1,
                kind: ModelKind::Lindblad,
                hamiltonian: vec![("X".into(), [0.5, 0.0])],
                lindblads: vec![LindbladSpec {
                    terms: vec![("Z".into(), [1.0, 0.0])],
                    rate: RateSpec::Constant { value: 0.2 },
                }],
                gamma: vec![],
            },
            initial: InitialSpec::Named {
                name: "plus".into(),
            },
            observable: ObservableSpec {
                terms: vec![("X".into(), [1.0, 0.0])],
            },
            run: run_defaults(vec![0.5, 1.0, 2.0], 3, 17),
        }),

        // effective generator J = H − iΓ with H = σx, Γ = κ|e⟩⟨e| = κ(I+Z)/2
        "non-hermitian-feshbach" => Ok(ExperimentConfig {
            model: ModelSpec {
                qubits: 1,
                kind: ModelKind::NonHermitian,
                hamiltonian: vec![("X".into(), [1.0, 0.0])],
                lindblads: vec![],
                gamma: vec![("I".into(), [0.05, 0.0]), ("Z".into(), [0.05, 0.0])],
            },
            initial: InitialSpec::Named {
                name: "excited".into(),
            },
            observable: ObservableSpec {
                terms: vec![("Z".into(), [1.0, 0.0])],
            },
            run: RunSpec {
                mode: EstimateMode::DeterministicQuadrature,
                samples: None,
                ..run_defaults(vec![0.25, 0.5, 1.0], 3, 19)
            },
        }),

        // the two-qubit model with the second channel switched off (γ₂ = 0)
        "partial-dissipation" => {
            let mut cfg = preset("two-qubit-local-decay")?;
            cfg.model.lindblads[1].rate = RateSpec::Constant { value: 0.0 };
            cfg.run.seed = 23;
            Ok(cfg)
        }

        other => Err(SimError::Validation(format!(
            "unknown preset \"{other}\"; available: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// The Lindblad-model presets the property suites sweep over.
pub fn scenario_suite() -> Vec<&'static str> {
    vec![
        "amplitude-damping",
        "two-qubit-local-decay",
        "non-markovian-sin",
        "dephasing-z",
        "partial-dissipation",
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn at_least_six_presets() {
        assert!(preset_names().len() >= 6);
        for name in preset_names() {
            assert!(preset(name).is_ok());
        }
        assert!(preset("nope").is_err());
    }
}
