//! Orchestration: wire the validated config through the oracle, the
//! deterministic series, the estimator, and the bound formulas; emit the
//! JSON report and CSV time series.

use serde_json::{json, Map, Value};

use lindsim::bounds::{self, BoundInputs};
use lindsim::dyson;
use lindsim::estimator::{
    estimate_observable, EstimateMode, EstimateReport, OrderEstimate, SamplingBudget,
};
use lindsim::linalg::{anticommutator, spectral_norm, trace, trace_norm};
use lindsim::model::{check_nonmarkovian_validity, RateValidity};
use lindsim::oracle;
use lindsim::rng::substream;
use lindsim::{Result, SimError};

use crate::config::{validate, ExperimentConfig, ModelKind, ValidatedExperiment};
use crate::report::{canonical_json, csv_header, csv_row};

/// Everything one run produces. `breach` records whether any grid point
/// missed its error budget (consulted by `--check`).
pub struct RunArtifacts {
    pub report: Value,
    pub canonical: String,
    pub csv: String,
    pub breach: bool,
    pub max_order: usize,
}

struct TimePoint {
    time: f64,
    estimate: EstimateReport,
    bound_d1_mean_abs: f64,
    bound_d1_coarse: f64,
    bound_d_o: f64,
    /// observable-units threshold used by the breach check
    check_threshold: f64,
    breach: bool,
    oracle_trace_norm: Option<f64>,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunArtifacts> {
    let v = validate(config)?;
    match v.kind {
        ModelKind::Lindblad => run_lindblad(&v),
        ModelKind::NonHermitian => run_non_hermitian(&v),
    }
}

fn resolve_order_lindblad(v: &ValidatedExperiment, inputs_tmax: &BoundInputs) -> Result<usize> {
    if let Some(k) = v.max_order {
        return Ok(k);
    }
    let eps = v.config.run.epsilon.expect("validation guarantees epsilon");
    bounds::truncation_order(inputs_tmax, v.config.run.budget_split_c * eps)
}

fn budgets_for(
    v: &ValidatedExperiment,
    inputs: &BoundInputs,
    k: usize,
    mode: EstimateMode,
) -> Result<Vec<SamplingBudget>> {
    let run = &v.config.run;
    let mut budgets = Vec::new();
    if mode == EstimateMode::DeterministicQuadrature {
        return Ok(budgets);
    }
    let first_order = if mode == EstimateMode::Shots { 0 } else { 1 };
    if let Some(samples) = run.samples {
        for n in first_order..=k {
            budgets.push(SamplingBudget::fixed(n, samples));
        }
    } else {
        let eps = run.epsilon.expect("validation guarantees epsilon");
        let delta = (1.0 - run.budget_split_c) * eps / (k as f64 + 1.0);
        for n in first_order..=k {
            budgets.push(SamplingBudget::from_bound(inputs, n, delta, run.beta)?);
        }
    }
    Ok(budgets)
}

fn run_lindblad(v: &ValidatedExperiment) -> Result<RunArtifacts> {
    let model = v.lindblad.as_ref().expect("lindblad kind");
    let run = &v.config.run;
    let t_max = *run.times.last().unwrap();
    let obs_norm = spectral_norm(&v.observable)?;
    let inputs_tmax = BoundInputs::from_model(model, &v.observable_decomposition, t_max)?;
    let k = resolve_order_lindblad(v, &inputs_tmax)?;

    let rate_validity: Vec<&str> = model
        .channels()
        .iter()
        .map(|ch| flag_name(check_nonmarkovian_validity(&ch.rate, t_max).flag))
        .collect();
    let adjoint_norm = bounds::lindblad_adjoint_norm(model, &v.observable, t_max)?;

    let mut points = Vec::with_capacity(run.times.len());
    for (j, &t) in run.times.iter().enumerate() {
        let inputs = BoundInputs::from_model(model, &v.observable_decomposition, t)?;
        let budgets = budgets_for(v, &inputs, k, run.mode)?;
        let seed_t = substream(&[run.seed, j as u64]);
        let mut est = estimate_observable(
            model,
            &v.rho0,
            &v.observable,
            t,
            k,
            &budgets,
            run.mode,
            run.quad_points,
            seed_t,
        )?;
        let steps = ((t * run.oracle_steps_per_unit as f64).ceil() as usize).max(1);
        let oracle_state = oracle::integrate_master(model, &v.rho0, t, steps)?;
        let oracle_value = trace(&v.observable.dot(oracle_state.matrix())).re;
        est.oracle = Some(oracle_value);

        let tb = bounds::truncation_bound(&inputs, k)?;
        let d_o = bounds::observable_truncation_bound(&inputs, &v.observable, model, k)?;
        let bound_scaled = 2.0 * obs_norm * tb.mean_abs_form.min(tb.coarse_form).min(d_o);
        let mc_slack: f64 =
            est.delta_total + 4.0 * est.orders.iter().map(|o| o.std_error).sum::<f64>();
        let check_threshold = bound_scaled + mc_slack + 10.0 * lindsim::tol::QUADRATURE;
        let breach = (est.total - oracle_value).abs() > check_threshold;

        points.push(TimePoint {
            time: t,
            estimate: est,
            bound_d1_mean_abs: tb.mean_abs_form,
            bound_d1_coarse: tb.coarse_form,
            bound_d_o: d_o,
            check_threshold,
            breach,
            oracle_trace_norm: None,
        });
    }

    let model_summary = json!({
        "kind": "lindblad",
        "dim": model.dim(),
        "channels": model.channel_count(),
        "gamma_bar": inputs_tmax.gamma_bar,
        "mean_abs_rates": inputs_tmax.mean_abs,
        "support_max": inputs_tmax.support_max,
        "support_obs": inputs_tmax.support_obs,
        "observable_norm": obs_norm,
        "lindblad_adjoint_norm": adjoint_norm,
        "rate_validity": rate_validity,
    });
    assemble(v, k, obs_norm, model_summary, points, None)
}

fn run_non_hermitian(v: &ValidatedExperiment) -> Result<RunArtifacts> {
    let model = v.non_hermitian.as_ref().expect("non-hermitian kind");
    let run = &v.config.run;
    let gamma_norm = spectral_norm(model.gamma_op())?;
    let obs_norm = spectral_norm(&v.observable)?;
    let k = match v.max_order {
        Some(k) => k,
        None => {
            let eps_prime = run.budget_split_c * run.epsilon.expect("validation");
            let t_max = *run.times.last().unwrap();
            let mut k = 0usize;
            while nh_trace_bound(gamma_norm, t_max, k) > eps_prime {
                k += 1;
                if k > 512 {
                    return Err(SimError::Validation(
                        "epsilon unreachable for this non-Hermitian model".into(),
                    ));
                }
            }
            k
        }
    };
    let adjoint = anticommutator(model.gamma_op(), &v.observable)?;
    let adjoint_norm = spectral_norm(&adjoint)?;

    let mut points = Vec::with_capacity(run.times.len());
    for &t in &run.times {
        let vt =
            dyson::volterra_terms_non_hermitian(model, v.rho0.matrix(), t, k, run.volterra_grid)?;
        let steps = ((t * run.oracle_steps_per_unit as f64).ceil() as usize).max(1);
        let oracle_state = oracle::integrate_non_hermitian(model, &v.rho0, t, steps)?;
        let oracle_value = trace(&v.observable.dot(&oracle_state)).re;

        let order0 = trace(&v.observable.dot(&vt.terms[0])).re;
        let mut orders = Vec::with_capacity(k);
        for n in 1..=k {
            orders.push(OrderEstimate {
                order: n,
                value: trace(&v.observable.dot(&vt.terms[n])).re,
                weight: 1.0,
                std_error: 0.0,
                samples: 0,
                chains: 0,
                shots_single_counting: 0,
                shots_double_counting: 0,
                delta: 0.0,
                beta: 0.0,
            });
        }
        let total = order0 + orders.iter().map(|o| o.value).sum::<f64>();
        let estimate = EstimateReport {
            mode: EstimateMode::DeterministicQuadrature,
            seed: run.seed,
            time: t,
            max_order: k,
            order0,
            orders,
            total,
            delta_total: 0.0,
            failure_probability: 0.0,
            oracle: Some(oracle_value),
        };

        let d1 = nh_trace_bound(gamma_norm, t, k);
        let d_o = if gamma_norm == 0.0 {
            0.0
        } else {
            adjoint_norm / obs_norm * (2.0 * gamma_norm).powi(k as i32) * t.powi(k as i32 + 1)
                / (2.0 * factorial(k + 1))
        };
        let check_threshold =
            2.0 * obs_norm * d1.min(d_o) + 10.0 * lindsim::tol::QUADRATURE;
        let breach = (total - oracle_value).abs() > check_threshold;
        points.push(TimePoint {
            time: t,
            estimate,
            bound_d1_mean_abs: d1,
            bound_d1_coarse: d1,
            bound_d_o: d_o,
            check_threshold,
            breach,
            oracle_trace_norm: Some(trace_norm(&oracle_state)?),
        });
    }

    // for PSD Γ the state trace norm must not grow along the grid
    let monotone = points
        .windows(2)
        .all(|w| w[1].oracle_trace_norm.unwrap() <= w[0].oracle_trace_norm.unwrap() + 1e-9);

    let model_summary = json!({
        "kind": "non-hermitian",
        "dim": model.dim(),
        "gamma_norm": gamma_norm,
        "gamma_psd": model.gamma_psd(),
        "observable_norm": obs_norm,
        "adjoint_anticommutator_norm": adjoint_norm,
        "trace_norm_monotone": monotone,
    });
    assemble(v, k, obs_norm, model_summary, points, Some(monotone))
}

/// (2‖Γ‖t)^{n+1} / (2(n+1)!)
fn nh_trace_bound(gamma_norm: f64, t: f64, n: usize) -> f64 {
    if gamma_norm == 0.0 || t == 0.0 {
        return 0.0;
    }
    (2.0 * gamma_norm * t).powi(n as i32 + 1) / (2.0 * factorial(n + 1))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product::<f64>().max(1.0)
}

fn flag_name(flag: RateValidity) -> &'static str {
    match flag {
        RateValidity::Markovian => "markovian",
        RateValidity::ValidNonMarkovian => "valid-non-markovian",
        RateValidity::Invalid => "invalid",
    }
}

fn assemble(
    v: &ValidatedExperiment,
    k: usize,
    obs_norm: f64,
    model_summary: Value,
    points: Vec<TimePoint>,
    trace_norm_monotone: Option<bool>,
) -> Result<RunArtifacts> {
    let mut csv = csv_header(k);
    csv.push('\n');
    let mut results = Vec::with_capacity(points.len());
    let mut chains_total = 0u64;
    let mut breach_any = false;
    for p in &points {
        breach_any |= p.breach;
        chains_total += p.estimate.orders.iter().map(|o| o.chains).sum::<u64>();

        let mut row = vec![p.time, p.estimate.oracle.unwrap_or(f64::NAN), p.estimate.order0];
        let mut cum = p.estimate.order0;
        for o in &p.estimate.orders {
            if o.order == 0 {
                continue;
            }
            cum += o.value;
            row.push(cum);
        }
        row.push(p.estimate.total);
        row.push(2.0 * obs_norm * p.bound_d1_mean_abs);
        row.push(2.0 * obs_norm * p.bound_d_o);
        row.push(p.estimate.delta_total);
        csv.push_str(&csv_row(&row));
        csv.push('\n');

        let mut entry = Map::new();
        entry.insert("time".into(), json!(p.time));
        entry.insert(
            "estimate".into(),
            serde_json::to_value(&p.estimate)
                .map_err(|e| SimError::Internal(format!("report serialization: {e}")))?,
        );
        entry.insert(
            "bounds".into(),
            json!({
                "d1_mean_abs": p.bound_d1_mean_abs,
                "d1_coarse": p.bound_d1_coarse,
                "d_observable": p.bound_d_o,
                "d1_mean_abs_observable_units": 2.0 * obs_norm * p.bound_d1_mean_abs,
                "d_observable_observable_units": 2.0 * obs_norm * p.bound_d_o,
                "check_threshold": p.check_threshold,
            }),
        );
        entry.insert("breach".into(), json!(p.breach));
        if let Some(tn) = p.oracle_trace_norm {
            entry.insert("oracle_trace_norm".into(), json!(tn));
        }
        results.push(Value::Object(entry));
    }

    let shots_double: u64 = 2 * chains_total;
    let mut report = Map::new();
    report.insert(
        "config".into(),
        serde_json::to_value(&v.config)
            .map_err(|e| SimError::Internal(format!("config echo: {e}")))?,
    );
    report.insert("model".into(), model_summary);
    report.insert("max_order".into(), json!(k));
    report.insert("seed".into(), json!(v.config.run.seed));
    report.insert("results".into(), Value::Array(results));
    report.insert(
        "tallies".into(),
        json!({
            "chains": chains_total,
            "shots_single_counting": chains_total,
            "shots_double_counting": shots_double,
        }),
    );
    report.insert("breach".into(), json!(breach_any));
    if let Some(m) = trace_norm_monotone {
        report.insert("trace_norm_monotone".into(), json!(m));
    }
    let report = Value::Object(report);
    let canonical = canonical_json(&report)?;
    Ok(RunArtifacts {
        report,
        canonical,
        csv,
        breach: breach_any,
        max_order: k,
    })
}

/// Write report.json and timeseries.csv into `dir`.
pub fn write_artifacts(artifacts: &RunArtifacts, dir: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| SimError::Validation(format!("cannot create output dir: {e}")))?;
    std::fs::write(dir.join("report.json"), &artifacts.canonical)
        .map_err(|e| SimError::Validation(format!("cannot write report.json: {e}")))?;
    std::fs::write(dir.join("timeseries.csv"), &artifacts.csv)
        .map_err(|e| SimError::Validation(format!("cannot write timeseries.csv: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn amplitude_damping_runs_within_bounds() {
        let cfg = presets::preset("amplitude-damping").unwrap();
        let out = run_experiment(&cfg).unwrap();
        assert!(!out.breach, "bounds breached:\n{}", out.csv);
        // CSV has header + one row per grid time
        assert_eq!(out.csv.lines().count(), 1 + cfg.run.times.len());
        assert!(out.csv.starts_with("time,oracle_value,order0,cum_order1"));
    }

    #[test]
    fn non_markovian_flag_lands_in_report() {
        let cfg = presets::preset("non-markovian-sin").unwrap();
        let out = run_experiment(&cfg).unwrap();
        let flags = out.report["model"]["rate_validity"].as_array().unwrap();
        assert_eq!(flags[0], "valid-non-markovian");
        assert!(!out.breach);
    }

    #[test]
    fn two_qubit_adjoint_norm_in_header() {
        let cfg = presets::preset("two-qubit-local-decay").unwrap();
        let out = run_experiment(&cfg).unwrap();
        let adj = out.report["model"]["lindblad_adjoint_norm"].as_f64().unwrap();
        // normalized model keeps γ = 0.1 per channel: ‖L_D†O‖∞ = 2γ
        assert!((adj - 0.2).abs() < 1e-9, "{adj}");
    }

    #[test]
    fn non_hermitian_preset_runs() {
        let cfg = presets::preset("non-hermitian-feshbach").unwrap();
        let out = run_experiment(&cfg).unwrap();
        assert!(!out.breach);
        assert_eq!(out.report["model"]["gamma_psd"], serde_json::json!(true));
        assert_eq!(out.report["trace_norm_monotone"], serde_json::json!(true));
    }

    #[test]
    fn epsilon_drives_non_hermitian_order() {
        let mut cfg = presets::preset("non-hermitian-feshbach").unwrap();
        cfg.run.max_order = None;
        cfg.run.epsilon = Some(0.01);
        let out = run_experiment(&cfg).unwrap();
        // (2·0.1·1)^{K+1}/(2(K+1)!) ≤ 0.005 first holds at K = 2
        assert_eq!(out.max_order, 2);
        assert!(!out.breach);
    }

    #[test]
    fn same_seed_same_bytes() {
        let cfg = presets::preset("dephasing-z").unwrap();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.canonical, b.canonical);
        assert_eq!(a.csv, b.csv);
    }
}
