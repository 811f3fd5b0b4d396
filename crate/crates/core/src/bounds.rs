//! Analytic error bounds and sampling budgets: series truncation bounds,
//! concentration-derived sample counts, truncation-order selection, and the
//! total measurement tally.
//!
//! Every empirical quantity the oracle/series/estimator stack produces is
//! expected to respect its bound from this module; that cross-validation is
//! the reason the module exists. Factorials and powers are evaluated in log
//! space so moderate orders and horizons cannot overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::linalg::{anticommutator, c64, dagger, spectral_norm, zeros, CMat};
use crate::model::LindbladModel;
use crate::pauli::PauliDecomposition;

/// The scalar summary of a (normalized) model + observable pair that every
/// bound formula consumes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Channel count N.
    pub n_channels: usize,
    /// γ̄ = max over channels and s ∈ [0, t] of |γᵢ(s)|.
    pub gamma_bar: f64,
    /// Per-channel (1/t)∫|γᵢ|, the mean-value realization.
    pub mean_abs: Vec<f64>,
    /// Max Pauli support M over the Lindblad operators.
    pub support_max: usize,
    /// Observable support M_O.
    pub support_obs: usize,
    /// Horizon t.
    pub time: f64,
    /// t̄ = γ̄·N·t.
    pub t_bar: f64,
}

impl BoundInputs {
    /// Gather the inputs from a normalized model, the observable
    /// decomposition, and a horizon.
    pub fn from_model(
        model: &LindbladModel,
        observable: &PauliDecomposition,
        t: f64,
    ) -> Result<Self> {
        if !model.is_normalized()? {
            return Err(SimError::Validation(
                "bound inputs require a normalized model (‖Lᵢ‖∞ = 1)".into(),
            ));
        }
        if t < 0.0 {
            return Err(SimError::Validation("negative horizon".into()));
        }
        let gamma_bar = model.gamma_bar(t);
        let mean_abs: Vec<f64> = model.channels().iter().map(|c| c.rate.mean_abs(t)).collect();
        let support_max = 0; // filled below; kept explicit for clarity
        let mut inputs = BoundInputs {
            n_channels: model.channel_count(),
            gamma_bar,
            mean_abs,
            support_max,
            support_obs: observable.support(),
            time: t,
            t_bar: gamma_bar * model.channel_count() as f64 * t,
        };
        let basis = crate::pauli::PauliBasis::for_dimension(model.dim())?;
        inputs.support_max = model
            .channels()
            .iter()
            .map(|ch| crate::pauli::decompose(&ch.operator, &basis).map(|d| d.support()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .max()
            .unwrap_or(0);
        Ok(inputs)
    }

    pub fn mean_abs_sum(&self) -> f64 {
        self.mean_abs.iter().sum()
    }
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Trace-distance bound on the series truncation error at order n, in both
/// the per-channel mean-|γ| form and the coarse γ̄ form (mean-abs ≤ coarse).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TruncationBound {
    pub mean_abs_form: f64,
    pub coarse_form: f64,
}

/// D₁(ρ(t), ρ̃ₙ(t)) ≤ (2Σᵢ|γᵢ(εᵢ)|·t)^{n+1}/(2(n+1)!) ≤ (2γ̄Nt)^{n+1}/(2(n+1)!).
pub fn truncation_bound(inputs: &BoundInputs, n: usize) -> Result<TruncationBound> {
    let form = |sum_rates: f64| -> f64 {
        if inputs.time == 0.0 || sum_rates == 0.0 {
            return 0.0;
        }
        let ln = (n as f64 + 1.0) * (2.0 * sum_rates * inputs.time).ln()
            - (2.0f64).ln()
            - ln_factorial(n + 1);
        ln.exp()
    };
    let mean_abs_form = form(inputs.mean_abs_sum());
    let coarse_form = form(inputs.gamma_bar * inputs.n_channels as f64);
    if mean_abs_form > coarse_form * (1.0 + 1e-12) + f64::MIN_POSITIVE {
        return Err(SimError::Internal(format!(
            "mean-abs truncation form {mean_abs_form:.3e} exceeds coarse form {coarse_form:.3e}"
        )));
    }
    Ok(TruncationBound {
        mean_abs_form,
        coarse_form,
    })
}

/// sup over s ∈ [0, t] of ‖L_D^{s†}O‖∞, by dense sampling of the rates. For
/// constant rates one evaluation suffices.
pub fn lindblad_adjoint_norm(model: &LindbladModel, observable: &CMat, t: f64) -> Result<f64> {
    let dim = model.dim();
    let mut per_channel: Vec<CMat> = Vec::with_capacity(model.channel_count());
    for ch in model.channels() {
        let l = &ch.operator;
        let ldag = dagger(l);
        let ldl = ldag.dot(l);
        let term = ldag.dot(observable).dot(l)
            - anticommutator(&ldl, observable)?.mapv(|z| z * c64(0.5, 0.0));
        per_channel.push(term);
    }
    let all_constant = model
        .channels()
        .iter()
        .all(|ch| matches!(ch.rate, crate::model::RateFunction::Constant(_)));
    let samples = if all_constant { 1 } else { 512 };
    let mut sup = 0.0f64;
    for k in 0..=samples {
        let s = if samples == 0 {
            0.0
        } else {
            t * k as f64 / samples as f64
        };
        let mut total = zeros(dim);
        for (ch, term) in model.channels().iter().zip(per_channel.iter()) {
            let g = ch.rate.eval(s);
            if g != 0.0 {
                total = total + term.mapv(|z| z * c64(g, 0.0));
            }
        }
        sup = sup.max(spectral_norm(&total)?);
    }
    Ok(sup)
}

/// D_O(ρ(t), ρ̃ₙ(t)) ≤ (‖L_D†O‖∞/‖O‖∞)·(2γ̄N)ⁿ·t^{n+1}/(2(n+1)!).
pub fn observable_truncation_bound(
    inputs: &BoundInputs,
    observable: &CMat,
    model: &LindbladModel,
    n: usize,
) -> Result<f64> {
    let obs_norm = spectral_norm(observable)?;
    if obs_norm < 1e-14 {
        return Err(SimError::Validation(
            "observable_truncation_bound: zero observable".into(),
        ));
    }
    let adj = lindblad_adjoint_norm(model, observable, inputs.time)?;
    if inputs.time == 0.0 {
        return Ok(0.0);
    }
    let rate = 2.0 * inputs.gamma_bar * inputs.n_channels as f64;
    if rate == 0.0 {
        return Ok(if n == 0 {
            adj / obs_norm * inputs.time / 2.0
        } else {
            0.0
        });
    }
    let ln = (n as f64) * rate.ln() + (n as f64 + 1.0) * inputs.time.ln()
        - (2.0f64).ln()
        - ln_factorial(n + 1);
    Ok(adj / obs_norm * ln.exp())
}

/// Smallest sample count exceeding the concentration-bound formula
/// |Ωₙ| > 36·M_O²·(2+β)/δₙ² · (2γ̄MNt)^{2n}/n!².
///
/// Precondition (the Bernstein applicability window): δₙ ≤ (2γ̄Nt)ⁿ/n!.
/// The count is rounded up with a small relative guard so floating-point
/// evaluation can never undershoot the real-valued requirement.
pub fn required_samples(inputs: &BoundInputs, n: usize, delta: f64, beta: f64) -> Result<u64> {
    if delta <= 0.0 {
        return Err(SimError::Budget("delta must be positive".into()));
    }
    if beta < 0.0 {
        return Err(SimError::Budget("beta must be nonnegative".into()));
    }
    let envelope = ((n as f64) * (2.0 * inputs.gamma_bar * inputs.n_channels as f64 * inputs.time)
        .max(f64::MIN_POSITIVE)
        .ln()
        - ln_factorial(n))
    .exp();
    if delta > envelope * (1.0 + 1e-12) {
        return Err(SimError::Budget(format!(
            "delta {delta:.3e} exceeds the Bernstein applicability ceiling \
             (2γ̄Nt)^n/n! = {envelope:.3e} at order {n}; the concentration \
             inequality does not cover this regime"
        )));
    }
    let ln_count = (36.0f64).ln() + 2.0 * (inputs.support_obs as f64).ln() + (2.0 + beta).ln()
        - 2.0 * delta.ln()
        + 2.0
            * (n as f64)
            * (2.0
                * inputs.gamma_bar
                * inputs.support_max as f64
                * inputs.n_channels as f64
                * inputs.time)
                .max(f64::MIN_POSITIVE)
                .ln()
        - 2.0 * ln_factorial(n);
    if ln_count > (u64::MAX as f64).ln() - 1.0 {
        return Err(SimError::Range(format!(
            "required sample count exp({ln_count:.1}) does not fit in u64"
        )));
    }
    let f = ln_count.exp() * (1.0 + 1e-12);
    Ok(f.floor() as u64 + 1)
}

/// Truncation order K = max(0, ⌈2e·t̄ + ln(1/(2ε′)) − 1⌉) guaranteeing a
/// trace-distance error below ε′; verified against the coarse bound and
/// bumped if roundoff left it short.
pub fn truncation_order(inputs: &BoundInputs, eps_prime: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&eps_prime) || eps_prime == 0.0 {
        return Err(SimError::Validation(format!(
            "epsilon' must lie in (0, 1), got {eps_prime}"
        )));
    }
    let raw = 2.0 * std::f64::consts::E * inputs.t_bar + (1.0 / (2.0 * eps_prime)).ln() - 1.0;
    let mut k = raw.ceil().max(0.0) as usize;
    while truncation_bound(inputs, k)?.coarse_form > eps_prime {
        k += 1;
        if k > 10_000 {
            return Err(SimError::Internal(
                "truncation_order failed to converge".into(),
            ));
        }
    }
    Ok(k)
}

/// Measurement tally for a full simulation at error ε: per-order budgets
/// from the (1−c)ε/(K+1) split, the finite sum Σ 3ⁿ|Ωₙ|, and the closed-form
/// ceiling 36M_O²(2+β)(1+K)²/((1−c)²ε²)·e^{12γ̄NMt}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurementCount {
    pub truncation_order: usize,
    pub per_order: Vec<(usize, u64)>,
    pub exact_sum: f64,
    pub closed_form: f64,
}

pub fn total_measurements(
    inputs: &BoundInputs,
    eps: f64,
    c: f64,
    beta: f64,
) -> Result<MeasurementCount> {
    if !(0.0 < c && c < 1.0) {
        return Err(SimError::Validation("c must lie in (0, 1)".into()));
    }
    if eps <= 0.0 || eps >= 1.0 {
        return Err(SimError::Validation("epsilon must lie in (0, 1)".into()));
    }
    let k = truncation_order(inputs, c * eps)?;
    let delta_n = (1.0 - c) * eps / (k as f64 + 1.0);
    let mut per_order = Vec::with_capacity(k + 1);
    let mut exact_sum = 0.0f64;
    for n in 0..=k {
        let omega = required_samples(inputs, n, delta_n, beta)?;
        exact_sum += 3f64.powi(n as i32) * omega as f64;
        per_order.push((n, omega));
    }
    let m = inputs.support_max.max(1) as f64;
    let closed_form = 36.0 * (inputs.support_obs as f64).powi(2) * (2.0 + beta)
        * (1.0 + k as f64).powi(2)
        / ((1.0 - c) * eps).powi(2)
        * (12.0 * inputs.gamma_bar * inputs.n_channels as f64 * m * inputs.time).exp();
    Ok(MeasurementCount {
        truncation_order: k,
        per_order,
        exact_sum,
        closed_form,
    })
}

/// The two Hölder estimates of ∫₀ᵗ|γ(s)|sⁿ ds — the L² route
/// √(∫γ²)·√(t^{2n+1}/(2n+1)) and the sup route γ̄·t^{n+1}/(n+1) — returning
/// the smaller. The direct integral never exceeds it.
pub fn holder_rate_bounds(rate: &crate::model::RateFunction, t: f64, n: u32) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let l2 = rate.integral_square(t).sqrt() * (t.powi(2 * n as i32 + 1) / (2.0 * n as f64 + 1.0)).sqrt();
    let sup = rate.gamma_bar(t) * t.powi(n as i32 + 1) / (n as f64 + 1.0);
    l2.min(sup)
}
