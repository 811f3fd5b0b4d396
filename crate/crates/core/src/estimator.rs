//! Monte Carlo estimation of the series corrections: sample channel words
//! and time simplices uniformly, aggregate single shots (or exact chain
//! means), and scale by the simplex volume (Nt)ⁿ/n!.
//!
//! Sampling is embarrassingly parallel: sample j of order n owns the
//! counter-based stream derived from (seed, order, j), per-sample values are
//! collected in index order, and the reduction is a fixed-shape pairwise
//! sum — so results are bit-identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundInputs};
use crate::dyson::{self, AdjointChainSpec};
use crate::error::{Result, SimError};
use crate::linalg::{trace, CMat};
use crate::model::{DensityMatrix, LindbladModel};
use crate::oracle::evolve_unitary;
use crate::rng::{substream, CounterRng};
use crate::shots::{chain_multiplicity, single_shot_a, ShotContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMode {
    /// Emulated single-shot measurements (the full protocol).
    Shots,
    /// Exact per-sample chain means; isolates Monte Carlo error from shot
    /// noise.
    ExactMean,
    /// No sampling at all: nested quadrature of every order.
    DeterministicQuadrature,
}

/// Sample count and error target for one series order.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SamplingBudget {
    pub order: usize,
    /// Absolute error target δₙ (observable units); 0 when the budget was
    /// fixed by hand rather than derived from the concentration bound.
    pub delta: f64,
    /// Confidence exponent β (failure probability e^{−β}).
    pub beta: f64,
    pub samples: u64,
}

impl SamplingBudget {
    /// Budget from the concentration-bound formula.
    pub fn from_bound(inputs: &BoundInputs, order: usize, delta: f64, beta: f64) -> Result<Self> {
        if delta <= 0.0 || beta < 0.0 {
            return Err(SimError::Budget(format!(
                "invalid budget parameters delta={delta}, beta={beta}"
            )));
        }
        let samples = bounds::required_samples(inputs, order, delta, beta)?;
        Ok(SamplingBudget {
            order,
            delta,
            beta,
            samples,
        })
    }

    /// Fixed sample count with no attached confidence statement.
    pub fn fixed(order: usize, samples: u64) -> Self {
        SamplingBudget {
            order,
            delta: 0.0,
            beta: 0.0,
            samples,
        }
    }
}

/// n independent U[0,t] draws sorted descending — exactly uniform on the
/// simplex {t ≥ s₁ ≥ … ≥ sₙ ≥ 0}.
pub fn sample_time_simplex(n: usize, t: f64, rng: &mut CounterRng) -> Result<Vec<f64>> {
    let mut times = Vec::with_capacity(n);
    for _ in 0..n {
        times.push(t * rng.checked_next_f64()?);
    }
    times.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(times)
}

/// n i.i.d. uniform channel indices in [0, n_channels).
pub fn sample_channel_word(
    n: usize,
    n_channels: usize,
    rng: &mut CounterRng,
) -> Result<Vec<usize>> {
    if n_channels == 0 {
        return Err(SimError::Validation(
            "cannot sample channels from an empty model".into(),
        ));
    }
    let mut word = Vec::with_capacity(n);
    for _ in 0..n {
        word.push(rng.below(n_channels as u64)? as usize);
    }
    Ok(word)
}

/// Fixed-shape pairwise summation; independent of chunking and worker count.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// (Nt)ⁿ/n!, the estimator weight (= Nⁿ·|Vₙ| with |Vₙ| = tⁿ/n!).
pub fn series_weight(order: usize, n_channels: usize, t: f64) -> f64 {
    let mut w = 1.0;
    for k in 1..=order {
        w *= n_channels as f64 * t / k as f64;
    }
    w
}

/// Outcome of estimating one order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderEstimate {
    pub order: usize,
    /// The order-n contribution to ⟨O⟩ (already weighted).
    pub value: f64,
    pub weight: f64,
    /// Monte Carlo standard error of `value` (weight·sample std/√|Ω|);
    /// 0 for deterministic evaluations.
    pub std_error: f64,
    pub samples: u64,
    /// Correlator chains evaluated (one real+imaginary shot pair each).
    pub chains: u64,
    /// Measurement count if a chain costs one repetition.
    pub shots_single_counting: u64,
    /// Measurement count if real and imaginary shots are separate
    /// repetitions.
    pub shots_double_counting: u64,
    pub delta: f64,
    pub beta: f64,
}

/// Estimate the order-n correction using the budgeted number of samples.
#[allow(clippy::too_many_arguments)]
pub fn estimate_order(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    ctx: &ShotContext,
    observable: &CMat,
    t: f64,
    budget: &SamplingBudget,
    mode: EstimateMode,
    seed: u64,
) -> Result<OrderEstimate> {
    let n = budget.order;
    if budget.samples == 0 {
        return Err(SimError::Budget("budget has zero samples".into()));
    }
    if mode == EstimateMode::DeterministicQuadrature {
        return Err(SimError::Budget(
            "estimate_order is a sampling routine; use dyson_expectation_exact instead".into(),
        ));
    }
    let n_channels = model.channel_count();
    let per_sample = |j: u64| -> Result<(f64, u64)> {
        let mut rng = CounterRng::new(seed, substream(&[n as u64, j]));
        let times = sample_time_simplex(n, t, &mut rng)?;
        let channels = sample_channel_word(n, n_channels, &mut rng)?;
        let spec = AdjointChainSpec {
            channels,
            times,
            horizon: t,
            observable: observable.clone(),
        };
        match mode {
            EstimateMode::Shots => {
                let v = single_shot_a(&spec, ctx, model, rho0.matrix(), &mut rng)?;
                Ok((v, chain_multiplicity(&spec, ctx)))
            }
            EstimateMode::ExactMean => {
                let a = dyson::build_adjoint_chain(&spec, model)?;
                Ok((trace(&a.dot(rho0.matrix())).re, 0))
            }
            EstimateMode::DeterministicQuadrature => unreachable!(),
        }
    };

    let results: Result<Vec<(f64, u64)>> =
        (0..budget.samples).into_par_iter().map(per_sample).collect();
    let results = results?;
    let values: Vec<f64> = results.iter().map(|(v, _)| *v).collect();
    let chains: u64 = results.iter().map(|(_, c)| *c).sum();
    let weight = series_weight(n, n_channels, t);
    let count = budget.samples as f64;
    let mean = pairwise_sum(&values) / count;
    let value = weight * mean;
    let std_error = if budget.samples > 1 {
        let devs: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = pairwise_sum(&devs) / (count - 1.0);
        weight * (var / count).sqrt()
    } else {
        0.0
    };
    Ok(OrderEstimate {
        order: n,
        value,
        weight,
        std_error,
        samples: budget.samples,
        chains,
        shots_single_counting: chains,
        shots_double_counting: 2 * chains,
        delta: budget.delta,
        beta: budget.beta,
    })
}

/// Full estimate assembled from per-order pieces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReport {
    pub mode: EstimateMode,
    pub seed: u64,
    pub time: f64,
    pub max_order: usize,
    /// Tr[O·e^{tL_H}ρ(0)], or its shot estimate when sampled.
    pub order0: f64,
    pub orders: Vec<OrderEstimate>,
    /// order0 + Σ per-order values.
    pub total: f64,
    /// Σ δₙ over sampled orders.
    pub delta_total: f64,
    /// Union bound on the failure probability, Σ e^{−βₙ}.
    pub failure_probability: f64,
    /// Exact-oracle reference, filled in by callers that run the oracle.
    pub oracle: Option<f64>,
}

/// Estimate ⟨O⟩ at time `t` truncated at order `max_order`.
///
/// Order 0 is deterministic (a plain unitary expectation) unless a budget
/// for order 0 is supplied in `Shots` mode, in which case it is sampled like
/// every other order. Budgets are looked up by their `order` field; sampling
/// modes require one budget per order 1..=max_order.
#[allow(clippy::too_many_arguments)]
pub fn estimate_observable(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    observable: &CMat,
    t: f64,
    max_order: usize,
    budgets: &[SamplingBudget],
    mode: EstimateMode,
    quad_points: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let ctx = ShotContext::new(model, observable, t)?;
    let budget_for = |order: usize| budgets.iter().find(|b| b.order == order);

    // order 0: deterministic unless explicitly budgeted in shots mode
    let mut orders = Vec::with_capacity(max_order + 1);
    let order0 = match (mode, budget_for(0)) {
        (EstimateMode::Shots, Some(b)) => {
            let est = estimate_order(model, rho0, &ctx, observable, t, b, mode, seed)?;
            let value = est.value;
            orders.push(est);
            value
        }
        _ => {
            let evolved = evolve_unitary(model.hamiltonian(), rho0.matrix(), t)?;
            trace(&observable.dot(&evolved)).re
        }
    };

    for n in 1..=max_order {
        let est = match mode {
            EstimateMode::DeterministicQuadrature => {
                let v = dyson::dyson_expectation_exact(
                    model,
                    rho0.matrix(),
                    observable,
                    t,
                    n,
                    quad_points,
                )?;
                OrderEstimate {
                    order: n,
                    value: v,
                    weight: series_weight(n, model.channel_count(), t),
                    std_error: 0.0,
                    samples: 0,
                    chains: 0,
                    shots_single_counting: 0,
                    shots_double_counting: 0,
                    delta: 0.0,
                    beta: 0.0,
                }
            }
            _ => {
                let budget = budget_for(n).ok_or_else(|| {
                    SimError::Budget(format!("no sampling budget supplied for order {n}"))
                })?;
                if budget.order != n {
                    return Err(SimError::Budget("budget order mismatch".into()));
                }
                estimate_order(model, rho0, &ctx, observable, t, budget, mode, seed)?
            }
        };
        orders.push(est);
    }

    let total = order0
        + orders
            .iter()
            .filter(|o| o.order >= 1)
            .map(|o| o.value)
            .sum::<f64>();
    let delta_total = orders.iter().map(|o| o.delta).sum::<f64>();
    let failure_probability = orders
        .iter()
        .filter(|o| o.delta > 0.0)
        .map(|o| (-o.beta).exp())
        .sum::<f64>();
    Ok(EstimateReport {
        mode,
        seed,
        time: t,
        max_order,
        order0,
        orders,
        total,
        delta_total,
        failure_probability,
        oracle: None,
    })
}
