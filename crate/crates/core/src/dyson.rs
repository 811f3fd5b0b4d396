//! Deterministic evaluation of the truncated perturbative series, by two
//! independent routes that are cross-checked against each other:
//!
//! 1. the state-level recursion
//!    ρ̃ₙ(t) = e^{tL_H}ρ(0) + ∫₀ᵗ ds e^{(t−s)L_H} L_D^s ρ̃ₙ₋₁(s)
//!    on a uniform grid with trapezoidal quadrature, and
//! 2. the observable-level nested chains
//!    ⟨O⟩_{ρₙ(t)} = Σ_ω ∫dVₙ ⟨A_ω(s⃗)⟩
//!    with iterated Gauss–Legendre quadrature over the time simplex.
//!
//! Neither route samples anything; they are the deterministic reference the
//! Monte Carlo estimator is compared against.

use crate::error::{Result, SimError};
use crate::linalg::{
    self, anticommutator, c64, dagger, trace, trace_norm, zeros, CMat,
};
use crate::model::{dissipator_only, LindbladModel, NonHermitianModel};
use crate::oracle::{heisenberg, PropagatorCache};
use crate::tol;

/// The three operator placements produced by expanding one adjoint
/// dissipator application L_D† ξ = γ (L†ξL − ½L†Lξ − ½ξL†L).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissipatorVariant {
    /// L† ξ L, weight +1
    Sandwich,
    /// L†L ξ, weight −½
    Left,
    /// ξ L†L, weight −½
    Right,
}

impl DissipatorVariant {
    pub const ALL: [DissipatorVariant; 3] = [
        DissipatorVariant::Sandwich,
        DissipatorVariant::Left,
        DissipatorVariant::Right,
    ];

    pub fn weight(self) -> f64 {
        match self {
            DissipatorVariant::Sandwich => 1.0,
            DissipatorVariant::Left | DissipatorVariant::Right => -0.5,
        }
    }
}

/// Specification of one nested chain A_{[i₁..iₙ]}(s⃗): the channel word, the
/// descending times t ≥ s₁ ≥ … ≥ sₙ ≥ 0, and the observable the chain wraps.
#[derive(Debug, Clone)]
pub struct AdjointChainSpec {
    pub channels: Vec<usize>,
    pub times: Vec<f64>,
    pub horizon: f64,
    pub observable: CMat,
}

impl AdjointChainSpec {
    pub fn order(&self) -> usize {
        self.channels.len()
    }

    pub fn validate(&self, model: &LindbladModel) -> Result<()> {
        if self.channels.len() != self.times.len() {
            return Err(SimError::Validation(format!(
                "chain spec: {} channels but {} times",
                self.channels.len(),
                self.times.len()
            )));
        }
        let mut prev = self.horizon;
        for (&s, &i) in self.times.iter().zip(self.channels.iter()) {
            if s > prev + 1e-12 || s < -1e-12 {
                return Err(SimError::Validation(format!(
                    "chain times must descend within [0, {}], got {:?}",
                    self.horizon, self.times
                )));
            }
            if i >= model.channel_count() {
                return Err(SimError::Validation(format!(
                    "chain channel {i} out of range (N = {})",
                    model.channel_count()
                )));
            }
            prev = s;
        }
        linalg::ensure_same_dim(&self.observable, model.hamiltonian(), "chain observable")
    }
}

/// Adjoint dissipator of one channel: L_D^{s,i†} ξ = γᵢ(s)(Lᵢ†ξLᵢ − ½{Lᵢ†Lᵢ, ξ}).
pub fn adjoint_dissipator(model: &LindbladModel, channel: usize, s: f64, xi: &CMat) -> Result<CMat> {
    let ch = &model.channels()[channel];
    let l = &ch.operator;
    let l_dag = dagger(l);
    let ldl = l_dag.dot(l);
    let g = ch.rate.eval(s);
    let sandwich = l_dag.dot(xi).dot(l);
    let anti = anticommutator(&ldl, xi)?;
    Ok((sandwich - anti.mapv(|z| z * c64(0.5, 0.0))).mapv(|z| z * c64(g, 0.0)))
}

/// Evaluate A_{[i⃗]}(s⃗) by alternating Heisenberg conjugations over the time
/// gaps with adjoint dissipator applications, innermost-first:
/// A = e^{sₙL_H†} L_D^{sₙ,iₙ†} … L_D^{s₁,i₁†} e^{(t−s₁)L_H†} O.
pub fn build_adjoint_chain(spec: &AdjointChainSpec, model: &LindbladModel) -> Result<CMat> {
    spec.validate(model)?;
    let h = model.hamiltonian();
    let mut x = spec.observable.clone();
    let mut upper = spec.horizon;
    for (&s, &i) in spec.times.iter().zip(spec.channels.iter()) {
        x = heisenberg(h, &x, upper - s)?;
        x = adjoint_dissipator(model, i, s, &x)?;
        upper = s;
    }
    heisenberg(h, &x, upper)
}

// ---------------------------------------------------------------------------
// State-level recursion (route 1)
// ---------------------------------------------------------------------------

/// The individual series terms ρ₀(t), ρ₁(t), …, ρₙ(t) at the final time,
/// together with the self-estimated quadrature error.
#[derive(Debug, Clone)]
pub struct VolterraTerms {
    pub terms: Vec<CMat>,
    pub quadrature_error: f64,
}

impl VolterraTerms {
    /// ρ̃ₙ(t) = Σ_{k≤n} ρₖ(t).
    pub fn truncated(&self, n: usize) -> CMat {
        let mut acc = self.terms[0].clone();
        for k in 1..=n.min(self.terms.len() - 1) {
            acc += &self.terms[k];
        }
        acc
    }
}

fn volterra_terms_generic<F>(
    hamiltonian: &CMat,
    rho0: &CMat,
    t: f64,
    n_max: usize,
    grid_steps: usize,
    perturbation: F,
) -> Result<VolterraTerms>
where
    F: Fn(f64, &CMat) -> Result<CMat>,
{
    if grid_steps < 16 {
        return Err(SimError::Validation(
            "volterra recursion needs grid_steps >= 16".into(),
        ));
    }
    let dim = hamiltonian.nrows();
    // even grid so the half-resolution self-check can reuse the nodes
    let g = grid_steps + grid_steps % 2;
    let h = t / g as f64;
    let cache = PropagatorCache::new(hamiltonian);
    let mut props = Vec::with_capacity(g + 1);
    for m in 0..=g {
        props.push(cache.propagator(m as f64 * h)?);
    }
    let conj = |m: usize, x: &CMat| -> CMat {
        let u = &props[m];
        u.dot(x).dot(&dagger(u))
    };

    // level 0: unitary evolution on the whole grid
    let mut level: Vec<CMat> = (0..=g).map(|m| conj(m, rho0)).collect();
    let mut terms = vec![level[g].clone()];
    let mut quad_err = 0.0;

    for _k in 1..=n_max {
        if t == 0.0 {
            level = vec![zeros(dim); g + 1];
            terms.push(zeros(dim));
            continue;
        }
        // integrand at the source points: D_m = L_D^{s_m} level(s_m)
        let mut src = Vec::with_capacity(g + 1);
        for (m, state) in level.iter().enumerate() {
            src.push(perturbation(m as f64 * h, state)?);
        }
        // T(τ_j) = ∫₀^{τ_j} e^{(τ_j−s)L_H} D(s) ds, trapezoid on the grid
        let mut next: Vec<CMat> = Vec::with_capacity(g + 1);
        for j in 0..=g {
            let mut acc = zeros(dim);
            if j > 0 {
                for (m, d) in src.iter().enumerate().take(j + 1) {
                    let w = if m == 0 || m == j { 0.5 } else { 1.0 };
                    acc = acc + conj(j - m, d).mapv(|z| z * c64(w * h, 0.0));
                }
            }
            next.push(acc);
        }
        // half-resolution estimate at the final time (step 2h over even nodes)
        let coarse = {
            let mut acc = zeros(dim);
            for m in (0..=g).step_by(2) {
                let w = if m == 0 || m == g { 0.5 } else { 1.0 };
                acc = acc + conj(g - m, &src[m]).mapv(|z| z * c64(w * 2.0 * h, 0.0));
            }
            acc
        };
        quad_err += trace_norm(&(&next[g] - &coarse))? / 3.0;
        terms.push(next[g].clone());
        level = next;
    }

    if quad_err > tol::QUADRATURE {
        return Err(SimError::Quadrature(format!(
            "volterra grid too coarse: self-estimate {quad_err:.2e} exceeds {:.0e}; \
             increase grid_steps",
            tol::QUADRATURE
        )));
    }
    Ok(VolterraTerms {
        terms,
        quadrature_error: quad_err,
    })
}

/// Series terms for a Lindblad model.
pub fn volterra_terms(
    model: &LindbladModel,
    rho0: &CMat,
    t: f64,
    n_max: usize,
    grid_steps: usize,
) -> Result<VolterraTerms> {
    linalg::ensure_same_dim(model.hamiltonian(), rho0, "volterra_terms")?;
    let all: Vec<usize> = (0..model.channel_count()).collect();
    volterra_terms_generic(model.hamiltonian(), rho0, t, n_max, grid_steps, |s, x| {
        dissipator_only(model, x, s, &all)
    })
}

/// ρ̃ₙ(t) for a Lindblad model. n = 0 reduces to the unitary evolution.
pub fn volterra_truncated(
    model: &LindbladModel,
    rho0: &CMat,
    t: f64,
    n: usize,
    grid_steps: usize,
) -> Result<CMat> {
    Ok(volterra_terms(model, rho0, t, n, grid_steps)?.truncated(n))
}

/// Series terms for a non-Hermitian model, with the anticommutator
/// perturbation L_Γ ξ = −{Γ, ξ}.
pub fn volterra_terms_non_hermitian(
    model: &NonHermitianModel,
    rho0: &CMat,
    t: f64,
    n_max: usize,
    grid_steps: usize,
) -> Result<VolterraTerms> {
    linalg::ensure_same_dim(model.hamiltonian(), rho0, "volterra_terms_non_hermitian")?;
    volterra_terms_generic(model.hamiltonian(), rho0, t, n_max, grid_steps, |_s, x| {
        Ok(anticommutator(model.gamma_op(), x)?.mapv(|z| -z))
    })
}

// ---------------------------------------------------------------------------
// Observable-level quadrature (route 2)
// ---------------------------------------------------------------------------

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre_unit(points: usize) -> (Vec<f64>, Vec<f64>) {
    assert!((1..=64).contains(&points), "unsupported GL order");
    let n = points;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // initial guess (Chebyshev) then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    // shift [−1,1] → [0,1]
    for i in 0..n {
        nodes[i] = 0.5 * (nodes[i] + 1.0);
        weights[i] *= 0.5;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// ⟨O⟩_{ρₙ(t)}: the order-n series term, by nested simplex quadrature over
/// s₁ ∈ [0,t], s₂ ∈ [0,s₁], … with `quad_points` Gauss–Legendre nodes per
/// level and an explicit sum over the Nⁿ channel words.
pub fn dyson_expectation_exact(
    model: &LindbladModel,
    rho0: &CMat,
    observable: &CMat,
    t: f64,
    n: usize,
    quad_points: usize,
) -> Result<f64> {
    linalg::ensure_same_dim(model.hamiltonian(), rho0, "dyson_expectation_exact")?;
    linalg::ensure_same_dim(observable, rho0, "dyson_expectation_exact")?;
    if n > 4 {
        return Err(SimError::Validation(format!(
            "series order {n} > 4 is not supported (cost grows as (N·quad)^n)"
        )));
    }
    if !(2..=64).contains(&quad_points) {
        return Err(SimError::Validation(
            "quad_points must lie in 2..=64".into(),
        ));
    }
    if n == 0 {
        let evolved = heisenberg(model.hamiltonian(), observable, t)?;
        return Ok(trace(&evolved.dot(rho0)).re);
    }
    let (nodes, weights) = gauss_legendre_unit(quad_points);
    simplex_level(model, rho0, &nodes, &weights, observable, t, t, n)
}

#[allow(clippy::too_many_arguments)]
fn simplex_level(
    model: &LindbladModel,
    rho0: &CMat,
    nodes: &[f64],
    weights: &[f64],
    x: &CMat,
    upper: f64,
    prev_time: f64,
    remaining: usize,
) -> Result<f64> {
    let h = model.hamiltonian();
    let mut acc = 0.0;
    for (&node, &w) in nodes.iter().zip(weights.iter()) {
        let s = upper * node;
        // conjugate across the gap from the previous insertion down to s
        let gap = heisenberg(h, x, prev_time - s)?;
        for ch in 0..model.channel_count() {
            let applied = adjoint_dissipator(model, ch, s, &gap)?;
            let contribution = if remaining == 1 {
                let a = heisenberg(h, &applied, s)?;
                trace(&a.dot(rho0)).re
            } else {
                simplex_level(model, rho0, nodes, weights, &applied, s, s, remaining - 1)?
            };
            acc += w * upper * contribution;
        }
    }
    Ok(acc)
}

/// The first-order correction evaluated literally from Heisenberg-picture
/// correlators:
/// Σᵢ ∫₀ᵗ ds γᵢ(s)[⟨Lᵢ†(s) O(t) Lᵢ(s)⟩ − ½⟨{O(t), (Lᵢ†Lᵢ)(s)}⟩].
/// Deliberately a different code path from [`dyson_expectation_exact`]; the
/// two must agree to tight tolerance.
pub fn first_order_expanded(
    model: &LindbladModel,
    rho0: &CMat,
    observable: &CMat,
    t: f64,
    quad_points: usize,
) -> Result<f64> {
    linalg::ensure_same_dim(model.hamiltonian(), rho0, "first_order_expanded")?;
    let cache = PropagatorCache::new(model.hamiltonian());
    let o_t = cache.heisenberg(observable, t)?;
    let (nodes, weights) = gauss_legendre_unit(quad_points);
    let mut acc = 0.0;
    for (&node, &w) in nodes.iter().zip(weights.iter()) {
        let s = t * node;
        for ch in model.channels() {
            let g = ch.rate.eval(s);
            if g == 0.0 {
                continue;
            }
            let l_s = cache.heisenberg(&ch.operator, s)?;
            let ldl_s = cache.heisenberg(&dagger(&ch.operator).dot(&ch.operator), s)?;
            let sandwich = trace(&dagger(&l_s).dot(&o_t).dot(&l_s).dot(rho0)).re;
            let anti = trace(&anticommutator(&o_t, &ldl_s)?.dot(rho0)).re;
            acc += w * t * g * (sandwich - 0.5 * anti);
        }
    }
    Ok(acc)
}
