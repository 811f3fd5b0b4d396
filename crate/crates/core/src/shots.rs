//! Multi-time correlator chains over Pauli words and the statistical
//! emulation of ancilla-based single-shot measurements.
//!
//! A chain is a product of Heisenberg-evolved basis elements
//! B = Q_{kₙ}(sₙ)…Q_{k₁}(s₁) Q_l(t) Q_{k'₁}(s₁)…Q_{k'ₙ}(sₙ); since every
//! factor is unitary, ⟨B⟩ lies in the unit disk and a Hadamard-test style
//! measurement returns ±1 outcomes whose means are Re⟨B⟩ and Im⟨B⟩. The
//! module reproduces exactly that output distribution (Bernoulli with the
//! exact means) without simulating the entangling circuit itself.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::dyson::{AdjointChainSpec, DissipatorVariant};
use crate::error::{Result, SimError};
use crate::linalg::{self, c64, dagger, trace, CMat};
use crate::model::LindbladModel;
use crate::oracle::propagator;
use crate::pauli::{decompose, PauliBasis, PauliDecomposition};
use crate::rng::CounterRng;

/// One operator product to be measured: time-tagged basis indices (applied
/// left to right) and the complex prefactor it carries in the chain
/// expansion. The prefactor plays no role in the measurement itself.
#[derive(Debug, Clone)]
pub struct CorrelatorChain {
    pub factors: Vec<(usize, f64)>,
    pub prefactor: Complex64,
}

/// A single ±1 ⊗ ±1 draw, together with where in the random stream it came
/// from.
#[derive(Debug, Clone, Copy)]
pub struct ShotOutcome {
    pub real_part: i8,
    pub imag_part: i8,
    pub sample_index: u64,
    pub stream: u64,
}

impl ShotOutcome {
    pub fn value(&self) -> Complex64 {
        c64(self.real_part as f64, self.imag_part as f64)
    }
}

/// Evolved-operator memo so one sampling call never exponentiates the same
/// (basis index, time) pair twice.
struct HeisenbergMemo<'a> {
    hamiltonian: &'a CMat,
    basis: &'a PauliBasis,
    evolved: HashMap<(usize, u64), CMat>,
    propagators: HashMap<u64, CMat>,
}

impl<'a> HeisenbergMemo<'a> {
    fn new(hamiltonian: &'a CMat, basis: &'a PauliBasis) -> Self {
        HeisenbergMemo {
            hamiltonian,
            basis,
            evolved: HashMap::new(),
            propagators: HashMap::new(),
        }
    }

    fn operator(&mut self, index: usize, time: f64) -> Result<CMat> {
        let key = (index, canonical_bits(time));
        if let Some(m) = self.evolved.get(&key) {
            return Ok(m.clone());
        }
        let u = match self.propagators.get(&key.1) {
            Some(u) => u.clone(),
            None => {
                let u = propagator(self.hamiltonian, time)?;
                self.propagators.insert(key.1, u.clone());
                u
            }
        };
        let q = dagger(&u).dot(self.basis.element(index)).dot(&u);
        self.evolved.insert(key, q.clone());
        Ok(q)
    }
}

fn canonical_bits(t: f64) -> u64 {
    if t == 0.0 { 0.0f64 } else { t }.to_bits()
}

/// ⟨B⟩ = Tr(ρ₀·B) for the bare unitary product (prefactor excluded).
pub fn exact_chain_expectation(
    chain: &CorrelatorChain,
    rho0: &CMat,
    hamiltonian: &CMat,
    basis: &PauliBasis,
) -> Result<Complex64> {
    linalg::ensure_same_dim(rho0, hamiltonian, "exact_chain_expectation")?;
    let mut memo = HeisenbergMemo::new(hamiltonian, basis);
    chain_expectation_memo(chain, rho0, &mut memo)
}

fn chain_expectation_memo(
    chain: &CorrelatorChain,
    rho0: &CMat,
    memo: &mut HeisenbergMemo,
) -> Result<Complex64> {
    let mut b: Option<CMat> = None;
    for &(idx, time) in &chain.factors {
        let q = memo.operator(idx, time)?;
        b = Some(match b {
            None => q,
            Some(acc) => acc.dot(&q),
        });
    }
    let b = b.ok_or_else(|| SimError::Validation("empty correlator chain".into()))?;
    let z = trace(&rho0.dot(&b));
    if z.re.abs() > 1.0 + 1e-9 || z.im.abs() > 1.0 + 1e-9 {
        return Err(SimError::Internal(format!(
            "unitary-product expectation left the unit square: {z}"
        )));
    }
    Ok(z)
}

/// Draw one single-shot outcome of the chain: the real part is +1 with
/// probability (1 + Re⟨B⟩)/2, the imaginary part independently with
/// (1 + Im⟨B⟩)/2. These are exactly the ancilla-test statistics.
pub fn single_shot(
    chain: &CorrelatorChain,
    rho0: &CMat,
    hamiltonian: &CMat,
    basis: &PauliBasis,
    rng: &mut CounterRng,
) -> Result<ShotOutcome> {
    let z = exact_chain_expectation(chain, rho0, hamiltonian, basis)?;
    draw_outcome(z, rng)
}

fn draw_outcome(z: Complex64, rng: &mut CounterRng) -> Result<ShotOutcome> {
    let sample_index = rng.counter();
    let p_re = ((1.0 + z.re) / 2.0).clamp(0.0, 1.0);
    let p_im = ((1.0 + z.im) / 2.0).clamp(0.0, 1.0);
    let real_part = if rng.bernoulli(p_re)? { 1 } else { -1 };
    let imag_part = if rng.bernoulli(p_im)? { 1 } else { -1 };
    Ok(ShotOutcome {
        real_part,
        imag_part,
        sample_index,
        stream: rng.stream(),
    })
}

/// Precomputed Pauli data for one (model, observable) pair: everything the
/// shot sampler needs besides the chain coordinates.
#[derive(Debug, Clone)]
pub struct ShotContext {
    pub basis: PauliBasis,
    pub lindblads: Vec<PauliDecomposition>,
    pub observable: PauliDecomposition,
    /// max over channels of the support Mᵢ
    pub support_max: usize,
    /// observable support M_O
    pub support_obs: usize,
    /// γ̄ over the horizon the context was built for
    pub gamma_bar: f64,
    pub horizon: f64,
}

impl ShotContext {
    /// Decompose the (normalized) model operators and the observable over
    /// the Pauli basis for the given horizon.
    pub fn new(model: &LindbladModel, observable: &CMat, horizon: f64) -> Result<Self> {
        if !model.is_normalized()? {
            return Err(SimError::Validation(
                "shot sampling requires a normalized model (‖Lᵢ‖∞ = 1)".into(),
            ));
        }
        let basis = PauliBasis::for_dimension(model.dim())?;
        let mut lindblads = Vec::with_capacity(model.channel_count());
        for ch in model.channels() {
            lindblads.push(decompose(&ch.operator, &basis)?);
        }
        let observable_dec = decompose(observable, &basis)?;
        if observable_dec.terms.is_empty() {
            return Err(SimError::Validation("observable decomposes to zero".into()));
        }
        let support_max = lindblads.iter().map(|d| d.support()).max().unwrap_or(0);
        Ok(ShotContext {
            basis,
            support_max,
            support_obs: observable_dec.support(),
            lindblads,
            observable: observable_dec,
            gamma_bar: model.gamma_bar(horizon),
            horizon,
        })
    }

    /// |Ã| ≤ 2√M_O (2γ̄M)ⁿ, the hard ceiling on any aggregated shot value.
    pub fn magnitude_bound(&self, order: usize) -> f64 {
        2.0 * (self.support_obs as f64).sqrt()
            * (2.0 * self.gamma_bar * self.support_max as f64).powi(order as i32)
    }
}

/// Enumerate every correlator chain in the expansion of A_{[i⃗]}(s⃗): the 3ⁿ
/// dissipator variants times all Pauli index combinations, with the complex
/// prefactor each chain carries.
pub fn enumerate_chains(
    spec: &AdjointChainSpec,
    ctx: &ShotContext,
    model: &LindbladModel,
) -> Result<Vec<CorrelatorChain>> {
    spec.validate(model)?;
    let n = spec.order();
    let mut chains = Vec::new();
    let mut variants = vec![DissipatorVariant::Sandwich; n];
    let branch_count = 3usize.pow(n as u32);
    for branch in 0..branch_count {
        let mut code = branch;
        for v in variants.iter_mut() {
            *v = DissipatorVariant::ALL[code % 3];
            code /= 3;
        }
        // rates and variant weights are common to every Pauli combination
        let mut weight = 1.0;
        for (j, v) in variants.iter().enumerate() {
            let gamma = model.channels()[spec.channels[j]].rate.eval(spec.times[j]);
            weight *= v.weight() * gamma;
        }
        if weight == 0.0 {
            continue;
        }
        expand_pauli_combinations(spec, ctx, &variants, weight, &mut chains);
    }
    Ok(chains)
}

fn expand_pauli_combinations(
    spec: &AdjointChainSpec,
    ctx: &ShotContext,
    variants: &[DissipatorVariant],
    weight: f64,
    out: &mut Vec<CorrelatorChain>,
) {
    let n = spec.order();
    // choice[j] = (k, k') indices into the channel-j decomposition
    let mut choice = vec![(0usize, 0usize); n];
    loop {
        for (l_idx, l_coeff) in ctx.observable.terms.iter() {
            let mut left: Vec<(usize, f64)> = Vec::with_capacity(2 * n + 1);
            let mut right: Vec<(usize, f64)> = Vec::with_capacity(2 * n);
            let mut coeff = *l_coeff * c64(weight, 0.0);
            // level 1 is innermost; build outward
            for j in 0..n {
                let dec = &ctx.lindblads[spec.channels[j]];
                let (k, kp) = choice[j];
                let (qk_idx, qk) = dec.terms[k];
                let (qkp_idx, qkp) = dec.terms[kp];
                coeff *= qk.conj() * qkp;
                let s = spec.times[j];
                match variants[j] {
                    DissipatorVariant::Sandwich => {
                        left.push((qk_idx, s));
                        right.push((qkp_idx, s));
                    }
                    DissipatorVariant::Left => {
                        // (L†L)(s)·ξ → Q_k(s) Q_{k'}(s) prepended
                        left.push((qkp_idx, s));
                        left.push((qk_idx, s));
                    }
                    DissipatorVariant::Right => {
                        // ξ·(L†L)(s) → Q_k(s) Q_{k'}(s) appended
                        right.push((qk_idx, s));
                        right.push((qkp_idx, s));
                    }
                }
            }
            let mut factors = Vec::with_capacity(left.len() + right.len() + 1);
            factors.extend(left.into_iter().rev());
            factors.push((*l_idx, spec.horizon));
            factors.extend(right);
            out.push(CorrelatorChain {
                factors,
                prefactor: coeff,
            });
        }
        // advance the mixed-radix (k, k') counter
        let mut j = 0;
        loop {
            if j == n {
                return;
            }
            let m = ctx.lindblads[spec.channels[j]].support();
            choice[j].1 += 1;
            if choice[j].1 == m {
                choice[j].1 = 0;
                choice[j].0 += 1;
                if choice[j].0 == m {
                    choice[j].0 = 0;
                    j += 1;
                    continue;
                }
            }
            break;
        }
    }
}

/// The chain expansion of one A_{[i⃗]}(s⃗) with every exact expectation
/// already evaluated. Sampling repeatedly at fixed coordinates (chains and
/// ⟨B⟩ values never change, only the shot outcomes do) costs two Bernoulli
/// draws per chain instead of re-exponentiating the propagators.
#[derive(Debug, Clone)]
pub struct PreparedChains {
    order: usize,
    bound: f64,
    /// (prefactor, exact ⟨B⟩) per chain, in enumeration order.
    chains: Vec<(Complex64, Complex64)>,
}

impl PreparedChains {
    pub fn new(
        spec: &AdjointChainSpec,
        ctx: &ShotContext,
        model: &LindbladModel,
        rho0: &CMat,
    ) -> Result<Self> {
        let enumerated = enumerate_chains(spec, ctx, model)?;
        let mut memo = HeisenbergMemo::new(model.hamiltonian(), &ctx.basis);
        let mut chains = Vec::with_capacity(enumerated.len());
        for chain in &enumerated {
            let z = chain_expectation_memo(chain, rho0, &mut memo)?;
            chains.push((chain.prefactor, z));
        }
        Ok(PreparedChains {
            order: spec.order(),
            bound: ctx.magnitude_bound(spec.order()),
            chains,
        })
    }

    /// One Ã draw: an independent (real, imag) shot per chain combined with
    /// the prefactors; only the real part is returned.
    pub fn sample(&self, rng: &mut CounterRng) -> Result<f64> {
        let mut total = Complex64::new(0.0, 0.0);
        for &(prefactor, z) in &self.chains {
            let shot = draw_outcome(z, rng)?;
            total += prefactor * shot.value();
        }
        if total.re.abs() > self.bound + 1e-9 {
            return Err(SimError::Internal(format!(
                "shot aggregate {} exceeds magnitude bound {} at order {}",
                total.re, self.bound, self.order
            )));
        }
        Ok(total.re)
    }

    /// The exact mean Σ prefactor·⟨B⟩ (real part); a second route to ⟨A⟩
    /// used to validate the expansion against
    /// [`crate::dyson::build_adjoint_chain`].
    pub fn mean(&self) -> f64 {
        self.chains
            .iter()
            .map(|(p, z)| (p * z).re)
            .sum()
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }
}

/// One single-shot estimate Ã of ⟨A_{[i⃗]}(s⃗)⟩. Unbiased, and bounded by
/// [`ShotContext::magnitude_bound`]. Equivalent to
/// `PreparedChains::new(..)?.sample(rng)`.
pub fn single_shot_a(
    spec: &AdjointChainSpec,
    ctx: &ShotContext,
    model: &LindbladModel,
    rho0: &CMat,
    rng: &mut CounterRng,
) -> Result<f64> {
    PreparedChains::new(spec, ctx, model, rho0)?.sample(rng)
}

/// The exact mean of [`single_shot_a`].
pub fn shot_mean(
    spec: &AdjointChainSpec,
    ctx: &ShotContext,
    model: &LindbladModel,
    rho0: &CMat,
) -> Result<f64> {
    Ok(PreparedChains::new(spec, ctx, model, rho0)?.mean())
}

/// Number of chains the expansion of `spec` produces: M_O·3ⁿ·Π M_{i_j}²
/// branches, i.e. the per-sample measurement multiplicity (each chain costs
/// one real and one imaginary shot).
pub fn chain_multiplicity(spec: &AdjointChainSpec, ctx: &ShotContext) -> u64 {
    let mut mult = ctx.support_obs as u64 * 3u64.pow(spec.order() as u32);
    for &ch in &spec.channels {
        let m = ctx.lindblads[ch].support() as u64;
        mult *= m * m;
    }
    mult
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyson::build_adjoint_chain;
    use crate::model::RateFunction;
    use crate::pauli::{sigma_minus, sigma_x, sigma_z};
    use crate::testutil::{damping_model, excited_state, plus_state, random_density};

    fn identity_chain() -> CorrelatorChain {
        CorrelatorChain {
            factors: vec![(0, 0.7)],
            prefactor: c64(1.0, 0.0),
        }
    }

    #[test]
    fn identity_chain_always_plus_one() {
        let model = damping_model(0.5, 1.0);
        let ctx = ShotContext::new(&model, &sigma_z(), 1.0).unwrap();
        let rho0 = excited_state();
        let mut rng = CounterRng::new(71, 0);
        for _ in 0..200 {
            let s = single_shot(
                &identity_chain(),
                rho0.matrix(),
                model.hamiltonian(),
                &ctx.basis,
                &mut rng,
            )
            .unwrap();
            assert_eq!(s.real_part, 1);
        }
    }

    #[test]
    fn plain_observable_chain_reduces_to_expectation() {
        let model = damping_model(0.0, 1.0);
        let ctx = ShotContext::new(&model, &sigma_z(), 1.0).unwrap();
        let rho0 = plus_state();
        let t = 0.8;
        let chain = CorrelatorChain {
            factors: vec![(3, t)], // σz(t)
            prefactor: c64(1.0, 0.0),
        };
        let z = exact_chain_expectation(&chain, rho0.matrix(), model.hamiltonian(), &ctx.basis)
            .unwrap();
        let evolved = crate::oracle::heisenberg(model.hamiltonian(), &sigma_z(), t).unwrap();
        let want = trace(&rho0.matrix().dot(&evolved));
        assert!((z - want).norm() < 1e-12);
    }

    #[test]
    fn shot_means_track_exact_values() {
        // binomial check: mean of 10^5 shots within 4σ of the exact value
        let model = damping_model(0.3, 1.2);
        let ctx = ShotContext::new(&model, &sigma_x(), 1.0).unwrap();
        let mut rng = CounterRng::new(72, 0);
        let rho0 = random_density(2, &mut rng);
        let chain = CorrelatorChain {
            factors: vec![(1, 0.4), (3, 0.9), (2, 0.4)],
            prefactor: c64(1.0, 0.0),
        };
        let z =
            exact_chain_expectation(&chain, rho0.matrix(), model.hamiltonian(), &ctx.basis)
                .unwrap();
        let n = 100_000;
        let mut acc_re = 0.0;
        let mut acc_im = 0.0;
        for _ in 0..n {
            let s = single_shot(&chain, rho0.matrix(), model.hamiltonian(), &ctx.basis, &mut rng)
                .unwrap();
            acc_re += s.real_part as f64;
            acc_im += s.imag_part as f64;
        }
        let mean_re = acc_re / n as f64;
        let mean_im = acc_im / n as f64;
        let sigma = 1.0 / (n as f64).sqrt(); // ±1 outcomes: std ≤ 1
        assert!((mean_re - z.re).abs() < 4.0 * sigma, "re {mean_re} vs {}", z.re);
        assert!((mean_im - z.im).abs() < 4.0 * sigma, "im {mean_im} vs {}", z.im);
    }

    #[test]
    fn zero_mean_chain_has_zero_empirical_mean() {
        // B = XY = iZ at the excited state: ⟨B⟩ = i, so the real shots are
        // a fair coin and their mean must sit within the binomial error
        let model = damping_model(0.2, 0.0);
        let ctx = ShotContext::new(&model, &sigma_z(), 1.0).unwrap();
        let rho0 = excited_state();
        let chain = CorrelatorChain {
            factors: vec![(1, 0.0), (2, 0.0)],
            prefactor: c64(1.0, 0.0),
        };
        let z = exact_chain_expectation(&chain, rho0.matrix(), model.hamiltonian(), &ctx.basis)
            .unwrap();
        assert!(z.re.abs() < 1e-14 && (z.im - 1.0).abs() < 1e-14);
        let n = 100_000;
        let mut acc = 0.0;
        let mut rng = CounterRng::new(74, 0);
        for _ in 0..n {
            let s = single_shot(&chain, rho0.matrix(), model.hamiltonian(), &ctx.basis, &mut rng)
                .unwrap();
            acc += s.real_part as f64;
            assert_eq!(s.imag_part, 1);
        }
        assert!((acc / n as f64).abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn order_two_magnitude_bound_on_two_channel_model() {
        // |Ã| ≤ 2√M_O (2γ̄M)² over 10⁴ draws on the two-channel model
        let eye = crate::linalg::identity(2);
        let model = crate::model::LindbladModel::new(
            &(crate::linalg::kron(&sigma_z(), &eye) + crate::linalg::kron(&eye, &sigma_z()))
                .mapv(|z| z * c64(0.5, 0.0)),
            vec![
                (crate::linalg::kron(&sigma_minus(), &eye), RateFunction::Constant(0.4)),
                (crate::linalg::kron(&eye, &sigma_minus()), RateFunction::Constant(0.3)),
            ],
        )
        .unwrap()
        .normalized()
        .unwrap();
        let obs = crate::linalg::kron(&sigma_z(), &eye);
        let t = 1.0;
        let ctx = ShotContext::new(&model, &obs, t).unwrap();
        let mut amps = vec![c64(0.0, 0.0); 4];
        amps[0] = c64(1.0, 0.0);
        let rho0 = crate::model::DensityMatrix::pure(&amps).unwrap();
        let spec = AdjointChainSpec {
            channels: vec![0, 1],
            times: vec![0.8, 0.3],
            horizon: t,
            observable: obs,
        };
        let prepared = PreparedChains::new(&spec, &ctx, &model, rho0.matrix()).unwrap();
        // M = 2, M_O = 1, γ̄ = 0.4: bound = 2·(2·0.4·2)² = 5.12
        let bound = ctx.magnitude_bound(2);
        assert!((bound - 5.12).abs() < 1e-12);
        let mut rng = CounterRng::new(75, 0);
        for _ in 0..10_000 {
            let v = prepared.sample(&mut rng).unwrap();
            assert!(v.abs() <= bound + 1e-9);
        }
    }

    #[test]
    fn chain_enumeration_counts() {
        // σ⁻ has support 2, σz support 1: n=1 sandwich+left+right over 4
        // pauli pairs gives 3·4 = 12 chains for observable support 1
        let model = damping_model(0.4, 0.7);
        let ctx = ShotContext::new(&model, &sigma_z(), 1.0).unwrap();
        let spec = AdjointChainSpec {
            channels: vec![0],
            times: vec![0.5],
            horizon: 1.0,
            observable: sigma_z(),
        };
        let chains = enumerate_chains(&spec, &ctx, &model).unwrap();
        assert_eq!(chains.len(), 12);
        assert_eq!(chain_multiplicity(&spec, &ctx), 12);
    }

    #[test]
    fn chain_expansion_matches_direct_adjoint_chain() {
        // Σ prefactor·⟨B⟩ must reproduce ⟨A⟩ computed with dense matrices
        let mut rng = CounterRng::new(73, 0);
        for (drive, order) in [(0.0, 1usize), (1.3, 1), (1.3, 2)] {
            let model = damping_model(0.37, drive);
            let obs = crate::testutil::random_hermitian(2, &mut rng);
            let ctx = ShotContext::new(&model, &obs, 1.0).unwrap();
            let rho0 = random_density(2, &mut rng);
            let t = 1.0;
            let s1 = 0.8;
            let times = if order == 1 { vec![s1] } else { vec![s1, 0.3] };
            let spec = AdjointChainSpec {
                channels: vec![0; order],
                times,
                horizon: t,
                observable: obs.clone(),
            };
            let via_chains = shot_mean(&spec, &ctx, &model, rho0.matrix()).unwrap();
            let a = build_adjoint_chain(&spec, &model).unwrap();
            let direct = trace(&a.dot(rho0.matrix())).re;
            assert!(
                (via_chains - direct).abs() < 1e-10,
                "order {order}: {via_chains} vs {direct}"
            );
        }
    }

    #[test]
    fn single_shot_a_unbiased_and_bounded() {
        let model = damping_model(0.5, 1.1);
        let ctx = ShotContext::new(&model, &sigma_z(), 1.0).unwrap();
        let rho0 = excited_state();
        let spec = AdjointChainSpec {
            channels: vec![0],
            times: vec![0.6],
            horizon: 1.0,
            observable: sigma_z(),
        };
        let exact = shot_mean(&spec, &ctx, &model, rho0.matrix()).unwrap();
        let bound = ctx.magnitude_bound(1);
        let n = 40_000;
        let mut acc = 0.0;
        let mut acc_sq = 0.0;
        for k in 0..n {
            let mut rng = CounterRng::new(500, k);
            let v = single_shot_a(&spec, &ctx, &model, rho0.matrix(), &mut rng).unwrap();
            assert!(v.abs() <= bound + 1e-9);
            acc += v;
            acc_sq += v * v;
        }
        let mean = acc / n as f64;
        let std = ((acc_sq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!(
            (mean - exact).abs() < 4.0 * std,
            "mean {mean} vs exact {exact} (4σ = {})",
            4.0 * std
        );
    }

    #[test]
    fn shot_values_live_on_finite_support() {
        // with a single-Pauli Lindblad the aggregate can only take the
        // values reachable from ±1 combinations of the three branch weights
        let model = crate::model::LindbladModel::new(
            &sigma_x().mapv(|z| z * c64(0.5, 0.0)),
            vec![(sigma_z(), RateFunction::Constant(0.8))],
        )
        .unwrap()
        .normalized()
        .unwrap();
        let ctx = ShotContext::new(&model, &sigma_x(), 1.0).unwrap();
        let rho0 = plus_state();
        let spec = AdjointChainSpec {
            channels: vec![0],
            times: vec![0.4],
            horizon: 1.0,
            observable: sigma_x(),
        };
        let mut support = std::collections::BTreeSet::new();
        for k in 0..2000u64 {
            let mut rng = CounterRng::new(901, k);
            let v = single_shot_a(&spec, &ctx, &model, rho0.matrix(), &mut rng).unwrap();
            support.insert((v * 1e9).round() as i64);
        }
        // weights γ(1, −½, −½) on three ±1 shots: |support| ≤ 2³ values
        assert!(support.len() <= 8, "support {support:?}");
    }

    #[test]
    fn prepared_sampling_matches_single_shot_path() {
        let model = damping_model(0.35, 1.0);
        let ctx = ShotContext::new(&model, &sigma_z(), 1.0).unwrap();
        let rho0 = excited_state();
        let spec = AdjointChainSpec {
            channels: vec![0],
            times: vec![0.45],
            horizon: 1.0,
            observable: sigma_z(),
        };
        let prepared = PreparedChains::new(&spec, &ctx, &model, rho0.matrix()).unwrap();
        for k in 0..50u64 {
            let mut rng_a = CounterRng::new(77, k);
            let mut rng_b = CounterRng::new(77, k);
            let a = single_shot_a(&spec, &ctx, &model, rho0.matrix(), &mut rng_a).unwrap();
            let b = prepared.sample(&mut rng_b).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(prepared.len(), 12);
    }

    #[test]
    fn fixed_stream_reproduces_bit_exactly() {
        let model = damping_model(0.3, 0.9);
        let ctx = ShotContext::new(&model, &sigma_z(), 1.0).unwrap();
        let rho0 = excited_state();
        let spec = AdjointChainSpec {
            channels: vec![0, 0],
            times: vec![0.7, 0.2],
            horizon: 1.0,
            observable: sigma_z(),
        };
        let run = || {
            let mut rng = CounterRng::new(42, 1234);
            single_shot_a(&spec, &ctx, &model, rho0.matrix(), &mut rng).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn context_requires_normalized_model() {
        let model = crate::model::LindbladModel::new(
            &crate::linalg::zeros(2),
            vec![(
                sigma_minus().mapv(|z| z * c64(2.0, 0.0)),
                RateFunction::Constant(1.0),
            )],
        )
        .unwrap();
        assert!(ShotContext::new(&model, &sigma_z(), 1.0).is_err());
    }
}
