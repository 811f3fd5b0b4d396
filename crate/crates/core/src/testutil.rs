//! Shared helpers for unit tests: seeded random operators, states, models.

use crate::linalg::{c64, hermitize, spectral_norm, zeros, CMat, ONE};
use crate::model::{DensityMatrix, LindbladModel, RateFunction};
use crate::rng::CounterRng;

pub fn random_matrix(dim: usize, rng: &mut CounterRng) -> CMat {
    let mut m = zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            m[[i, j]] = c64(rng.next_f64() - 0.5, rng.next_f64() - 0.5);
        }
    }
    m
}

pub fn random_hermitian(dim: usize, rng: &mut CounterRng) -> CMat {
    hermitize(&random_matrix(dim, rng))
}

/// Random full-rank density matrix via a random pure-state mixture.
pub fn random_density(dim: usize, rng: &mut CounterRng) -> DensityMatrix {
    let g = random_matrix(dim, rng);
    let gram = crate::linalg::dagger(&g).dot(&g);
    let tr = crate::linalg::trace(&gram).re;
    DensityMatrix::new(&gram.mapv(|z| z / c64(tr, 0.0))).expect("random density must validate")
}

/// Random normalized model with `channels` dissipation channels, spectral
/// norm of H about `h_scale` and rates bounded by `gamma_scale`.
pub fn random_model(
    dim: usize,
    channels: usize,
    h_scale: f64,
    gamma_scale: f64,
    rng: &mut CounterRng,
) -> LindbladModel {
    let h_raw = random_hermitian(dim, rng);
    let hn = spectral_norm(&h_raw).unwrap();
    let h = h_raw.mapv(|z| z * c64(h_scale / hn, 0.0));
    let mut lindblads = Vec::new();
    for k in 0..channels {
        let l = random_matrix(dim, rng);
        let rate = if k % 2 == 0 {
            RateFunction::Constant(gamma_scale * (0.25 + 0.75 * rng.next_f64()))
        } else {
            RateFunction::Sinusoid {
                amplitude: gamma_scale * (0.25 + 0.75 * rng.next_f64()),
                angular_frequency: 0.5 + 2.0 * rng.next_f64(),
                phase: rng.next_f64(),
            }
        };
        lindblads.push((l, rate));
    }
    LindbladModel::new(&h, lindblads)
        .unwrap()
        .normalized()
        .unwrap()
}

/// A plain σ⁻ amplitude-damping model, optionally driven by (ω/2)·σx.
pub fn damping_model(gamma: f64, drive: f64) -> LindbladModel {
    let h = crate::pauli::sigma_x().mapv(|z| z * c64(drive / 2.0, 0.0));
    LindbladModel::new(
        &h,
        vec![(crate::pauli::sigma_minus(), RateFunction::Constant(gamma))],
    )
    .unwrap()
    .normalized()
    .unwrap()
}

pub fn excited_state() -> DensityMatrix {
    DensityMatrix::new(&crate::pauli::excited_projector()).unwrap()
}

pub fn plus_state() -> DensityMatrix {
    let half = c64(0.5, 0.0);
    let m = crate::linalg::from_rows(&[&[ONE, ONE], &[ONE, ONE]]).mapv(|z| z * half);
    DensityMatrix::new(&m).unwrap()
}
