//! A non-power-of-two system embedded into the next power of two must keep
//! its padded block identically zero through the full dynamics: with
//! zero-padded operators and initial state, no amplitude can leak into the
//! fictitious level.

use lindsim::linalg::{c64, hermitize, zeros, CMat};
use lindsim::model::{DensityMatrix, LindbladModel, RateFunction};
use lindsim::oracle::integrate_master;
use lindsim::pauli::{decompose, embed_dimension, PauliBasis};
use lindsim::rng::CounterRng;

fn random_matrix(dim: usize, rng: &mut CounterRng) -> CMat {
    let mut m = zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            m[[i, j]] = c64(rng.next_f64() - 0.5, rng.next_f64() - 0.5);
        }
    }
    m
}

#[test]
fn embedded_qutrit_keeps_its_padding_dark() {
    let mut rng = CounterRng::new(3001, 0);
    let h3 = hermitize(&random_matrix(3, &mut rng));
    let l3 = random_matrix(3, &mut rng);
    let h = embed_dimension(&h3);
    let l = embed_dimension(&l3);
    assert_eq!(h.nrows(), 4);

    // qutrit state embedded with a zero fourth row/column
    let mut rho3 = zeros(3);
    rho3[[0, 0]] = c64(0.4, 0.0);
    rho3[[1, 1]] = c64(0.35, 0.0);
    rho3[[2, 2]] = c64(0.25, 0.0);
    rho3[[0, 1]] = c64(0.1, 0.05);
    rho3[[1, 0]] = c64(0.1, -0.05);
    let rho0 = DensityMatrix::new(&embed_dimension(&rho3)).unwrap();

    let model = LindbladModel::new(&h, vec![(l.clone(), RateFunction::Constant(0.3))])
        .unwrap()
        .normalized()
        .unwrap();
    let out = integrate_master(&model, &rho0, 1.3, 2600).unwrap();
    for k in 0..4 {
        assert!(out.matrix()[[3, k]].norm() < 1e-12, "row leak at {k}");
        assert!(out.matrix()[[k, 3]].norm() < 1e-12, "column leak at {k}");
    }
    // trace stays on the physical block
    let tr: f64 = (0..3).map(|i| out.matrix()[[i, i]].re).sum();
    assert!((tr - 1.0).abs() < 1e-8);

    // the embedded operators decompose and reconstruct over the 2-qubit basis
    let basis = PauliBasis::new(2).unwrap();
    let dec = decompose(&l, &basis).unwrap();
    let rec = dec.reconstruct(&basis);
    for i in 0..4 {
        for j in 0..4 {
            assert!((rec[[i, j]] - l[[i, j]]).norm() < 1e-12);
        }
    }
}
