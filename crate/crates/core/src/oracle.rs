//! Ground-truth propagation and figures of merit.
//!
//! The master equation is integrated directly on the d×d state with a
//! fixed-step classical RK4 scheme (no superoperator assembly, no adaptive
//! controller) so that step counts, and therefore error budgets, are
//! reproducible. Everything the perturbative machinery produces is checked
//! against these routines.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Result, SimError};
use crate::linalg::{
    self, c64, dagger, eigvalsh, hermitize, matexp, spectral_norm, trace, trace_norm, CMat,
};
use crate::model::{lindblad_rhs, non_hermitian_rhs, DensityMatrix, LindbladModel, NonHermitianModel};
use crate::tol;

/// U(t) = e^{−iHt}.
pub fn propagator(hamiltonian: &CMat, t: f64) -> Result<CMat> {
    matexp(hamiltonian, c64(0.0, -t))
}

/// e^{−iHt} ρ e^{iHt}.
pub fn evolve_unitary(hamiltonian: &CMat, rho0: &CMat, t: f64) -> Result<CMat> {
    linalg::ensure_same_dim(hamiltonian, rho0, "evolve_unitary")?;
    let u = propagator(hamiltonian, t)?;
    Ok(u.dot(rho0).dot(&dagger(&u)))
}

/// Heisenberg-picture operator ξ(s) = e^{iHs} ξ e^{−iHs}.
pub fn heisenberg(hamiltonian: &CMat, xi: &CMat, s: f64) -> Result<CMat> {
    linalg::ensure_same_dim(hamiltonian, xi, "heisenberg")?;
    let u = propagator(hamiltonian, s)?;
    Ok(dagger(&u).dot(xi).dot(&u))
}

/// Memoized propagators for one Hamiltonian, keyed by the exact time bits.
/// Useful on fixed grids where the same times recur; arbitrary (random)
/// times should use [`propagator`] directly rather than grow the map.
pub struct PropagatorCache {
    hamiltonian: CMat,
    map: Mutex<HashMap<u64, Arc<CMat>>>,
}

impl PropagatorCache {
    pub fn new(hamiltonian: &CMat) -> Self {
        PropagatorCache {
            hamiltonian: hamiltonian.clone(),
            map: Mutex::new(HashMap::new()),
        }
    }

    pub fn propagator(&self, t: f64) -> Result<Arc<CMat>> {
        let key = if t == 0.0 { 0.0f64 } else { t }.to_bits();
        if let Some(u) = self.map.lock().unwrap().get(&key) {
            return Ok(u.clone());
        }
        let u = Arc::new(propagator(&self.hamiltonian, t)?);
        self.map
            .lock()
            .unwrap()
            .entry(key)
            .or_insert_with(|| u.clone());
        Ok(u)
    }

    /// U(t) ξ U(t)†.
    pub fn conjugate(&self, xi: &CMat, t: f64) -> Result<CMat> {
        let u = self.propagator(t)?;
        Ok(u.dot(xi).dot(&dagger(&u)))
    }

    /// ξ(s) = e^{iHs} ξ e^{−iHs}.
    pub fn heisenberg(&self, xi: &CMat, s: f64) -> Result<CMat> {
        self.conjugate(xi, -s)
    }
}

/// Tr(Oρ); the real part is the physical expectation for Hermitian O.
pub fn expectation(observable: &CMat, rho: &CMat) -> num_complex::Complex64 {
    trace(&observable.dot(rho))
}

fn rk4<F>(state: &CMat, t0: f64, h: f64, f: &F) -> Result<CMat>
where
    F: Fn(f64, &CMat) -> Result<CMat>,
{
    let half = c64(h / 2.0, 0.0);
    let k1 = f(t0, state)?;
    let k2 = f(t0 + h / 2.0, &(state + &k1.mapv(|z| z * half)))?;
    let k3 = f(t0 + h / 2.0, &(state + &k2.mapv(|z| z * half)))?;
    let k4 = f(t0 + h, &(state + &k3.mapv(|z| z * c64(h, 0.0))))?;
    let sixth = c64(h / 6.0, 0.0);
    let two = c64(2.0, 0.0);
    Ok(state + &((k1 + k2.mapv(|z| z * two) + k3.mapv(|z| z * two) + k4).mapv(|z| z * sixth)))
}

fn integrate_hermitian<F>(rho0: &CMat, t: f64, steps: usize, f: F) -> Result<CMat>
where
    F: Fn(f64, &CMat) -> Result<CMat>,
{
    if steps == 0 {
        return Err(SimError::Validation("integrator needs steps >= 1".into()));
    }
    let h = t / steps as f64;
    let mut rho = rho0.clone();
    for k in 0..steps {
        rho = rk4(&rho, k as f64 * h, h, &f)?;
        // re-Hermitize to suppress drift; this slightly alters raw RK4 output
        rho = hermitize(&rho);
        let min_eig = eigvalsh(&rho)?.first().copied().unwrap_or(0.0);
        if min_eig < -tol::PSD_INTEGRATOR {
            return Err(SimError::Integrator(format!(
                "state eigenvalue {min_eig:.2e} below -{:.0e} at step {k}; \
                 reduce the step size (increase steps)",
                tol::PSD_INTEGRATOR
            )));
        }
    }
    Ok(rho)
}

/// Reference solution of the master equation on a uniform grid.
pub fn integrate_master(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    t: f64,
    steps: usize,
) -> Result<DensityMatrix> {
    linalg::ensure_same_dim(model.hamiltonian(), rho0.matrix(), "integrate_master")?;
    let rho = integrate_hermitian(rho0.matrix(), t, steps, |s, r| lindblad_rhs(model, r, s))?;
    let tr = trace(&rho);
    if (tr.re - 1.0).abs() > tol::INTEGRATOR || tr.im.abs() > tol::INTEGRATOR {
        return Err(SimError::Integrator(format!(
            "trace drifted to {} after integration",
            tr.re
        )));
    }
    DensityMatrix::with_tolerances(&rho, tol::INTEGRATOR, tol::PSD_INTEGRATOR)
}

/// Reference solution of dρ/dt = −i[H,ρ] − {Γ,ρ}. The trace is not
/// preserved; for positive semidefinite Γ the trace norm can only decrease.
pub fn integrate_non_hermitian(
    model: &NonHermitianModel,
    rho0: &DensityMatrix,
    t: f64,
    steps: usize,
) -> Result<CMat> {
    linalg::ensure_same_dim(model.hamiltonian(), rho0.matrix(), "integrate_non_hermitian")?;
    integrate_hermitian(rho0.matrix(), t, steps, |_, r| non_hermitian_rhs(model, r))
}

/// D₁(ρ₁, ρ₂) = ‖ρ₁ − ρ₂‖₁ / 2.
pub fn trace_distance(rho1: &CMat, rho2: &CMat) -> Result<f64> {
    linalg::ensure_same_dim(rho1, rho2, "trace_distance")?;
    Ok(trace_norm(&(rho1 - rho2))? / 2.0)
}

/// D_O(ρ₁, ρ₂) = |Tr(O(ρ₁−ρ₂))| / (2‖O‖∞); always below the trace distance.
pub fn observable_distance(observable: &CMat, rho1: &CMat, rho2: &CMat) -> Result<f64> {
    linalg::ensure_same_dim(rho1, rho2, "observable_distance")?;
    linalg::ensure_same_dim(observable, rho1, "observable_distance")?;
    let norm = spectral_norm(observable)?;
    if norm < 1e-14 {
        return Err(SimError::Validation(
            "observable_distance: zero observable".into(),
        ));
    }
    Ok(trace(&observable.dot(&(rho1 - rho2))).norm() / (2.0 * norm))
}
