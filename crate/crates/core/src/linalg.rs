//! Dense complex matrix arithmetic: exponentials, singular values,
//! Hermitian eigenvalues, and the small algebra helpers everything else
//! is built from.
//!
//! Matrices are square `ndarray::Array2<Complex64>` throughout; dimensions
//! stay at or below 16 (system) / 256 (superoperator), so the kernels favor
//! robustness over asymptotic speed: Padé scaling-and-squaring for the
//! exponential and cyclic Jacobi sweeps for spectra.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Result, SimError};

pub type CMat = Array2<Complex64>;

pub const IM: Complex64 = Complex64::new(0.0, 1.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zeros(dim: usize) -> CMat {
    Array2::zeros((dim, dim))
}

pub fn identity(dim: usize) -> CMat {
    Array2::eye(dim)
}

pub fn from_rows(rows: &[&[Complex64]]) -> CMat {
    let n = rows.len();
    let mut m = zeros(n);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), n, "from_rows: ragged input");
        for (j, z) in row.iter().enumerate() {
            m[[i, j]] = *z;
        }
    }
    m
}

pub fn ensure_square(a: &CMat, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(SimError::Dimension(format!(
            "{what}: expected a nonempty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

pub fn ensure_same_dim(a: &CMat, b: &CMat, what: &str) -> Result<()> {
    ensure_square(a, what)?;
    ensure_square(b, what)?;
    if a.nrows() != b.nrows() {
        return Err(SimError::Dimension(format!(
            "{what}: operand dimensions differ ({} vs {})",
            a.nrows(),
            b.nrows()
        )));
    }
    Ok(())
}

pub fn all_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Conjugate transpose A†.
pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

/// AB − BA.
pub fn commutator(a: &CMat, b: &CMat) -> Result<CMat> {
    ensure_same_dim(a, b, "commutator")?;
    Ok(a.dot(b) - b.dot(a))
}

/// AB + BA.
pub fn anticommutator(a: &CMat, b: &CMat) -> Result<CMat> {
    ensure_same_dim(a, b, "anticommutator")?;
    Ok(a.dot(b) + b.dot(a))
}

pub fn trace(a: &CMat) -> Complex64 {
    a.diag().sum()
}

/// Largest entry magnitude; cheap scale estimate.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.dim(), b.dim(), "max_abs_diff: shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Induced 1-norm (max absolute column sum), used to pick the exponential
/// scaling factor.
pub fn one_norm(a: &CMat) -> f64 {
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = (0..a.nrows()).map(|i| a[[i, j]].norm()).sum();
        best = best.max(s);
    }
    best
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Deviation from Hermiticity, max |A − A†| entrywise.
pub fn hermiticity_error(a: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

/// (A + A†)/2.
pub fn hermitize(a: &CMat) -> CMat {
    let half = c64(0.5, 0.0);
    (a + &dagger(a)).mapv(|z| z * half)
}

/// Kronecker product; the left factor is the most significant block.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Matrix exponential
// ---------------------------------------------------------------------------

// Diagonal Padé(13,13) coefficients.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371_920_351_148_152;

/// Maximum 1-norm of `scale·A` that `matexp` accepts. Larger arguments need
/// so many squarings that the result is either astronomically large or no
/// longer trustworthy at the advertised accuracy.
const MATEXP_NORM_LIMIT: f64 = 1e6;

/// e^{scale·A} by Padé(13,13) with scaling and squaring.
pub fn matexp(a: &CMat, scale: Complex64) -> Result<CMat> {
    ensure_square(a, "matexp")?;
    let m = a.mapv(|z| z * scale);
    if !all_finite(&m) {
        return Err(SimError::Range("matexp: non-finite input".into()));
    }
    let norm = one_norm(&m);
    if norm > MATEXP_NORM_LIMIT {
        return Err(SimError::Range(format!(
            "matexp: argument norm {norm:.3e} exceeds supported range {MATEXP_NORM_LIMIT:.0e}"
        )));
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scaled = m.mapv(|z| z / c64(2f64.powi(squarings as i32), 0.0));
    let mut result = pade13(&scaled)?;
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    if !all_finite(&result) {
        return Err(SimError::Range(
            "matexp: overflow while squaring the Padé core".into(),
        ));
    }
    Ok(result)
}

fn pade13(m: &CMat) -> Result<CMat> {
    let d = m.nrows();
    let eye = identity(d);
    let m2 = m.dot(m);
    let m4 = m2.dot(&m2);
    let m6 = m2.dot(&m4);
    let b = &PADE13;

    let lc = |c6: f64, c4: f64, c2: f64| -> CMat {
        m6.mapv(|z| z * c64(c6, 0.0))
            + m4.mapv(|z| z * c64(c4, 0.0))
            + m2.mapv(|z| z * c64(c2, 0.0))
    };

    let u_inner = lc(b[13], b[11], b[9]);
    let u = m.dot(&(m6.dot(&u_inner) + lc(b[7], b[5], b[3]) + eye.mapv(|z| z * c64(b[1], 0.0))));
    let v_inner = lc(b[12], b[10], b[8]);
    let v = m6.dot(&v_inner) + lc(b[6], b[4], b[2]) + eye.mapv(|z| z * c64(b[0], 0.0));

    solve_multi(&(&v - &u), &(&v + &u))
}

/// Solve AX = B by Gaussian elimination with partial pivoting.
fn solve_multi(a: &CMat, b: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let mut lu = a.clone();
    let mut x = b.clone();
    let cols = x.ncols();
    for col in 0..n {
        let mut pivot_row = col;
        let mut best = lu[[col, col]].norm();
        for r in col + 1..n {
            let v = lu[[r, col]].norm();
            if v > best {
                best = v;
                pivot_row = r;
            }
        }
        if best == 0.0 {
            return Err(SimError::Range("solve: singular system".into()));
        }
        if pivot_row != col {
            for c in 0..n {
                lu.swap([col, c], [pivot_row, c]);
            }
            for c in 0..cols {
                x.swap([col, c], [pivot_row, c]);
            }
        }
        let piv = lu[[col, col]];
        for r in col + 1..n {
            let f = lu[[r, col]] / piv;
            if f == ZERO {
                continue;
            }
            for c in col..n {
                let v = lu[[col, c]];
                lu[[r, c]] -= f * v;
            }
            for c in 0..cols {
                let v = x[[col, c]];
                x[[r, c]] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        for c in 0..cols {
            let mut s = x[[col, c]];
            for k in col + 1..n {
                s -= lu[[col, k]] * x[[k, c]];
            }
            x[[col, c]] = s / lu[[col, col]];
        }
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Spectra
// ---------------------------------------------------------------------------

/// Singular values in descending order, via one-sided Jacobi on columns.
pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    ensure_square(a, "singular_values")?;
    if !all_finite(a) {
        return Err(SimError::Range("singular_values: non-finite input".into()));
    }
    let n = a.nrows();
    let mut w = a.clone();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut app = 0.0f64;
                let mut aqq = 0.0f64;
                let mut apq = ZERO;
                for k in 0..n {
                    app += w[[k, p]].norm_sqr();
                    aqq += w[[k, q]].norm_sqr();
                    apq += w[[k, p]].conj() * w[[k, q]];
                }
                let scale = (app * aqq).sqrt();
                if scale == 0.0 || apq.norm() <= 1e-15 * scale {
                    continue;
                }
                rotated = true;
                let abs_c = apq.norm();
                let phase = apq / abs_c;
                let theta = (aqq - app) / (2.0 * abs_c);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let (cc, sp, spc) = (c64(c, 0.0), phase * s, phase.conj() * s);
                for k in 0..n {
                    let wkp = w[[k, p]];
                    let wkq = w[[k, q]];
                    w[[k, p]] = wkp * cc - wkq * spc;
                    w[[k, q]] = wkp * sp + wkq * cc;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|k| w[[k, j]].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(sv)
}

/// Σᵢ σᵢ(A), the trace norm.
pub fn trace_norm(a: &CMat) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}

/// sup σᵢ(A), the spectral norm.
pub fn spectral_norm(a: &CMat) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Eigenvalues of a Hermitian matrix in ascending order, by cyclic complex
/// Jacobi rotations. The input is symmetrized first; callers are expected to
/// pass matrices that are Hermitian up to roundoff.
pub fn eigvalsh(a: &CMat) -> Result<Vec<f64>> {
    ensure_square(a, "eigvalsh")?;
    if !all_finite(a) {
        return Err(SimError::Range("eigvalsh: non-finite input".into()));
    }
    let n = a.nrows();
    let mut m = hermitize(a);
    let scale = frobenius(&m).max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += m[[p, q]].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = m[[p, q]];
                let abs_b = b.norm();
                if abs_b <= 1e-18 * scale {
                    continue;
                }
                let phase = b / abs_b;
                let theta = (m[[q, q]].re - m[[p, p]].re) / (2.0 * abs_b);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let (cc, sp, spc) = (c64(c, 0.0), phase * s, phase.conj() * s);
                // A <- J† A J with J the (p,q) complex rotation.
                for k in 0..n {
                    let akp = m[[k, p]];
                    let akq = m[[k, q]];
                    m[[k, p]] = akp * cc - akq * spc;
                    m[[k, q]] = akp * sp + akq * cc;
                }
                for k in 0..n {
                    let apk = m[[p, k]];
                    let aqk = m[[q, k]];
                    m[[p, k]] = apk * cc - aqk * sp;
                    m[[q, k]] = apk * spc + aqk * cc;
                }
            }
        }
    }
    let mut evs: Vec<f64> = (0..n).map(|i| m[[i, i]].re).collect();
    evs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(evs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{sigma_minus, sigma_x, sigma_y, sigma_z};
    use crate::rng::CounterRng;
    use crate::testutil::{random_hermitian, random_matrix};
    use crate::tol;

    /// Brute-force exponential by plain Taylor summation; only valid for
    /// small norms, which is exactly what makes it an independent check.
    fn taylor_exp(a: &CMat, terms: usize) -> CMat {
        let d = a.nrows();
        let mut sum = identity(d);
        let mut term = identity(d);
        for k in 1..=terms {
            term = term.dot(a).mapv(|z| z / c64(k as f64, 0.0));
            sum += &term;
        }
        sum
    }

    #[test]
    fn matexp_zero_is_identity() {
        let e = matexp(&zeros(3), ONE).unwrap();
        assert!(max_abs_diff(&e, &identity(3)) < 1e-14);
    }

    #[test]
    fn matexp_sigma_x_quarter_turn() {
        // e^{iθσx} = cosθ·I + i sinθ·σx; at θ = π/2 this is i·σx.
        let e = matexp(&sigma_x(), c64(0.0, std::f64::consts::FRAC_PI_2)).unwrap();
        let expected = sigma_x().mapv(|z| z * IM);
        assert!(max_abs_diff(&e, &expected) < 1e-12);
    }

    #[test]
    fn matexp_group_inverse() {
        let mut rng = CounterRng::new(11, 0);
        let a = random_matrix(4, &mut rng);
        let t = c64(0.7, 0.0);
        let prod = matexp(&a, t).unwrap().dot(&matexp(&a, -t).unwrap());
        assert!(max_abs_diff(&prod, &identity(4)) < tol::ALGEBRAIC);
    }

    #[test]
    fn matexp_matches_taylor_oracle() {
        let mut rng = CounterRng::new(12, 0);
        for dim in [2usize, 3, 5] {
            let a = random_matrix(dim, &mut rng).mapv(|z| z * c64(0.3, 0.0));
            let e = matexp(&a, ONE).unwrap();
            let oracle = taylor_exp(&a, 40);
            assert!(max_abs_diff(&e, &oracle) < 1e-13, "dim {dim}");
        }
    }

    #[test]
    fn matexp_handles_moderate_norms() {
        // ‖scale·A‖ up to 50 must stay accurate: compare against splitting
        // the interval in two.
        let mut rng = CounterRng::new(13, 0);
        let h = random_hermitian(4, &mut rng);
        let nrm = one_norm(&h);
        let scale = 50.0 / nrm;
        let full = matexp(&h, c64(0.0, -scale)).unwrap();
        let half = matexp(&h, c64(0.0, -scale / 2.0)).unwrap();
        let composed = half.dot(&half);
        assert!(max_abs_diff(&full, &composed) < 1e-9);
        // And stays unitary.
        let u = dagger(&full).dot(&full);
        assert!(max_abs_diff(&u, &identity(4)) < 1e-9);
    }

    #[test]
    fn matexp_rejects_bad_input() {
        let rect: CMat = Array2::zeros((2, 3));
        assert!(matches!(
            matexp(&rect, ONE),
            Err(SimError::Dimension(_))
        ));
        let huge = identity(2).mapv(|z| z * c64(1e9, 0.0));
        assert!(matches!(matexp(&huge, ONE), Err(SimError::Range(_))));
    }

    #[test]
    fn trace_norm_examples() {
        let d = from_rows(&[&[ONE, ZERO], &[ZERO, c64(-1.0, 0.0)]]);
        assert!((trace_norm(&d).unwrap() - 2.0).abs() < 1e-12);
        assert!(trace_norm(&zeros(3)).unwrap() < 1e-15);
    }

    #[test]
    fn trace_norm_orthogonal_pure_states() {
        // Any pair of orthogonal pure states is trace-distance 1 apart.
        let mut rng = CounterRng::new(14, 0);
        let u = matexp(&random_hermitian(2, &mut rng), c64(0.0, -1.0)).unwrap();
        let mut p1 = zeros(2);
        let mut p2 = zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                p1[[i, j]] = u[[i, 0]] * u[[j, 0]].conj();
                p2[[i, j]] = u[[i, 1]] * u[[j, 1]].conj();
            }
        }
        assert!((trace_norm(&(&p1 - &p2)).unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_norm_examples() {
        assert!((spectral_norm(&identity(5)).unwrap() - 1.0).abs() < 1e-12);
        assert!((spectral_norm(&sigma_minus()).unwrap() - 1.0).abs() < 1e-12);
        let two_z = sigma_z().mapv(|z| z * c64(2.0, 0.0));
        assert!((spectral_norm(&two_z).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dagger_commutator_trivia() {
        let mut rng = CounterRng::new(15, 0);
        let a = random_matrix(3, &mut rng);
        assert!(max_abs_diff(&dagger(&dagger(&a)), &a) < 1e-15);
        assert!(max_abs(&commutator(&a, &a).unwrap()) < 1e-15);
        let double = a.mapv(|z| z * c64(2.0, 0.0));
        assert!(max_abs_diff(&anticommutator(&identity(3), &a).unwrap(), &double) < 1e-15);
        assert!(commutator(&a, &zeros(4)).is_err());
    }

    #[test]
    fn unitarity_of_hermitian_exponentials() {
        let mut rng = CounterRng::new(16, 0);
        for dim in [2usize, 4, 8] {
            for _ in 0..100 {
                let h = random_hermitian(dim, &mut rng);
                let u = matexp(&h, c64(0.0, -0.9)).unwrap();
                let gram = dagger(&u).dot(&u);
                assert!(max_abs_diff(&gram, &identity(dim)) < tol::ALGEBRAIC);
            }
        }
    }

    #[test]
    fn trace_norm_dominates_spectral_norm() {
        let mut rng = CounterRng::new(17, 0);
        for _ in 0..50 {
            let a = random_matrix(4, &mut rng);
            let tn = trace_norm(&a).unwrap();
            let sn = spectral_norm(&a).unwrap();
            assert!(tn >= sn - 1e-12);
        }
    }

    #[test]
    fn trace_norm_unitary_invariance() {
        let mut rng = CounterRng::new(18, 0);
        for _ in 0..30 {
            let a = random_matrix(4, &mut rng);
            let u = matexp(&random_hermitian(4, &mut rng), c64(0.0, -1.0)).unwrap();
            let v = matexp(&random_hermitian(4, &mut rng), c64(0.0, 1.3)).unwrap();
            let rotated = u.dot(&a).dot(&v);
            let d = (trace_norm(&rotated).unwrap() - trace_norm(&a).unwrap()).abs();
            assert!(d < tol::ALGEBRAIC, "invariance violated by {d:.2e}");
        }
    }

    #[test]
    fn eigvalsh_known_and_random() {
        let evs = eigvalsh(&sigma_z()).unwrap();
        assert!((evs[0] + 1.0).abs() < 1e-13 && (evs[1] - 1.0).abs() < 1e-13);

        let mut rng = CounterRng::new(19, 0);
        for dim in [2usize, 4, 8, 16] {
            let h = random_hermitian(dim, &mut rng);
            let evs = eigvalsh(&h).unwrap();
            let tr: f64 = evs.iter().sum();
            let tr2: f64 = evs.iter().map(|e| e * e).sum();
            assert!((tr - trace(&h).re).abs() < 1e-10);
            assert!((tr2 - trace(&h.dot(&h)).re).abs() < 1e-9);
        }
    }

    #[test]
    fn singular_values_match_hermitian_spectrum() {
        // For Hermitian A the singular values are |eigenvalues|.
        let mut rng = CounterRng::new(20, 0);
        let h = random_hermitian(6, &mut rng);
        let mut sv = singular_values(&h).unwrap();
        let mut abs_ev: Vec<f64> = eigvalsh(&h).unwrap().iter().map(|e| e.abs()).collect();
        sv.sort_by(|x, y| x.partial_cmp(y).unwrap());
        abs_ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (s, e) in sv.iter().zip(abs_ev.iter()) {
            assert!((s - e).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_values_at_superoperator_scale() {
        // d² = 256-sized matrices must still decompose; plant known singular
        // values behind random unitaries
        let d = 128;
        let mut rng = CounterRng::new(21, 0);
        let planted: Vec<f64> = (0..d).map(|k| 0.1 + k as f64 / d as f64).collect();
        let u = matexp(&random_hermitian(d, &mut rng), c64(0.0, -0.8)).unwrap();
        let v = matexp(&random_hermitian(d, &mut rng), c64(0.0, 1.1)).unwrap();
        let mut core = zeros(d);
        for (k, s) in planted.iter().enumerate() {
            core[[k, k]] = c64(*s, 0.0);
        }
        let a = u.dot(&core).dot(&v);
        let mut sv = singular_values(&a).unwrap();
        sv.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut expect = planted.clone();
        expect.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (got, want) in sv.iter().zip(expect.iter()) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn kron_dimensions_and_values() {
        let k = kron(&sigma_z(), &identity(2));
        assert_eq!(k.dim(), (4, 4));
        assert_eq!(k[[0, 0]], ONE);
        assert_eq!(k[[3, 3]], c64(-1.0, 0.0));
        // check a mixed case against the definition
        let k2 = kron(&sigma_x(), &sigma_y());
        assert_eq!(k2[[0, 3]], sigma_y()[[0, 1]]);
    }
}
