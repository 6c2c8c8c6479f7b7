//! Hermitian eigenvalues by cyclic complex Jacobi rotations.
//!
//! Each rotation first applies a diagonal phase so the pivot `a_pq` becomes
//! real, then the classical real plane rotation annihilates it. Sweeps stop
//! once the off-diagonal Frobenius mass falls below `1e-13 * ||M||_F`.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const OFF_DIAGONAL_RTOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 60;

/// Sorted eigenvalues of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianSpectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `max_k ||M v_k - lambda_k v_k||_2` over the computed eigenpairs.
    pub residual: f64,
}

impl HermitianSpectrum {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("spectrum is never empty")
    }
}

/// Eigenvalues plus a unitary whose columns are the eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub spectrum: HermitianSpectrum,
    /// Column `k` pairs with `spectrum.eigenvalues[k]`.
    pub vectors: ComplexMatrix,
}

fn check_hermitian(m: &ComplexMatrix, tol: f64) -> Result<()> {
    let defect = m.hermitian_defect();
    let allowed = tol * m.frobenius_norm().max(1.0);
    if defect <= allowed {
        Ok(())
    } else {
        Err(Error::NotHermitian {
            residual: defect,
            allowed,
        })
    }
}

/// Eigenvalues of `(M + M*)/2`, after checking `||M - M*||_F <= tol * max(1, ||M||_F)`.
pub fn hermitian_eigenvalues(m: &ComplexMatrix, tol: f64) -> Result<HermitianSpectrum> {
    hermitian_eigen(m, tol).map(|e| e.spectrum)
}

/// Full eigendecomposition of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    check_hermitian(m, tol)?;
    let h = m.hermitian_part();
    let (mut values, vectors) = jacobi(&h);

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let n = h.dim();
    let sorted_vectors = ComplexMatrix::from_fn(n, |i, k| vectors[(i, order[k])]);
    values = order.iter().map(|&k| values[k]).collect();

    let residual = eigen_residual(&h, &values, &sorted_vectors);
    Ok(HermitianEigen {
        spectrum: HermitianSpectrum {
            eigenvalues: values,
            residual,
        },
        vectors: sorted_vectors,
    })
}

fn eigen_residual(h: &ComplexMatrix, values: &[f64], vectors: &ComplexMatrix) -> f64 {
    let n = h.dim();
    let hv = h * vectors;
    (0..n)
        .map(|k| {
            (0..n)
                .map(|i| (hv[(i, k)] - vectors[(i, k)] * values[k]).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi on an exactly Hermitian input; returns unsorted eigenvalues
/// and the accumulated unitary.
fn jacobi(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = h.dim();
    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);
    let threshold = OFF_DIAGONAL_RTOL * h.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    let values = (0..n).map(|i| a[(i, i)].re).collect();
    (values, v)
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let n = a.dim();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // e^{-i phi} with apq = g e^{i phi}
    let phase = apq.conj() / g;

    let theta = (aqq - app) / (2.0 * g);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + theta.hypot(1.0))
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // G = Phi R acting on columns (p, q):
    // G_pp = c, G_pq = s, G_qp = -s e^{-i phi}, G_qq = c e^{-i phi}
    let gpp = Complex64::new(c, 0.0);
    let gpq = Complex64::new(s, 0.0);
    let gqp = phase * (-s);
    let gqq = phase * c;

    // A <- A G
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * gpp + akq * gqp;
        a[(k, q)] = akp * gpq + akq * gqq;
    }
    // A <- G* A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
        a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    // V <- V G
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * gpp + vkq * gqp;
        v[(k, q)] = vkp * gpq + vkq * gqq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ensemble::{sample_matrix, Ensemble};
    use crate::linalg::rng::stream;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_input() {
        let m = ComplexMatrix::from_diagonal(&[c(3.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0)]);
        let s = hermitian_eigenvalues(&m, 1e-12).unwrap();
        assert_eq!(s.eigenvalues, vec![-1.0, 2.0, 3.0]);
        assert_eq!(s.residual, 0.0);
    }

    #[test]
    fn pauli_x() {
        let m = ComplexMatrix::from_fn(2, |i, j| c(if i == j { 0.0 } else { 1.0 }, 0.0));
        let s = hermitian_eigenvalues(&m, 1e-12).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_y_needs_complex_rotation() {
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 1)] = c(0.0, -1.0);
        m[(1, 0)] = c(0.0, 1.0);
        let e = hermitian_eigen(&m, 1e-12).unwrap();
        assert!((e.spectrum.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((e.spectrum.eigenvalues[1] - 1.0).abs() < 1e-15);
        assert!(e.spectrum.residual < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            hermitian_eigenvalues(&m, 1e-9),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn eigenvectors_are_unitary_and_diagonalize() {
        let mut rng = stream(7, 0, 0);
        for n in [1, 2, 5, 9, 16] {
            let h = sample_matrix(Ensemble::Gue, n, &mut rng);
            let e = hermitian_eigen(&h, 1e-12).unwrap();
            let v = &e.vectors;
            let unitarity = (&v.adjoint() * v).try_sub(&ComplexMatrix::identity(n)).unwrap();
            assert!(unitarity.frobenius_norm() < 1e-12, "n={n}");
            let d = &(&v.adjoint() * &h) * v;
            for i in 0..n {
                assert!((d[(i, i)].re - e.spectrum.eigenvalues[i]).abs() < 1e-11);
            }
            assert!(e.spectrum.residual < 1e-11 * h.frobenius_norm().max(1.0));
            assert!(e.spectrum.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn zero_matrix() {
        let s = hermitian_eigenvalues(&ComplexMatrix::zeros(4), 1e-12).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0; 4]);
    }
}
