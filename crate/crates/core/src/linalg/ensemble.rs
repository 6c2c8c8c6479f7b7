//! Random matrix ensembles used to generate instances and probes.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    /// i.i.d. standard complex normal entries, `E|z|^2 = 1`.
    Ginibre,
    /// Hermitian with unit-variance diagonal and `E|h_ij|^2 = 1` off the diagonal.
    Gue,
    /// Haar unitary: Gram-Schmidt of a Ginibre draw.
    Unitary,
    /// Diagonal with entries uniform in the closed unit disk.
    DiagonalComplex,
}

impl Ensemble {
    pub const ALL: [Ensemble; 4] = [
        Ensemble::Ginibre,
        Ensemble::Gue,
        Ensemble::Unitary,
        Ensemble::DiagonalComplex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Ensemble::Ginibre => "ginibre",
            Ensemble::Gue => "gue",
            Ensemble::Unitary => "unitary",
            Ensemble::DiagonalComplex => "diagonal_complex",
        }
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Ensemble {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ensemble::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown ensemble `{s}`"))
    }
}

pub fn standard_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) / SQRT_2
}

/// Uniform point of the closed unit disk.
pub fn unit_disk_point<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let r = rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    Complex64::from_polar(r, theta)
}

/// Draws one matrix; consumes the stream in row-major entry order.
pub fn sample_matrix<R: Rng + ?Sized>(kind: Ensemble, n: usize, rng: &mut R) -> ComplexMatrix {
    assert!(n >= 1, "dimension must be positive");
    match kind {
        Ensemble::Ginibre => ComplexMatrix::from_fn(n, |_, _| standard_complex_normal(rng)),
        Ensemble::Gue => {
            let mut h = ComplexMatrix::zeros(n);
            for i in 0..n {
                let d: f64 = rng.sample(StandardNormal);
                h[(i, i)] = Complex64::new(d, 0.0);
                for j in (i + 1)..n {
                    let z = standard_complex_normal(rng) * SQRT_2;
                    h[(i, j)] = z;
                    h[(j, i)] = z.conj();
                }
            }
            h
        }
        Ensemble::Unitary => {
            let g = ComplexMatrix::from_fn(n, |_, _| standard_complex_normal(rng));
            orthonormalize_columns(&g)
        }
        Ensemble::DiagonalComplex => {
            let diag: Vec<Complex64> = (0..n).map(|_| unit_disk_point(rng)).collect();
            ComplexMatrix::from_diagonal(&diag)
        }
    }
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
///
/// For a Ginibre input this is the Q factor of a QR decomposition with
/// positive diagonal R, which is Haar distributed.
pub fn orthonormalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.dim();
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..n).map(|i| m[(i, j)]).collect()).collect();
    for j in 0..n {
        for _pass in 0..2 {
            for k in 0..j {
                let proj: Complex64 = (0..n).map(|i| cols[k][i].conj() * cols[j][i]).sum();
                for i in 0..n {
                    let q = cols[k][i];
                    cols[j][i] -= q * proj;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    ComplexMatrix::from_fn(n, |i, j| cols[j][i])
}

/// A commuting tuple of normal matrices `U diag(lambda_j) U*` with shared `U`.
#[derive(Debug, Clone)]
pub struct CommutingNormalTuple {
    pub unitary: ComplexMatrix,
    /// `eigenvalues[j][s]` is the `s`-th diagonal entry of the `j`-th member.
    pub eigenvalues: Vec<Vec<Complex64>>,
    pub matrices: Vec<ComplexMatrix>,
}

impl CommutingNormalTuple {
    pub fn from_parts(unitary: ComplexMatrix, eigenvalues: Vec<Vec<Complex64>>) -> Self {
        let u_star = unitary.adjoint();
        let matrices = eigenvalues
            .iter()
            .map(|lam| &(&unitary * &ComplexMatrix::from_diagonal(lam)) * &u_star)
            .collect();
        Self {
            unitary,
            eigenvalues,
            matrices,
        }
    }
}

/// Draws `U` from the unitary ensemble, then `d` eigenvalue vectors of
/// standard complex normals.
pub fn sample_commuting_normal_tuple<R: Rng + ?Sized>(
    d: usize,
    n: usize,
    rng: &mut R,
) -> CommutingNormalTuple {
    assert!(d >= 2 && n >= 1);
    let unitary = sample_matrix(Ensemble::Unitary, n, rng);
    let eigenvalues = (0..d)
        .map(|_| (0..n).map(|_| standard_complex_normal(rng)).collect())
        .collect();
    CommutingNormalTuple::from_parts(unitary, eigenvalues)
}
