use serde::{Deserialize, Serialize};

use super::eigen::hermitian_eigenvalues;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Outcome of testing `A <= B` in the Loewner order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoewnerVerdict {
    pub holds: bool,
    /// Smallest eigenvalue of the Hermitian part of `B - A`.
    pub min_eig: f64,
    pub tol: f64,
}

/// `1e-9 * max(1, ||A||_F + ||B||_F)`.
pub fn default_loewner_tol(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    1e-9 * (a.frobenius_norm() + b.frobenius_norm()).max(1.0)
}

/// Tests whether `B - A` is positive semidefinite up to `-tol`.
///
/// Both inputs must be Hermitian within `tol` (relative to their norms).
pub fn loewner_leq(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> Result<LoewnerVerdict> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    for m in [a, b] {
        let defect = m.hermitian_defect();
        let allowed = tol * m.frobenius_norm().max(1.0);
        if defect > allowed {
            return Err(Error::NotHermitian {
                residual: defect,
                allowed,
            });
        }
    }
    let gap = (b - a).hermitian_part();
    let min_eig = hermitian_eigenvalues(&gap, f64::INFINITY)?.min();
    Ok(LoewnerVerdict {
        holds: min_eig >= -tol,
        min_eig,
        tol,
    })
}
