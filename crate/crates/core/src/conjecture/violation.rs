use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{all_targets, data_scale, evaluate, CheckOptions, Conjecture, GapOracle, Side};
use crate::error::{Error, Result};
use crate::linalg::eigen::hermitian_eigenvalues;
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::rng::{slots, stream};
use crate::ncpoly::{factorize, FactorOptions, FactorizationResult, ProbeSet, Strategy};
use crate::scalar::{
    debruin_sharma_report, kushel_tyaglov_report_with, schoenberg_report, RootList,
    ScalarInequalityReport,
};

/// Bound on the factorization residual for a violation to count.
pub const VIOLATION_FACTOR_RESIDUAL: f64 = 1e-8;
/// A violation needs `min_eig < -VIOLATION_REL_MARGIN * scale`.
pub const VIOLATION_REL_MARGIN: f64 = 1e-6;

/// Outcome of re-examining a candidate counterexample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationCheck {
    pub verified: bool,
    pub factor_residual: f64,
    pub min_eig: f64,
    /// Residual of the factorization redone on fresh probes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recheck_residual: Option<f64>,
    /// `min_eig` recomputed from the recheck factors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recheck_min_eig: Option<f64>,
    /// The (negative) eigenvalue bound a violation must cross.
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Confirms that `factor.b` makes `conjecture` fail on `side`.
///
/// The factorization must be accepted with residual at most `1e-8`, the
/// smallest gap eigenvalue must lie below `-1e-6 * scale`, and both must
/// survive a refactorization on `2 * probe_count` fresh probes drawn from the
/// recheck slot of `(master_seed, trial_index)`.
#[allow(clippy::too_many_arguments)]
pub fn verify_violation(
    oracle: &dyn GapOracle,
    conjecture: Conjecture,
    side: Side,
    a: &[ComplexMatrix],
    factor: &FactorizationResult,
    probe_count: usize,
    master_seed: u64,
    trial_index: u64,
    factor_opts: &FactorOptions,
) -> Result<ViolationCheck> {
    let threshold = -VIOLATION_REL_MARGIN * data_scale(a, &factor.b, conjecture.degree());
    let first = oracle.report(conjecture, side, a, &factor.b)?;
    let mut check = ViolationCheck {
        verified: false,
        factor_residual: factor.residual,
        min_eig: first.min_eig,
        recheck_residual: None,
        recheck_min_eig: None,
        threshold,
        reason: None,
    };
    if !factor.accepted || factor.residual > VIOLATION_FACTOR_RESIDUAL {
        check.reason = Some("factorization residual too large".into());
        return Ok(check);
    }
    if first.min_eig >= threshold {
        check.reason = Some("gap above violation threshold".into());
        return Ok(check);
    }

    let n = a[0].dim();
    let mut rng = stream(master_seed, trial_index, slots::RECHECK);
    let probes = ProbeSet::ginibre(n, 2 * probe_count.max(1), &mut rng);
    let refactor = match factorize(a, Strategy::Auto, &probes, factor_opts) {
        Ok(r) => r,
        Err(Error::NoFactorization(best)) => *best,
        Err(e) => return Err(e),
    };
    check.recheck_residual = Some(refactor.residual);
    if !refactor.accepted || refactor.residual > VIOLATION_FACTOR_RESIDUAL {
        check.reason = Some("factorization not reproduced on fresh probes".into());
        return Ok(check);
    }
    let second = oracle.report(conjecture, side, a, &refactor.b)?;
    let gap = (&second.rhs - &second.lhs).hermitian_part();
    let recheck = hermitian_eigenvalues(&gap, f64::INFINITY)?.min();
    check.recheck_min_eig = Some(recheck);
    if recheck >= threshold {
        check.reason = Some("violation vanished on recheck".into());
        return Ok(check);
    }
    check.verified = true;
    Ok(check)
}

/// Agreement between the matrix reports at `n = 1` and the scalar reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckRecord {
    /// `(conjecture, side, matrix slack, scalar slack)`; de Bruin-Sharma is
    /// left out for uncentered lists.
    pub entries: Vec<(Conjecture, Side, f64, f64)>,
    pub max_discrepancy: f64,
}

/// Evaluates every inequality on `1 x 1` matrices and through the scalar
/// path, using the same critical points for both.
pub fn scalar_crosscheck(a: &RootList, opts: &CheckOptions) -> Result<CrosscheckRecord> {
    let tol = opts.tol.unwrap_or(0.0);
    let as_matrices = |z: &[Complex64]| -> Vec<ComplexMatrix> {
        z.iter().map(|&w| ComplexMatrix::from_diagonal(&[w])).collect()
    };
    let am = as_matrices(a.roots());
    let mut entries = Vec::new();
    let mut max_discrepancy: f64 = 0.0;
    for (conjecture, side) in all_targets() {
        let scalar: ScalarInequalityReport = match conjecture {
            Conjecture::Schoenberg => schoenberg_report(a, tol)?,
            Conjecture::DebruinSharma => match debruin_sharma_report(a, tol) {
                Ok(r) => r,
                Err(Error::CentroidNotZero { .. }) => continue,
                Err(e) => return Err(e),
            },
            Conjecture::KushelTyaglov => kushel_tyaglov_report_with(a, tol, opts.kt_form)?,
        };
        let bm = as_matrices(scalar.critical_points.roots());
        let matrix = evaluate(conjecture, side, &am, &bm, opts)?;
        let discrepancy = (matrix.min_eig - scalar.slack).abs();
        max_discrepancy = max_discrepancy.max(discrepancy);
        entries.push((conjecture, side, matrix.min_eig, scalar.slack));
    }
    Ok(CrosscheckRecord {
        entries,
        max_discrepancy,
    })
}
