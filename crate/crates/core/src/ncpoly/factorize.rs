//! Recovering `P'(z) = d (z - b_1)...(z - b_{d-1})` from the roots `a_j`.
//!
//! Matching the words with exactly one non-`z` letter on both sides forces
//! the candidate `b_p = ((d - p) a_p + p a_{p+1}) / d`. For `n >= 2` those
//! words only pin `b_p` down to the candidate plus scalars `y_p I` with
//! `sum y_p = 0`, so the refinement searches that family first and only
//! then, for small problems, all entries of `b`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::factored::{
    derivative_form, eval_linear_factors, functional_residual, DerivativeForm, FactoredPoly,
    ProbeScope, ProbeSet,
};
use super::lm::{levenberg, LevenbergOptions};
use crate::error::{Error, Result};
use crate::linalg::eigen::hermitian_eigen;
use crate::linalg::ensemble::{sample_matrix, Ensemble};
use crate::linalg::matrix::{sum, ComplexMatrix};
use crate::linalg::rng::{slots, stream};
use crate::scalar::{critical_points, RootList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorizationMethod {
    ClosedFormD2,
    Candidate,
    CandidateRefined,
    ScalarRoots,
    PerDiagonalScalar,
}

/// The algebra on which the factorization was checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraScope {
    Full,
    /// Matrices diagonal in the joint eigenbasis of a commuting normal tuple.
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationResult {
    pub b: Vec<ComplexMatrix>,
    /// Normalized functional residual, see [`functional_residual`].
    pub residual: f64,
    pub method: FactorizationMethod,
    pub accepted: bool,
    pub algebra: AlgebraScope,
    /// Least-squares iterations spent, zero for closed forms.
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FactorOptions {
    /// Acceptance bound on the functional residual.
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    /// Seeds restart jitter.
    pub seed: u64,
    /// Full-entry refinement is skipped above this many real parameters.
    pub full_refine_max_params: usize,
    /// Relative commutator bound for the commuting-normal test.
    pub commute_tol: f64,
}

impl Default for FactorOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 500,
            restarts: 4,
            seed: 0,
            full_refine_max_params: 128,
            commute_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Strategy {
    /// Closed form, scalar, commuting, candidate, then refinement.
    #[default]
    Auto,
    /// The forced candidate only.
    Candidate,
    /// Full-entry least squares started from the candidate.
    Refine,
}

fn require_arity(a: &[ComplexMatrix]) -> Result<usize> {
    if a.len() < 2 {
        return Err(Error::ArityMismatch(format!("need d >= 2 factors, got {}", a.len())));
    }
    let n = a[0].dim();
    for m in a {
        if m.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.dim(),
            });
        }
    }
    Ok(a.len())
}

/// `b_p = ((d - p) a_p + p a_{p+1}) / d` for `p = 1, ..., d - 1`.
pub fn candidate_critical_factors(a: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
    let d = require_arity(a)?;
    let df = d as f64;
    Ok((1..d)
        .map(|p| {
            let left = a[p - 1].scale_re((d - p) as f64 / df);
            let right = a[p].scale_re(p as f64 / df);
            &left + &right
        })
        .collect())
}

fn pack(b: &[ComplexMatrix]) -> Vec<f64> {
    b.iter().flat_map(|m| m.to_real_params()).collect()
}

fn unpack(n: usize, x: &[f64]) -> Vec<ComplexMatrix> {
    x.chunks(2 * n * n)
        .map(|c| ComplexMatrix::from_real_params(n, c))
        .collect()
}

/// Residual vector of the least-squares problem: real and imaginary parts of
/// `(P'(z_t) - d prod (z_t - b_k)) / max(1, ||z_t||)^{d-1}` over all probes.
struct ResidualModel<'a> {
    probes: &'a ProbeSet,
    targets: Vec<ComplexMatrix>,
    weights: Vec<f64>,
    d: usize,
}

impl<'a> ResidualModel<'a> {
    fn new(form: &DerivativeForm, probes: &'a ProbeSet) -> Result<Self> {
        let d = form.degree();
        let targets = form.eval_batch(&probes.probes)?;
        let weights = probes
            .probes
            .iter()
            .map(|z| z.frobenius_norm().max(1.0).powi(d as i32 - 1).recip())
            .collect();
        Ok(Self {
            probes,
            targets,
            weights,
            d,
        })
    }

    fn vector(&self, b: &[ComplexMatrix]) -> Vec<f64> {
        let mut out = Vec::new();
        for ((z, target), w) in self.probes.probes.iter().zip(&self.targets).zip(&self.weights) {
            let diff = target - &eval_linear_factors(z, b).scale_re(self.d as f64);
            out.extend(diff.as_slice().iter().flat_map(|c| [c.re * w, c.im * w]));
        }
        out
    }

    fn max_residual(&self, b: &[ComplexMatrix]) -> f64 {
        self.probes
            .probes
            .iter()
            .zip(&self.targets)
            .zip(&self.weights)
            .map(|((z, target), w)| {
                (target - &eval_linear_factors(z, b).scale_re(self.d as f64)).frobenius_norm() * w
            })
            .fold(0.0, f64::max)
    }
}

fn finish(result: FactorizationResult) -> Result<FactorizationResult> {
    if result.accepted {
        Ok(result)
    } else {
        Err(Error::NoFactorization(Box::new(result)))
    }
}

/// Full-entry damped Gauss-Newton over the `2(d-1)n^2` real parameters of
/// `b`, restarted with jitter; keeps the lowest-residual run (lowest restart
/// index on ties).
pub fn refine_factors(
    a: &[ComplexMatrix],
    b_init: &[ComplexMatrix],
    probes: &ProbeSet,
    opts: &FactorOptions,
) -> Result<FactorizationResult> {
    let d = require_arity(a)?;
    if b_init.len() + 1 != d {
        return Err(Error::ArityMismatch(format!(
            "initial guess has {} factors, need {}",
            b_init.len(),
            d - 1
        )));
    }
    let form = derivative_form(&FactoredPoly::monic(a.to_vec())?);
    let model = ResidualModel::new(&form, probes)?;
    let best = refine_entries(&model, b_init, opts);
    finish(FactorizationResult {
        accepted: best.residual <= opts.tol,
        ..best
    })
}

fn algebra_of(probes: &ProbeSet) -> AlgebraScope {
    match probes.scope {
        ProbeScope::Full => AlgebraScope::Full,
        ProbeScope::Diagonal { .. } => AlgebraScope::Diagonal,
    }
}

fn refine_entries(model: &ResidualModel<'_>, b_init: &[ComplexMatrix], opts: &FactorOptions) -> FactorizationResult {
    let n = b_init[0].dim();
    let lm = LevenbergOptions {
        max_iter: opts.max_iter,
        ..Default::default()
    };
    let jitter = 0.1 * b_init
        .iter()
        .map(|m| m.frobenius_norm() / (n as f64).sqrt())
        .fold(1.0, f64::max);

    let mut best: Option<FactorizationResult> = None;
    let mut total_iterations = 0;
    for restart in 0..opts.restarts.max(1) {
        let start: Vec<ComplexMatrix> = if restart == 0 {
            b_init.to_vec()
        } else {
            let mut rng = stream(opts.seed, restart as u64, slots::REFINE);
            b_init
                .iter()
                .map(|m| m + &sample_matrix(Ensemble::Ginibre, n, &mut rng).scale_re(jitter))
                .collect()
        };
        let out = levenberg(
            |x| model.vector(&unpack(n, x)),
            |x| model.max_residual(&unpack(n, x)) <= opts.tol,
            pack(&start),
            &lm,
        );
        total_iterations += out.iterations;
        let b = unpack(n, &out.x);
        let residual = model.max_residual(&b);
        let better = best.as_ref().is_none_or(|r| residual < r.residual);
        if better {
            best = Some(FactorizationResult {
                b,
                residual,
                method: FactorizationMethod::CandidateRefined,
                accepted: residual <= opts.tol,
                algebra: algebra_of(model.probes),
                iterations: 0,
            });
        }
        if best.as_ref().is_some_and(|r| r.accepted) {
            break;
        }
    }
    let mut best = best.expect("at least one restart");
    best.iterations = total_iterations;
    best
}

/// Least squares over `b_p = c_p + y_p I` with `sum y_p = 0`.
fn refine_scalar_shifts(
    model: &ResidualModel<'_>,
    candidate: &[ComplexMatrix],
    opts: &FactorOptions,
) -> FactorizationResult {
    let n = candidate[0].dim();
    let free = candidate.len() - 1;
    let build = |x: &[f64]| -> Vec<ComplexMatrix> {
        let y: Vec<Complex64> = x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let last = -y.iter().sum::<Complex64>();
        candidate
            .iter()
            .enumerate()
            .map(|(p, c)| c.shift(-if p < free { y[p] } else { last }))
            .collect()
    };
    let lm = LevenbergOptions {
        max_iter: opts.max_iter,
        ..Default::default()
    };
    let mut best: Option<FactorizationResult> = None;
    let mut total_iterations = 0;
    for restart in 0..opts.restarts.max(1) {
        let x0: Vec<f64> = if restart == 0 {
            vec![0.0; 2 * free]
        } else {
            let mut rng = stream(opts.seed, restart as u64, slots::REFINE);
            let scale = candidate.iter().map(|m| m.frobenius_norm() / (n as f64).sqrt()).fold(1.0, f64::max);
            (0..2 * free)
                .map(|_| scale * rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut rng))
                .collect()
        };
        let out = levenberg(
            |x| model.vector(&build(x)),
            |x| model.max_residual(&build(x)) <= opts.tol,
            x0,
            &lm,
        );
        total_iterations += out.iterations;
        let b = build(&out.x);
        let residual = model.max_residual(&b);
        if best.as_ref().is_none_or(|r| residual < r.residual) {
            best = Some(FactorizationResult {
                b,
                residual,
                method: FactorizationMethod::CandidateRefined,
                accepted: residual <= opts.tol,
                algebra: algebra_of(model.probes),
                iterations: 0,
            });
        }
        if best.as_ref().is_some_and(|r| r.accepted) {
            break;
        }
    }
    let mut best = best.expect("at least one restart");
    best.iterations = total_iterations;
    best
}

/// Largest `||[x, y]||_F` over the tuple, including `[a_j, a_j*]`, relative to
/// `max(1, max ||a_j||_F)^2`.
pub fn commutation_defect(a: &[ComplexMatrix]) -> f64 {
    let scale = a.iter().map(|m| m.frobenius_norm()).fold(1.0, f64::max).powi(2);
    let mut worst: f64 = 0.0;
    for (i, x) in a.iter().enumerate() {
        let adj = x.adjoint();
        worst = worst.max((&(x * &adj) - &(&adj * x)).frobenius_norm());
        for y in &a[i + 1..] {
            worst = worst.max((&(x * y) - &(y * x)).frobenius_norm());
        }
    }
    worst / scale
}

/// A unitary diagonalizing every member of a commuting normal tuple, found
/// as the eigenbasis of a generic real combination of the Hermitian and
/// skew-Hermitian parts.
pub fn joint_diagonalizer(a: &[ComplexMatrix], tol: f64) -> Option<ComplexMatrix> {
    if commutation_defect(a) > tol {
        return None;
    }
    let n = a[0].dim();
    let scale = a.iter().map(|m| m.frobenius_norm()).fold(1.0, f64::max);
    const PHI: f64 = 0.618_033_988_749_894_9;
    for attempt in 0..3 {
        let mut h = ComplexMatrix::zeros(n);
        for (j, m) in a.iter().enumerate() {
            let k = (2 * j + 17 * attempt) as f64;
            let alpha = 0.5 + ((k + 1.0) * PHI).fract();
            let beta = 0.5 + ((k + 2.0) * PHI).fract();
            let re_part = m.hermitian_part();
            let im_part = (m - &m.adjoint()).scale(Complex64::new(0.0, -0.5));
            h += &re_part.scale_re(alpha);
            h += &im_part.scale_re(beta);
        }
        let eig = hermitian_eigen(&h, 1e-8).ok()?;
        let u = eig.vectors;
        let u_star = u.adjoint();
        let diagonal = a.iter().all(|m| {
            let r = &(&u_star * m) * &u;
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|ij| r[ij].norm_sqr())
                .sum::<f64>()
                .sqrt();
            off <= 1e-9 * scale
        });
        if diagonal {
            return Some(u);
        }
    }
    None
}

fn per_diagonal_scalar(
    a: &[ComplexMatrix],
    unitary: &ComplexMatrix,
) -> Result<Vec<ComplexMatrix>> {
    let n = a[0].dim();
    let d = a.len();
    let u_star = unitary.adjoint();
    let diagonals: Vec<Vec<Complex64>> = a.iter().map(|m| (&(&u_star * m) * unitary).diagonal()).collect();
    // slot_points[s][k] = k-th critical point at slot s
    let mut slot_points = Vec::with_capacity(n);
    for s in 0..n {
        let roots = RootList::new(diagonals.iter().map(|diag| diag[s]).collect())?;
        slot_points.push(critical_points(&roots)?.roots().to_vec());
    }
    Ok((0..d - 1)
        .map(|k| {
            let diag: Vec<Complex64> = slot_points.iter().map(|pts| pts[k]).collect();
            &(unitary * &ComplexMatrix::from_diagonal(&diag)) * &u_star
        })
        .collect())
}

/// Finds `b` with `P'(z) = d (z - b_1)...(z - b_{d-1})` on the probes.
///
/// Failure to factor is returned as [`Error::NoFactorization`] carrying the
/// best attempt; it means the premise of the inequalities does not hold for
/// this tuple, not that an inequality fails.
pub fn factorize(
    a: &[ComplexMatrix],
    strategy: Strategy,
    probes: &ProbeSet,
    opts: &FactorOptions,
) -> Result<FactorizationResult> {
    let d = require_arity(a)?;
    let n = a[0].dim();
    if probes.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: probes.dim(),
        });
    }
    let form = derivative_form(&FactoredPoly::monic(a.to_vec())?);
    let closed = |b: Vec<ComplexMatrix>, method, probes: &ProbeSet| -> Result<FactorizationResult> {
        let residual = functional_residual(&form, &b, probes)?;
        Ok(FactorizationResult {
            b,
            residual,
            method,
            accepted: residual <= opts.tol,
            algebra: algebra_of(probes),
            iterations: 0,
        })
    };

    match strategy {
        Strategy::Candidate => {
            let method = if d == 2 {
                FactorizationMethod::ClosedFormD2
            } else {
                FactorizationMethod::Candidate
            };
            finish(closed(candidate_critical_factors(a)?, method, probes)?)
        }
        Strategy::Refine => refine_factors(a, &candidate_critical_factors(a)?, probes, opts),
        Strategy::Auto => {
            if d == 2 {
                let b = vec![(&a[0] + &a[1]).scale_re(0.5)];
                return finish(closed(b, FactorizationMethod::ClosedFormD2, probes)?);
            }
            if n == 1 {
                let roots = RootList::new(a.iter().map(|m| m[(0, 0)]).collect())?;
                let b = critical_points(&roots)?
                    .roots()
                    .iter()
                    .map(|&z| ComplexMatrix::from_diagonal(&[z]))
                    .collect();
                return finish(closed(b, FactorizationMethod::ScalarRoots, probes)?);
            }
            if let Some(u) = joint_diagonalizer(a, opts.commute_tol) {
                let b = per_diagonal_scalar(a, &u)?;
                let scoped = probes.project_diagonal(&u);
                return finish(closed(b, FactorizationMethod::PerDiagonalScalar, &scoped)?);
            }
            let candidate = candidate_critical_factors(a)?;
            let first = closed(candidate.clone(), FactorizationMethod::Candidate, probes)?;
            if first.accepted {
                return Ok(first);
            }
            let model = ResidualModel::new(&form, probes)?;
            let mut best = refine_scalar_shifts(&model, &candidate, opts);
            let params = 2 * (d - 1) * n * n;
            if !best.accepted && params <= opts.full_refine_max_params {
                let full = refine_entries(&model, &best.b, opts);
                let iterations = best.iterations + full.iterations;
                if full.residual < best.residual {
                    best = full;
                }
                best.iterations = iterations;
            }
            if best.residual > first.residual {
                best = FactorizationResult {
                    iterations: best.iterations,
                    method: FactorizationMethod::CandidateRefined,
                    ..first
                };
            }
            finish(best)
        }
    }
}

/// Sum of a tuple, exposed for callers that gate on `sum a_j = 0`.
pub fn tuple_sum(a: &[ComplexMatrix]) -> ComplexMatrix {
    sum(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ensemble::sample_commuting_normal_tuple;

    fn ginibre(n: usize, count: usize, seed: u64) -> Vec<ComplexMatrix> {
        let mut rng = stream(seed, 0, 0);
        (0..count).map(|_| sample_matrix(Ensemble::Ginibre, n, &mut rng)).collect()
    }

    fn probes(n: usize, d: usize, seed: u64) -> ProbeSet {
        ProbeSet::ginibre(n, ProbeSet::default_count(d), &mut stream(seed, 0, slots::PROBES))
    }

    #[test]
    fn candidate_formula_small_degrees() {
        let a = ginibre(2, 3, 1);
        let b = candidate_critical_factors(&a[..2]).unwrap();
        assert!((&b[0] - &(&a[0] + &a[1]).scale_re(0.5)).frobenius_norm() < 1e-15);

        let b = candidate_critical_factors(&a).unwrap();
        let b1 = (&a[0].scale_re(2.0) + &a[1]).scale_re(1.0 / 3.0);
        let b2 = (&a[1] + &a[2].scale_re(2.0)).scale_re(1.0 / 3.0);
        assert!((&b[0] - &b1).frobenius_norm() < 1e-15);
        assert!((&b[1] - &b2).frobenius_norm() < 1e-15);
    }

    #[test]
    fn degree_three_candidate_fails_on_constant_words() {
        // 3 b_1 b_2 must equal a_1 a_2 + a_1 a_3 + a_2 a_3, which fails generically
        let a = ginibre(2, 3, 2);
        let b = candidate_critical_factors(&a).unwrap();
        let lhs = (&b[0] * &b[1]).scale_re(3.0);
        let rhs = &(&(&a[0] * &a[1]) + &(&a[0] * &a[2])) + &(&a[1] * &a[2]);
        assert!((&lhs - &rhs).frobenius_norm() > 1e-3);
        let form = derivative_form(&FactoredPoly::monic(a).unwrap());
        assert!(functional_residual(&form, &b, &probes(2, 3, 3)).unwrap() > 1e-4);
    }

    #[test]
    fn degree_two_closed_form_is_exact() {
        for n in [1, 2, 5, 8] {
            let a = ginibre(n, 2, 4 + n as u64);
            let r = factorize(&a, Strategy::Auto, &probes(n, 2, 5), &FactorOptions::default()).unwrap();
            assert_eq!(r.method, FactorizationMethod::ClosedFormD2);
            assert!(r.residual <= 1e-12, "n={n}: {}", r.residual);
        }
    }

    #[test]
    fn perturbed_factor_raises_residual_linearly() {
        let a = ginibre(3, 2, 6);
        let form = derivative_form(&FactoredPoly::monic(a.clone()).unwrap());
        let p = probes(3, 2, 7);
        let b = candidate_critical_factors(&a).unwrap();
        let mut e = ComplexMatrix::zeros(3);
        e[(0, 1)] = Complex64::new(1.0, 0.0);
        for eps in [1e-3, 1e-5, 1e-7] {
            let perturbed = vec![&b[0] + &e.scale_re(eps)];
            let r = functional_residual(&form, &perturbed, &p).unwrap();
            // d * eps * ||E|| / max(1, ||z||) with ||z||_F ~ 3
            assert!(r >= 0.1 * eps && r <= 2.0 * eps, "eps={eps} r={r}");
        }
    }

    #[test]
    fn commuting_tuple_uses_per_diagonal_roots() {
        let t = sample_commuting_normal_tuple(3, 4, &mut stream(8, 0, 0));
        let r = factorize(&t.matrices, Strategy::Auto, &probes(4, 3, 9), &FactorOptions::default()).unwrap();
        assert_eq!(r.method, FactorizationMethod::PerDiagonalScalar);
        assert_eq!(r.algebra, AlgebraScope::Diagonal);
        assert!(r.residual <= 1e-8);
        for bk in &r.b {
            for x in &t.matrices {
                assert!(bk.commutator(x).unwrap().frobenius_norm() < 1e-10);
            }
        }
    }

    #[test]
    fn scalar_case_matches_root_finder() {
        let a = ginibre(1, 5, 10);
        let r = factorize(&a, Strategy::Auto, &probes(1, 5, 11), &FactorOptions::default()).unwrap();
        assert_eq!(r.method, FactorizationMethod::ScalarRoots);
        assert!(r.residual <= 1e-10);
    }

    #[test]
    fn refine_from_exact_solution_takes_no_iterations() {
        let a = ginibre(3, 2, 12);
        let exact = candidate_critical_factors(&a).unwrap();
        let r = refine_factors(&a, &exact, &probes(3, 2, 13), &FactorOptions::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.b, exact);
    }

    #[test]
    fn refine_recovers_scalar_critical_points() {
        let a = ginibre(1, 3, 14);
        let start = candidate_critical_factors(&a).unwrap();
        let r = refine_factors(&a, &start, &probes(1, 3, 15), &FactorOptions::default()).unwrap();
        assert!(r.residual <= 1e-8);
        let roots = RootList::new(a.iter().map(|m| m[(0, 0)]).collect()).unwrap();
        let exact = critical_points(&roots).unwrap();
        for bk in &r.b {
            let nearest = exact.roots().iter().map(|z| (z - bk[(0, 0)]).norm()).fold(f64::MAX, f64::min);
            assert!(nearest < 1e-7, "{nearest}");
        }
    }

    #[test]
    fn refine_degree_two_from_any_start() {
        let a = ginibre(2, 2, 16);
        let start = ginibre(2, 1, 17);
        let r = refine_factors(&a, &start, &probes(2, 2, 18), &FactorOptions::default()).unwrap();
        let exact = (&a[0] + &a[1]).scale_re(0.5);
        assert!((&r.b[0] - &exact).frobenius_norm() < 1e-7);
    }

    #[test]
    fn generic_noncommuting_cubic_reports_outcome() {
        let a = ginibre(2, 3, 19);
        match factorize(&a, Strategy::Auto, &probes(2, 3, 20), &FactorOptions::default()) {
            Ok(r) => assert!(r.residual <= 1e-8),
            Err(Error::NoFactorization(best)) => {
                assert!(!best.accepted);
                assert!(best.residual > 1e-8);
                assert_eq!(best.b.len(), 2);
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn arity_errors() {
        let a = ginibre(2, 1, 21);
        assert!(matches!(candidate_critical_factors(&a), Err(Error::ArityMismatch(_))));
    }
}
