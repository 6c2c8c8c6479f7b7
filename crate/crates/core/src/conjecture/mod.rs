//! Operator versions of the Schoenberg, de Bruin-Sharma and Kushel-Tyaglov
//! inequalities on `M_n(C)`.
//!
//! Every inequality comes in two sides. The right side uses the Gram
//! products `x x*`, the left side uses `x* x`; for Hermitian data they
//! coincide, and at `n = 1` both reduce to the scalar inequality.
//!
//! A report compares `lhs <= rhs` in the Loewner order. The slack is the
//! smallest eigenvalue of `rhs - lhs`.

mod violation;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::eigen::hermitian_eigenvalues;
use crate::linalg::loewner::{default_loewner_tol, loewner_leq};
use crate::linalg::matrix::{sum, ComplexMatrix};
use crate::scalar::KtForm;

pub use violation::{scalar_crosscheck, verify_violation, CrosscheckRecord, ViolationCheck};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conjecture {
    Schoenberg,
    DebruinSharma,
    KushelTyaglov,
}

impl Conjecture {
    pub const ALL: [Conjecture; 3] = [
        Conjecture::Schoenberg,
        Conjecture::DebruinSharma,
        Conjecture::KushelTyaglov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Conjecture::Schoenberg => "schoenberg",
            Conjecture::DebruinSharma => "debruin_sharma",
            Conjecture::KushelTyaglov => "kushel_tyaglov",
        }
    }

    /// Homogeneity degree of both sides in the data.
    pub fn degree(self) -> i32 {
        match self {
            Conjecture::Schoenberg => 2,
            Conjecture::DebruinSharma | Conjecture::KushelTyaglov => 4,
        }
    }
}

impl fmt::Display for Conjecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Conjecture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "schoenberg" => Ok(Conjecture::Schoenberg),
            "debruin_sharma" | "dbs" => Ok(Conjecture::DebruinSharma),
            "kushel_tyaglov" | "kt" => Ok(Conjecture::KushelTyaglov),
            other => Err(format!("unknown conjecture `{other}` (schoenberg|dbs|kt)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Products `x x*`.
    Right,
    /// Products `x* x`.
    Left,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Right, Side::Left];

    pub fn name(self) -> &'static str {
        match self {
            Side::Right => "right",
            Side::Left => "left",
        }
    }

    fn gram(self, x: &ComplexMatrix) -> ComplexMatrix {
        match self {
            Side::Right => x.gram_right(),
            Side::Left => x.gram_left(),
        }
    }

    /// `x g x*` on the right side, `x* g x` on the left.
    fn sandwich(self, x: &ComplexMatrix, g: &ComplexMatrix) -> ComplexMatrix {
        let adj = x.adjoint();
        match self {
            Side::Right => &(x * g) * &adj,
            Side::Left => &(&adj * g) * x,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

/// All six (conjecture, side) pairs in report order.
pub fn all_targets() -> impl Iterator<Item = (Conjecture, Side)> {
    Conjecture::ALL
        .into_iter()
        .flat_map(|c| Side::BOTH.into_iter().map(move |s| (c, s)))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    /// Loewner tolerance; `None` uses `1e-9 * max(1, ||lhs||_F + ||rhs||_F)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default)]
    pub kt_form: KtForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub conjecture: Conjecture,
    pub side: Side,
    /// Smallest eigenvalue of `rhs - lhs`.
    pub min_eig: f64,
    pub holds: bool,
    /// `||G - G*||_F` of the gap `G = rhs - lhs` before symmetrization.
    pub asym_residual: f64,
    pub tol: f64,
    /// Smallest eigenvalue of `lhs`, which is PSD by construction.
    pub lhs_min_eig: f64,
    pub lhs: ComplexMatrix,
    pub rhs: ComplexMatrix,
    /// The five right-hand-side terms, Kushel-Tyaglov only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<ComplexMatrix>>,
}

impl InequalityReport {
    /// `rhs - lhs`, symmetrized.
    pub fn gap(&self) -> ComplexMatrix {
        (&self.rhs - &self.lhs).hermitian_part()
    }
}

fn check_shapes(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> Result<usize> {
    let d = a.len();
    if d < 2 || b.len() + 1 != d {
        return Err(Error::ArityMismatch(format!(
            "need d >= 2 roots and d - 1 critical factors, got {} and {}",
            d,
            b.len()
        )));
    }
    let n = a[0].dim();
    for m in a.iter().chain(b) {
        if m.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.dim(),
            });
        }
    }
    Ok(d)
}

/// `max(1, max_j ||x_j||_F)^p` over roots and critical factors.
pub fn data_scale(a: &[ComplexMatrix], b: &[ComplexMatrix], p: i32) -> f64 {
    a.iter()
        .chain(b)
        .map(|m| m.frobenius_norm())
        .fold(1.0, f64::max)
        .powi(p)
}

/// `1e-10 * (1 + max_j ||a_j||_F)`.
pub fn centroid_tolerance(a: &[ComplexMatrix]) -> f64 {
    1e-10 * (1.0 + a.iter().map(|m| m.frobenius_norm()).fold(0.0, f64::max))
}

fn gate_centroid(a: &[ComplexMatrix]) -> Result<()> {
    let norm = sum(a).frobenius_norm();
    let allowed = centroid_tolerance(a);
    if norm <= allowed {
        Ok(())
    } else {
        Err(Error::CentroidNotZero { norm, allowed })
    }
}

fn schoenberg_sides(a: &[ComplexMatrix], b: &[ComplexMatrix], side: Side) -> (ComplexMatrix, ComplexMatrix) {
    let d = a.len() as f64;
    let lhs = sum(&b.iter().map(|x| side.gram(x)).collect::<Vec<_>>());
    let total = sum(a);
    let grams = sum(&a.iter().map(|x| side.gram(x)).collect::<Vec<_>>());
    let rhs = &side.gram(&total).scale_re(1.0 / (d * d)) + &grams.scale_re((d - 2.0) / d);
    (lhs, rhs)
}

fn fourth_power_lhs(b: &[ComplexMatrix], side: Side) -> ComplexMatrix {
    sum(&b.iter().map(|x| side.gram(x).square()).collect::<Vec<_>>())
}

fn debruin_sharma_sides(a: &[ComplexMatrix], b: &[ComplexMatrix], side: Side) -> (ComplexMatrix, ComplexMatrix) {
    let d = a.len() as f64;
    let grams: Vec<ComplexMatrix> = a.iter().map(|x| side.gram(x)).collect();
    let squares = sum(&grams.iter().map(|g| g.square()).collect::<Vec<_>>());
    let rhs = &sum(&grams).square().scale_re(2.0 / (d * d)) + &squares.scale_re((d - 4.0) / d);
    (fourth_power_lhs(b, side), rhs)
}

/// The five Kushel-Tyaglov terms for one side, in display order.
pub fn kushel_tyaglov_terms(a: &[ComplexMatrix], side: Side, form: KtForm) -> Vec<ComplexMatrix> {
    let dn = a.len();
    let d = dn as f64;
    let total = sum(a);
    let grams: Vec<ComplexMatrix> = a.iter().map(|x| side.gram(x)).collect();

    let t1 = sum(&grams.iter().map(|g| g.square()).collect::<Vec<_>>()).scale_re((d - 6.0) / d);
    let t2 = sum(&grams).square().scale_re(1.0 / (d * d));

    let squares = sum(&a.iter().map(|x| x.square()).collect::<Vec<_>>());
    let s = &squares - &total.square().scale_re(form.coefficient(dn));
    let t3 = side.gram(&s).scale_re(1.0 / (d * d));

    let shift = total.scale_re(1.0 / d);
    let t4 = sum(&a
        .iter()
        .map(|x| side.sandwich(x, &side.gram(&(x + &shift))))
        .collect::<Vec<_>>())
    .scale_re(2.0 / d);

    let total_gram = side.gram(&total);
    let t5 = sum(&a.iter().map(|x| side.sandwich(x, &total_gram)).collect::<Vec<_>>())
        .scale_re(-4.0 / (d * d * d));

    vec![t1, t2, t3, t4, t5]
}

fn finish_report(
    conjecture: Conjecture,
    side: Side,
    a: &[ComplexMatrix],
    b: &[ComplexMatrix],
    lhs: ComplexMatrix,
    rhs: ComplexMatrix,
    terms: Option<Vec<ComplexMatrix>>,
    opts: &CheckOptions,
) -> Result<InequalityReport> {
    let scale = data_scale(a, b, conjecture.degree());
    let asym_residual = (&rhs - &lhs).hermitian_defect();
    let allowed = 1e-8 * scale;
    if asym_residual > allowed {
        return Err(Error::NotHermitian {
            residual: asym_residual,
            allowed,
        });
    }
    let lhs = lhs.hermitian_part();
    let rhs = rhs.hermitian_part();
    let tol = opts.tol.unwrap_or_else(|| default_loewner_tol(&lhs, &rhs));
    let verdict = loewner_leq(&lhs, &rhs, tol)?;
    let lhs_min_eig = hermitian_eigenvalues(&lhs, f64::INFINITY)?.min();
    Ok(InequalityReport {
        conjecture,
        side,
        min_eig: verdict.min_eig,
        holds: verdict.holds,
        asym_residual,
        tol,
        lhs_min_eig,
        lhs,
        rhs,
        terms,
    })
}

/// Evaluates one side of one inequality for roots `a` and critical factors `b`.
pub fn evaluate(
    conjecture: Conjecture,
    side: Side,
    a: &[ComplexMatrix],
    b: &[ComplexMatrix],
    opts: &CheckOptions,
) -> Result<InequalityReport> {
    check_shapes(a, b)?;
    match conjecture {
        Conjecture::Schoenberg => {
            let (lhs, rhs) = schoenberg_sides(a, b, side);
            finish_report(conjecture, side, a, b, lhs, rhs, None, opts)
        }
        Conjecture::DebruinSharma => {
            gate_centroid(a)?;
            let (lhs, rhs) = debruin_sharma_sides(a, b, side);
            finish_report(conjecture, side, a, b, lhs, rhs, None, opts)
        }
        Conjecture::KushelTyaglov => {
            let terms = kushel_tyaglov_terms(a, side, opts.kt_form);
            let rhs = sum(&terms);
            let lhs = fourth_power_lhs(b, side);
            finish_report(conjecture, side, a, b, lhs, rhs, Some(terms), opts)
        }
    }
}

/// `sum b_k b_k* <= (1/d^2)(sum a_j)(sum a_j)* + ((d-2)/d) sum a_j a_j*`.
pub fn schoenberg_right(a: &[ComplexMatrix], b: &[ComplexMatrix], tol: Option<f64>) -> Result<InequalityReport> {
    evaluate(Conjecture::Schoenberg, Side::Right, a, b, &CheckOptions { tol, ..Default::default() })
}

/// `sum b_k* b_k <= (1/d^2)(sum a_j)*(sum a_j) + ((d-2)/d) sum a_j* a_j`.
pub fn schoenberg_left(a: &[ComplexMatrix], b: &[ComplexMatrix], tol: Option<f64>) -> Result<InequalityReport> {
    evaluate(Conjecture::Schoenberg, Side::Left, a, b, &CheckOptions { tol, ..Default::default() })
}

pub fn debruin_sharma_right(a: &[ComplexMatrix], b: &[ComplexMatrix], tol: Option<f64>) -> Result<InequalityReport> {
    evaluate(Conjecture::DebruinSharma, Side::Right, a, b, &CheckOptions { tol, ..Default::default() })
}

pub fn debruin_sharma_left(a: &[ComplexMatrix], b: &[ComplexMatrix], tol: Option<f64>) -> Result<InequalityReport> {
    evaluate(Conjecture::DebruinSharma, Side::Left, a, b, &CheckOptions { tol, ..Default::default() })
}

pub fn kushel_tyaglov_right(a: &[ComplexMatrix], b: &[ComplexMatrix], tol: Option<f64>) -> Result<InequalityReport> {
    evaluate(Conjecture::KushelTyaglov, Side::Right, a, b, &CheckOptions { tol, ..Default::default() })
}

pub fn kushel_tyaglov_left(a: &[ComplexMatrix], b: &[ComplexMatrix], tol: Option<f64>) -> Result<InequalityReport> {
    evaluate(Conjecture::KushelTyaglov, Side::Left, a, b, &CheckOptions { tol, ..Default::default() })
}

/// Produces reports for an instance; swapping this out lets a harness plant
/// a known-false inequality.
pub trait GapOracle: Sync {
    fn report(
        &self,
        conjecture: Conjecture,
        side: Side,
        a: &[ComplexMatrix],
        b: &[ComplexMatrix],
    ) -> Result<InequalityReport>;
}

/// The inequalities as stated.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardOracle {
    pub opts: CheckOptions,
}

impl GapOracle for StandardOracle {
    fn report(
        &self,
        conjecture: Conjecture,
        side: Side,
        a: &[ComplexMatrix],
        b: &[ComplexMatrix],
    ) -> Result<InequalityReport> {
        evaluate(conjecture, side, a, b, &self.opts)
    }
}

/// Multiplies every right-hand side by `factor` before comparing. With
/// `factor < 1` the inequalities become false on generic data, which is how
/// the search machinery is tested for sensitivity.
#[derive(Debug, Clone, Copy)]
pub struct ScaledRhsOracle {
    pub factor: f64,
    pub opts: CheckOptions,
}

impl GapOracle for ScaledRhsOracle {
    fn report(
        &self,
        conjecture: Conjecture,
        side: Side,
        a: &[ComplexMatrix],
        b: &[ComplexMatrix],
    ) -> Result<InequalityReport> {
        let base = evaluate(conjecture, side, a, b, &self.opts)?;
        let rhs = base.rhs.scale_re(self.factor);
        let terms = base
            .terms
            .map(|ts| ts.iter().map(|t| t.scale_re(self.factor)).collect());
        finish_report(conjecture, side, a, b, base.lhs, rhs, terms, &self.opts)
    }
}

/// `(1/d) sum a_j`, as a matrix.
pub fn centroid(a: &[ComplexMatrix]) -> ComplexMatrix {
    sum(a).scale(Complex64::new(1.0 / a.len() as f64, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ensemble::{sample_matrix, Ensemble};
    use crate::linalg::rng::stream;
    use std::f64::consts::PI;

    fn draw(kind: Ensemble, n: usize, count: usize, seed: u64) -> Vec<ComplexMatrix> {
        let mut rng = stream(seed, 0, 0);
        (0..count).map(|_| sample_matrix(kind, n, &mut rng)).collect()
    }

    fn scalars(v: &[Complex64]) -> Vec<ComplexMatrix> {
        v.iter().map(|&z| ComplexMatrix::from_diagonal(&[z])).collect()
    }

    fn cube_roots() -> Vec<ComplexMatrix> {
        scalars(&(0..3).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0)).collect::<Vec<_>>())
    }

    #[test]
    fn degree_two_gap_vanishes() {
        for n in [1, 3, 6] {
            let a = draw(Ensemble::Ginibre, n, 2, n as u64);
            let b = vec![(&a[0] + &a[1]).scale_re(0.5)];
            for side in Side::BOTH {
                let r = evaluate(Conjecture::Schoenberg, side, &a, &b, &CheckOptions::default()).unwrap();
                assert!(r.gap().frobenius_norm() < 1e-13, "{side}");
                assert!(r.holds);
            }
        }
    }

    #[test]
    fn zeros_give_zero_reports() {
        let a = vec![ComplexMatrix::zeros(2); 3];
        let b = vec![ComplexMatrix::zeros(2); 2];
        for (c, s) in all_targets() {
            let r = evaluate(c, s, &a, &b, &CheckOptions::default()).unwrap();
            assert_eq!(r.min_eig, 0.0);
            assert!(r.holds);
        }
    }

    #[test]
    fn cube_roots_scalar_values() {
        let a = cube_roots();
        let b = vec![ComplexMatrix::zeros(1); 2];
        let s = schoenberg_right(&a, &b, None).unwrap();
        assert!((s.min_eig - 1.0).abs() < 1e-14);
        let dbs = debruin_sharma_right(&a, &b, None).unwrap();
        assert!((dbs.min_eig - 1.0).abs() < 1e-14);
        let kt = kushel_tyaglov_right(&a, &b, None).unwrap();
        assert!(kt.min_eig.abs() < 1e-14);
        let terms: Vec<f64> = kt.terms.unwrap().iter().map(|t| t[(0, 0)].re).collect();
        for (got, want) in terms.iter().zip([-3.0, 1.0, 0.0, 2.0, 0.0]) {
            assert!((got - want).abs() < 1e-14, "{terms:?}");
        }
    }

    #[test]
    fn debruin_sharma_antipodal_pair_is_equality() {
        let x = draw(Ensemble::Ginibre, 3, 1, 4).remove(0);
        let a = vec![x.clone(), -&x];
        let b = vec![ComplexMatrix::zeros(3)];
        for side in Side::BOTH {
            let r = evaluate(Conjecture::DebruinSharma, side, &a, &b, &CheckOptions::default()).unwrap();
            assert!(r.lhs.frobenius_norm() == 0.0);
            assert!(r.rhs.frobenius_norm() < 1e-12 * x.frobenius_norm().powi(4));
        }
    }

    #[test]
    fn hermitian_data_makes_sides_agree() {
        let a = draw(Ensemble::Gue, 3, 3, 5);
        let b = draw(Ensemble::Gue, 3, 2, 6);
        for c in Conjecture::ALL {
            let a = if c == Conjecture::DebruinSharma {
                let m = centroid(&a);
                a.iter().map(|x| x - &m).collect()
            } else {
                a.clone()
            };
            let r = evaluate(c, Side::Right, &a, &b, &CheckOptions::default()).unwrap();
            let l = evaluate(c, Side::Left, &a, &b, &CheckOptions::default()).unwrap();
            assert!((&r.lhs - &l.lhs).frobenius_norm() < 1e-12);
            assert!((&r.rhs - &l.rhs).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn scalar_sides_agree() {
        let a = draw(Ensemble::Ginibre, 1, 4, 7);
        let b = draw(Ensemble::Ginibre, 1, 3, 8);
        for c in [Conjecture::Schoenberg, Conjecture::KushelTyaglov] {
            let r = evaluate(c, Side::Right, &a, &b, &CheckOptions::default()).unwrap();
            let l = evaluate(c, Side::Left, &a, &b, &CheckOptions::default()).unwrap();
            assert!((r.min_eig - l.min_eig).abs() < 1e-12);
        }
    }

    #[test]
    fn lhs_is_psd() {
        let a = draw(Ensemble::Ginibre, 4, 4, 9);
        let b = draw(Ensemble::Ginibre, 4, 3, 10);
        for (c, s) in all_targets() {
            if c == Conjecture::DebruinSharma {
                continue;
            }
            let r = evaluate(c, s, &a, &b, &CheckOptions::default()).unwrap();
            assert!(r.lhs_min_eig >= -1e-10 * data_scale(&a, &b, c.degree()));
        }
    }

    #[test]
    fn gates_and_shape_errors() {
        let a = draw(Ensemble::Ginibre, 2, 3, 11);
        let b = draw(Ensemble::Ginibre, 2, 2, 12);
        assert!(matches!(
            debruin_sharma_left(&a, &b, None),
            Err(Error::CentroidNotZero { .. })
        ));
        assert!(matches!(schoenberg_right(&a, &b[..1], None), Err(Error::ArityMismatch(_))));
        let wrong = draw(Ensemble::Ginibre, 3, 2, 13);
        assert!(matches!(
            schoenberg_left(&a, &wrong, None),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn planted_oracle_breaks_degree_two_equality() {
        let a = draw(Ensemble::Ginibre, 2, 2, 14);
        let b = vec![(&a[0] + &a[1]).scale_re(0.5)];
        let oracle = ScaledRhsOracle {
            factor: 0.9,
            opts: CheckOptions::default(),
        };
        let r = oracle.report(Conjecture::Schoenberg, Side::Right, &a, &b).unwrap();
        assert!(!r.holds);
        let largest = hermitian_eigenvalues(&b[0].gram_right(), 1e-12).unwrap().max();
        assert!((r.min_eig + 0.1 * largest).abs() < 1e-12);
    }

    #[test]
    fn kushel_tyaglov_fails_for_noncommuting_degree_two() {
        let c = |x: f64| Complex64::new(x, 0.0);
        let p = ComplexMatrix::from_diagonal(&[c(1.0), c(0.0)]);
        let x = ComplexMatrix::from_fn(2, |i, j| c(if i == j { 0.0 } else { 1.0 }));
        let b = vec![(&p + &x).scale_re(0.5)];
        let a = vec![p, x];
        for side in Side::BOTH {
            let r = evaluate(Conjecture::KushelTyaglov, side, &a, &b, &CheckOptions::default()).unwrap();
            assert!((r.min_eig + 5f64.sqrt() / 8.0).abs() < 1e-14, "{}", r.min_eig);
            assert!(!r.holds);
            let s = evaluate(Conjecture::Schoenberg, side, &a, &b, &CheckOptions::default()).unwrap();
            assert!(s.min_eig.abs() < 1e-15);
        }
    }

    #[test]
    fn names_parse() {
        assert_eq!("dbs".parse::<Conjecture>().unwrap(), Conjecture::DebruinSharma);
        assert_eq!("kt".parse::<Conjecture>().unwrap(), Conjecture::KushelTyaglov);
        assert!("sendov".parse::<Conjecture>().is_err());
    }
}
