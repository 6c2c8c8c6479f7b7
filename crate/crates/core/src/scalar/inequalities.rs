//! Exact-arithmetic-free verifiers for the three proven scalar inequalities
//! bounding power sums of critical points by root data.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::{coeffs_from_roots, differentiate, RootList};
use super::roots::{find_roots, RootFinderOptions};
use crate::error::{Error, Result};

/// Coefficient in front of `(sum a_k)^2` inside the Kushel-Tyaglov term
/// `S = sum a_j^2 - c (sum a_k)^2`.
///
/// [`KtForm::Centered`] uses `c = 1/d`, making `S = sum (a_j - mean)^2`;
/// this is the form that holds for every scalar root list. [`KtForm::Printed`]
/// uses `c = 1/d^2` and is kept for comparison: it fails on uncentered lists
/// (for example `a = (1, i/2)`), and agrees with the centered form whenever
/// `sum a_j = 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KtForm {
    #[default]
    Centered,
    Printed,
}

impl KtForm {
    pub fn coefficient(self, d: usize) -> f64 {
        let d = d as f64;
        match self {
            KtForm::Centered => 1.0 / d,
            KtForm::Printed => 1.0 / (d * d),
        }
    }
}

impl fmt::Display for KtForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KtForm::Centered => "centered",
            KtForm::Printed => "printed",
        })
    }
}

impl FromStr for KtForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "centered" => Ok(KtForm::Centered),
            "printed" => Ok(KtForm::Printed),
            other => Err(format!("unknown Kushel-Tyaglov form `{other}` (centered|printed)")),
        }
    }
}

/// Both sides of one scalar inequality on one root list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarInequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub slack: f64,
    pub holds: bool,
    pub tol: f64,
    /// The critical points `b_1, ..., b_{d-1}`.
    pub critical_points: RootList,
    /// `max_k |P'(b_k)| / max(1, max|a_j|)^d`.
    pub root_residual: f64,
    /// The five right-hand-side terms, Kushel-Tyaglov only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<[f64; 5]>,
}

/// Zeros of `P'` for `P = (z - a_1)...(z - a_d)`, retrying with fresh
/// jitter seeds if the first start does not converge.
pub fn critical_points(a: &RootList) -> Result<RootList> {
    let dp = differentiate(&coeffs_from_roots(a));
    let mut last = None;
    for seed in 0..4 {
        let opts = RootFinderOptions {
            seed,
            ..Default::default()
        };
        match find_roots(&dp, &opts) {
            Ok(r) => return Ok(r),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

fn require_degree(a: &RootList) -> Result<usize> {
    let d = a.degree();
    if d < 2 {
        return Err(Error::ArityMismatch(format!("need d >= 2 roots, got {d}")));
    }
    Ok(d)
}

fn report(a: &RootList, b: RootList, lhs: f64, rhs: f64, tol: f64) -> ScalarInequalityReport {
    let dp = differentiate(&coeffs_from_roots(a));
    let root_residual = b
        .roots()
        .iter()
        .map(|&z| dp.eval(z).norm())
        .fold(0.0, f64::max)
        / a.residual_scale();
    let slack = rhs - lhs;
    ScalarInequalityReport {
        lhs,
        rhs,
        slack,
        holds: slack >= -tol,
        tol,
        critical_points: b,
        root_residual,
        terms: None,
    }
}

fn power_sum(z: &[Complex64], p: i32) -> f64 {
    z.iter().map(|w| w.norm().powi(p)).sum()
}

/// Right-hand side `(1/d^2)|sum a|^2 + ((d-2)/d) sum |a|^2`.
pub fn schoenberg_bound(a: &[Complex64]) -> f64 {
    let d = a.len() as f64;
    let s: Complex64 = a.iter().sum();
    s.norm_sqr() / (d * d) + (d - 2.0) / d * power_sum(a, 2)
}

/// Right-hand side `(2/d^2)(sum |a|^2)^2 + ((d-4)/d) sum |a|^4`.
pub fn debruin_sharma_bound(a: &[Complex64]) -> f64 {
    let d = a.len() as f64;
    let s2 = power_sum(a, 2);
    2.0 / (d * d) * s2 * s2 + (d - 4.0) / d * power_sum(a, 4)
}

/// The five Kushel-Tyaglov right-hand-side terms, in display order.
pub fn kushel_tyaglov_terms(a: &[Complex64], form: KtForm) -> [f64; 5] {
    let dn = a.len();
    let d = dn as f64;
    let s: Complex64 = a.iter().sum();
    let s2 = power_sum(a, 2);
    let sq: Complex64 = a.iter().map(|z| z * z).sum();
    let centered_sq = sq - s * s * form.coefficient(dn);
    let shifted: f64 = a
        .iter()
        .map(|z| z.norm_sqr() * (z + s / d).norm_sqr())
        .sum();
    [
        (d - 6.0) / d * power_sum(a, 4),
        s2 * s2 / (d * d),
        centered_sq.norm_sqr() / (d * d),
        2.0 / d * shifted,
        -4.0 / (d * d * d) * s2 * s.norm_sqr(),
    ]
}

/// Checks `sum |b_k|^2 <= (1/d^2)|sum a_j|^2 + ((d-2)/d) sum |a_j|^2`.
pub fn schoenberg_report(a: &RootList, tol: f64) -> Result<ScalarInequalityReport> {
    require_degree(a)?;
    let b = critical_points(a)?;
    let lhs = power_sum(b.roots(), 2);
    let rhs = schoenberg_bound(a.roots());
    Ok(report(a, b, lhs, rhs, tol))
}

/// `1e-10 * (1 + max|a_j|)`.
pub fn centroid_tolerance(a: &RootList) -> f64 {
    1e-10 * (1.0 + a.max_modulus())
}

/// Checks `sum |b_k|^4 <= (2/d^2)(sum |a_j|^2)^2 + ((d-4)/d) sum |a_j|^4`
/// under the hypothesis `sum a_j = 0`, which is gated, never enforced.
pub fn debruin_sharma_report(a: &RootList, tol: f64) -> Result<ScalarInequalityReport> {
    require_degree(a)?;
    let norm = a.roots().iter().sum::<Complex64>().norm();
    let allowed = centroid_tolerance(a);
    if norm > allowed {
        return Err(Error::CentroidNotZero { norm, allowed });
    }
    let b = critical_points(a)?;
    let lhs = power_sum(b.roots(), 4);
    let rhs = debruin_sharma_bound(a.roots());
    Ok(report(a, b, lhs, rhs, tol))
}

pub fn kushel_tyaglov_report(a: &RootList, tol: f64) -> Result<ScalarInequalityReport> {
    kushel_tyaglov_report_with(a, tol, KtForm::Centered)
}

/// Checks `sum |b_k|^4` against the five-term Kushel-Tyaglov bound.
pub fn kushel_tyaglov_report_with(
    a: &RootList,
    tol: f64,
    form: KtForm,
) -> Result<ScalarInequalityReport> {
    require_degree(a)?;
    let b = critical_points(a)?;
    let lhs = power_sum(b.roots(), 4);
    let terms = kushel_tyaglov_terms(a.roots(), form);
    let mut r = report(a, b, lhs, terms.iter().sum(), tol);
    r.terms = Some(terms);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cube_roots() -> RootList {
        RootList::new((0..3).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0)).collect())
            .unwrap()
    }

    fn list(v: &[(f64, f64)]) -> RootList {
        RootList::new(v.iter().map(|&(x, y)| c(x, y)).collect()).unwrap()
    }

    #[test]
    fn schoenberg_examples() {
        let r = schoenberg_report(&list(&[(1.0, 0.0), (-1.0, 0.0)]), 1e-12).unwrap();
        assert!(r.lhs.abs() < 1e-30 && r.rhs.abs() < 1e-30 && r.slack.abs() < 1e-15);

        let r = schoenberg_report(&list(&[(0.0, 0.0); 3]), 1e-12).unwrap();
        assert!(r.lhs < 1e-30);
        assert_eq!(r.rhs, 0.0);

        let r = schoenberg_report(&cube_roots(), 1e-12).unwrap();
        assert!(r.lhs < 1e-14);
        assert!((r.rhs - 1.0).abs() < 1e-15);
        assert!((r.slack - 1.0).abs() < 1e-14);
        assert!(r.holds);
    }

    #[test]
    fn debruin_sharma_examples() {
        // rhs = (2/9)*9 + (-1/3)*3 = 1, and P' = 3z^2 so lhs = 0
        let r = debruin_sharma_report(&cube_roots(), 1e-12).unwrap();
        assert!((r.rhs - 1.0).abs() < 1e-14);
        assert!((r.slack - 1.0).abs() < 1e-9);

        // rhs = (2/4)*2^2 + (-1)*2 = 0
        let r = debruin_sharma_report(&list(&[(1.0, 0.0), (-1.0, 0.0)]), 1e-12).unwrap();
        assert!(r.rhs.abs() < 1e-15 && r.slack.abs() < 1e-15);

        assert!(matches!(
            debruin_sharma_report(&list(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]), 1e-12),
            Err(Error::CentroidNotZero { .. })
        ));
    }

    #[test]
    fn kushel_tyaglov_examples() {
        // (-1)*3 + (1/9)*9 + 0 + (2/3)*3 - 0 = 0
        let r = kushel_tyaglov_report(&cube_roots(), 1e-12).unwrap();
        let t = r.terms.unwrap();
        let expected = [-3.0, 1.0, 0.0, 2.0, 0.0];
        for (got, want) in t.iter().zip(expected) {
            assert!((got - want).abs() < 1e-14, "{t:?}");
        }
        assert!(r.slack.abs() < 1e-10);

        let r = kushel_tyaglov_report(&list(&[(0.0, 0.0); 4]), 1e-12).unwrap();
        assert!(r.lhs < 1e-30);
        assert_eq!(r.rhs, 0.0);
    }

    #[test]
    fn printed_form_fails_on_two_roots() {
        // d = 2, a = (1, i/2): b = (1 + i/2)/2, so lhs = |b|^4 = 25/256.
        let a = list(&[(1.0, 0.0), (0.0, 0.5)]);
        let lhs = 25.0 / 256.0;
        // hand evaluation of the five terms with c = 1/4:
        //   sum|a|^4 = 17/16, sum|a|^2 = 5/4, sum a = 1 + i/2, sum a^2 = 3/4,
        //   S = 3/4 - (1/4)(3/4 + i) = 9/16 - i/4, |S|^2 = 97/256,
        //   sum |a_j|^2 |a_j + s/2|^2 = 37/16 + 13/64 = 161/64,
        //   |s|^2 = 5/4; rhs = 97/1024 and slack = 97/1024 - 100/1024
        let printed_rhs = -2.0 * 17.0 / 16.0 + 25.0 / 64.0 + 97.0 / 1024.0 + 161.0 / 64.0
            - 0.5 * 1.25 * 1.25;
        let r = kushel_tyaglov_report_with(&a, 1e-12, KtForm::Printed).unwrap();
        assert!((r.lhs - lhs).abs() < 1e-15);
        assert!((r.rhs - printed_rhs).abs() < 1e-14);
        assert!((r.slack + 3.0 / 1024.0).abs() < 1e-14);
        assert!(!r.holds);

        // centered form: S = sum (a_j - mean)^2 = (1 - i/2)^2 / 2, equality at d = 2
        let r = kushel_tyaglov_report(&a, 1e-12).unwrap();
        assert!(r.slack.abs() < 1e-14);
    }

    #[test]
    fn forms_agree_when_centered() {
        let a = list(&[(0.3, 0.1), (-0.5, 0.4), (0.2, -0.5)]);
        let t1 = kushel_tyaglov_terms(a.roots(), KtForm::Centered);
        let t2 = kushel_tyaglov_terms(a.roots(), KtForm::Printed);
        for (x, y) in t1.iter().zip(t2) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn single_root_is_rejected() {
        assert!(matches!(
            schoenberg_report(&list(&[(1.0, 0.0)]), 1e-12),
            Err(Error::ArityMismatch(_))
        ));
    }
}
