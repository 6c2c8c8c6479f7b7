//! Classical polynomials over the complex numbers and the scalar
//! critical-point inequalities.

pub mod inequalities;
pub mod poly;
pub mod roots;

pub use inequalities::{
    critical_points, debruin_sharma_report, kushel_tyaglov_report, kushel_tyaglov_report_with,
    schoenberg_report, KtForm, ScalarInequalityReport,
};
pub use poly::{coeffs_from_roots, differentiate, MonicPolynomial, Polynomial, RootList};
pub use roots::{find_roots, RootFinderOptions};
