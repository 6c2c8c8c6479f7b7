//! Factored polynomials over `M_n(C)`, their derivative, and recovery of a
//! factorization `P'(z) = d (z - b_1)...(z - b_{d-1})`.

pub mod factored;
pub mod factorize;
pub mod lm;

pub use factored::{
    derivative_form, eval_derivative, eval_factored, functional_residual, DerivativeForm,
    FactoredPoly, ProbeScope, ProbeSet,
};
pub use factorize::{
    candidate_critical_factors, commutation_defect, factorize, joint_diagonalizer,
    refine_factors, AlgebraScope, FactorOptions, FactorizationMethod, FactorizationResult,
    Strategy,
};
