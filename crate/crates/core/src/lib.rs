//! Operator versions of the Schoenberg, de Bruin-Sharma and Kushel-Tyaglov
//! inequalities on `M_n(C)`: checks, factorization of matrix polynomial
//! derivatives, and reproducible counterexample search.
//!
//! The guide lives in `book/`; its snippets run as doc-tests of this crate.

pub mod conjecture;
pub mod error;
pub mod linalg;
pub mod ncpoly;
pub mod scalar;
pub mod search;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/scalar.md")]
    mod scalar {}
    #[doc = include_str!("../../../book/src/operator.md")]
    mod operator {}
    #[doc = include_str!("../../../book/src/loewner.md")]
    mod loewner {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/findings.md")]
    mod findings {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
