//! Dense complex matrices, Hermitian spectra, the Loewner order and random
//! matrix ensembles.

pub mod eigen;
pub mod ensemble;
pub mod loewner;
pub mod matrix;
pub mod rng;

pub use eigen::{hermitian_eigen, hermitian_eigenvalues, HermitianEigen, HermitianSpectrum};
pub use ensemble::{sample_commuting_normal_tuple, sample_matrix, CommutingNormalTuple, Ensemble};
pub use loewner::{default_loewner_tol, loewner_leq, LoewnerVerdict};
pub use matrix::{product, scalar, sum, ComplexMatrix, ComplexScalar};
