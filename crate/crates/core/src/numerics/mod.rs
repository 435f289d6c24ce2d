//! Dense complex linear algebra: the matrix type, factorizations, the
//! Hermitian eigensolver, pseudo-inverse, Neumann-series inversion and J0.

mod bessel;
mod eigen;
mod linalg;
mod matrix;
mod neumann;
mod pinv;

use thiserror::Error;

pub use bessel::bessel_j0;
pub use eigen::{condition_number, eigh, eigvals_hermitian, hermitian_function, hermitian_sqrt, HermitianEigen};
pub use linalg::{inverse, inverse_hpd, log2_det_hpd, Cholesky, Lu, Qr};
pub use matrix::{dot, dot_conj, norm_sqr, ComplexMatrix};
pub use neumann::{default_delta, neumann_inverse, NeumannConfig, NeumannWeighting, MAX_TERMS};
pub use pinv::{jacobi_svd, pseudo_inverse, pseudo_inverse_with, singular_values, PinvOptions, ThinSvd};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix is rank deficient: sigma_min {sigma_min:e} < rtol * sigma_max {sigma_max:e}")]
    RankDeficient { sigma_min: f64, sigma_max: f64 },
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },
    #[error("antenna ratio alpha = {alpha} <= 1; Neumann series not guaranteed to converge")]
    AlphaTooSmall { alpha: f64 },
    #[error("Neumann series term norm grew for 3 consecutive terms")]
    DivergenceDetected,
    #[error("iterative routine did not converge")]
    NoConvergence,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
