//! Dense and sparse complex linear algebra: the substrate for every
//! other module.

mod eigen;
mod hermitian;
mod lanczos;
mod matrix;
mod sparse;

pub use eigen::{hermitian_eigen, operator_norm, psd_check, reconstruction_residual, Eigen, PsdVerdict};
pub use hermitian::HermitianMatrix;
pub use lanczos::{sparse_extreme_eigen, Extreme, SparseEigenResult};
pub use matrix::ComplexMatrix;
pub use sparse::SparseOperator;
