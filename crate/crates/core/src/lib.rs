//! Numerical radii of operator tuples, spectral norms of group-algebra
//! elements on truncated regular representations, and positivity
//! certificates for the operator systems spanned by matrix units and by
//! free-group generators.
//!
//! The crate is organized around a small dense/sparse complex linear
//! algebra substrate ([`linalg`]), the classical numerical radius
//! ([`numrad`]), Cayley-graph truncations of group algebra elements
//! ([`groups`]), the joint numerical radius and its certificates
//! ([`jointrad`]), concrete operator-system computations ([`opsys`]),
//! a PSD feasibility engine ([`psdfeas`]), and matrix-range membership
//! tests ([`ranges`]). Text formats shared by the CLI live in [`io`].

pub mod error;
pub mod io;
pub mod linalg;
pub mod numrad;
pub mod groups;
pub mod jointrad;
pub mod opsys;
pub mod psdfeas;
pub mod ranges;

pub use error::{Error, Result};

/// Default tolerances, separated so that representation checks, dense
/// eigensolves, and iterative solves each get their own ladder rung.
pub mod defaults {
    /// Structural checks (Hermitian symmetry, triplet closure).
    pub const STRUCTURAL_TOL: f64 = 1e-12;
    /// Dense eigensolver reconstruction residual.
    pub const DENSE_EIGEN_TOL: f64 = 1e-10;
    /// Iterative (Krylov / alternating projection) residuals.
    pub const ITERATIVE_TOL: f64 = 1e-7;
    /// Cayley-ball enumeration cap.
    pub const BALL_CAP: usize = 5_000_000;
    /// Normalization between the cb joint radius and the minimal norm of
    /// the summed diagonal of a positive tridiagonal certificate. The
    /// default follows the Ando convention (minimal diagonal sum 2w);
    /// `opsys::calibrate_kappa` re-derives it from the matrix-unit oracle.
    pub const KAPPA: f64 = 0.5;
    /// Iteration cap for the feasibility engine.
    pub const FEAS_MAX_ITER: usize = 50_000;
}
