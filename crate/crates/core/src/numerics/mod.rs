//! Dense linear algebra over exact rationals and binary64 floats.
//!
//! The rational backend is exact and ignores every tolerance. The float
//! backend uses partial-pivot elimination, Householder tridiagonalization
//! with implicit QL for symmetric eigenvalues, and one-sided Jacobi for
//! singular values of general matrices.

mod exact;
mod float;
mod matrix;
mod scalar;

pub use float::{singular_values, symmetric_eigenvalues};
pub use matrix::Matrix;
pub use scalar::{
    format_rational, parse_rational, round_decimal, terminating_decimal, Backend, Rational,
    Scalar,
};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("singular matrix (no usable pivot in column {column})")]
    SingularMatrix { column: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}

/// Float-backend thresholds. The rational backend never reads them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative residual bound for linear solves and linear identities.
    pub solve: f64,
    /// Singular values below `rank * max(1, sigma_max)` count as zero.
    pub rank: f64,
    /// Eigenvalues down to `-psd * max(1, |lambda|_max)` still count as PSD.
    pub psd: f64,
    /// Symmetry allowance, relative to `max(1, max |entry|)`.
    pub sym: f64,
    /// Entrywise bound for comparisons against printed reference values.
    pub matching: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            solve: 1e-10,
            rank: 1e-9,
            psd: 1e-9,
            sym: 1e-12,
            matching: 1e-4,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), String> {
        let all = [
            ("solve", self.solve),
            ("rank", self.rank),
            ("psd", self.psd),
            ("sym", self.sym),
            ("match", self.matching),
        ];
        for (name, value) in all {
            if !(value > 0.0 && value.is_finite()) {
                return Err(format!("tolerance {name} must be strictly positive, got {value}"));
            }
        }
        Ok(())
    }
}

/// Outcome of a semidefiniteness test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdVerdict {
    pub psd: bool,
    /// Most negative eigenvalue (float) or the failing pivot value (rational).
    pub witness: Option<f64>,
    /// Index of the failing pivot on the rational backend.
    pub witness_index: Option<usize>,
}

impl PsdVerdict {
    pub(crate) fn pass(witness: Option<f64>) -> Self {
        Self {
            psd: true,
            witness,
            witness_index: None,
        }
    }
}

/// Solves `m x = b` for square `m`.
pub fn solve_square<T: Scalar>(
    m: &Matrix<T>,
    b: &[T],
    tol: &Tolerances,
) -> Result<Vec<T>, NumericsError> {
    if m.rows() != m.cols() || b.len() != m.rows() {
        return Err(NumericsError::DimensionMismatch(format!(
            "{}x{} system with right-hand side of length {}",
            m.rows(),
            m.cols(),
            b.len()
        )));
    }
    T::solve_square(m, b, tol)
}

pub fn rank<T: Scalar>(m: &Matrix<T>, tol: &Tolerances) -> usize {
    T::rank(m, tol)
}

pub fn psd_check<T: Scalar>(m: &Matrix<T>, tol: &Tolerances) -> Result<PsdVerdict, NumericsError> {
    T::psd_check(m, tol)
}

/// PSD verdict and rank of a symmetric matrix, sharing one factorization.
pub fn psd_and_rank<T: Scalar>(m: &Matrix<T>, tol: &Tolerances) -> Result<(PsdVerdict, usize), NumericsError> {
    T::psd_and_rank(m, tol)
}

/// Solution of a consistent (possibly over- or under-determined) system, or
/// `None` if it is inconsistent.
pub fn solve_consistent<T: Scalar>(m: &Matrix<T>, b: &[T], tol: &Tolerances) -> Option<Vec<T>> {
    if b.len() != m.rows() {
        return None;
    }
    T::solve_consistent(m, b, tol)
}
