//! Dense symmetric positive (semi-)definite helpers shared by the solvers.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative jitter (times the trace) tried first when a plain factorization fails.
pub const JITTER_START: f64 = 1e-12;
/// Largest relative jitter tried before giving up.
pub const JITTER_MAX: f64 = 1e-6;

/// Cholesky factorization of `A + jitter I`, where the jitter is the smallest
/// value on the escalation ladder that made the factorization succeed.
#[derive(Debug, Clone)]
pub struct JitteredCholesky {
    chol: Cholesky<f64, Dyn>,
    jitter: f64,
}

impl JitteredCholesky {
    /// Factorizes `a`, escalating a diagonal jitter from `JITTER_START * tr(a)`
    /// by factors of ten up to `JITTER_MAX * tr(a)`.
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        let trace = a.trace().abs();
        if let Some(chol) = Cholesky::new(a.clone()) {
            return Ok(Self { chol, jitter: 0.0 });
        }
        let mut rel = JITTER_START;
        let scale = if trace > 0.0 { trace } else { 1.0 };
        while rel <= JITTER_MAX * (1.0 + 1e-9) {
            let jitter = rel * scale;
            let mut shifted = a.clone();
            for i in 0..shifted.nrows() {
                shifted[(i, i)] += jitter;
            }
            if let Some(chol) = Cholesky::new(shifted) {
                return Ok(Self { chol, jitter });
            }
            rel *= 10.0;
        }
        Err(Error::NotPositiveDefinite {
            jitter: JITTER_MAX * scale,
            trace,
        })
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }

    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(b)
    }
}

/// Returns `a + shift * I`.
pub fn add_diagonal(mut a: DMatrix<f64>, shift: f64) -> DMatrix<f64> {
    for i in 0..a.nrows().min(a.ncols()) {
        a[(i, i)] += shift;
    }
    a
}

/// Smallest and largest eigenvalues of a symmetric matrix.
pub fn eigen_range(a: &DMatrix<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(a.clone());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in eig.eigenvalues.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// PSD check with the tolerance `min eigenvalue >= -rel_tol * max eigenvalue`.
pub fn is_psd(a: &DMatrix<f64>, rel_tol: f64) -> bool {
    let (lo, hi) = eigen_range(a);
    lo >= -rel_tol * hi.abs().max(f64::MIN_POSITIVE)
}
