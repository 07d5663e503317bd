//! Sparse linear algebra used by the PDE modules.
//!
//! [`SparseMatrix`] is a canonical CSR matrix built from triplets.
//! [`solve_spd`] runs Jacobi-preconditioned conjugate gradients and
//! [`solve_general`] runs restarted GMRES with an ILU(0) preconditioner.
//! Both use a relative residual stopping rule, falling back to the absolute
//! residual when the right-hand side vanishes, and report non-convergence
//! through [`SolverReport::converged`] instead of failing.

mod cg;
mod gmres;
mod ilu;
mod sparse;

pub use cg::solve_spd;
pub use gmres::solve_general;
pub use ilu::Ilu0;
pub use sparse::{dot, norm2, SparseMatrix};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("entry ({row}, {col}) outside a {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    /// `‖b − Ax‖ / ‖b‖`, or the absolute residual when `b = 0`.
    pub final_residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    /// Defaults to `10·n` when unset.
    pub max_iterations: Option<usize>,
    /// Krylov subspace size between GMRES restarts.
    pub restart: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: None,
            restart: 50,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub(crate) fn iteration_cap(&self, n: usize) -> usize {
        self.max_iterations.unwrap_or(10 * n.max(1))
    }
}

fn check_square(a: &SparseMatrix, b: &[f64]) -> Result<(), NumericsError> {
    if a.nrows() != a.ncols() {
        return Err(NumericsError::DimensionMismatch {
            expected: a.nrows(),
            actual: a.ncols(),
        });
    }
    if b.len() != a.nrows() {
        return Err(NumericsError::DimensionMismatch {
            expected: a.nrows(),
            actual: b.len(),
        });
    }
    Ok(())
}

/// Residual norm scale: `‖b‖`, or 1 for a zero right-hand side.
fn residual_scale(b: &[f64]) -> f64 {
    let nb = norm2(b);
    if nb > 0.0 {
        nb
    } else {
        1.0
    }
}
