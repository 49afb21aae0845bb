//! Tridiagonal (Thomas) solver.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Solves a tridiagonal system in place. `lower[i]` multiplies x[i-1] in row i
/// (lower[0] unused), `upper[i]` multiplies x[i+1] (last entry unused).
/// `rhs` is overwritten with the solution.
pub fn solve_in_place<T: Real>(
    lower: &[T],
    diag: &[T],
    upper: &[T],
    rhs: &mut [T],
    scratch: &mut Vec<T>,
) -> Result<()> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    scratch.clear();
    scratch.resize(n, T::zero());

    let mut beta = diag[0];
    if beta == T::zero() {
        return Err(Error::NonConvergence("tridiagonal pivot is zero".into()));
    }
    rhs[0] = rhs[0] / beta;
    for i in 1..n {
        scratch[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * scratch[i];
        if beta == T::zero() {
            return Err(Error::NonConvergence("tridiagonal pivot is zero".into()));
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] = rhs[i] - scratch[i + 1] * rhs[i + 1];
    }
    Ok(())
}
