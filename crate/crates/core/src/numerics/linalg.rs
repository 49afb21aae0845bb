//! Small dense linear solves (Gaussian elimination with partial pivoting).
//! Used for the Newton steps of the smooth-fit system; n stays tiny.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Solves `a x = b` in place for a row-major n-by-n matrix. `b` is
/// overwritten with the solution.
pub fn solve_dense<T: Real>(a: &mut [T], b: &mut [T]) -> Result<()> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col] == T::zero() {
            return Err(Error::NonConvergence("singular Newton system".into()));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let inv = T::one() / a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            if factor == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] = a[row * n + k] - factor * v;
            }
            let v = b[col];
            b[row] = b[row] - factor * v;
        }
    }
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc = acc - a[row * n + k] * b[k];
        }
        b[row] = acc / a[row * n + row];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_4x4() {
        // x = [1, -2, 3, 0.5]
        let x = [1.0_f64, -2.0, 3.0, 0.5];
        let a0 = [
            4.0, 1.0, 0.0, 2.0, //
            1.0, 5.0, 1.0, 0.0, //
            0.0, 1.0, 6.0, 1.0, //
            2.0, 0.0, 1.0, 7.0,
        ];
        let mut b = [0.0; 4];
        for i in 0..4 {
            b[i] = (0..4).map(|j| a0[i * 4 + j] * x[j]).sum();
        }
        let mut a = a0;
        solve_dense(&mut a, &mut b).unwrap();
        for i in 0..4 {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }
}
