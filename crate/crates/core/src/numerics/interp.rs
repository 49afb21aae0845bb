//! Piecewise-linear interpolation on sorted tables.

use crate::scalar::Real;

/// Index of the left bracketing node for `x` in the sorted slice `xs`,
/// clamped so that `i` and `i + 1` are always valid.
pub fn bracket<T: Real>(xs: &[T], x: T) -> usize {
    debug_assert!(xs.len() >= 2);
    match xs.binary_search_by(|a| a.partial_cmp(&x).expect("non-NaN grid")) {
        Ok(i) => i.min(xs.len() - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(xs.len() - 2),
    }
}

/// Linear interpolation of (xs, ys) at `x`, constant-extrapolated outside.
pub fn linear<T: Real>(xs: &[T], ys: &[T], x: T) -> T {
    debug_assert_eq!(xs.len(), ys.len());
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let i = bracket(xs, x);
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Inverse interpolation: for a strictly increasing `ys` table over `xs`,
/// find x with linear(xs, ys, x) = y. Clamped at the table ends.
pub fn inverse_linear<T: Real>(xs: &[T], ys: &[T], y: T) -> T {
    debug_assert_eq!(xs.len(), ys.len());
    if y <= ys[0] {
        return xs[0];
    }
    if y >= ys[ys.len() - 1] {
        return xs[xs.len() - 1];
    }
    let i = bracket(ys, y);
    let dy = ys[i + 1] - ys[i];
    if dy == T::zero() {
        return xs[i];
    }
    let t = (y - ys[i]) / dy;
    xs[i] + t * (xs[i + 1] - xs[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_and_clamps() {
        let xs = [0.0, 1.0, 3.0];
        let ys = [0.0, 2.0, 4.0];
        assert_eq!(linear(&xs, &ys, 0.5), 1.0);
        assert_eq!(linear(&xs, &ys, 2.0), 3.0);
        assert_eq!(linear(&xs, &ys, -1.0), 0.0);
        assert_eq!(linear(&xs, &ys, 9.0), 4.0);
    }

    #[test]
    fn inverse_recovers_forward() {
        let xs = [0.0_f64, 1.0, 2.0, 5.0];
        let ys = [1.0, 1.5, 4.0, 9.0];
        for &y in &[1.0, 1.2, 3.0, 8.0, 9.0] {
            let x = inverse_linear(&xs, &ys, y);
            assert!((linear(&xs, &ys, x) - y).abs() < 1e-12);
        }
    }
}
