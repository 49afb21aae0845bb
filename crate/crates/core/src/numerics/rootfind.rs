//! Scalar root finding: bisection with optional bracket expansion.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Bisects `f` on [a, b] (must bracket a sign change) to a relative interval
/// width of `rel_tol`. Returns the midpoint of the final bracket.
pub fn bisect<T: Real>(f: impl Fn(T) -> T, a: T, b: T, rel_tol: T, max_iter: usize) -> Result<T> {
    let (mut lo, mut hi) = if a < b { (a, b) } else { (b, a) };
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return Err(Error::SignPattern(format!(
            "no sign change on [{}, {}]: f = ({:.3e}, {:.3e})",
            lo.as_f64(),
            hi.as_f64(),
            flo.as_f64(),
            fhi.as_f64()
        )));
    }
    let width_goal = rel_tol * (hi - lo).abs().max((hi.abs() + lo.abs()) * T::half());
    for _ in 0..max_iter {
        let mid = (lo + hi) * T::half();
        if (hi - lo).abs() <= width_goal || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::half())
}

/// Expands [a, b] geometrically to the right until `f` changes sign, then
/// bisects. `f(a)` fixes the reference sign.
pub fn bisect_expanding<T: Real>(
    f: impl Fn(T) -> T,
    a: T,
    mut b: T,
    rel_tol: T,
    max_expand: usize,
) -> Result<T> {
    let fa = f(a);
    if fa == T::zero() {
        return Ok(a);
    }
    let mut lo = a;
    for _ in 0..max_expand {
        let fb = f(b);
        if fb == T::zero() {
            return Ok(b);
        }
        if (fb > T::zero()) != (fa > T::zero()) {
            return bisect(f, lo, b, rel_tol, 400);
        }
        lo = b;
        b = b * T::two();
    }
    Err(Error::SignPattern(
        "bracket expansion found no sign change".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_simple_root() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn bisect_rejects_same_sign_bracket() {
        assert!(bisect(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_err());
    }

    #[test]
    fn expansion_reaches_distant_root() {
        let r = bisect_expanding(|x: f64| x - 37.5, 0.0, 1.0, 1e-13, 60).unwrap();
        assert!((r - 37.5).abs() < 1e-10);
    }
}
