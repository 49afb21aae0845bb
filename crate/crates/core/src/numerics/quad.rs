//! Gauss–Kronrod adaptive quadrature and Gauss–Hermite rules.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::Real;

// 15-point Kronrod abscissae/weights with the embedded 7-point Gauss rule
// (QUADPACK dqk15 constants).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss–Kronrod 15(7) panel on [a, b]; returns (K15 value, |K15 - G7|).
fn gk15<T: Real>(f: &impl Fn(T) -> T, a: T, b: T) -> (T, T) {
    let half = (b - a) * T::half();
    let mid = (a + b) * T::half();
    let mut kronrod = T::zero();
    let mut gauss = T::zero();
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let dx = half * T::cast(x);
        let v = if i == 7 {
            f(mid)
        } else {
            f(mid - dx) + f(mid + dx)
        };
        kronrod = kronrod + T::cast(wk) * v;
        if i % 2 == 1 {
            gauss = gauss + T::cast(WG[i / 2]) * v;
        }
    }
    // i == 7 is the centre node, part of the Kronrod extension only.
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    (kronrod, (kronrod - gauss).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over [a, b] (a > b allowed,
/// handled by orientation) to absolute tolerance `abs_tol`.
pub fn adaptive<T: Real>(f: impl Fn(T) -> T, a: T, b: T, abs_tol: T) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let (lo, hi, sign) = if a < b {
        (a, b, T::one())
    } else {
        (b, a, -T::one())
    };
    let mut total = T::zero();
    // Stack of (lo, hi, tol_share, depth).
    let mut stack = vec![(lo, hi, abs_tol.max(T::cast(1e-300)), 0_u32)];
    while let Some((x0, x1, tol, depth)) = stack.pop() {
        let (v, e) = gk15(&f, x0, x1);
        if !v.is_finite() {
            return Err(Error::Quadrature(format!(
                "integrand non-finite on [{}, {}]",
                x0.as_f64(),
                x1.as_f64()
            )));
        }
        if e <= tol || depth >= 60 {
            if depth >= 60 && e > tol * T::cast(100.0) {
                return Err(Error::Quadrature(format!(
                    "failed to reach tolerance on [{}, {}] (err {:.3e})",
                    x0.as_f64(),
                    x1.as_f64(),
                    e.as_f64()
                )));
            }
            total = total + v;
        } else {
            let mid = (x0 + x1) * T::half();
            let half_tol = tol * T::half();
            stack.push((x0, mid, half_tol, depth + 1));
            stack.push((mid, x1, half_tol, depth + 1));
        }
    }
    Ok(sign * total)
}

/// Nodes and weights of the n-point Gauss–Hermite rule for weight e^{-y^2},
/// computed with Newton refinement on the scaled three-term recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let m = n.div_ceil(2);
    let mut z = 0.0_f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / (j as f64 + 1.0)).sqrt() * p2
                    - (j as f64 / (j as f64 + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    (nodes, weights)
}

/// Cached 96-point Gauss–Hermite rule used by the lognormal expectations.
pub fn gauss_hermite_96() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_hermite(96))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_polynomial_exactly() {
        let v = adaptive(|x: f64| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-13).unwrap();
        // antiderivative x^4/4 - x^2 + x
        assert_relative_eq!(v, (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0), epsilon = 1e-12);
    }

    #[test]
    fn handles_reversed_orientation() {
        let a = adaptive(|x: f64| x.exp(), 0.0, 1.0, 1e-13).unwrap();
        let b = adaptive(|x: f64| x.exp(), 1.0, 0.0, 1e-13).unwrap();
        assert_relative_eq!(a, -b, epsilon = 1e-13);
        assert_relative_eq!(a, std::f64::consts::E - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn adaptive_resolves_peaked_integrand() {
        // \int_0^1 1/sqrt(x) dx = 2, integrable singularity at the endpoint.
        let v = adaptive(|x: f64| 1.0 / x.max(1e-300).sqrt(), 1e-12, 1.0, 1e-10).unwrap();
        assert_relative_eq!(v, 2.0 - 2e-6, epsilon = 1e-6);
    }

    #[test]
    fn hermite_rule_integrates_moments() {
        let (x, w) = gauss_hermite(64);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, std::f64::consts::PI.sqrt(), epsilon = 1e-12);
        // second moment of e^{-y^2} is sqrt(pi)/2
        let m2: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi * xi).sum();
        assert_relative_eq!(m2, std::f64::consts::PI.sqrt() / 2.0, epsilon = 1e-11);
    }

    #[test]
    fn hermite_rule_handles_gaussian_expectation() {
        // E[Z^4] = 3 for Z ~ N(0,1), via z = sqrt(2) y.
        let (x, w) = gauss_hermite_96();
        let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
        let m4: f64 = x
            .iter()
            .zip(w)
            .map(|(y, wi)| {
                let z = std::f64::consts::SQRT_2 * y;
                wi * z.powi(4)
            })
            .sum::<f64>()
            * inv_sqrt_pi;
        assert_relative_eq!(m4, 3.0, epsilon = 1e-10);
    }
}
