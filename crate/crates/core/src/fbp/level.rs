//! Per-level obstacle solve: a tridiagonal linear complementarity problem
//! min(q - M v, g - v) = 0 with an M-matrix M, solved by policy iteration
//! over the stop/continue indicator with a direct tridiagonal solve per
//! sweep, and a projected SOR fallback if the policy cycles.
//!
//! `q - M v` is the discrete generator residual of the continuation
//! equation: it vanishes on continuation nodes and must be nonnegative where
//! the value sits on the payoff.

use crate::error::{Error, Result};
use crate::numerics::tridiag;
use crate::scalar::Real;

/// Assembled tridiagonal rows of M (continuation operator) and the payoff.
/// End nodes are Dirichlet: v = g there.
pub struct LevelSystem<'a, T: Real> {
    pub lower: &'a [T],
    pub diag: &'a [T],
    pub upper: &'a [T],
    pub rhs: &'a [T],
    pub g: &'a [T],
}

pub struct LevelScratch<T: Real> {
    lo: Vec<T>,
    di: Vec<T>,
    up: Vec<T>,
    rh: Vec<T>,
    thomas: Vec<T>,
}

impl<T: Real> LevelScratch<T> {
    pub fn new() -> Self {
        Self {
            lo: Vec::new(),
            di: Vec::new(),
            up: Vec::new(),
            rh: Vec::new(),
            thomas: Vec::new(),
        }
    }
}

/// Continuation-equation excess (q - M v)_j; nonnegative at stopped nodes,
/// zero at continuation nodes.
fn excess_row<T: Real>(sys: &LevelSystem<'_, T>, v: &[T], j: usize) -> T {
    sys.rhs[j] - (sys.diag[j] * v[j] + sys.lower[j] * v[j - 1] + sys.upper[j] * v[j + 1])
}

/// Solves the level LCP. `stopped` carries the warm-start policy and returns
/// the final one; `v` returns the solution. Returns the number of policy
/// sweeps used.
pub fn solve_level<T: Real>(
    sys: &LevelSystem<'_, T>,
    stopped: &mut [bool],
    v: &mut [T],
    scratch: &mut LevelScratch<T>,
    max_iters: usize,
) -> Result<usize> {
    let n = sys.g.len();
    debug_assert!(n >= 3);
    stopped[0] = true;
    stopped[n - 1] = true;

    for sweep in 1..=max_iters {
        scratch.lo.clear();
        scratch.di.clear();
        scratch.up.clear();
        scratch.rh.clear();
        scratch.lo.extend_from_slice(sys.lower);
        scratch.di.extend_from_slice(sys.diag);
        scratch.up.extend_from_slice(sys.upper);
        scratch.rh.extend_from_slice(sys.rhs);
        for j in 0..n {
            if stopped[j] {
                scratch.lo[j] = T::zero();
                scratch.di[j] = T::one();
                scratch.up[j] = T::zero();
                scratch.rh[j] = sys.g[j];
            }
        }
        tridiag::solve_in_place(
            &scratch.lo,
            &scratch.di,
            &scratch.up,
            &mut scratch.rh,
            &mut scratch.thomas,
        )?;
        v.copy_from_slice(&scratch.rh);

        let mut changed = false;
        for j in 1..n - 1 {
            if !stopped[j] {
                // continuing pushed the value above the payoff: stop instead
                let tol = T::cast(1e-13) * (T::one() + sys.g[j].abs());
                if v[j] > sys.g[j] + tol {
                    stopped[j] = true;
                    changed = true;
                }
            } else {
                // continuation at this node would be cheaper: release it
                let ex = excess_row(sys, v, j);
                let tol = T::cast(1e-13) * sys.diag[j] * (T::one() + sys.g[j].abs());
                if ex < -tol {
                    stopped[j] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(sweep);
        }
    }

    // Policy cycled; fall back to projected SOR from the current iterate.
    psor_level(sys, v, T::cast(1.5), 200_000, T::cast(1e-13))?;
    for j in 1..n - 1 {
        stopped[j] = sys.g[j] - v[j] <= T::cast(1e-12) * (T::one() + sys.g[j].abs());
    }
    Ok(max_iters)
}

/// Projected SOR for the same LCP (upper obstacle v <= g).
fn psor_level<T: Real>(
    sys: &LevelSystem<'_, T>,
    v: &mut [T],
    omega: T,
    max_sweeps: usize,
    tol: T,
) -> Result<()> {
    let n = sys.g.len();
    v[0] = sys.g[0];
    v[n - 1] = sys.g[n - 1];
    for _ in 0..max_sweeps {
        let mut delta = T::zero();
        for j in 1..n - 1 {
            let gs = (sys.rhs[j] - sys.lower[j] * v[j - 1] - sys.upper[j] * v[j + 1]) / sys.diag[j];
            let cand = ((T::one() - omega) * v[j] + omega * gs).min(sys.g[j]);
            delta = delta.max((cand - v[j]).abs());
            v[j] = cand;
        }
        if delta <= tol {
            return Ok(());
        }
    }
    Err(Error::NonConvergence(
        "projected SOR did not reach tolerance".into(),
    ))
}

/// Normalized complementarity residual of the level solution.
pub fn level_residual<T: Real>(sys: &LevelSystem<'_, T>, v: &[T]) -> T {
    let n = sys.g.len();
    let mut worst = T::zero();
    for j in 1..n - 1 {
        let ex = excess_row(sys, v, j) / sys.diag[j];
        let s = sys.g[j] - v[j];
        worst = worst.max(ex.min(s).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    // Continuation equation -v'' = 4 (concave arcs) under a tent obstacle
    // g = min(x, 1 - x): contact on the flanks, a free region around the
    // kink with smooth fit at x = 1/4 and 3/4, and v(1/2) = 3/8 exactly.
    fn toy_system(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let h = 1.0 / (n as f64 - 1.0);
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut g = vec![0.0; n];
        for j in 0..n {
            let x = j as f64 * h;
            g[j] = x.min(1.0 - x);
            lower[j] = -1.0 / (h * h);
            upper[j] = -1.0 / (h * h);
            diag[j] = 2.0 / (h * h);
            rhs[j] = 4.0;
        }
        (lower, diag, upper, rhs, g)
    }

    #[test]
    fn level_lcp_satisfies_complementarity_with_contact() {
        let n = 101;
        let (lower, diag, upper, rhs, g) = toy_system(n);
        let sys = LevelSystem {
            lower: &lower,
            diag: &diag,
            upper: &upper,
            rhs: &rhs,
            g: &g,
        };
        let mut stopped = vec![true; n];
        let mut v = vec![0.0; n];
        let mut scratch = LevelScratch::new();
        let sweeps = solve_level(&sys, &mut stopped, &mut v, &mut scratch, 100).unwrap();
        assert!(sweeps < 50);
        assert!(level_residual(&sys, &v) < 1e-10);
        // respects the obstacle, touches it on the flanks, free at the kink
        assert!(v.iter().zip(&g).all(|(a, b)| a <= &(b + 1e-12)));
        assert!(stopped[10] && stopped[n - 11]);
        assert!(!stopped[n / 2]);
        // smooth-fit solution: v(1/2) = 3/8 up to O(h^2)
        assert!((v[n / 2] - 0.375).abs() < 1e-3, "v(1/2) = {}", v[n / 2]);
    }

    #[test]
    fn policy_iteration_matches_projected_sor() {
        let n = 81;
        let (lower, diag, upper, rhs, g) = toy_system(n);
        let sys = LevelSystem {
            lower: &lower,
            diag: &diag,
            upper: &upper,
            rhs: &rhs,
            g: &g,
        };
        let mut stopped = vec![true; n];
        let mut v = vec![0.0; n];
        let mut scratch = LevelScratch::new();
        solve_level(&sys, &mut stopped, &mut v, &mut scratch, 100).unwrap();

        let mut w = g.clone();
        psor_level(&sys, &mut w, 1.5, 200_000, 1e-13).unwrap();
        for j in 0..n {
            assert!(
                (v[j] - w[j]).abs() < 1e-9,
                "node {j}: policy {} vs psor {}",
                v[j],
                w[j]
            );
        }
    }
}
