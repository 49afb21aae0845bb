//! Variational-inequality solver for the detection value function and the
//! optimal stopping boundaries.
//!
//! The state pair is (X, log Phi). Its diffusion matrix has rank one (a
//! single Brownian driver), so the solver works in sheared coordinates
//! (w, u) = (F(x) - log phi, log phi), where F is the state coordinate with
//! unit-correlated noise (F' = rho/sigma). In these coordinates the noise
//! acts on u alone and w carries pure one-signed advection with speed
//! k(x) + 1/2 on the intrinsic clock, so an upwind discretization yields an
//! M-matrix on any rectangular grid and the discrete system is
//! block-triangular in w: one sweep of per-level tridiagonal obstacle solves
//! is exact.

mod extract;
mod horizon;
mod level;
mod transform;
mod vi;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use extract::{extract_boundaries, validate_boundaries, BoundaryReport};
pub use horizon::solve_finite_horizon;
pub use transform::StateMap;
pub use vi::{solve_vi, SolveParams};

/// Rectangular grid: state nodes by log-weighted-likelihood nodes.
#[derive(Debug, Clone, Serialize)]
pub struct Grid2D<T: Real> {
    pub x_nodes: Vec<T>,
    pub logphi_nodes: Vec<T>,
}

fn check_axis<T: Real>(nodes: &[T], name: &str) -> Result<()> {
    if nodes.len() < 16 {
        return Err(Error::InvalidArgument(format!(
            "{name} needs at least 16 nodes, got {}",
            nodes.len()
        )));
    }
    let mut prev_step = None;
    for w in nodes.windows(2) {
        let d = w[1] - w[0];
        if !(d > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be strictly increasing"
            )));
        }
        if let Some(p) = prev_step {
            let ratio = if d > p { d / p } else { p / d };
            if ratio > T::cast(10.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} adjacent spacing ratio {} exceeds 10",
                    ratio.as_f64()
                )));
            }
        }
        prev_step = Some(d);
    }
    Ok(())
}

impl<T: Real> Grid2D<T> {
    pub fn new(x_nodes: Vec<T>, logphi_nodes: Vec<T>) -> Result<Self> {
        check_axis(&x_nodes, "x grid")?;
        check_axis(&logphi_nodes, "log-phi grid")?;
        let first = logphi_nodes[0];
        let last = *logphi_nodes.last().expect("nonempty");
        if !(first < T::zero() && last > T::zero()) {
            return Err(Error::InvalidArgument(
                "log-phi grid must bracket 0 strictly".into(),
            ));
        }
        Ok(Self {
            x_nodes,
            logphi_nodes,
        })
    }

    /// Uniform log-phi axis and a linearly or log-spaced state axis.
    pub fn regular(
        x_lo: T,
        x_hi: T,
        nx: usize,
        logphi_lo: T,
        logphi_hi: T,
        nu: usize,
        log_x: bool,
    ) -> Result<Self> {
        let x_nodes = if log_x {
            crate::model::log_spaced(x_lo, x_hi, nx)
        } else {
            crate::model::lin_spaced(x_lo, x_hi, nx)
        };
        Self::new(x_nodes, crate::model::lin_spaced(logphi_lo, logphi_hi, nu))
    }

    pub fn nx(&self) -> usize {
        self.x_nodes.len()
    }

    pub fn nu(&self) -> usize {
        self.logphi_nodes.len()
    }
}

/// Stopping payoff min(1, e^u) at a log-likelihood node.
pub fn payoff<T: Real>(u: T) -> T {
    if u >= T::zero() {
        T::one()
    } else {
        u.exp()
    }
}

/// Grid approximation of the value function, with the solver's
/// complementarity residual and iteration count.
#[derive(Debug, Clone)]
pub struct ValueSurface<T: Real> {
    pub grid: Grid2D<T>,
    values: Vec<T>,
    pub residual: T,
    pub iterations: usize,
}

impl<T: Real> ValueSurface<T> {
    pub(crate) fn new(grid: Grid2D<T>, values: Vec<T>, residual: T, iterations: usize) -> Self {
        debug_assert_eq!(values.len(), grid.nx() * grid.nu());
        Self {
            grid,
            values,
            residual,
            iterations,
        }
    }

    #[inline]
    pub fn at(&self, ix: usize, ju: usize) -> T {
        self.values[ix * self.grid.nu() + ju]
    }

    pub fn row(&self, ix: usize) -> &[T] {
        let nu = self.grid.nu();
        &self.values[ix * nu..(ix + 1) * nu]
    }

    /// Bilinear value at an arbitrary interior point.
    pub fn value_at(&self, x: T, logphi: T) -> T {
        let xs = &self.grid.x_nodes;
        let us = &self.grid.logphi_nodes;
        let i = crate::numerics::interp::bracket(xs, x);
        let j = crate::numerics::interp::bracket(us, logphi);
        let tx = ((x - xs[i]) / (xs[i + 1] - xs[i])).max(T::zero()).min(T::one());
        let tu = ((logphi - us[j]) / (us[j + 1] - us[j]))
            .max(T::zero())
            .min(T::one());
        let v00 = self.at(i, j);
        let v01 = self.at(i, j + 1);
        let v10 = self.at(i + 1, j);
        let v11 = self.at(i + 1, j + 1);
        (T::one() - tx) * ((T::one() - tu) * v00 + tu * v01)
            + tx * ((T::one() - tu) * v10 + tu * v11)
    }

    /// Largest violation of 0 <= V <= min(1, phi) over the grid.
    pub fn payoff_bound_defect(&self) -> T {
        let mut worst = T::zero();
        for ix in 0..self.grid.nx() {
            for (ju, &u) in self.grid.logphi_nodes.iter().enumerate() {
                let v = self.at(ix, ju);
                worst = worst.max(v - payoff(u)).max(-v);
            }
        }
        worst
    }

    /// Largest positive second divided difference of V in phi along any row
    /// (a concave row has all of them nonpositive).
    pub fn concavity_defect(&self) -> T {
        let mut worst = T::zero();
        let phis: Vec<T> = self.grid.logphi_nodes.iter().map(|&u| u.exp()).collect();
        for ix in 0..self.grid.nx() {
            let row = self.row(ix);
            for j in 1..phis.len() - 1 {
                let dm = phis[j] - phis[j - 1];
                let dp = phis[j + 1] - phis[j];
                let second = ((row[j + 1] - row[j]) / dp - (row[j] - row[j - 1]) / dm)
                    * T::two()
                    / (dm + dp);
                worst = worst.max(second);
            }
        }
        worst
    }

    /// Largest violation of joint monotonicity (V nondecreasing in x and phi
    /// together), meaningful under the decreasing-rho regime.
    pub fn monotonicity_defect(&self) -> T {
        let mut worst = T::zero();
        for ix in 0..self.grid.nx() {
            for ju in 0..self.grid.nu() {
                if ix + 1 < self.grid.nx() {
                    worst = worst.max(self.at(ix, ju) - self.at(ix + 1, ju));
                }
                if ju + 1 < self.grid.nu() {
                    worst = worst.max(self.at(ix, ju) - self.at(ix, ju + 1));
                }
            }
        }
        worst
    }

    /// Writes the surface as CSV with header x,phi,V.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,phi,V")?;
        for (ix, &x) in self.grid.x_nodes.iter().enumerate() {
            for (ju, &u) in self.grid.logphi_nodes.iter().enumerate() {
                writeln!(w, "{:.16e},{:.16e},{:.16e}", x, u.exp(), self.at(ix, ju))?;
            }
        }
        Ok(())
    }
}

/// Sampled stopping boundaries l0(x) < 1 < l1(x).
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryPair<T: Real> {
    pub x_nodes: Vec<T>,
    pub l0: Vec<T>,
    pub l1: Vec<T>,
}

impl<T: Real> BoundaryPair<T> {
    /// Constant band replicated over a two-node state axis; the natural
    /// embedding of a constant-SNR solution.
    pub fn constant(x_lo: T, x_hi: T, l0: T, l1: T) -> Self {
        Self {
            x_nodes: vec![x_lo, x_hi],
            l0: vec![l0, l0],
            l1: vec![l1, l1],
        }
    }

    pub fn interp_l0(&self, x: T) -> T {
        crate::numerics::interp::linear(&self.x_nodes, &self.l0, x)
    }

    pub fn interp_l1(&self, x: T) -> T {
        crate::numerics::interp::linear(&self.x_nodes, &self.l1, x)
    }

    /// Writes the pair as CSV with header x,l0,l1.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,l0,l1")?;
        for i in 0..self.x_nodes.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e}",
                self.x_nodes[i], self.l0[i], self.l1[i]
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation_rules() {
        let u: Vec<f64> = crate::model::lin_spaced(-2.0, 2.0, 33);
        let x: Vec<f64> = crate::model::lin_spaced(0.5, 2.0, 17);
        assert!(Grid2D::new(x.clone(), u.clone()).is_ok());
        // too few nodes
        assert!(Grid2D::new(crate::model::lin_spaced(0.5, 2.0, 8), u.clone()).is_err());
        // log-phi axis must bracket zero
        assert!(Grid2D::new(x.clone(), crate::model::lin_spaced(0.5, 2.0, 33)).is_err());
        // non-monotone axis
        let mut bad = x.clone();
        bad.swap(3, 4);
        assert!(Grid2D::new(bad, u).is_err());
    }

    #[test]
    fn payoff_kinks_at_one() {
        assert_eq!(payoff(0.5_f64), 1.0);
        assert_eq!(payoff(0.0_f64), 1.0);
        assert!((payoff(-1.0_f64) - (-1.0_f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn boundary_pair_interpolates() {
        let pair = BoundaryPair {
            x_nodes: vec![0.0_f64, 1.0],
            l0: vec![0.5, 0.7],
            l1: vec![2.0, 1.5],
        };
        assert!((pair.interp_l0(0.5) - 0.6).abs() < 1e-15);
        assert!((pair.interp_l1(0.5) - 1.75).abs() < 1e-15);
        // clamped outside
        assert!((pair.interp_l0(-3.0) - 0.5).abs() < 1e-15);
    }
}
