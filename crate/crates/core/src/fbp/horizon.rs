//! Finite-horizon companion solve: backward dynamic programming on the
//! intrinsic clock with implicit steps and payoff projection. Serves as the
//! independent upper half of the value sandwich.

use super::vi::{build_discretization, to_surface};
use super::{Grid2D, ValueSurface};
use crate::error::{Error, Result};
use crate::model::{check_assumptions, DiffusionModel};
use crate::numerics::tridiag;
use crate::scalar::Real;

/// Backward iteration of V(t) = min(G, implicit step of d/dt + generator +
/// running cost) from V(T) = G, returning V(0) on the requested grid.
///
/// `horizon` is measured on the intrinsic clock of the time-changed system;
/// `nt` implicit steps are taken. Shares its spatial discretization with
/// [`super::solve_vi`], so the stationary solution is a fixed point of one
/// projected step and V^T decreases node-wise in T.
pub fn solve_finite_horizon<T: Real>(
    model: &DiffusionModel<T>,
    grid: &Grid2D<T>,
    horizon: T,
    nt: usize,
) -> Result<ValueSurface<T>> {
    if !(horizon > T::zero()) || nt == 0 {
        return Err(Error::InvalidArgument(
            "horizon and step count must be positive".into(),
        ));
    }
    let report = check_assumptions(model, &grid.x_nodes)?;
    if !report.regime.certified() {
        return Err(Error::Regime(format!(
            "assumption check returned '{}'",
            report.regime
        )));
    }
    let disc = build_discretization(model, grid, report.regime, 40_000)?;
    let nu = disc.nu();
    let dt = horizon / T::cast(nt);
    let inv_dt = T::one() / dt;

    // V(T) = G on every level.
    let mut levels: Vec<T> = (0..disc.nw)
        .flat_map(|_| disc.g.iter().copied())
        .collect();
    let mut prev = levels.clone();

    let mut diag = vec![T::zero(); nu];
    let mut lower = vec![T::zero(); nu];
    let mut upper = vec![T::zero(); nu];
    let mut rhs = vec![T::zero(); nu];
    let mut scratch = Vec::new();

    for j in 0..nu {
        lower[j] = -disc.lower[j];
        upper[j] = -disc.upper[j];
    }

    for _ in 0..nt {
        std::mem::swap(&mut prev, &mut levels);
        for i in disc.level_order() {
            let neighbor = disc.neighbor(i);
            for j in 0..nu {
                let e = if neighbor.is_some() {
                    disc.adv[i * nu + j]
                } else {
                    T::zero()
                };
                diag[j] = inv_dt + disc.lower[j] + disc.upper[j] + e;
                rhs[j] = inv_dt * prev[i * nu + j]
                    + disc.hcost[i * nu + j]
                    + e * neighbor.map_or(T::zero(), |n| levels[n * nu + j]);
            }
            // Dirichlet payoff rows at the log-phi edges.
            diag[0] = T::one();
            upper[0] = T::zero();
            rhs[0] = disc.g[0];
            diag[nu - 1] = T::one();
            lower[nu - 1] = T::zero();
            rhs[nu - 1] = disc.g[nu - 1];

            tridiag::solve_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch)?;
            let row = &mut levels[i * nu..(i + 1) * nu];
            for j in 0..nu {
                row[j] = rhs[j].min(disc.g[j]);
            }
            // restore the shared couplings clobbered by the Dirichlet rows
            lower[nu - 1] = -disc.lower[nu - 1];
            upper[0] = -disc.upper[0];
        }
    }

    Ok(to_surface(&disc, grid.clone(), &levels, T::zero(), nt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbp::{payoff, solve_vi, SolveParams};
    use crate::model::builtin_constant;
    use crate::simulate::supremum;

    fn grid() -> Grid2D<f64> {
        Grid2D::regular(-3.0, 3.0, 49, -3.0, 3.0, 97, false).unwrap()
    }

    #[test]
    fn short_horizon_stays_near_payoff() {
        let model = builtin_constant(0.0, 1.0, 1.0).unwrap();
        let g = grid();
        let t = 1e-8;
        let surf = solve_finite_horizon(&model, &g, t, 1).unwrap();
        // one implicit step of size t moves V below G by at most t * max(H)
        let h_max = model.cost_rate() * (1.0 + (3.0_f64).exp());
        let mut worst = 0.0_f64;
        for (ju, &u) in g.logphi_nodes.iter().enumerate() {
            for ix in 0..g.nx() {
                worst = worst.max((surf.at(ix, ju) - payoff(u)).abs());
            }
        }
        assert!(worst <= t * h_max * 1.1 + 1e-12, "deviation {worst}");
    }

    #[test]
    fn value_decreases_in_horizon_and_sandwiches_stationary() {
        let model = builtin_constant(0.0, 1.0, 1.0).unwrap();
        let g = grid();
        // shared step size so the chains are nested
        let dt = 1.0 / 16.0;
        let horizons = [1.0, 2.0, 4.0, 8.0];
        let mut prev: Option<ValueSurface<f64>> = None;
        let mut last = None;
        for &t in &horizons {
            let surf = solve_finite_horizon(&model, &g, t, (t / dt) as usize).unwrap();
            if let Some(p) = &prev {
                for ix in 0..g.nx() {
                    for ju in 0..g.nu() {
                        assert!(
                            surf.at(ix, ju) <= p.at(ix, ju) + 1e-12,
                            "V^T not decreasing at ({ix}, {ju})"
                        );
                    }
                }
            }
            prev = Some(surf);
            last = prev.clone();
        }
        let v8 = last.unwrap();
        let stat = solve_vi(&model, &g, &SolveParams::default()).unwrap();
        for ix in 0..g.nx() {
            for (ju, &u) in g.logphi_nodes.iter().enumerate() {
                let phi = u.exp();
                let upper = v8.at(ix, ju);
                let lower = upper - supremum::gamma(phi, 8.0);
                let v = stat.at(ix, ju);
                assert!(v <= upper + 1e-10, "upper sandwich fails at ({ix}, {ju})");
                assert!(
                    v >= lower - 1e-6,
                    "lower sandwich fails at ({ix}, {ju}): {v} < {lower}"
                );
            }
        }
    }
}
