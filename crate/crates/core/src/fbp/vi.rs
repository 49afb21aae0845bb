//! Stationary variational-inequality solve on the intrinsic clock.

use super::level::{level_residual, solve_level, LevelScratch, LevelSystem};
use super::transform::StateMap;
use super::{payoff, Grid2D, ValueSurface};
use crate::error::{Error, Result};
use crate::model::{check_assumptions, DiffusionModel, Regime};
use crate::scalar::Real;

/// Solver settings. Policy iteration with direct tridiagonal solves handles
/// each advection level; the sweep over levels is exact because the upwind
/// coupling is one-directional in the certified regimes.
#[derive(Debug, Clone, Copy)]
pub struct SolveParams<T: Real> {
    /// Acceptable normalized complementarity residual.
    pub tol: T,
    /// Policy-iteration sweep cap per level before the SOR fallback.
    pub max_policy_iters: usize,
    /// Cap on the internal advection-level count.
    pub max_levels: usize,
    /// Route a constant-SNR model through the generic sweep instead of the
    /// single-level shortcut; the two must agree (used for cross-checks).
    pub force_general: bool,
}

impl<T: Real> Default for SolveParams<T> {
    fn default() -> Self {
        Self {
            tol: T::cast(1e-8),
            max_policy_iters: 200,
            max_levels: 40_000,
            force_general: false,
        }
    }
}

pub(super) enum Sweep {
    /// Advection toward larger w (k + 1/2 > 0): levels depend on the next
    /// larger one, sweep from the top.
    Forward,
    /// Advection toward smaller w.
    Backward,
    /// No state dependence (constant SNR): levels decouple.
    Decoupled,
}

pub(super) struct Discretization<T: Real> {
    pub u: Vec<T>,
    pub w0: T,
    pub dw: T,
    pub nw: usize,
    pub g: Vec<T>,
    /// Lower/upper tridiagonal couplings from the u-operator (level
    /// independent; end entries unused).
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    /// Level-major |advection|/dw and running cost: index level * nu + j.
    pub adv: Vec<T>,
    pub hcost: Vec<T>,
    pub sweep: Sweep,
    pub map: StateMap<T>,
}

impl<T: Real> Discretization<T> {
    pub fn nu(&self) -> usize {
        self.u.len()
    }

    /// Level order honoring the advection direction; the first level has no
    /// upstream neighbor and is solved with a zero-gradient closure.
    pub fn level_order(&self) -> Vec<usize> {
        match self.sweep {
            Sweep::Forward => (0..self.nw).rev().collect(),
            Sweep::Backward => (0..self.nw).collect(),
            Sweep::Decoupled => vec![0],
        }
    }

    pub fn neighbor(&self, level: usize) -> Option<usize> {
        match self.sweep {
            Sweep::Forward => {
                if level + 1 < self.nw {
                    Some(level + 1)
                } else {
                    None
                }
            }
            Sweep::Backward => level.checked_sub(1),
            Sweep::Decoupled => None,
        }
    }
}

pub(super) fn build_discretization<T: Real>(
    model: &DiffusionModel<T>,
    grid: &Grid2D<T>,
    regime: Regime,
    max_levels: usize,
) -> Result<Discretization<T>> {
    for &x in &grid.x_nodes {
        model.check_interior(x)?;
    }
    let map = StateMap::build(model, &grid.x_nodes)?;
    let u = grid.logphi_nodes.clone();
    let nu = u.len();
    let g: Vec<T> = u.iter().map(|&uj| payoff(uj)).collect();

    // u-operator: diffusion 1/2 d^2/du^2 plus drift -1/2 d/du, upwinded.
    let mut lower = vec![T::zero(); nu];
    let mut upper = vec![T::zero(); nu];
    for j in 1..nu - 1 {
        let dm = u[j] - u[j - 1];
        let dp = u[j + 1] - u[j];
        let cm = T::one() / (dm * (dm + dp));
        let cp = T::one() / (dp * (dm + dp));
        lower[j] = cm + T::half() / dm;
        upper[j] = cp;
    }

    // Internal advection levels w = F(x) - u.
    let (s_lo, s_hi) = map.span();
    let u_lo = u[0];
    let u_hi = u[nu - 1];
    let mut min_ds = T::infinity();
    let s_nodes: Vec<T> = grid.x_nodes.iter().map(|&x| map.forward(x)).collect();
    for w in s_nodes.windows(2) {
        min_ds = min_ds.min(w[1] - w[0]);
    }
    let mut min_du = T::infinity();
    for w in u.windows(2) {
        min_du = min_du.min(w[1] - w[0]);
    }
    let span = (s_hi - u_lo) - (s_lo - u_hi);
    let mut dw = min_ds.min(min_du);
    let mut nw = (span / dw).as_f64().ceil() as usize + 2;
    if nw > max_levels {
        nw = max_levels;
    }
    dw = span / T::cast(nw - 1);
    let w0 = s_lo - u_hi;

    let sweep = match regime {
        Regime::ConstantSnr => Sweep::Decoupled,
        Regime::A31 => Sweep::Forward,
        Regime::A32 => Sweep::Backward,
        Regime::None => {
            return Err(Error::Regime(
                "solve requires a certified regime (A31, A32 or constant SNR)".into(),
            ))
        }
    };

    let levels_stored = match sweep {
        Sweep::Decoupled => 1,
        _ => nw,
    };
    let c = model.cost_rate();
    let mut adv = vec![T::zero(); levels_stored * nu];
    let mut hcost = vec![T::zero(); levels_stored * nu];
    for i in 0..levels_stored {
        let w = w0 + dw * T::cast(i);
        for j in 0..nu {
            let s = (w + u[j]).max(s_lo).min(s_hi);
            let x = map.inverse(s);
            let r2 = model.rho_sq(x)?;
            if !(r2 > T::zero()) {
                return Err(Error::DegenerateModel(format!(
                    "rho vanishes at x = {}",
                    x.as_f64()
                )));
            }
            hcost[i * nu + j] = c * (T::one() + u[j].exp()) / r2;
            let b = match sweep {
                Sweep::Decoupled => T::zero(),
                _ => {
                    let k = model.k(x)?;
                    let b = k + T::half();
                    match sweep {
                        Sweep::Forward => {
                            if b < -T::cast(1e-9) {
                                return Err(Error::Regime(format!(
                                    "k(x) + 1/2 = {} < 0 inside an A31 solve",
                                    b.as_f64()
                                )));
                            }
                            b.max(T::zero())
                        }
                        Sweep::Backward => {
                            if b > T::cast(1e-9) {
                                return Err(Error::Regime(format!(
                                    "k(x) + 1/2 = {} > 0 inside an A32 solve",
                                    b.as_f64()
                                )));
                            }
                            (-b).max(T::zero())
                        }
                        Sweep::Decoupled => unreachable!(),
                    }
                }
            };
            adv[i * nu + j] = b / dw;
        }
    }

    Ok(Discretization {
        u,
        w0,
        dw,
        nw: levels_stored,
        g,
        lower,
        upper,
        adv,
        hcost,
        sweep,
        map,
    })
}

/// Maps level-major internal values onto the requested (x, log phi) grid by
/// linear interpolation along the advection coordinate.
pub(super) fn to_surface<T: Real>(
    disc: &Discretization<T>,
    grid: Grid2D<T>,
    levels: &[T],
    residual: T,
    iterations: usize,
) -> ValueSurface<T> {
    let nu = disc.nu();
    let nx = grid.nx();
    let mut values = vec![T::zero(); nx * nu];
    for (ix, &x) in grid.x_nodes.iter().enumerate() {
        let s = disc.map.forward(x);
        for j in 0..nu {
            let v = if disc.nw == 1 {
                levels[j]
            } else {
                let w = s - disc.u[j];
                let pos = ((w - disc.w0) / disc.dw).as_f64();
                let i = (pos.floor().max(0.0) as usize).min(disc.nw - 2);
                let t = (pos - i as f64).clamp(0.0, 1.0);
                let t = T::cast(t);
                levels[i * nu + j] * (T::one() - t) + levels[(i + 1) * nu + j] * t
            };
            values[ix * nu + j] = v;
        }
    }
    ValueSurface::new(grid, values, residual, iterations)
}

/// Solves the stationary obstacle problem for the value surface.
///
/// The complementarity system is solved exactly (up to tridiagonal rounding)
/// in one pass over advection levels; the reported residual is the largest
/// normalized violation of min(continuation residual, payoff gap) = 0 over
/// internal nodes.
pub fn solve_vi<T: Real>(
    model: &DiffusionModel<T>,
    grid: &Grid2D<T>,
    params: &SolveParams<T>,
) -> Result<ValueSurface<T>> {
    let report = check_assumptions(model, &grid.x_nodes)?;
    let mut regime = report.regime;
    if !regime.certified() {
        return Err(Error::Regime(format!(
            "assumption check returned '{}' ({} violation(s))",
            regime,
            report.violations.len()
        )));
    }
    if params.force_general && regime == Regime::ConstantSnr {
        regime = Regime::A31;
    }
    let disc = build_discretization(model, grid, regime, params.max_levels)?;
    let nu = disc.nu();

    let mut levels = vec![T::zero(); disc.nw * nu];
    let mut stopped = vec![true; nu];
    let mut v = vec![T::zero(); nu];
    let mut diag = vec![T::zero(); nu];
    let mut rhs = vec![T::zero(); nu];
    let mut scratch = LevelScratch::new();
    let mut iterations = 0usize;
    let mut residual = T::zero();
    let lower_neg: Vec<T> = disc.lower.iter().map(|&l| -l).collect();
    let upper_neg: Vec<T> = disc.upper.iter().map(|&u| -u).collect();

    for i in disc.level_order() {
        let neighbor = disc.neighbor(i);
        for j in 0..nu {
            let e = if neighbor.is_some() {
                disc.adv[i * nu + j]
            } else {
                T::zero()
            };
            diag[j] = disc.lower[j] + disc.upper[j] + e;
            rhs[j] = disc.hcost[i * nu + j]
                + e * neighbor.map_or(T::zero(), |n| levels[n * nu + j]);
        }
        let sys = LevelSystem {
            lower: &lower_neg,
            diag: &diag,
            upper: &upper_neg,
            rhs: &rhs,
            g: &disc.g,
        };
        iterations += solve_level(&sys, &mut stopped, &mut v, &mut scratch, params.max_policy_iters)?;
        residual = residual.max(level_residual(&sys, &v));
        levels[i * nu..(i + 1) * nu].copy_from_slice(&v);
    }

    if residual > params.tol {
        return Err(Error::NonConvergence(format!(
            "complementarity residual {} exceeds tolerance {}",
            residual.as_f64(),
            params.tol.as_f64()
        )));
    }
    Ok(to_surface(&disc, grid.clone(), &levels, residual, iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_bessel, builtin_constant};

    fn constant_grid() -> Grid2D<f64> {
        Grid2D::regular(-4.0, 4.0, 65, -4.0, 4.0, 129, false).unwrap()
    }

    #[test]
    fn constant_snr_surface_basics() {
        let model = builtin_constant(0.0, 1.0, 1.0).unwrap();
        let surf = solve_vi(&model, &constant_grid(), &SolveParams::default()).unwrap();
        assert!(surf.residual < 1e-8);
        assert!(surf.payoff_bound_defect() <= 1e-12);
        // deep corners sit on the payoff
        let nu = surf.grid.nu();
        assert!((surf.at(0, 0) - payoff(-4.0_f64)).abs() < 1e-12);
        assert!((surf.at(0, nu - 1) - 1.0).abs() < 1e-12);
        // the diagonal phi = 1 is strictly inside the continuation region
        let j_mid = surf
            .grid
            .logphi_nodes
            .iter()
            .position(|&u| u.abs() < 1e-12)
            .unwrap();
        assert!(surf.at(32, j_mid) < 1.0 - 1e-3);
    }

    #[test]
    fn general_sweep_agrees_with_decoupled_shortcut() {
        let model = builtin_constant(0.0, 1.0, 1.0).unwrap();
        let grid = constant_grid();
        let fast = solve_vi(&model, &grid, &SolveParams::default()).unwrap();
        let slow = solve_vi(
            &model,
            &grid,
            &SolveParams {
                force_general: true,
                ..SolveParams::default()
            },
        )
        .unwrap();
        let mut worst = 0.0_f64;
        for ix in 0..grid.nx() {
            for ju in 0..grid.nu() {
                worst = worst.max((fast.at(ix, ju) - slow.at(ix, ju)).abs());
            }
        }
        assert!(worst < 2e-3, "general sweep deviates by {worst}");
    }

    #[test]
    fn uncertified_model_is_rejected() {
        let model = builtin_bessel(0.5, 1.5).unwrap();
        let grid = Grid2D::regular(0.25, 4.0, 33, -2.0, 2.0, 65, true).unwrap();
        assert!(matches!(
            solve_vi(&model, &grid, &SolveParams::default()),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn bessel_surface_is_monotone_and_concave_to_tolerance() {
        let model = builtin_bessel(3.0, 4.0).unwrap();
        let grid = Grid2D::regular(0.25, 6.0, 65, -1.5, 1.5, 129, true).unwrap();
        let surf = solve_vi(&model, &grid, &SolveParams::default()).unwrap();
        assert!(surf.residual < 1e-8);
        assert!(surf.payoff_bound_defect() <= 1e-12);
        assert!(
            surf.monotonicity_defect() <= 1e-9,
            "monotone defect {}",
            surf.monotonicity_defect()
        );
    }
}
