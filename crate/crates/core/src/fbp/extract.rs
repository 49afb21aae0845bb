//! Boundary extraction from a solved surface, and regime validation.

use serde::Serialize;

use super::{payoff, BoundaryPair, ValueSurface};
use crate::error::{Error, Result};
use crate::model::Regime;
use crate::scalar::Real;

/// Pulls the contact boundaries out of a surface row by row.
///
/// For each state node, the lower boundary is the level where the payoff gap
/// G - V first exceeds `contact_tol` scanning upward from the bottom, and the
/// upper boundary mirrors it from the top; both are refined by linear
/// interpolation of the gap between the bracketing nodes. A row whose edge
/// node is already off the payoff means the truncation is too narrow and
/// extraction fails.
pub fn extract_boundaries<T: Real>(
    surface: &ValueSurface<T>,
    contact_tol: T,
) -> Result<BoundaryPair<T>> {
    if !(contact_tol > T::zero()) {
        return Err(Error::InvalidArgument("contact_tol must be positive".into()));
    }
    let grid = &surface.grid;
    let nu = grid.nu();
    let phis: Vec<T> = grid.logphi_nodes.iter().map(|&u| u.exp()).collect();
    let gs: Vec<T> = grid.logphi_nodes.iter().map(|&u| payoff(u)).collect();

    let mut l0 = Vec::with_capacity(grid.nx());
    let mut l1 = Vec::with_capacity(grid.nx());
    for (ix, &x) in grid.x_nodes.iter().enumerate() {
        let row = surface.row(ix);
        let gap = |j: usize| gs[j] - row[j];

        // lower boundary: last contact node scanning up
        let mut k = None;
        for j in 0..nu - 1 {
            if gap(j) <= contact_tol && gap(j + 1) > contact_tol {
                k = Some(j);
                break;
            }
            if gap(j) > contact_tol {
                break;
            }
        }
        let k = k.ok_or_else(|| {
            Error::Extraction(format!(
                "row x = {}: no lower contact inside the grid (truncation too narrow below?)",
                x.as_f64()
            ))
        })?;
        if k == 0 {
            return Err(Error::Extraction(format!(
                "row x = {}: lower boundary within one cell of the truncation",
                x.as_f64()
            )));
        }
        let t = (contact_tol - gap(k)) / (gap(k + 1) - gap(k));
        l0.push(phis[k] + t * (phis[k + 1] - phis[k]));

        // upper boundary: last contact node scanning down
        let mut m = None;
        for j in (1..nu).rev() {
            if gap(j) <= contact_tol && gap(j - 1) > contact_tol {
                m = Some(j);
                break;
            }
            if gap(j) > contact_tol {
                break;
            }
        }
        let m = m.ok_or_else(|| {
            Error::Extraction(format!(
                "row x = {}: no upper contact inside the grid (truncation too narrow above?)",
                x.as_f64()
            ))
        })?;
        if m == nu - 1 {
            return Err(Error::Extraction(format!(
                "row x = {}: upper boundary within one cell of the truncation",
                x.as_f64()
            )));
        }
        let t = (contact_tol - gap(m)) / (gap(m - 1) - gap(m));
        l1.push(phis[m] + t * (phis[m - 1] - phis[m]));
    }

    Ok(BoundaryPair {
        x_nodes: grid.x_nodes.clone(),
        l0,
        l1,
    })
}

/// Outcome of the boundary validation diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryReport {
    pub pass: bool,
    pub first_violation: Option<(usize, String)>,
}

impl BoundaryReport {
    fn fail(idx: usize, msg: String) -> Self {
        Self {
            pass: false,
            first_violation: Some((idx, msg)),
        }
    }
}

/// Checks 0 < l0 < 1 < l1 node-wise plus the regime's boundary monotonicity
/// (nondecreasing l0 / nonincreasing l1 under A31, mirrored under A32,
/// both-ways within tolerance for constant SNR). Purely diagnostic.
pub fn validate_boundaries<T: Real>(pair: &BoundaryPair<T>, regime: Regime) -> BoundaryReport {
    let n = pair.x_nodes.len();
    for i in 0..n {
        if !(pair.l0[i] > T::zero() && pair.l0[i] < T::one()) {
            return BoundaryReport::fail(i, format!("l0 = {} not in (0, 1)", pair.l0[i].as_f64()));
        }
        if !(pair.l1[i] > T::one()) {
            return BoundaryReport::fail(i, format!("l1 = {} not above 1", pair.l1[i].as_f64()));
        }
    }
    let tol = |v: T| T::cast(1e-9) * (T::one() + v.abs());
    let check = |vals: &[T], increasing: bool, name: &str| -> Option<(usize, String)> {
        for i in 0..n - 1 {
            let step = vals[i + 1] - vals[i];
            let bad = if increasing {
                step < -tol(vals[i])
            } else {
                step > tol(vals[i])
            };
            if bad {
                return Some((
                    i,
                    format!(
                        "{name} not {} at index {i}: {} -> {}",
                        if increasing { "nondecreasing" } else { "nonincreasing" },
                        vals[i].as_f64(),
                        vals[i + 1].as_f64()
                    ),
                ));
            }
        }
        None
    };
    let violation = match regime {
        Regime::A31 => check(&pair.l0, true, "l0").or_else(|| check(&pair.l1, false, "l1")),
        Regime::A32 => check(&pair.l0, false, "l0").or_else(|| check(&pair.l1, true, "l1")),
        Regime::ConstantSnr => check(&pair.l0, true, "l0")
            .or_else(|| check(&pair.l0, false, "l0"))
            .or_else(|| check(&pair.l1, true, "l1"))
            .or_else(|| check(&pair.l1, false, "l1")),
        Regime::None => Some((0, "regime 'none' has no validated shape".into())),
    };
    match violation {
        Some((i, msg)) => BoundaryReport::fail(i, msg),
        None => BoundaryReport {
            pass: true,
            first_violation: None,
        },
    }
}
