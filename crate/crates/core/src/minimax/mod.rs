//! Least favorable prior search: Monte Carlo estimation of the risk
//! derivative in the prior-odds parameter along the family of exit rules,
//! sign-change scan plus bisection for its roots, and saddle verification.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fbp::BoundaryPair;
use crate::model::DiffusionModel;
use crate::numerics::stats::mean_and_se;
use crate::risk::{estimate_jbar, path_stream, RiskEstimate};
use crate::scalar::Real;
use crate::simulate::{run_rule, ExitSide, McSettings, Measure, RngSpec, StoppingRule};

/// Monte Carlo estimate of the normalized risk derivative at one prior odds.
///
/// The statistic is E^0[L_tau 1{phi L_tau < 1}] - P^0(phi L_tau >= 1)
/// - c E^0 int_0^tau (1 - L_t) dt with tau the exit rule tuned at phi. The
/// positive prefactor (1 + phi)^{-2} of the raw derivative is dropped: it
/// moves no root and this normalization makes the bracket endpoints read
/// exactly +1 and -1.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DerivativeEstimate<T: Real> {
    pub phi: T,
    pub value: T,
    pub stderr: T,
    pub n_paths: usize,
    /// Empirical mass of phi L_tau within 1e-9 of 1; the one-sided
    /// derivatives coincide when this vanishes.
    pub mass_at_one: T,
}

/// A bisection root of the derivative curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LfdRoot<T: Real> {
    pub phi0: T,
    pub residual: T,
    pub stderr: T,
}

/// Full output of the least-favorable-prior search.
#[derive(Debug, Clone, Serialize)]
pub struct LfdResult<T: Real> {
    pub x0: T,
    pub bracket: (T, T),
    pub roots: Vec<LfdRoot<T>>,
    /// Derivative estimates just inside the bracket ends; near +1 at the
    /// lower end and -1 at the upper end.
    pub endpoint_checks: (T, T),
    pub grid: Vec<DerivativeEstimate<T>>,
}

/// Search settings for [`find_lfd`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LfdSettings {
    /// Coarse scan size over the bracket (log-spaced).
    pub grid_points: usize,
    /// Bisection width target as a fraction of the bracket width.
    pub tol: f64,
    /// Relative shrink applied to each bracket end.
    pub bracket_margin: f64,
    /// Relative offset used for the endpoint derivative checks.
    pub endpoint_offset: f64,
    /// Step-size shrink for the endpoint checks, whose exits happen on a
    /// much finer time scale than interior runs.
    pub endpoint_dt_frac: f64,
    /// Externally imposed scan bracket; must sit strictly inside the
    /// boundary bracket at x0.
    pub bracket_override: Option<(f64, f64)>,
}

impl Default for LfdSettings {
    fn default() -> Self {
        Self {
            grid_points: 17,
            tol: 1e-3,
            bracket_margin: 1e-6,
            endpoint_offset: 1e-6,
            endpoint_dt_frac: 0.01,
            bracket_override: None,
        }
    }
}

/// Estimates the normalized risk derivative at prior odds `phi` under the
/// exit rule tuned at `phi` itself. Common random numbers: the same `rng`
/// spec reproduces the same path set at any nearby `phi`.
pub fn dj_dpsi<T: Real>(
    model: &DiffusionModel<T>,
    x0: T,
    phi: T,
    boundaries: &BoundaryPair<T>,
    mc: &McSettings,
    rng: RngSpec,
) -> Result<DerivativeEstimate<T>> {
    let l0 = boundaries.interp_l0(x0);
    let l1 = boundaries.interp_l1(x0);
    if !(phi > l0 && phi < l1) {
        return Err(Error::OutsideBracket {
            phi: phi.as_f64(),
            lo: l0.as_f64(),
            hi: l1.as_f64(),
        });
    }
    let rule = StoppingRule::from_pair(boundaries);
    let horizon = match mc.horizon {
        Some(h) => T::cast(h),
        None => model.suggested_horizon(&[x0])?,
    };
    let dt = T::cast(mc.dt);
    let c = model.cost_rate();
    let near_one = T::cast(1e-9);

    struct Acc<T> {
        sum: T,
        n: usize,
        mass: usize,
        exhausted: usize,
    }
    let batches: Vec<Result<Acc<T>>> = (0..mc.n_batches)
        .into_par_iter()
        .map(|b| {
            let n = mc.batch_size(b);
            let mut acc = Acc {
                sum: T::zero(),
                n,
                mass: 0,
                exhausted: 0,
            };
            for p in 0..n {
                let path_rng = rng.with_stream(path_stream(rng.stream, b, p));
                let run = run_rule(model, x0, phi, &rule, dt, horizon, path_rng, Measure::Null)?;
                if run.outcome.exited_side == ExitSide::Horizon {
                    acc.exhausted += 1;
                }
                let phi_l = phi * run.outcome.l_tau;
                if (phi_l - T::one()).abs() <= near_one {
                    acc.mass += 1;
                }
                let terminal = if phi_l < T::one() {
                    run.outcome.l_tau
                } else {
                    -T::one()
                };
                // int (1 - L) dt = tau - int L dt
                let waiting = run.outcome.tau - run.lr_integral;
                acc.sum = acc.sum + terminal - c * waiting;
            }
            Ok(acc)
        })
        .collect();

    let mut means = Vec::with_capacity(mc.n_batches);
    let mut total = 0usize;
    let mut mass = 0usize;
    let mut exhausted = 0usize;
    for b in batches {
        let acc = b?;
        means.push(acc.sum / T::cast(acc.n));
        total += acc.n;
        mass += acc.mass;
        exhausted += acc.exhausted;
    }
    if (exhausted as f64) > 0.001 * total as f64 {
        return Err(Error::McQuality(format!(
            "{exhausted} of {total} derivative paths hit the horizon (> 0.1%)"
        )));
    }
    let (value, stderr) = mean_and_se(&means);
    Ok(DerivativeEstimate {
        phi,
        value,
        stderr,
        n_paths: total,
        mass_at_one: T::cast(mass) / T::cast(total),
    })
}

/// Scans a log-spaced grid of the bracket for sign changes of the derivative
/// and bisects each one. All evaluations reuse the same random-number
/// streams, so the bisected function is deterministic.
pub fn find_lfd<T: Real>(
    model: &DiffusionModel<T>,
    x0: T,
    boundaries: &BoundaryPair<T>,
    settings: &LfdSettings,
    mc: &McSettings,
    rng: RngSpec,
) -> Result<LfdResult<T>> {
    let l0 = boundaries.interp_l0(x0);
    let l1 = boundaries.interp_l1(x0);
    if !(l0 > T::zero() && l1 > l0) {
        return Err(Error::InvalidArgument(format!(
            "degenerate bracket ({}, {}) at x0 = {}",
            l0.as_f64(),
            l1.as_f64(),
            x0.as_f64()
        )));
    }
    let margin = T::cast(settings.bracket_margin);
    let (lo, hi) = match settings.bracket_override {
        Some((a, b)) => {
            let (a, b) = (T::cast(a), T::cast(b));
            if !(a > l0 && b < l1 && a < b) {
                return Err(Error::OutsideBracket {
                    phi: a.as_f64(),
                    lo: l0.as_f64(),
                    hi: l1.as_f64(),
                });
            }
            (a, b)
        }
        None => (l0 * (T::one() + margin), l1 * (T::one() - margin)),
    };
    let width = hi - lo;

    let eval = |phi: T, dt_frac: f64| -> Result<DerivativeEstimate<T>> {
        let mc_local = McSettings {
            dt: mc.dt * dt_frac,
            ..*mc
        };
        dj_dpsi(model, x0, phi, boundaries, &mc_local, rng)
    };

    let n = settings.grid_points.max(3);
    let log_lo = lo.ln();
    let log_hi = hi.ln();
    let mut grid = Vec::with_capacity(n);
    for i in 0..n {
        let phi = (log_lo + (log_hi - log_lo) * T::cast(i) / T::cast(n - 1)).exp();
        grid.push(eval(phi, 1.0)?);
    }

    let mut roots = Vec::new();
    for i in 0..n - 1 {
        let a = &grid[i];
        let b = &grid[i + 1];
        if a.value == T::zero() {
            roots.push(LfdRoot {
                phi0: a.phi,
                residual: T::zero(),
                stderr: a.stderr,
            });
            continue;
        }
        if (a.value > T::zero()) == (b.value > T::zero()) {
            continue;
        }
        let mut lo_phi = a.phi;
        let mut hi_phi = b.phi;
        let mut lo_positive = a.value > T::zero();
        let target = T::cast(settings.tol) * width;
        let mut mid_est = None;
        while hi_phi - lo_phi > target {
            let mid = (lo_phi + hi_phi) * T::half();
            let est = eval(mid, 1.0)?;
            if (est.value > T::zero()) == lo_positive {
                lo_phi = mid;
                lo_positive = est.value > T::zero();
            } else {
                hi_phi = mid;
            }
            mid_est = Some(est);
        }
        let root_phi = (lo_phi + hi_phi) * T::half();
        let final_est = match mid_est {
            Some(e) if (e.phi - root_phi).abs() <= target => e,
            _ => eval(root_phi, 1.0)?,
        };
        roots.push(LfdRoot {
            phi0: root_phi,
            residual: final_est.value,
            stderr: final_est.stderr,
        });
    }

    if roots.is_empty() {
        let mut table = String::new();
        for e in &grid {
            table.push_str(&format!(
                "\n  phi = {:.6e}: {:+.4e} +- {:.1e}",
                e.phi.as_f64(),
                e.value.as_f64(),
                e.stderr.as_f64()
            ));
        }
        return Err(Error::NoSignChange(format!(
            "derivative keeps one sign across ({}, {}):{}",
            lo.as_f64(),
            hi.as_f64(),
            table
        )));
    }

    let off = T::cast(settings.endpoint_offset);
    let lo_check = eval(l0 * (T::one() + off), settings.endpoint_dt_frac)?;
    let hi_check = eval(l1 * (T::one() - off), settings.endpoint_dt_frac)?;

    Ok(LfdResult {
        x0,
        bracket: (l0, l1),
        roots,
        endpoint_checks: (lo_check.value, hi_check.value),
        grid,
    })
}

/// One row of the saddle verification.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SaddleEntry<T: Real> {
    pub psi: T,
    pub estimate: RiskEstimate<T>,
    pub pass: bool,
}

/// Saddle verification report: risk at the candidate prior, the scan over
/// competitor priors (first inequality), and perturbed-rule comparisons
/// (second inequality).
#[derive(Debug, Clone, Serialize)]
pub struct SaddleReport<T: Real> {
    pub phi0: T,
    pub at_phi0: RiskEstimate<T>,
    pub entries: Vec<SaddleEntry<T>>,
    pub perturbed: Vec<SaddleEntry<T>>,
    pub pass: bool,
}

/// Checks, with common random numbers, that no prior on `psi_grid` beats
/// `phi0` against the rule tuned at `phi0` (within 3 combined standard
/// errors), and that detuning the rule by +-5% does not lower the risk at
/// `phi0` either.
#[allow(clippy::too_many_arguments)]
pub fn verify_saddle<T: Real>(
    model: &DiffusionModel<T>,
    x0: T,
    phi0: T,
    boundaries: &BoundaryPair<T>,
    psi_grid: &[T],
    mc: &McSettings,
    rng: RngSpec,
) -> Result<SaddleReport<T>> {
    let base_rule = StoppingRule::from_pair(boundaries);
    let at_phi0 = estimate_jbar(model, x0, phi0, &base_rule, mc, rng)?;

    let mut pass = true;
    let mut entries = Vec::with_capacity(psi_grid.len());
    for &psi in psi_grid {
        if !(psi > T::zero()) {
            return Err(Error::InvalidArgument("psi grid must be positive".into()));
        }
        let rule = StoppingRule::from_pair(boundaries).tuned_at(phi0, psi);
        let est = estimate_jbar(model, x0, psi, &rule, mc, rng)?;
        let slack = T::cast(3.0) * (est.stderr * est.stderr + at_phi0.stderr * at_phi0.stderr).sqrt();
        let ok = est.value <= at_phi0.value + slack;
        pass &= ok;
        entries.push(SaddleEntry {
            psi,
            estimate: est,
            pass: ok,
        });
    }

    let mut perturbed = Vec::new();
    for &delta in &[T::cast(0.05), T::cast(-0.05)] {
        let tuned = phi0 * (T::one() + delta);
        let rule = StoppingRule::from_pair(boundaries).tuned_at(tuned, phi0);
        let est = estimate_jbar(model, x0, phi0, &rule, mc, rng)?;
        let slack = T::cast(3.0) * (est.stderr * est.stderr + at_phi0.stderr * at_phi0.stderr).sqrt();
        let ok = at_phi0.value <= est.value + slack;
        pass &= ok;
        perturbed.push(SaddleEntry {
            psi: tuned,
            estimate: est,
            pass: ok,
        });
    }

    Ok(SaddleReport {
        phi0,
        at_phi0,
        entries,
        perturbed,
        pass,
    })
}
