//! Bayesian risk of a decision rule, estimated by Monte Carlo two ways:
//! a change-of-measure estimator driven entirely by reference-measure paths,
//! and a two-component mixture estimator that simulates each conditional law
//! separately. The two agree in expectation and cross-check each other.

mod decision;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::DiffusionModel;
use crate::numerics::stats::mean_and_se;
use crate::scalar::Real;
use crate::simulate::{run_rule, ExitSide, McSettings, Measure, RngSpec, StoppingRule};

pub use decision::{decision_of, Decision};

/// Monte Carlo risk value with its error-probability / waiting-cost split.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RiskEstimate<T: Real> {
    pub value: T,
    pub stderr: T,
    /// (terminal error-probability term, waiting-cost term); they sum to the
    /// value.
    pub components: (T, T),
    pub n_paths: usize,
}

fn default_horizon<T: Real>(model: &DiffusionModel<T>, x0: T, mc: &McSettings) -> Result<T> {
    match mc.horizon {
        Some(h) => Ok(T::cast(h)),
        None => model.suggested_horizon(&[x0]),
    }
}

/// Sub-stream of path `p` in batch `b`. Path streams are stable across
/// estimator calls with the same base spec, which is what makes common
/// random numbers work across nearby rule parameters.
pub(crate) fn path_stream(base: u64, b: usize, p: usize) -> u64 {
    base.wrapping_add(((b as u64) << 32).wrapping_add(p as u64))
}

fn check_horizon_quality(exhausted: usize, total: usize) -> Result<()> {
    if (exhausted as f64) > 0.001 * total as f64 {
        return Err(Error::McQuality(format!(
            "{exhausted} of {total} paths hit the horizon (> 0.1%)"
        )));
    }
    Ok(())
}

struct BatchAccum<T> {
    err_sum: T,
    cost_sum: T,
    n: usize,
    exhausted: usize,
    domain_exits: usize,
}

/// Change-of-measure estimator:
/// (1 + psi)^{-1} E^0[ min(1, psi L_tau) + c \int_0^tau (1 + psi L_t) dt ].
pub fn estimate_jbar<T: Real>(
    model: &DiffusionModel<T>,
    x0: T,
    psi: T,
    rule: &StoppingRule<T>,
    mc: &McSettings,
    rng: RngSpec,
) -> Result<RiskEstimate<T>> {
    if !(psi > T::zero()) {
        return Err(Error::InvalidArgument("psi must be positive".into()));
    }
    let horizon = default_horizon(model, x0, mc)?;
    let dt = T::cast(mc.dt);
    let c = model.cost_rate();

    let batches: Vec<Result<BatchAccum<T>>> = (0..mc.n_batches)
        .into_par_iter()
        .map(|b| {
            let n = mc.batch_size(b);
            let mut acc = BatchAccum {
                err_sum: T::zero(),
                cost_sum: T::zero(),
                n,
                exhausted: 0,
                domain_exits: 0,
            };
            for p in 0..n {
                let path_rng = rng.with_stream(path_stream(rng.stream, b, p));
                let run = run_rule(model, x0, psi, rule, dt, horizon, path_rng, Measure::Null)?;
                match run.outcome.exited_side {
                    ExitSide::Horizon => acc.exhausted += 1,
                    ExitSide::Domain => acc.domain_exits += 1,
                    _ => {}
                }
                let psi_l = psi * run.outcome.l_tau;
                acc.err_sum = acc.err_sum + psi_l.min(T::one());
                acc.cost_sum = acc.cost_sum + c * run.outcome.cost_integral;
            }
            Ok(acc)
        })
        .collect();

    let mut err_means = Vec::with_capacity(mc.n_batches);
    let mut cost_means = Vec::with_capacity(mc.n_batches);
    let mut value_means = Vec::with_capacity(mc.n_batches);
    let mut total = 0usize;
    let mut exhausted = 0usize;
    let norm = T::one() / (T::one() + psi);
    for b in batches {
        let acc = b?;
        let nt = T::cast(acc.n);
        err_means.push(norm * acc.err_sum / nt);
        cost_means.push(norm * acc.cost_sum / nt);
        value_means.push(norm * (acc.err_sum + acc.cost_sum) / nt);
        total += acc.n;
        exhausted += acc.exhausted;
    }
    check_horizon_quality(exhausted, total)?;
    let (value, stderr) = mean_and_se(&value_means);
    let (err_term, _) = mean_and_se(&err_means);
    let (cost_term, _) = mean_and_se(&cost_means);
    Ok(RiskEstimate {
        value,
        stderr,
        components: (err_term, cost_term),
        n_paths: total,
    })
}

/// Mixture estimator: weights 1/(1+psi) and psi/(1+psi) on the two
/// conditional laws, decisions applied at exit, waiting time mixed linearly.
/// Component batches get at least 1000 paths each.
pub fn estimate_jbar_mixture<T: Real>(
    model: &DiffusionModel<T>,
    x0: T,
    psi: T,
    rule: &StoppingRule<T>,
    mc: &McSettings,
    rng: RngSpec,
) -> Result<RiskEstimate<T>> {
    if !(psi > T::zero()) {
        return Err(Error::InvalidArgument("psi must be positive".into()));
    }
    let horizon = default_horizon(model, x0, mc)?;
    let dt = T::cast(mc.dt);
    let c = model.cost_rate();
    let w0 = T::one() / (T::one() + psi);
    let w1 = psi / (T::one() + psi);

    let floor = 1000usize.min(mc.n_paths.max(1));
    let n0 = ((w0.as_f64() * mc.n_paths as f64).round() as usize).max(floor);
    let n1 = ((w1.as_f64() * mc.n_paths as f64).round() as usize).max(floor);

    // per-component batch means of (wrong-decision indicator, tau)
    let run_component = |measure: Measure,
                         n_total: usize,
                         stream_base: u64|
     -> Result<(Vec<(T, T)>, usize, usize)> {
        let per = n_total.div_ceil(mc.n_batches);
        let results: Vec<Result<(T, T, usize, usize)>> = (0..mc.n_batches)
            .into_par_iter()
            .map(|b| {
                let n = per.min(n_total - (per * b).min(n_total));
                if n == 0 {
                    return Ok((T::zero(), T::zero(), 0, 0));
                }
                let mut wrong = T::zero();
                let mut tau = T::zero();
                let mut exhausted = 0usize;
                for p in 0..n {
                    let path_rng =
                        rng.with_stream(path_stream(rng.stream, stream_base as usize + b, p));
                    let run = run_rule(model, x0, psi, rule, dt, horizon, path_rng, measure)?;
                    if run.outcome.exited_side == ExitSide::Horizon {
                        exhausted += 1;
                    }
                    let d = run.outcome.decision.resolve();
                    let is_wrong = match measure {
                        Measure::Null => d == 1,
                        Measure::Alternative => d == 0,
                    };
                    if is_wrong {
                        wrong = wrong + T::one();
                    }
                    tau = tau + run.outcome.tau;
                }
                let nt = T::cast(n);
                Ok((wrong / nt, tau / nt, n, exhausted))
            })
            .collect();
        let mut means = Vec::new();
        let mut total = 0;
        let mut exhausted = 0;
        for r in results {
            let (w, t, n, e) = r?;
            if n > 0 {
                means.push((w, t));
                total += n;
                exhausted += e;
            }
        }
        Ok((means, total, exhausted))
    };

    let (means0, total0, ex0) = run_component(Measure::Null, n0, 0)?;
    let (means1, total1, ex1) = run_component(Measure::Alternative, n1, mc.n_batches as u64)?;
    check_horizon_quality(ex0 + ex1, total0 + total1)?;

    // value per batch pair: w0 (p01 + c tau0) + w1 (p10 + c tau1)
    let k = means0.len().min(means1.len());
    let mut err_means = Vec::with_capacity(k);
    let mut cost_means = Vec::with_capacity(k);
    let mut value_means = Vec::with_capacity(k);
    for i in 0..k {
        let e = w0 * means0[i].0 + w1 * means1[i].0;
        let t = c * (w0 * means0[i].1 + w1 * means1[i].1);
        err_means.push(e);
        cost_means.push(t);
        value_means.push(e + t);
    }
    let (value, stderr) = mean_and_se(&value_means);
    let (err_term, _) = mean_and_se(&err_means);
    let (cost_term, _) = mean_and_se(&cost_means);
    Ok(RiskEstimate {
        value,
        stderr,
        components: (err_term, cost_term),
        n_paths: total0 + total1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_constant;

    fn constant_model() -> DiffusionModel<f64> {
        builtin_constant(0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn immediate_rule_is_exact() {
        let model = constant_model();
        let mc = McSettings::default().with_paths(2000).with_dt(1e-3);
        for &psi in &[0.25, 1.0, 3.0] {
            let est = estimate_jbar(
                &model,
                0.0,
                psi,
                &StoppingRule::immediate(),
                &mc,
                RngSpec::new(1, 0),
            )
            .unwrap();
            let expect = psi.min(1.0) / (1.0 + psi);
            assert!((est.value - expect).abs() < 1e-14, "psi = {psi}");
            assert!(est.stderr < 1e-15);
            assert_eq!(est.components.1, 0.0);

            let est = estimate_jbar_mixture(
                &model,
                0.0,
                psi,
                &StoppingRule::immediate(),
                &mc,
                RngSpec::new(1, 0),
            )
            .unwrap();
            assert!((est.value - expect).abs() < 1e-14, "mixture psi = {psi}");
        }
    }

    #[test]
    fn estimators_agree_on_a_band_rule() {
        let model = constant_model();
        let rule = StoppingRule::bands(0.7, 1.4);
        let mc = McSettings::default()
            .with_paths(20_000)
            .with_dt(1e-3)
            .with_horizon(50.0);
        let a = estimate_jbar(&model, 0.0, 1.0, &rule, &mc, RngSpec::new(5, 0)).unwrap();
        let b = estimate_jbar_mixture(&model, 0.0, 1.0, &rule, &mc, RngSpec::new(6, 0)).unwrap();
        let tol = 4.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!(
            (a.value - b.value).abs() <= tol,
            "{} vs {} (tol {tol})",
            a.value,
            b.value
        );
        // components sum to the value
        assert!((a.value - (a.components.0 + a.components.1)).abs() < 1e-12);
        assert!(a.components.0 >= 0.0 && a.components.0 <= 1.0);
    }

    #[test]
    fn tiny_psi_degenerates_to_null_component() {
        let model = constant_model();
        let rule = StoppingRule::bands(0.7, 1.4);
        let mc = McSettings::default().with_paths(4000).with_dt(1e-3).with_horizon(50.0);
        let psi = 1e-6;
        let est = estimate_jbar_mixture(&model, 0.0, psi, &rule, &mc, RngSpec::new(7, 0)).unwrap();
        // mixture weight on the alternative component is psi/(1+psi) < 1e-6;
        // with psi L0 = psi < l0 the rule stops immediately, d = 0, so the
        // error term is only the alternative's weight.
        assert!(est.value < 2e-6);
    }
}
