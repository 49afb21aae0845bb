//! Diffusion models for the two-drift detection problem.
//!
//! A model holds the two candidate drifts, the diffusion coefficient, an open
//! state domain and a waiting-cost rate. Derived quantities: the
//! signal-to-noise ratio rho(x) = (mu1 - mu0)/sigma and the index
//! k(x) = mu0/(mu1 - mu0) - (1/2) d/dx[sigma^2/(mu1 - mu0)], which is the
//! drift of the transformed state coordinate after the intrinsic time change
//! and decides which solver regime applies.

pub mod expr;
mod spec;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use spec::{ModelSpec, RunningCostSpec};

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// A scalar coefficient on the state domain, with an optional analytic
/// derivative. Without one, derivatives fall back to a central difference
/// with step h = max(1e-6, 1e-6 |x|).
#[derive(Clone)]
pub struct CoefficientFn<T: Real> {
    eval: ScalarFn<T>,
    deriv: Option<ScalarFn<T>>,
}

impl<T: Real> CoefficientFn<T> {
    pub fn new(f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(f),
            deriv: None,
        }
    }

    pub fn with_deriv(
        f: impl Fn(T) -> T + Send + Sync + 'static,
        d: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(f),
            deriv: Some(Arc::new(d)),
        }
    }

    pub fn constant(c: T) -> Self {
        Self::with_deriv(move |_| c, |_| T::zero())
    }

    /// Builds a coefficient from the expression language in [`expr`].
    pub fn from_expr(src: &str) -> Result<Self> {
        let ast = expr::Expr::parse(src)?;
        Ok(Self::new(move |x| ast.eval(x)))
    }

    pub fn eval(&self, x: T) -> T {
        (self.eval)(x)
    }

    pub fn has_analytic_deriv(&self) -> bool {
        self.deriv.is_some()
    }

    /// Derivative at x: analytic when attached, otherwise central difference.
    pub fn deriv(&self, x: T) -> T {
        match &self.deriv {
            Some(d) => d(x),
            None => {
                let h = fd_step(x);
                ((self.eval)(x + h) - (self.eval)(x - h)) / (T::two() * h)
            }
        }
    }
}

impl<T: Real> fmt::Debug for CoefficientFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientFn")
            .field("analytic_deriv", &self.deriv.is_some())
            .finish()
    }
}

pub fn fd_step<T: Real>(x: T) -> T {
    let base = T::cast(1e-6);
    base.max(base * x.abs())
}

/// Monotonicity classification of rho^2 over a sample grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Decreasing,
    Increasing,
    Constant,
    NonMonotone,
}

/// Which standing-assumption regime the model was certified under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    A31,
    A32,
    ConstantSnr,
    None,
}

impl Regime {
    pub fn certified(self) -> bool {
        !matches!(self, Regime::None)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::A31 => write!(f, "A31"),
            Regime::A32 => write!(f, "A32"),
            Regime::ConstantSnr => write!(f, "constant_snr"),
            Regime::None => write!(f, "none"),
        }
    }
}

/// Grid-based certification record for the standing assumptions.
///
/// The pathwise divergence assumption on the integrated squared
/// signal-to-noise ratio is not checkable from coefficients alone and is
/// recorded as assumed, not verified.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport<T: Real> {
    pub rho2_direction: Direction,
    pub k_samples: Vec<(T, T)>,
    pub regime: Regime,
    pub violations: Vec<(T, String)>,
    pub integrated_snr_divergence: &'static str,
}

/// One-dimensional diffusion with two candidate drifts.
pub struct DiffusionModel<T: Real> {
    domain: (T, T),
    mu0: CoefficientFn<T>,
    mu1: CoefficientFn<T>,
    sigma: CoefficientFn<T>,
    cost_rate: T,
}

impl<T: Real> fmt::Debug for DiffusionModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionModel")
            .field("domain", &self.domain)
            .field("cost_rate", &self.cost_rate)
            .finish()
    }
}

impl<T: Real> DiffusionModel<T> {
    pub fn new(
        domain: (T, T),
        mu0: CoefficientFn<T>,
        mu1: CoefficientFn<T>,
        sigma: CoefficientFn<T>,
        cost_rate: T,
    ) -> Result<Self> {
        if !(domain.0 < domain.1) {
            return Err(Error::InvalidArgument(format!(
                "empty domain ({}, {})",
                domain.0.as_f64(),
                domain.1.as_f64()
            )));
        }
        if !(cost_rate > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "cost rate must be positive, got {}",
                cost_rate.as_f64()
            )));
        }
        Ok(Self {
            domain,
            mu0,
            mu1,
            sigma,
            cost_rate,
        })
    }

    pub fn domain(&self) -> (T, T) {
        self.domain
    }

    pub fn cost_rate(&self) -> T {
        self.cost_rate
    }

    pub fn with_cost_rate(mut self, c: T) -> Result<Self> {
        if !(c > T::zero()) {
            return Err(Error::InvalidArgument("cost rate must be positive".into()));
        }
        self.cost_rate = c;
        Ok(self)
    }

    pub fn mu0(&self) -> &CoefficientFn<T> {
        &self.mu0
    }

    pub fn mu1(&self) -> &CoefficientFn<T> {
        &self.mu1
    }

    pub fn sigma(&self) -> &CoefficientFn<T> {
        &self.sigma
    }

    pub fn contains(&self, x: T) -> bool {
        x > self.domain.0 && x < self.domain.1
    }

    pub fn check_interior(&self, x: T) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                x: x.as_f64(),
                lo: self.domain.0.as_f64(),
                hi: self.domain.1.as_f64(),
            })
        }
    }

    /// Clamps x into the interior; used when a solver grid is wider than the
    /// truncation window and coefficients must be frozen at the edge.
    pub fn clamp_interior(&self, x: T, lo: T, hi: T) -> T {
        x.max(lo).min(hi)
    }

    /// Signal-to-noise ratio rho(x) = (mu1(x) - mu0(x)) / sigma(x).
    pub fn snr(&self, x: T) -> Result<T> {
        self.check_interior(x)?;
        let s = self.sigma.eval(x);
        if !(s > T::zero()) {
            return Err(Error::DegenerateModel(format!(
                "sigma({}) = {} is not positive",
                x.as_f64(),
                s.as_f64()
            )));
        }
        Ok((self.mu1.eval(x) - self.mu0.eval(x)) / s)
    }

    pub fn rho_sq(&self, x: T) -> Result<T> {
        let r = self.snr(x)?;
        Ok(r * r)
    }

    /// Drift index k(x) = mu0/(mu1 - mu0) - (1/2) d/dx[sigma^2/(mu1 - mu0)].
    ///
    /// Uses analytic derivatives when all three coefficients carry them,
    /// otherwise a central difference of the ratio sigma^2/(mu1 - mu0).
    pub fn k(&self, x: T) -> Result<T> {
        self.check_interior(x)?;
        let m0 = self.mu0.eval(x);
        let m1 = self.mu1.eval(x);
        let dm = m1 - m0;
        if dm == T::zero() {
            return Err(Error::DegenerateModel(format!(
                "mu1({x0}) = mu0({x0}); signal-to-noise ratio vanishes",
                x0 = x.as_f64()
            )));
        }
        let ratio_deriv = if self.mu0.has_analytic_deriv()
            && self.mu1.has_analytic_deriv()
            && self.sigma.has_analytic_deriv()
        {
            let s = self.sigma.eval(x);
            let sp = self.sigma.deriv(x);
            let dmp = self.mu1.deriv(x) - self.mu0.deriv(x);
            (T::two() * s * sp * dm - s * s * dmp) / (dm * dm)
        } else {
            let h = fd_step(x);
            let ratio = |y: T| {
                let s = self.sigma.eval(y);
                s * s / (self.mu1.eval(y) - self.mu0.eval(y))
            };
            (ratio(x + h) - ratio(x - h)) / (T::two() * h)
        };
        Ok(m0 / dm - T::half() * ratio_deriv)
    }

    /// Horizon heuristic: 50 divided by the smallest sampled rho^2.
    pub fn suggested_horizon(&self, xs: &[T]) -> Result<T> {
        let mut min_r2 = T::infinity();
        for &x in xs {
            min_r2 = min_r2.min(self.rho_sq(x)?);
        }
        if !(min_r2 > T::zero()) {
            return Err(Error::DegenerateModel(
                "rho^2 vanishes on the sample grid".into(),
            ));
        }
        Ok(T::cast(50.0) / min_r2)
    }
}

/// Classifies the model regime on a finite sample grid.
///
/// rho^2 monotonicity is decided by pairwise comparison; plateaus are
/// tolerated and flagged. The regime rules:
/// - A31: rho^2 decreasing and k > -1/2 at every grid point,
/// - A32: rho^2 increasing and k < -1/2 at every grid point,
/// - constant_snr: rho^2 constant (relative spread below 1e-9),
/// - none otherwise, with each offending point listed.
pub fn check_assumptions<T: Real>(
    model: &DiffusionModel<T>,
    sample_grid: &[T],
) -> Result<AssumptionReport<T>> {
    if sample_grid.is_empty() {
        return Err(Error::InvalidArgument("empty sample grid".into()));
    }
    let mut violations: Vec<(T, String)> = Vec::new();

    let mut rho2 = Vec::with_capacity(sample_grid.len());
    for &x in sample_grid {
        rho2.push((x, model.rho_sq(x)?));
    }

    let scale = rho2
        .iter()
        .fold(T::zero(), |a, &(_, r)| a.max(r.abs()))
        .max(T::cast(1e-300));
    let flat_tol = scale * T::cast(1e-9);
    let mut ups = 0usize;
    let mut downs = 0usize;
    let mut flats = 0usize;
    for w in rho2.windows(2) {
        let d = w[1].1 - w[0].1;
        if d.abs() <= flat_tol {
            flats += 1;
        } else if d > T::zero() {
            ups += 1;
        } else {
            downs += 1;
        }
    }
    let direction = match (ups, downs) {
        (0, 0) => Direction::Constant,
        (0, _) => Direction::Decreasing,
        (_, 0) => Direction::Increasing,
        _ => Direction::NonMonotone,
    };
    if flats > 0 && direction != Direction::Constant {
        violations.push((
            sample_grid[0],
            format!("rho^2 has {flats} flat segment(s) on the grid; monotonicity is non-strict"),
        ));
    }

    let mut k_samples = Vec::with_capacity(sample_grid.len());
    for &x in sample_grid {
        k_samples.push((x, model.k(x)?));
    }

    let half = T::half();
    let regime = match direction {
        Direction::Constant => Regime::ConstantSnr,
        Direction::Decreasing => {
            let mut ok = true;
            for &(x, k) in &k_samples {
                if !(k > -half) {
                    ok = false;
                    violations.push((x, format!("k(x) = {} is not > -1/2", k.as_f64())));
                }
            }
            if ok {
                Regime::A31
            } else {
                Regime::None
            }
        }
        Direction::Increasing => {
            let mut ok = true;
            for &(x, k) in &k_samples {
                if !(k < -half) {
                    ok = false;
                    violations.push((x, format!("k(x) = {} is not < -1/2", k.as_f64())));
                }
            }
            if ok {
                Regime::A32
            } else {
                Regime::None
            }
        }
        Direction::NonMonotone => {
            violations.push((
                sample_grid[0],
                "rho^2 is not monotone on the sample grid".into(),
            ));
            Regime::None
        }
    };

    Ok(AssumptionReport {
        rho2_direction: direction,
        k_samples,
        regime,
        violations,
        integrated_snr_divergence: "assumed",
    })
}

/// Squared Bessel-dimension pair: state domain (0, inf), drifts
/// (delta_i - 1) / (2 x), unit diffusion.
pub fn builtin_bessel<T: Real>(delta0: T, delta1: T) -> Result<DiffusionModel<T>> {
    if !(delta1 > delta0) {
        return Err(Error::InvalidArgument(format!(
            "need delta1 > delta0, got ({}, {})",
            delta0.as_f64(),
            delta1.as_f64()
        )));
    }
    let drift = |d: T| {
        CoefficientFn::with_deriv(
            move |x: T| (d - T::one()) / (T::two() * x),
            move |x: T| -(d - T::one()) / (T::two() * x * x),
        )
    };
    DiffusionModel::new(
        (T::zero(), T::infinity()),
        drift(delta0),
        drift(delta1),
        CoefficientFn::constant(T::one()),
        T::one(),
    )
}

/// Power-style drift family mu_i(x) = eta_i sigma^2(x) / x on (0, inf).
pub fn builtin_power<T: Real>(
    eta0: T,
    eta1: T,
    sigma: CoefficientFn<T>,
) -> Result<DiffusionModel<T>> {
    if eta0 == eta1 {
        return Err(Error::InvalidArgument(
            "eta0 = eta1 leaves the drifts indistinguishable".into(),
        ));
    }
    let drift = |eta: T, sigma: CoefficientFn<T>| {
        if sigma.has_analytic_deriv() {
            let s2 = sigma.clone();
            CoefficientFn::with_deriv(
                move |x: T| {
                    let s = sigma.eval(x);
                    eta * s * s / x
                },
                move |x: T| {
                    let s = s2.eval(x);
                    let sp = s2.deriv(x);
                    eta * (T::two() * s * sp * x - s * s) / (x * x)
                },
            )
        } else {
            CoefficientFn::new(move |x: T| {
                let s = sigma.eval(x);
                eta * s * s / x
            })
        }
    };
    DiffusionModel::new(
        (T::zero(), T::infinity()),
        drift(eta0, sigma.clone()),
        drift(eta1, sigma.clone()),
        sigma,
        T::one(),
    )
}

/// Constant-coefficient model on the whole line; the simplest constant-SNR
/// instance, used widely in tests and as a CLI shortcut.
pub fn builtin_constant<T: Real>(mu0: T, mu1: T, sigma: T) -> Result<DiffusionModel<T>> {
    if !(sigma > T::zero()) {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    if mu0 == mu1 {
        return Err(Error::InvalidArgument("mu0 = mu1".into()));
    }
    DiffusionModel::new(
        (T::neg_infinity(), T::infinity()),
        CoefficientFn::constant(mu0),
        CoefficientFn::constant(mu1),
        CoefficientFn::constant(sigma),
        T::one(),
    )
}

/// Log-spaced grid on [lo, hi] (both positive).
pub fn log_spaced<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    assert!(n >= 2 && lo > T::zero() && hi > lo);
    let llo = lo.ln();
    let lhi = hi.ln();
    (0..n)
        .map(|i| (llo + (lhi - llo) * T::cast(i) / T::cast(n - 1)).exp())
        .collect()
}

/// Uniform grid on [lo, hi].
pub fn lin_spaced<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    assert!(n >= 2 && hi > lo);
    (0..n)
        .map(|i| lo + (hi - lo) * T::cast(i) / T::cast(n - 1))
        .collect()
}

/// Default certification grid: 512 log-spaced points when the domain lives in
/// (0, inf), otherwise 512 uniform points on a window around the origin.
pub fn default_check_grid<T: Real>(model: &DiffusionModel<T>) -> Vec<T> {
    let (lo, hi) = model.domain();
    let n = 512;
    if lo >= T::zero() || (lo.is_infinite() && lo > T::zero()) {
        let a = if lo.is_finite() && lo > T::zero() {
            lo * T::cast(1.0 + 1e-9)
        } else {
            T::cast(1e-2)
        };
        let b = if hi.is_finite() {
            hi * T::cast(1.0 - 1e-9)
        } else {
            T::cast(1e2)
        };
        log_spaced(a, b, n)
    } else {
        let a = if lo.is_finite() { lo + fd_step(lo) } else { T::cast(-10.0) };
        let b = if hi.is_finite() { hi - fd_step(hi) } else { T::cast(10.0) };
        lin_spaced(a, b, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn snr_bessel_at_one() {
        let m = builtin_bessel(3.0, 4.0).unwrap();
        let r = m.snr(1.0).unwrap();
        assert_relative_eq!(r, 0.5);
        assert_relative_eq!(m.rho_sq(1.0).unwrap(), 0.25);
    }

    #[test]
    fn snr_constant_model() {
        let m = builtin_constant(0.0, 1.0, 1.0).unwrap();
        for &x in &[-3.0, 0.0, 7.5] {
            assert_relative_eq!(m.snr(x).unwrap(), 1.0);
        }
    }

    #[test]
    fn snr_power_model_formula() {
        // mu_i = eta_i sigma^2(x)/x gives rho = (eta1 - eta0) sigma(x)/x.
        let sigma = CoefficientFn::with_deriv(|x: f64| x.powf(1.25), |x: f64| 1.25 * x.powf(0.25));
        let m = builtin_power(0.0, 2.0, sigma).unwrap();
        for &x in &[0.5, 1.0, 3.0] {
            assert_relative_eq!(
                m.snr(x).unwrap(),
                2.0 * x.powf(1.25) / x,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn snr_identity_everywhere() {
        let m = builtin_bessel(2.5, 4.5).unwrap();
        for &x in &[0.3, 1.0, 2.0, 11.0] {
            let lhs = m.snr(x).unwrap() * m.sigma().eval(x) + m.mu0().eval(x);
            assert_relative_eq!(lhs, m.mu1().eval(x), max_relative = 1e-14);
        }
    }

    #[test]
    fn snr_rejects_outside_domain() {
        let m = builtin_bessel(3.0, 4.0).unwrap();
        assert!(matches!(m.snr(-1.0), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn degenerate_sigma_is_reported() {
        let m = DiffusionModel::new(
            (-1.0, 1.0),
            CoefficientFn::constant(0.0),
            CoefficientFn::constant(1.0),
            CoefficientFn::new(|x: f64| x), // vanishes at 0, negative below
            1.0,
        )
        .unwrap();
        assert!(matches!(m.snr(-0.5), Err(Error::DegenerateModel(_))));
    }

    #[test]
    fn k_bessel_is_constant() {
        // k = (delta0 - 2) / (delta1 - delta0)
        let m = builtin_bessel(3.0, 4.0).unwrap();
        for &x in &[0.25, 1.0, 4.0] {
            assert_relative_eq!(m.k(x).unwrap(), 1.0, max_relative = 1e-9);
        }
        let m = builtin_bessel(2.0, 3.0).unwrap();
        assert_relative_eq!(m.k(1.5).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn k_constant_model_is_zero() {
        let m = builtin_constant(0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(m.k(0.7).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn k_power_model_is_x_independent() {
        let sigma = CoefficientFn::with_deriv(|x: f64| x.powf(1.25), |x: f64| 1.25 * x.powf(0.25));
        let m = builtin_power(0.0, 0.5, sigma).unwrap();
        // k + 1/2 = (eta0 + eta1 - 1) / (2 (eta1 - eta0)) = -0.5
        let expect = -0.5 - 0.5;
        for &x in &[0.4, 1.0, 5.0] {
            assert_relative_eq!(m.k(x).unwrap(), expect, max_relative = 1e-7);
        }
    }

    #[test]
    fn k_analytic_matches_finite_difference() {
        let analytic = builtin_bessel::<f64>(2.7, 3.9).unwrap();
        let numeric = DiffusionModel::new(
            (0.0, f64::INFINITY),
            CoefficientFn::new(|x: f64| (2.7 - 1.0) / (2.0 * x)),
            CoefficientFn::new(|x: f64| (3.9 - 1.0) / (2.0 * x)),
            CoefficientFn::new(|_| 1.0),
            1.0,
        )
        .unwrap();
        for &x in &log_spaced(0.1, 10.0, 100) {
            let ka = analytic.k(x).unwrap();
            let kn = numeric.k(x).unwrap();
            assert_relative_eq!(ka, kn, max_relative = 1e-5);
        }
    }

    #[test]
    fn bessel_regime_criterion() {
        // A31 holds iff delta0 + delta1 > 4.
        for &(d0, d1) in &[
            (3.0, 4.0),
            (2.0, 3.0),
            (1.5, 2.9),
            (0.5, 1.5),
            (2.5, 2.6),
            (0.9, 3.3),
        ] {
            let m = builtin_bessel(d0, d1).unwrap();
            let grid = log_spaced(0.1, 10.0, 64);
            let rep = check_assumptions(&m, &grid).unwrap();
            if d0 + d1 > 4.0 {
                assert_eq!(rep.regime, Regime::A31, "({d0}, {d1})");
            } else {
                assert_ne!(rep.regime, Regime::A31, "({d0}, {d1})");
            }
        }
    }

    #[test]
    fn bessel_small_dimensions_fail_certification() {
        let m = builtin_bessel(0.5, 1.5).unwrap();
        let rep = check_assumptions(&m, &log_spaced(0.1, 10.0, 64)).unwrap();
        assert_eq!(rep.regime, Regime::None);
        assert!(!rep.violations.is_empty());
        assert_eq!(rep.rho2_direction, Direction::Decreasing);
    }

    #[test]
    fn constant_model_certifies_constant_snr() {
        let m = builtin_constant(0.0, 1.0, 1.0).unwrap();
        let rep = check_assumptions(&m, &lin_spaced(-5.0, 5.0, 32)).unwrap();
        assert_eq!(rep.regime, Regime::ConstantSnr);
        assert_eq!(rep.rho2_direction, Direction::Constant);
        assert_eq!(rep.integrated_snr_divergence, "assumed");
    }

    #[test]
    fn power_model_regimes_follow_branch_conditions() {
        let sig = || CoefficientFn::with_deriv(|x: f64| x.powf(1.25), |x: f64| 1.25 * x.powf(0.25));
        let grid = log_spaced(0.1, 10.0, 64);

        // (eta0 + eta1 - 1)/(2(eta1 - eta0)) = 1/4 > 0 with rho^2 increasing.
        let m = builtin_power(0.0, 2.0, sig()).unwrap();
        assert_eq!(check_assumptions(&m, &grid).unwrap().regime, Regime::None);

        // = -1/2 < 0 with rho^2 increasing: certified.
        let m = builtin_power(0.0, 0.5, sig()).unwrap();
        assert_eq!(check_assumptions(&m, &grid).unwrap().regime, Regime::A32);

        // sigma(x) = x gives constant SNR.
        let m = builtin_power(
            0.0,
            1.0,
            CoefficientFn::with_deriv(|x: f64| x, |_| 1.0),
        )
        .unwrap();
        assert_eq!(
            check_assumptions(&m, &grid).unwrap().regime,
            Regime::ConstantSnr
        );
    }

    #[test]
    fn bessel_rejects_bad_ordering() {
        assert!(builtin_bessel(4.0, 3.0).is_err());
        assert!(builtin_power(1.0, 1.0, CoefficientFn::constant(1.0_f64)).is_err());
    }

    #[test]
    fn coefficient_deriv_matches_fd_when_analytic() {
        let c = CoefficientFn::with_deriv(|x: f64| x * x * x, |x: f64| 3.0 * x * x);
        for &x in &[0.3, 1.7, -2.0] {
            let h = fd_step(x);
            let fd = (c.eval(x + h) - c.eval(x - h)) / (2.0 * h);
            assert_relative_eq!(c.deriv(x), fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn expression_backed_coefficient() {
        let c = CoefficientFn::<f64>::from_expr("x^2 / 2").unwrap();
        assert_relative_eq!(c.eval(3.0), 4.5);
        assert_relative_eq!(c.deriv(3.0), 3.0, max_relative = 1e-8);
    }
}
