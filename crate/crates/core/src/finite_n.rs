//! Exact quantities of the Boolean model at a fixed dimension `n`.
//!
//! By Slivnyak's theorem the number of balls covering the origin is Poisson
//! with mean `lambda_n = exp(n rho_n) E[Vol B(0, X_n sqrt(n))]`, so the
//! coverage probability is `1 - exp(-lambda_n)`. The Palm mean degree is
//! `exp(n rho_n) E[Vol B(0, (X_n + X'_n) sqrt(n))]` with independent copies.
//! Everything is carried as a logarithm; expectations over the radius law are
//! log-domain quadratures.

use alloc::format;
use alloc::vec::Vec;
use core::cell::RefCell;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::math::{ln_gamma, log_poisson_positive, log_unit_ball_volume};
pub use crate::quad::QuadratureConfig;
use crate::quad::{log_integrate, LogIntegral};
use crate::rate_fn::{build_rate, RadiusLawSpec, RateFunction};
use crate::thresholds::{solve_threshold, Target};

/// How the per-dimension log-intensity `rho_n` approaches `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoRule {
    /// `rho_n = rho`.
    Constant,
    /// `rho_n = rho + coefficient * n^(-exponent)`, `exponent > 0`.
    PowerCorrection {
        /// Prefactor of the correction.
        coefficient: f64,
        /// Decay exponent.
        exponent: f64,
    },
    /// Zero intensity in every dimension (`rho_n = -inf`).
    Empty,
}

/// One family of Boolean models indexed by the dimension.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    /// Asymptotic normalized log-intensity, nats.
    pub rho: f64,
    /// Finite-`n` log-intensity sequence.
    pub rho_n_rule: RhoRule,
    /// Law of the normalized radii.
    pub radius_law: RadiusLawSpec,
}

impl ModelSpec {
    /// Model with constant `rho_n = rho`.
    pub fn new(rho: f64, radius_law: RadiusLawSpec) -> Self {
        Self {
            rho,
            rho_n_rule: RhoRule::Constant,
            radius_law,
        }
    }

    /// Model with no points at all.
    pub fn empty(radius_law: RadiusLawSpec) -> Self {
        Self {
            rho: 0.0,
            rho_n_rule: RhoRule::Empty,
            radius_law,
        }
    }

    /// `rho_n`.
    pub fn rho_n(&self, n: u32) -> f64 {
        match self.rho_n_rule {
            RhoRule::Constant => self.rho,
            RhoRule::PowerCorrection { coefficient, exponent } => {
                self.rho + coefficient * libm::pow(f64::from(n), -exponent)
            }
            RhoRule::Empty => f64::NEG_INFINITY,
        }
    }

    /// `n rho_n`, the log of the intensity in dimension `n`.
    pub fn log_intensity(&self, n: u32) -> f64 {
        match self.rho_n_rule {
            RhoRule::Empty => f64::NEG_INFINITY,
            _ => f64::from(n) * self.rho_n(n),
        }
    }

    /// True for the zero-intensity model.
    pub fn is_empty(&self) -> bool {
        self.rho_n_rule == RhoRule::Empty
    }

    /// Checks that `rho` is finite and the rule converges to it.
    pub fn validate(&self) -> Result<()> {
        if !self.rho.is_finite() {
            return Err(Error::Invalid(format!("rho must be finite, got {}", self.rho)));
        }
        if let RhoRule::PowerCorrection { coefficient, exponent } = self.rho_n_rule {
            if !(coefficient.is_finite() && exponent.is_finite() && exponent > 0.0) {
                return Err(Error::Invalid(
                    "power correction needs finite coefficient and exponent > 0".into(),
                ));
            }
            let tail: Vec<f64> = [1e3, 1e6, 1e9]
                .iter()
                .map(|&n| (coefficient * libm::pow(n, -exponent)).abs())
                .collect();
            if !tail.windows(2).all(|w| w[1] <= w[0]) {
                return Err(Error::Invalid("rho_n does not converge to rho".into()));
            }
        }
        Ok(())
    }
}

/// `ln Vol B(0, r)` in dimension `n`.
pub fn log_ball_volume(n: u32, r: f64) -> f64 {
    log_unit_ball_volume(n) + f64::from(n) * libm::log(r)
}

/// Law of the normalized radius `X_n` at a fixed dimension.
#[derive(Debug, Clone)]
pub enum RadiusLaw {
    /// `X_n = r` almost surely.
    PointMass(f64),
    /// `X_n = sigma * chi_n / sqrt(n)`.
    Chi {
        /// Per-coordinate standard deviation.
        sigma: f64,
        /// Dimension.
        n: u32,
        /// Normalizing constant of the log density.
        log_const: f64,
        /// Law of `n X_n^2 / (2 sigma^2)`.
        gamma: Gamma<f64>,
    },
    /// Density proportional to `exp(-n I(v))`, for rate functions given by
    /// a table or a log-MGF.
    Tilted {
        /// The rate function.
        rate: RateFunction,
        /// Dimension.
        n: u32,
        /// `ln` of the normalizing integral.
        log_norm: f64,
        /// Truncated support used for sampling.
        support: (f64, f64),
    },
}

impl RadiusLaw {
    /// Finite-`n` law of the radius model `spec`.
    pub fn new(spec: &RadiusLawSpec, n: u32, q: &QuadratureConfig) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("dimension must be >= 1".into()));
        }
        match spec {
            RadiusLawSpec::Deterministic { rstar } => Ok(RadiusLaw::PointMass(build_rate(spec).map(|_| *rstar)?)),
            RadiusLawSpec::GaussianGrain { sigma } => {
                build_rate(spec)?;
                let nf = f64::from(n);
                let log_const = nf * libm::log(libm::sqrt(nf) / sigma)
                    - (0.5 * nf - 1.0) * core::f64::consts::LN_2
                    - ln_gamma(0.5 * nf);
                let gamma =
                    Gamma::new(0.5 * nf, 1.0).map_err(|e| Error::Invalid(format!("chi law at n = {n}: {e}")))?;
                Ok(RadiusLaw::Chi {
                    sigma: *sigma,
                    n,
                    log_const,
                    gamma,
                })
            }
            _ => Self::tilted(build_rate(spec)?, n, q),
        }
    }

    /// Law with density proportional to `exp(-n I(v))`.
    pub fn tilted(rate: RateFunction, n: u32, q: &QuadratureConfig) -> Result<Self> {
        if rate.is_deterministic() {
            return Ok(RadiusLaw::PointMass(rate.rstar()));
        }
        let nf = f64::from(n);
        let (lo, hi) = rate.domain();
        let li = log_integrate(|v| -nf * rate.value(v), lo.max(0.0), hi, rate.rstar(), q)?;
        Ok(RadiusLaw::Tilted {
            log_norm: li.log_value,
            support: li.support,
            rate,
            n,
        })
    }

    /// `ln` of the density of `X_n` at `v` (`-inf` off the support).
    pub fn log_density(&self, v: f64) -> f64 {
        match self {
            RadiusLaw::PointMass(_) => f64::NAN,
            RadiusLaw::Chi {
                sigma, n, log_const, ..
            } => {
                if v <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let nf = f64::from(*n);
                let s = v / sigma;
                (nf - 1.0) * libm::log(v) - 0.5 * nf * s * s + log_const
            }
            RadiusLaw::Tilted { rate, n, log_norm, .. } => -f64::from(*n) * rate.value(v) - log_norm,
        }
    }

    /// A typical value of `X_n`.
    pub fn hint(&self) -> f64 {
        match self {
            RadiusLaw::PointMass(r) => *r,
            RadiusLaw::Chi { sigma, .. } => *sigma,
            RadiusLaw::Tilted { rate, .. } => rate.rstar(),
        }
    }

    fn range(&self) -> (f64, f64) {
        match self {
            RadiusLaw::PointMass(r) => (*r, *r),
            RadiusLaw::Chi { .. } => (0.0, f64::INFINITY),
            RadiusLaw::Tilted { rate, .. } => {
                let (lo, hi) = rate.domain();
                (lo.max(0.0), hi)
            }
        }
    }

    /// `ln E[exp(phi(X_n))]` restricted to `X_n >= from`, by log-domain quadrature.
    ///
    /// `peak_hint` should be near the maximizer of `phi + ln density`.
    pub fn log_expect<F>(&self, phi: F, from: f64, peak_hint: f64, q: &QuadratureConfig) -> Result<LogIntegral>
    where
        F: Fn(f64) -> f64,
    {
        if let RadiusLaw::PointMass(r) = self {
            let value = if *r >= from { phi(*r) } else { f64::NEG_INFINITY };
            return Ok(LogIntegral {
                log_value: value,
                support: (*r, *r),
                peak: *r,
            });
        }
        let (lo, hi) = self.range();
        let lo = lo.max(from);
        if !(hi > lo) {
            return Ok(LogIntegral {
                log_value: f64::NEG_INFINITY,
                support: (lo, lo),
                peak: lo,
            });
        }
        log_integrate(|v| phi(v) + self.log_density(v), lo, hi, peak_hint, q)
    }

    /// `ln E[X_n^n]` and the support of its integrand.
    pub fn log_nth_moment(&self, n: u32, q: &QuadratureConfig) -> Result<LogIntegral> {
        let nf = f64::from(n);
        self.log_expect(|v| nf * libm::log(v), 0.0, self.hint() * core::f64::consts::SQRT_2, q)
    }

    /// `ln E[(s + X_n)^n]`.
    pub fn log_shifted_moment(&self, s: f64, n: u32, q: &QuadratureConfig) -> Result<f64> {
        let nf = f64::from(n);
        if let RadiusLaw::PointMass(r) = self {
            return Ok(nf * libm::log(s + r));
        }
        Ok(self
            .log_expect(|v| nf * libm::log(s + v), 0.0, self.hint(), q)?
            .log_value)
    }

    /// `ln P(X_n >= t)`.
    pub fn log_tail(&self, t: f64, q: &QuadratureConfig) -> Result<f64> {
        if let RadiusLaw::PointMass(r) = self {
            return Ok(if *r >= t { 0.0 } else { f64::NEG_INFINITY });
        }
        let (lo, _) = self.range();
        if t <= lo {
            return Ok(0.0);
        }
        let hint = t.max(self.hint());
        Ok(self.log_expect(|_| 0.0, t, hint, q)?.log_value.min(0.0))
    }

    /// Draws one normalized radius.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            RadiusLaw::PointMass(r) => *r,
            RadiusLaw::Chi { sigma, n, gamma, .. } => {
                // chi_n^2 = 2 Gamma(n/2, 1)
                sigma * libm::sqrt(2.0 * gamma.sample(rng) / f64::from(*n))
            }
            RadiusLaw::Tilted { support, .. } => {
                // Rejection from the uniform box over the truncated support;
                // the density is log-concave with maximum exp(-log_norm) at R*.
                let (a, b) = *support;
                let top = self.log_density(self.hint());
                loop {
                    let v = a + (b - a) * rng.random::<f64>();
                    let u: f64 = rng.random();
                    if libm::log(u) <= self.log_density(v) - top {
                        return v;
                    }
                }
            }
        }
    }
}

/// Closed-form `ln E[X_n^n]` for Gaussian-grain radii (chi moment).
pub fn gaussian_log_nth_moment(sigma: f64, n: u32) -> f64 {
    let nf = f64::from(n);
    nf * libm::log(sigma / libm::sqrt(nf)) + 0.5 * nf * core::f64::consts::LN_2 + ln_gamma(nf) - ln_gamma(0.5 * nf)
}

/// `ln E^0_n[d_n^-]`, the log of the mean number of balls covering a point.
pub fn log_mean_indegree(spec: &ModelSpec, n: u32, q: &QuadratureConfig) -> Result<f64> {
    Ok(indegree_with_support(spec, n, q)?.0)
}

/// `ln lambda_n` together with the support of the radius integrand, which
/// bounds the radii that matter for covering a point.
pub fn indegree_with_support(spec: &ModelSpec, n: u32, q: &QuadratureConfig) -> Result<(f64, (f64, f64))> {
    spec.validate()?;
    q.validate()?;
    let law = RadiusLaw::new(&spec.radius_law, n, q)?;
    let moment = law.log_nth_moment(n, q)?;
    if let RadiusLawSpec::GaussianGrain { sigma } = spec.radius_law {
        let closed = gaussian_log_nth_moment(sigma, n);
        if (moment.log_value - closed).abs() > 1e-10 * closed.abs().max(1.0) {
            return Err(Error::Consistency(format!(
                "chi moment quadrature {} differs from closed form {closed} at n = {n}",
                moment.log_value
            )));
        }
    }
    let sqrt_n = libm::sqrt(f64::from(n));
    let log_lambda = spec.log_intensity(n) + log_ball_volume(n, sqrt_n) + moment.log_value;
    Ok((log_lambda, moment.support))
}

/// `ln E^0_n[D_n]`, the log of the Palm mean number of balls meeting the ball
/// of the origin: `n rho_n + ln Vol B(0, sqrt n) + ln E[(X + X')^n]`.
pub fn log_mean_palm_degree(spec: &ModelSpec, n: u32, q: &QuadratureConfig) -> Result<f64> {
    spec.validate()?;
    q.validate()?;
    let law = RadiusLaw::new(&spec.radius_law, n, q)?;
    let pair = log_pair_moment(&law, n, q)?;
    let sqrt_n = libm::sqrt(f64::from(n));
    Ok(spec.log_intensity(n) + log_ball_volume(n, sqrt_n) + pair)
}

/// `ln E[(X + X')^n]` for independent copies, by iterated 1-D quadrature.
pub fn log_pair_moment(law: &RadiusLaw, n: u32, q: &QuadratureConfig) -> Result<f64> {
    if let RadiusLaw::PointMass(r) = law {
        return law.log_shifted_moment(*r, n, q);
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner = |v: f64| match law.log_shifted_moment(v, n, q) {
        Ok(x) => x,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let outer = law.log_expect(inner, 0.0, law.hint() * 1.2, q);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(outer?.log_value)
}

/// Coverage probability of the origin at dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coverage {
    /// `P(0 in C_n) = 1 - exp(-lambda_n)`.
    pub probability: f64,
    /// `ln lambda_n`.
    pub log_lambda_n: f64,
    /// Whether `rho > tau_v`.
    pub supercritical: bool,
    /// `(1/n) ln P(0 in C_n)` when subcritical, `(1/n) ln(-ln P(0 not in C_n))` otherwise.
    pub exponent_vf: f64,
}

/// `P(0 in C_n)` computed from the Poisson law of the in-degree.
pub fn coverage_probability(spec: &ModelSpec, n: u32, q: &QuadratureConfig) -> Result<Coverage> {
    let rate = build_rate(&spec.radius_law)?;
    let tau_v = solve_threshold(&rate, Target::VolumeFraction)?.tau;
    coverage_with_tau(spec, n, q, tau_v)
}

fn coverage_with_tau(spec: &ModelSpec, n: u32, q: &QuadratureConfig, tau_v: f64) -> Result<Coverage> {
    let log_lambda_n = log_mean_indegree(spec, n, q)?;
    Ok(coverage_from_log_lambda(
        log_lambda_n,
        n,
        !spec.is_empty() && spec.rho > tau_v,
    ))
}

/// Coverage quantities from `ln lambda_n`.
pub fn coverage_from_log_lambda(log_lambda_n: f64, n: u32, supercritical: bool) -> Coverage {
    let log_p = log_poisson_positive(log_lambda_n);
    let probability = libm::exp(log_p);
    let nf = f64::from(n);
    let exponent_vf = if supercritical { log_lambda_n / nf } else { log_p / nf };
    Coverage {
        probability,
        log_lambda_n,
        supercritical,
        exponent_vf,
    }
}

/// Exact finite-dimension diagnostics at one `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteNPoint {
    /// Dimension.
    pub n: u32,
    /// `ln E^0_n[d_n^-]`.
    pub log_lambda_n: f64,
    /// `P(0 in C_n)`.
    pub coverage: f64,
    /// Whether the coverage exponent uses the supercritical (log-log) form.
    pub supercritical: bool,
    /// Normalized coverage exponent; see [`Coverage::exponent_vf`].
    pub exponent_vf: f64,
    /// `ln E^0_n[D_n]`.
    pub log_mean_degree: f64,
    /// `(1/n) ln E^0_n[D_n]`.
    pub exponent_deg: f64,
    /// Limit `rho - tau_v`.
    pub target_vf: f64,
    /// Limit `rho - tau_d`.
    pub target_deg: f64,
}

/// Shared state for evaluating [`FiniteNPoint`]s of one model.
#[derive(Debug, Clone)]
pub struct ScanContext {
    spec: ModelSpec,
    q: QuadratureConfig,
    tau_v: f64,
    tau_d: f64,
}

impl ScanContext {
    /// Validates the model and solves the asymptotic thresholds once.
    pub fn new(spec: &ModelSpec, q: &QuadratureConfig) -> Result<Self> {
        spec.validate()?;
        q.validate()?;
        let rate = build_rate(&spec.radius_law)?;
        let tau_v = solve_threshold(&rate, Target::VolumeFraction)?.tau;
        let tau_d = crate::thresholds::tau_degree(&rate)?;
        Ok(Self {
            spec: spec.clone(),
            q: *q,
            tau_v,
            tau_d,
        })
    }

    /// `rho - tau_v`.
    pub fn target_vf(&self) -> f64 {
        self.spec.rho - self.tau_v
    }

    /// `rho - tau_d`.
    pub fn target_deg(&self) -> f64 {
        self.spec.rho - self.tau_d
    }

    /// Evaluates all diagnostics at dimension `n`.
    pub fn point(&self, n: u32) -> Result<FiniteNPoint> {
        let cov = coverage_with_tau(&self.spec, n, &self.q, self.tau_v)?;
        let log_mean_degree = log_mean_palm_degree(&self.spec, n, &self.q)?;
        Ok(FiniteNPoint {
            n,
            log_lambda_n: cov.log_lambda_n,
            coverage: cov.probability,
            supercritical: cov.supercritical,
            exponent_vf: cov.exponent_vf,
            log_mean_degree,
            exponent_deg: log_mean_degree / f64::from(n),
            target_vf: self.target_vf(),
            target_deg: self.target_deg(),
        })
    }
}

/// Checks that a dimension list is nonempty, positive and strictly ascending.
pub fn validate_n_list(n_list: &[u32]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::Invalid("dimension list is empty".into()));
    }
    if n_list[0] == 0 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid(format!(
            "dimension list must be positive and strictly ascending: {n_list:?}"
        )));
    }
    Ok(())
}

/// Diagnostics at each `n` in `n_list`, alongside the limits `rho - tau_v` and `rho - tau_d`.
pub fn exponent_scan(spec: &ModelSpec, n_list: &[u32], q: &QuadratureConfig) -> Result<Vec<FiniteNPoint>> {
    validate_n_list(n_list)?;
    let ctx = ScanContext::new(spec, q)?;
    n_list.iter().map(|&n| ctx.point(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn det(rho: f64) -> ModelSpec {
        ModelSpec::new(rho, RadiusLawSpec::Deterministic { rstar: 1.0 })
    }

    fn gauss(rho: f64) -> ModelSpec {
        ModelSpec::new(rho, RadiusLawSpec::GaussianGrain { sigma: 1.0 })
    }

    #[test]
    fn ball_volumes() {
        assert!((log_ball_volume(2, 1.0) - libm::log(PI)).abs() < 1e-15);
        assert!((log_ball_volume(3, 1.0) - libm::log(4.0 * PI / 3.0)).abs() < 1e-15);
        assert!((log_ball_volume(2, libm::sqrt(2.0)) - libm::log(2.0 * PI)).abs() < 1e-15);
        assert!(log_ball_volume(1_000_000, 1000.0).is_finite());
    }

    #[test]
    fn deterministic_constants_n2() {
        let l = log_mean_indegree(&det(0.0), 2, &q()).unwrap();
        assert!((l - libm::log(2.0 * PI)).abs() < 1e-14);
        let d = log_mean_palm_degree(&det(0.0), 2, &q()).unwrap();
        assert!((d - libm::log(8.0 * PI)).abs() < 1e-14);
        let c = coverage_probability(&det(0.0), 2, &q()).unwrap();
        assert!((c.probability - (1.0 - libm::exp(-2.0 * PI))).abs() < 1e-14);
    }

    #[test]
    fn gaussian_n2_indegree() {
        let l = log_mean_indegree(&gauss(0.0), 2, &q()).unwrap();
        assert!((l - libm::log(2.0 * PI)).abs() < 1e-10);
    }

    #[test]
    fn chi_density_normalizes() {
        for n in [1, 2, 7, 300] {
            let law = RadiusLaw::new(&RadiusLawSpec::GaussianGrain { sigma: 1.3 }, n, &q()).unwrap();
            let z = law.log_expect(|_| 0.0, 0.0, 1.3, &q()).unwrap().log_value;
            assert!(z.abs() < 1e-11, "n={n}: {z}");
        }
    }

    #[test]
    fn empty_model_has_zero_coverage() {
        let spec = ModelSpec::empty(RadiusLawSpec::GaussianGrain { sigma: 1.0 });
        let c = coverage_probability(&spec, 10, &q()).unwrap();
        assert_eq!(c.probability, 0.0);
        assert_eq!(c.log_lambda_n, f64::NEG_INFINITY);
    }

    #[test]
    fn deterministic_palm_minus_indegree_is_n_ln2() {
        for n in [1, 5, 64, 999] {
            let a = log_mean_indegree(&det(-1.0), n, &q()).unwrap();
            let b = log_mean_palm_degree(&det(-1.0), n, &q()).unwrap();
            let expect = f64::from(n) * core::f64::consts::LN_2;
            assert!((b - a - expect).abs() <= 1e-12 * expect.max(1.0));
        }
    }

    #[test]
    fn tilted_law_tail_and_moment() {
        // Table on [0.5, 2]: the tilted law is supported there.
        let spec = RadiusLawSpec::TabulatedConvex {
            knots: alloc::vec![(0.5, 0.5), (1.0, 0.0), (2.0, 1.0)],
        };
        let law = RadiusLaw::new(&spec, 10, &q()).unwrap();
        assert_eq!(law.log_tail(0.2, &q()).unwrap(), 0.0);
        assert_eq!(law.log_tail(2.5, &q()).unwrap(), f64::NEG_INFINITY);
        let half = law.log_tail(1.0, &q()).unwrap();
        let left = (1.0 - libm::exp(-5.0)) / 10.0;
        let right = (1.0 - libm::exp(-10.0)) / 10.0;
        let expect = libm::log(right / (right + left));
        assert!((half - expect).abs() < 1e-9, "{half} vs {expect}");
    }

    #[test]
    fn scan_rejects_bad_lists() {
        assert!(exponent_scan(&det(0.0), &[], &q()).is_err());
        assert!(exponent_scan(&det(0.0), &[5, 3], &q()).is_err());
        assert!(exponent_scan(&det(0.0), &[0, 3], &q()).is_err());
    }

    #[test]
    fn power_correction_rule() {
        let mut spec = det(-1.0);
        spec.rho_n_rule = RhoRule::PowerCorrection {
            coefficient: 2.0,
            exponent: 1.0,
        };
        assert!((spec.rho_n(4) - (-0.5)).abs() < 1e-15);
        spec.validate().unwrap();
        spec.rho_n_rule = RhoRule::PowerCorrection {
            coefficient: 2.0,
            exponent: -1.0,
        };
        assert!(spec.validate().is_err());
    }
}
