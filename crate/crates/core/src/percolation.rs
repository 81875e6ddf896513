//! Poisson branching-process probe for percolation.
//!
//! The cluster of the origin is dominated by, and in high dimension behaves
//! like, a Galton-Watson tree with Poisson offspring. For deterministic radii
//! the mean offspring is `y_n = exp(n rho_n) Vol B(0, 2 R* sqrt n)`. For random
//! radii the probe retains only balls of normalized radius at least
//! `thin_radius`, which gives the mean offspring
//! `exp(n rho_n) Vol B(0, (thin_radius + ball_radius) sqrt n) P(X_n >= thin_radius)`.
//!
//! The probe reports the branching quantity; it is not a finite-`n` estimate of
//! the percolation probability itself.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::finite_n::{log_ball_volume, validate_n_list, ModelSpec, QuadratureConfig, RadiusLaw};
use crate::rate_fn::{build_rate, RadiusLawSpec};
use crate::thresholds::{solve_threshold, Target};

/// Branching-process summary at one dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchingProbe {
    /// Dimension.
    pub n: u32,
    /// `ln y_n`, the log mean offspring.
    pub log_y_n: f64,
    /// Survival probability of the Poisson(`y_n`) Galton-Watson process.
    pub survival: f64,
    /// Normalized thinning radius, if thinning was applied.
    pub thin_radius: Option<f64>,
}

impl BranchingProbe {
    /// `ln(y_n) / n`.
    pub fn normalized_exponent(&self) -> f64 {
        self.log_y_n / f64::from(self.n)
    }
}

/// Survival probability of a Galton-Watson process with Poisson(`y`) offspring
/// started from one individual: the largest root in `[0, 1]` of `s = 1 - exp(-y s)`.
pub fn poisson_gw_survival(y: f64) -> f64 {
    if y.is_nan() || y <= 1.0 {
        return 0.0;
    }
    if y == f64::INFINITY {
        return 1.0;
    }
    let f = |s: f64| -libm::expm1(-y * s) - s;
    let mut lo = (y - 1.0) / (y * y);
    if !(f(lo) > 0.0) {
        lo = f64::MIN_POSITIVE;
    }
    let mut hi = 1.0;
    if f(hi) >= 0.0 {
        return 1.0;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Survival of the Poisson Galton-Watson process with mean `exp(log_y)`.
///
/// When `y` overflows the lower bound `1 - exp(-y)`, which rounds to 1, is reported.
pub fn survival_from_log_y(log_y: f64) -> f64 {
    let y = libm::exp(log_y);
    if y.is_finite() {
        poisson_gw_survival(y)
    } else {
        -libm::expm1(-y)
    }
}

/// `ln y_n = n rho_n + ln Vol B(0, 2 R* sqrt n)` for deterministic radii.
pub fn penrose_log_y(spec: &ModelSpec, n: u32) -> Result<f64> {
    spec.validate()?;
    let RadiusLawSpec::Deterministic { rstar } = spec.radius_law else {
        return Err(Error::Invalid(
            "penrose_log_y needs deterministic radii; use thinned_log_y for random radii".into(),
        ));
    };
    build_rate(&spec.radius_law)?;
    if n == 0 {
        return Err(Error::Invalid("dimension must be >= 1".into()));
    }
    // Same association as the Palm degree so both agree bit for bit.
    let nf = f64::from(n);
    Ok(spec.log_intensity(n) + log_ball_volume(n, libm::sqrt(nf)) + nf * libm::log(rstar + rstar))
}

/// `ln` of the mean offspring of the thinned branching process:
/// `n rho_n + ln Vol B(0, (thin_radius + ball_radius) sqrt n) + ln P(X_n >= thin_radius)`.
pub fn thinned_log_y(
    spec: &ModelSpec,
    n: u32,
    thin_radius: f64,
    ball_radius: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    spec.validate()?;
    if !(thin_radius.is_finite() && ball_radius.is_finite() && thin_radius >= 0.0 && ball_radius >= 0.0) {
        return Err(Error::Invalid(format!(
            "radii must be finite and nonnegative: thin {thin_radius}, ball {ball_radius}"
        )));
    }
    if thin_radius + ball_radius <= 0.0 {
        return Err(Error::Invalid("thin_radius + ball_radius must be positive".into()));
    }
    let law = RadiusLaw::new(&spec.radius_law, n, q)?;
    let log_tail = law.log_tail(thin_radius, q)?;
    if log_tail == f64::NEG_INFINITY {
        return Err(Error::TailUnderflow {
            threshold: thin_radius,
            n,
        });
    }
    Ok(spec.log_intensity(n) + log_ball_volume(n, (thin_radius + ball_radius) * libm::sqrt(f64::from(n))) + log_tail)
}

/// Default slack `gamma = min(0.05 R*, (R_p - R*) / 2)`, the second term only when positive.
pub fn default_gamma(rstar: f64, r_p: f64) -> f64 {
    let g = 0.05 * rstar;
    if r_p > rstar {
        g.min(0.5 * (r_p - rstar))
    } else {
        g
    }
}

/// Thinned branching probe at each `n`: thin at `R_p - gamma` when `R_p > R*`
/// (otherwise at `R* - gamma`), balls at `R* - gamma`. `gamma = None` uses
/// [`default_gamma`].
pub fn percolation_probe_scan(
    spec: &ModelSpec,
    n_list: &[u32],
    gamma: Option<f64>,
    q: &QuadratureConfig,
) -> Result<Vec<BranchingProbe>> {
    validate_n_list(n_list)?;
    spec.validate()?;
    let rate = build_rate(&spec.radius_law)?;
    let rstar = rate.rstar();
    let r_p = solve_threshold(&rate, Target::Percolation)?.radius;
    let gamma = gamma.unwrap_or_else(|| default_gamma(rstar, r_p));
    if !(gamma > 0.0 && gamma < rstar) {
        return Err(Error::Invalid(format!(
            "gamma must lie in (0, R*) = (0, {rstar}), got {gamma}"
        )));
    }
    let thin = if r_p > rstar { r_p - gamma } else { rstar - gamma };
    let ball = rstar - gamma;
    n_list
        .iter()
        .map(|&n| {
            let log_y_n = thinned_log_y(spec, n, thin, ball, q)?;
            Ok(BranchingProbe {
                n,
                log_y_n,
                survival: survival_from_log_y(log_y_n),
                thin_radius: Some(thin),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn det(rho: f64) -> ModelSpec {
        ModelSpec::new(rho, RadiusLawSpec::Deterministic { rstar: 1.0 })
    }

    #[test]
    fn survival_examples() {
        assert_eq!(poisson_gw_survival(1.0), 0.0);
        assert_eq!(poisson_gw_survival(0.5), 0.0);
        assert_eq!(poisson_gw_survival(0.0), 0.0);
        let s = poisson_gw_survival(2.0);
        assert!((s - 0.79681).abs() < 1e-5);
        assert!((s - (1.0 - libm::exp(-2.0 * s))).abs() <= 1e-12);
        assert_eq!(poisson_gw_survival(f64::INFINITY), 1.0);
        let s = poisson_gw_survival(1.0 + 1e-9);
        assert!(s > 0.0 && s < 1e-8);
    }

    #[test]
    fn penrose_n2() {
        let l = penrose_log_y(&det(0.0), 2).unwrap();
        assert!((l - libm::log(8.0 * PI)).abs() < 1e-14);
        let g = ModelSpec::new(0.0, RadiusLawSpec::GaussianGrain { sigma: 1.0 });
        assert!(matches!(penrose_log_y(&g, 2), Err(Error::Invalid(_))));
    }

    #[test]
    fn thinning_everything_matches_penrose() {
        let q = QuadratureConfig::default();
        for n in [2, 10, 77] {
            let a = thinned_log_y(&det(-0.7), n, 1.0, 1.0, &q).unwrap();
            let b = penrose_log_y(&det(-0.7), n).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn tail_underflow_is_reported() {
        let q = QuadratureConfig::default();
        assert!(matches!(
            thinned_log_y(&det(0.0), 4, 1.5, 1.0, &q),
            Err(Error::TailUnderflow { .. })
        ));
    }

    #[test]
    fn default_gamma_rule() {
        assert_eq!(default_gamma(1.0, 1.0), 0.05);
        assert_eq!(default_gamma(1.0, 1.02), 0.5 * (1.02 - 1.0));
        assert_eq!(default_gamma(2.0, 3.0), 0.1);
    }
}
