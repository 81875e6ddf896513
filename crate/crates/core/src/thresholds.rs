//! The degree, percolation and volume-fraction thresholds.
//!
//! Each threshold is `-ln(2 pi e) / 2` plus the infimum over `R >= R*` of a
//! convex objective built from the rate function:
//!
//! | threshold | objective          | optimality condition            |
//! |-----------|--------------------|---------------------------------|
//! | `tau_v`   | `I(R) - ln R`      | `1 / R       in dI(R)`          |
//! | `tau_d`   | `2 I(R) - ln 2R`   | `1 / (2R)    in dI(R)`          |
//! | `tau_p`   | `I(R) - ln(R+R*)`  | `1 / (R + R*) in dI(R)`         |
//!
//! The optimizing radius is found by monotone bisection on the sign of
//! `I'_-(R) - g(R)`, and every solution carries an [`OptimalityCertificate`].
//! A log-spaced grid search guards each infimum against solver regressions.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::math::HALF_LN_2PIE;
use crate::rate_fn::{build_rate, RadiusLawSpec, RateFunction, Subdifferential};
use crate::scalar::{bisect, golden_min};

const RADIUS_TOL: f64 = 1e-12;
const MAX_BISECTIONS: u32 = 200;
const GRID_POINTS: usize = 10_000;
const GRID_TRIPWIRE: f64 = 1e-6;
const REFINED_TOL: f64 = 1e-9;
const ORDER_TOL: f64 = 1e-10;
/// Slack allowed when checking that `g(R)` lies in the returned subdifferential.
pub const CERTIFICATE_TOL: f64 = 1e-9;

/// Which variational problem to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    /// `g(R) = 1 / R`.
    VolumeFraction,
    /// `g(R) = 1 / (2R)`.
    Degree,
    /// `g(R) = 1 / (R + R*)`.
    Percolation,
}

impl Target {
    /// The strictly decreasing function whose crossing with `dI` defines the radius.
    pub fn g(self, r: f64, rstar: f64) -> f64 {
        match self {
            Target::VolumeFraction => 1.0 / r,
            Target::Degree => 0.5 / r,
            Target::Percolation => 1.0 / (r + rstar),
        }
    }

    /// The objective whose infimum over `R >= R*` is `tau + ln(2 pi e) / 2`.
    pub fn objective(self, rate: &RateFunction, r: f64) -> f64 {
        let i = rate.value(r);
        match self {
            Target::VolumeFraction => i - libm::log(r),
            Target::Degree => 2.0 * i - libm::log(2.0 * r),
            Target::Percolation => i - libm::log(r + rate.rstar()),
        }
    }

    /// Short label.
    pub fn name(self) -> &'static str {
        match self {
            Target::VolumeFraction => "volume_fraction",
            Target::Degree => "degree",
            Target::Percolation => "percolation",
        }
    }
}

/// Evidence that `radius` satisfies `g(radius) in [I'_-(radius), I'_+(radius)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalityCertificate {
    /// Problem solved.
    pub target: Target,
    /// Optimizing radius.
    pub radius: f64,
    /// `g(radius)`.
    pub g_value: f64,
    /// `I'_-(radius)`.
    pub subgrad_lo: f64,
    /// `I'_+(radius)`.
    pub subgrad_hi: f64,
}

impl OptimalityCertificate {
    /// Whether the inclusion holds up to `tol` (relative to `max(1, g)`).
    pub fn holds(&self, tol: f64) -> bool {
        let s = Subdifferential {
            lo: self.subgrad_lo,
            hi: self.subgrad_hi,
        };
        s.contains(self.g_value, tol * self.g_value.abs().max(1.0))
    }
}

/// Solves `g(R) in [I'_-(R), I'_+(R)]` for the unique `R >= R*`.
pub fn solve_optimal_radius(rate: &RateFunction, target: Target) -> Result<(f64, OptimalityCertificate)> {
    let rstar = rate.rstar();
    let g = |r: f64| target.g(r, rstar);
    let cert = |r: f64| {
        let s = rate.subdifferential(r);
        OptimalityCertificate {
            target,
            radius: r,
            g_value: g(r),
            subgrad_lo: s.lo,
            subgrad_hi: s.hi,
        }
    };
    let check = |r: f64| -> Result<Option<core::cmp::Ordering>> {
        let s = rate.subdifferential(r);
        if s.lo.is_nan() || s.hi.is_nan() || s.lo > s.hi {
            return Err(Error::Consistency(format!(
                "invalid subdifferential [{}, {}] at R = {r}",
                s.lo, s.hi
            )));
        }
        let gv = g(r);
        Ok(Some(if s.hi < gv {
            core::cmp::Ordering::Less
        } else if s.lo > gv {
            core::cmp::Ordering::Greater
        } else {
            core::cmp::Ordering::Equal
        }))
    };

    // Candidate kinks first; between consecutive kinks I is differentiable.
    let mut lo = rstar;
    let mut kinks: Vec<f64> = rate.kinks().into_iter().filter(|&k| k >= rstar).collect();
    if kinks.first() != Some(&rstar) {
        kinks.insert(0, rstar);
    }
    let mut hi = None;
    for &k in &kinks {
        match check(k)? {
            Some(core::cmp::Ordering::Equal) => return Ok((k, cert(k))),
            Some(core::cmp::Ordering::Less) => lo = k,
            _ => {
                hi = Some(k);
                break;
            }
        }
    }
    let (_, dom_hi) = rate.domain();
    let hi = match hi {
        Some(h) => h,
        None => {
            // Expand from the last kink towards the right end of the domain.
            let mut step = lo.max(rstar);
            let mut h = lo;
            let mut found = false;
            for _ in 0..1100 {
                let cand = lo + step;
                h = if dom_hi.is_finite() && cand >= dom_hi {
                    dom_hi
                } else {
                    cand
                };
                match check(h)? {
                    Some(core::cmp::Ordering::Equal) => return Ok((h, cert(h))),
                    Some(core::cmp::Ordering::Greater) => {
                        found = true;
                        break;
                    }
                    _ => {
                        if h == dom_hi {
                            break;
                        }
                        lo = h;
                        step *= 2.0;
                    }
                }
            }
            if !found {
                return Err(Error::Consistency(format!(
                    "{} radius not bracketed below {h}",
                    target.name()
                )));
            }
            h
        }
    };
    let (a, b) = bisect(
        |r| rate.subdifferential(r).lo >= g(r),
        lo,
        hi,
        RADIUS_TOL,
        MAX_BISECTIONS,
    );
    // Prefer an endpoint whose subdifferential already contains g.
    for r in [0.5 * (a + b), b, a] {
        if check(r)? == Some(core::cmp::Ordering::Equal) {
            return Ok((r, cert(r)));
        }
    }
    let r = 0.5 * (a + b);
    let c = cert(r);
    if !c.holds(CERTIFICATE_TOL) {
        return Err(Error::Consistency(format!(
            "{} certificate fails at R = {r}: g = {} not in [{}, {}]",
            target.name(),
            c.g_value,
            c.subgrad_lo,
            c.subgrad_hi
        )));
    }
    Ok((r, c))
}

/// A threshold value together with its optimizing radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSolution {
    /// Threshold, in nats.
    pub tau: f64,
    /// Optimizing normalized radius.
    pub radius: f64,
    /// Optimality certificate for `radius`.
    pub certificate: OptimalityCertificate,
}

/// Solves one threshold and cross-checks it against a grid search.
pub fn solve_threshold(rate: &RateFunction, target: Target) -> Result<ThresholdSolution> {
    let (radius, certificate) = solve_optimal_radius(rate, target)?;
    let value = target.objective(rate, radius);
    if !value.is_finite() {
        return Err(Error::Consistency(format!(
            "{} objective is not finite at R = {radius}",
            target.name()
        )));
    }
    grid_cross_check(rate, target, radius, value)?;
    Ok(ThresholdSolution {
        tau: -HALF_LN_2PIE + value,
        radius,
        certificate,
    })
}

// Tripwire: minimize the objective on 10^4 log-spaced points (plus kinks) over
// [R*, hi], refine the best cell by golden section, and compare.
fn grid_cross_check(rate: &RateFunction, target: Target, radius: f64, value: f64) -> Result<()> {
    let rstar = rate.rstar();
    let (_, dom_hi) = rate.domain();
    let hi = if dom_hi.is_finite() {
        dom_hi
    } else {
        (4.0 * radius).max(2.0 * rstar)
    };
    let obj = |r: f64| target.objective(rate, r);
    let mut pts: Vec<f64> = if hi > rstar {
        let ratio = libm::log(hi / rstar);
        (0..GRID_POINTS)
            .map(|k| rstar * libm::exp(ratio * k as f64 / (GRID_POINTS - 1) as f64))
            .collect()
    } else {
        alloc::vec![rstar]
    };
    pts.extend(rate.kinks().into_iter().filter(|&k| k >= rstar && k <= hi));
    pts.sort_by(|a, b| a.total_cmp(b));
    let (best_i, grid_min) = pts
        .iter()
        .enumerate()
        .map(|(i, &r)| (i, obj(r)))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let a = pts[best_i.saturating_sub(1)];
    let b = pts[(best_i + 1).min(pts.len() - 1)];
    let refined = if b > a {
        golden_min(obj, a, b, 1e-14, 400).value.min(grid_min)
    } else {
        grid_min
    };

    let scale = value.abs().max(1.0);
    if grid_min < value - REFINED_TOL * scale || (grid_min - value).abs() > GRID_TRIPWIRE * scale {
        return Err(Error::Consistency(format!(
            "{} infimum {value} disagrees with grid minimum {grid_min}",
            target.name()
        )));
    }
    if (refined - value).abs() > REFINED_TOL * scale {
        return Err(Error::Consistency(format!(
            "{} infimum {value} disagrees with refined grid minimum {refined}",
            target.name()
        )));
    }
    Ok(())
}

/// Volume-fraction threshold `tau_v = -ln(2 pi e)/2 + inf_{R >= R*} (I(R) - ln R)`.
pub fn tau_volume(rate: &RateFunction) -> Result<f64> {
    Ok(solve_threshold(rate, Target::VolumeFraction)?.tau)
}

/// Degree threshold, computed in both equivalent forms
/// `inf_{R >= 2R*} (2 I(R/2) - ln R)` and `inf_{R >= R*} (2 I(R) - ln 2R)`.
pub fn tau_degree(rate: &RateFunction) -> Result<f64> {
    Ok(solve_degree(rate)?.tau)
}

fn solve_degree(rate: &RateFunction) -> Result<ThresholdSolution> {
    let sol = solve_threshold(rate, Target::Degree)?;
    let doubled = doubled_degree_form(rate);
    let form_b = sol.tau + HALF_LN_2PIE;
    if (doubled - form_b).abs() > 1e-10 * form_b.abs().max(1.0) {
        return Err(Error::Consistency(format!(
            "degree threshold forms disagree: {doubled} vs {form_b}"
        )));
    }
    Ok(sol)
}

// inf over R >= 2R* of 2 I(R/2) - ln R, by its own bracket expansion and golden section.
fn doubled_degree_form(rate: &RateFunction) -> f64 {
    let f = |r: f64| 2.0 * rate.value(0.5 * r) - libm::log(r);
    let lo = 2.0 * rate.rstar();
    let (_, dom_hi) = rate.domain();
    let top = 2.0 * dom_hi;
    let f_lo = f(lo);
    let mut step = lo;
    let mut prev = lo;
    let mut fprev = f_lo;
    let mut hi = lo;
    for _ in 0..1100 {
        let cand = (prev + step).min(top);
        let fc = f(cand);
        hi = cand;
        if !(fc < fprev) || cand >= top {
            break;
        }
        prev = cand;
        fprev = fc;
        step *= 2.0;
    }
    let a = (prev - 0.5 * step).max(lo);
    golden_min(f, a, hi, 1e-14, 400).value.min(f_lo).min(fprev)
}

/// Percolation threshold `tau_p = -ln(2 pi e)/2 + inf_{R >= R*} (I(R) - ln(R + R*))`.
pub fn tau_percolation(rate: &RateFunction) -> Result<f64> {
    Ok(solve_percolation(rate)?.tau)
}

fn solve_percolation(rate: &RateFunction) -> Result<ThresholdSolution> {
    let sol = solve_threshold(rate, Target::Percolation)?;
    if rate.is_deterministic() {
        let deg = solve_threshold(rate, Target::Degree)?;
        if sol.tau != deg.tau {
            return Err(Error::Consistency(format!(
                "deterministic radii: percolation {} and degree {} thresholds differ",
                sol.tau, deg.tau
            )));
        }
    }
    Ok(sol)
}

/// Root in `(1, 2)` of `c^3 + c^2 - 2c - 1 = 0`, the Gaussian-grain
/// percolation radius in units of `sigma`.
pub fn solve_gaussian_cubic() -> f64 {
    let p = |c: f64| ((c + 1.0) * c - 2.0) * c - 1.0;
    let (a, b) = bisect(|c| p(c) >= 0.0, 1.0, 2.0, 1e-16, 200);
    if p(a).abs() <= p(b).abs() {
        a
    } else {
        b
    }
}

/// Asymptotic regime of a model with log-intensity `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `rho < tau_d`: almost every ball is isolated.
    Isolated,
    /// `tau_d < rho < tau_p`: infinitely many neighbours, no percolation.
    NonPercolatingDense,
    /// `tau_p < rho < tau_v`: percolation with vanishing volume fraction.
    PercolatingZeroVolume,
    /// `rho > tau_v`: space is covered.
    Covered,
    /// `rho` equals one of the thresholds.
    Critical,
}

impl Regime {
    /// Classifies `rho` against the three thresholds.
    pub fn classify(rho: f64, tau_d: f64, tau_p: f64, tau_v: f64) -> Self {
        const EDGE: f64 = 1e-12;
        if [tau_d, tau_p, tau_v].iter().any(|t| (rho - t).abs() <= EDGE) {
            Regime::Critical
        } else if rho < tau_d {
            Regime::Isolated
        } else if rho < tau_p {
            Regime::NonPercolatingDense
        } else if rho < tau_v {
            Regime::PercolatingZeroVolume
        } else {
            Regime::Covered
        }
    }

    /// Stable textual label.
    pub fn label(self) -> &'static str {
        match self {
            Regime::Isolated => "isolated",
            Regime::NonPercolatingDense => "non-percolating-dense",
            Regime::PercolatingZeroVolume => "percolating-zero-volume",
            Regime::Covered => "covered",
            Regime::Critical => "critical (undetermined)",
        }
    }
}

/// All three thresholds of a radius law, with radii and certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    /// Asymptotic normalized log-intensity the regime refers to.
    pub rho: f64,
    /// Degree threshold.
    pub tau_d: f64,
    /// Percolation threshold.
    pub tau_p: f64,
    /// Volume-fraction threshold.
    pub tau_v: f64,
    /// Degree-optimal radius.
    pub r_d: f64,
    /// Percolation-optimal radius.
    pub r_p: f64,
    /// Volume-optimal radius.
    pub r_v: f64,
    /// Zero of the rate function.
    pub rstar: f64,
    /// Certificates, in the order degree, percolation, volume fraction.
    pub certificates: [OptimalityCertificate; 3],
    /// Regime of `rho`.
    pub regime: Regime,
}

/// Builds the rate function of `spec` and reports its thresholds.
pub fn report(spec: &RadiusLawSpec, rho: f64) -> Result<ThresholdReport> {
    report_for_rate(&build_rate(spec)?, rho)
}

/// Reports the thresholds of `rate`, checking both ordering chains.
pub fn report_for_rate(rate: &RateFunction, rho: f64) -> Result<ThresholdReport> {
    if !rho.is_finite() {
        return Err(Error::Invalid(format!("rho must be finite, got {rho}")));
    }
    let d = solve_degree(rate)?;
    let p = solve_percolation(rate)?;
    let v = solve_threshold(rate, Target::VolumeFraction)?;
    let rstar = rate.rstar();
    let (tau_d, tau_p, tau_v) = (d.tau, p.tau, v.tau);
    if !(tau_d <= tau_p + ORDER_TOL && tau_p <= tau_v + ORDER_TOL) {
        return Err(Error::Consistency(format!(
            "threshold order violated: {tau_d}, {tau_p}, {tau_v}"
        )));
    }
    let chain = [rstar, d.radius, p.radius, v.radius, p.radius + rstar, 2.0 * d.radius];
    if chain.windows(2).any(|w| w[0] > w[1] + ORDER_TOL * w[1].max(1.0)) {
        return Err(Error::Consistency(format!("radius chain violated: {chain:?}")));
    }
    Ok(ThresholdReport {
        rho,
        tau_d,
        tau_p,
        tau_v,
        r_d: d.radius,
        r_p: p.radius,
        r_v: v.radius,
        rstar,
        certificates: [d.certificate, p.certificate, v.certificate],
        regime: Regime::classify(rho, tau_d, tau_p, tau_v),
    })
}

/// Closed-form Gaussian-grain constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianConstants {
    /// Per-coordinate standard deviation.
    pub sigma: f64,
    /// Root of `c^3 + c^2 - 2c - 1`.
    pub c: f64,
    /// `sigma sqrt(2)`.
    pub r_v: f64,
    /// `sigma sqrt(3/2)`.
    pub r_d: f64,
    /// `sigma c`.
    pub r_p: f64,
    /// `-ln(2 pi e sigma^2)/2 - (ln 4 - 1)/2`.
    pub tau_v: f64,
    /// `-ln(2 pi e sigma^2)/2 - (ln(27/2) - 1)/2`.
    pub tau_d: f64,
    /// `-ln(2 pi e sigma^2)/2 - (ln(c^2 (1+c)^2) - c^2 + 1)/2`.
    pub tau_p: f64,
    /// Volume-fraction threshold of the deterministic (truncated) grain of radius `sigma`.
    pub tau_v_truncated: f64,
}

impl GaussianConstants {
    /// Evaluates the closed forms.
    pub fn new(sigma: f64) -> Self {
        let c = solve_gaussian_cubic();
        let base = -HALF_LN_2PIE - libm::log(sigma);
        Self {
            sigma,
            c,
            r_v: sigma * core::f64::consts::SQRT_2,
            r_d: sigma * libm::sqrt(1.5),
            r_p: sigma * c,
            tau_v: base - 0.5 * (2.0 * LN_2 - 1.0),
            tau_d: base - 0.5 * (libm::log(13.5) - 1.0),
            tau_p: base - 0.5 * (libm::log(c * c * (1.0 + c) * (1.0 + c)) - c * c + 1.0),
            tau_v_truncated: base,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate_fn::RadiusLawSpec;

    fn gaussian() -> RateFunction {
        RateFunction::gaussian_grain(1.0).unwrap()
    }

    #[test]
    fn gaussian_radii() {
        let (rv, cv) = solve_optimal_radius(&gaussian(), Target::VolumeFraction).unwrap();
        assert!((rv - core::f64::consts::SQRT_2).abs() < 1e-10);
        assert!(cv.holds(CERTIFICATE_TOL));
        let (rd, _) = solve_optimal_radius(&gaussian(), Target::Degree).unwrap();
        assert!((rd - libm::sqrt(1.5)).abs() < 1e-10);
        let (rp, _) = solve_optimal_radius(&gaussian(), Target::Percolation).unwrap();
        assert!((rp - solve_gaussian_cubic()).abs() < 1e-8);
    }

    #[test]
    fn deterministic_radii_all_rstar() {
        let rate = RateFunction::deterministic(1.0).unwrap();
        for t in [Target::VolumeFraction, Target::Degree, Target::Percolation] {
            let (r, c) = solve_optimal_radius(&rate, t).unwrap();
            assert_eq!(r, 1.0);
            assert!(c.holds(0.0));
        }
    }

    #[test]
    fn deterministic_thresholds() {
        let h = -HALF_LN_2PIE;
        for rstar in [0.5, 1.0, 3.0] {
            let rate = RateFunction::deterministic(rstar).unwrap();
            assert!((tau_volume(&rate).unwrap() - (h - libm::log(rstar))).abs() < 1e-15);
            assert!((tau_degree(&rate).unwrap() - (h - libm::log(2.0 * rstar))).abs() < 1e-15);
            assert_eq!(tau_percolation(&rate).unwrap(), tau_degree(&rate).unwrap());
        }
    }

    #[test]
    fn gaussian_scaling_shifts_tau_v() {
        let t1 = tau_volume(&gaussian()).unwrap();
        let t2 = tau_volume(&RateFunction::gaussian_grain(2.0).unwrap()).unwrap();
        assert!((t2 - (t1 - LN_2)).abs() < 1e-12);
    }

    #[test]
    fn cubic_root() {
        let c = solve_gaussian_cubic();
        assert!(1.246_979_6 < c && c < 1.246_979_7);
        assert!((c * c * c + c * c - 2.0 * c - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn symmetric_table_degree_forms_agree() {
        let knots = alloc::vec![(0.25, 1.5), (0.5, 0.8), (1.0, 0.0), (1.5, 0.8), (1.75, 1.5)];
        let rate = RateFunction::tabulated(knots).unwrap();
        let via_b = solve_threshold(&rate, Target::Degree).unwrap().tau + HALF_LN_2PIE;
        let via_a = doubled_degree_form(&rate);
        assert!((via_a - via_b).abs() < 1e-10, "{via_a} vs {via_b}");
        tau_degree(&rate).unwrap();
    }

    #[test]
    fn table_with_kink_optimum() {
        // At R* = 1 the subdifferential is [-1.6, 1.6], which contains g(1) = 1.
        let rate = RateFunction::tabulated(alloc::vec![(0.5, 0.8), (1.0, 0.0), (1.5, 0.8), (2.0, 2.8)]).unwrap();
        let (r, c) = solve_optimal_radius(&rate, Target::VolumeFraction).unwrap();
        assert_eq!(r, 1.0);
        assert!(c.subgrad_lo <= 1.0 && 1.0 <= c.subgrad_hi);
    }

    #[test]
    fn table_boundary_optimum() {
        // Shallow table ending at R = 1.2: g(R) never reaches I'_- inside, so the answer
        // is the right end with I'_+ = +inf.
        let rate = RateFunction::tabulated(alloc::vec![(0.9, 0.01), (1.0, 0.0), (1.2, 0.01)]).unwrap();
        let (r, c) = solve_optimal_radius(&rate, Target::VolumeFraction).unwrap();
        assert_eq!(r, 1.2);
        assert_eq!(c.subgrad_hi, f64::INFINITY);
    }

    #[test]
    fn regime_labels() {
        let rep = report(&RadiusLawSpec::GaussianGrain { sigma: 1.0 }, -2.0).unwrap();
        // tau_p ~ -2.1717 < -2.0 < tau_v ~ -1.6121
        assert_eq!(rep.regime, Regime::PercolatingZeroVolume);
        let rep = report(&RadiusLawSpec::GaussianGrain { sigma: 1.0 }, -2.2).unwrap();
        assert_eq!(rep.regime, Regime::NonPercolatingDense);
        assert_eq!(
            Regime::classify(rep.tau_p, rep.tau_d, rep.tau_p, rep.tau_v),
            Regime::Critical
        );
        assert_eq!(
            Regime::classify(-10.0, rep.tau_d, rep.tau_p, rep.tau_v).label(),
            "isolated"
        );
        assert_eq!(
            Regime::classify(0.0, rep.tau_d, rep.tau_p, rep.tau_v).label(),
            "covered"
        );
    }

    #[test]
    fn deterministic_report() {
        let rep = report(&RadiusLawSpec::Deterministic { rstar: 1.0 }, 0.3).unwrap();
        assert_eq!((rep.r_d, rep.r_p, rep.r_v), (1.0, 1.0, 1.0));
        assert!((rep.tau_v - rep.tau_p - LN_2).abs() < 1e-12);
    }

    #[test]
    fn report_rejects_nonfinite_rho() {
        assert!(report(&RadiusLawSpec::GaussianGrain { sigma: 1.0 }, f64::NAN).is_err());
    }
}
