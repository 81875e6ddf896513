//! Large-deviations rate functions of the normalized radii.
//!
//! A [`RateFunction`] is a closed proper convex function `I` on `[0, inf)`
//! with a unique zero `R*`. It is `+inf` outside its domain, and exposes its
//! one-sided derivatives through [`RateFunction::subdifferential`], using the
//! convention that both derivatives are `-inf` to the left of the domain and
//! `+inf` to the right of it.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::scalar::{bisect, golden_max};

/// Closed interval `[lo, hi]` of one-sided derivatives `[I'_-(R), I'_+(R)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subdifferential {
    /// Left derivative `I'_-(R)`.
    pub lo: f64,
    /// Right derivative `I'_+(R)`.
    pub hi: f64,
}

impl Subdifferential {
    /// Whether `x` lies in `[lo - tol, hi + tol]`.
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.lo - tol <= x && x <= self.hi + tol
    }

    /// Distance from `x` to the interval (zero inside).
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    const LEFT_OF_DOMAIN: Self = Self {
        lo: f64::NEG_INFINITY,
        hi: f64::NEG_INFINITY,
    };
    const RIGHT_OF_DOMAIN: Self = Self {
        lo: f64::INFINITY,
        hi: f64::INFINITY,
    };
}

type LambdaFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A scaled cumulant (log-moment) generating function `theta -> Lambda(theta)`
/// of the normalized radii, finite on the open interval `(theta_lo, theta_hi)`.
#[derive(Clone)]
pub struct LogMgf {
    name: String,
    theta_lo: f64,
    theta_hi: f64,
    lambda: Arc<LambdaFn>,
    derivative: Option<Arc<LambdaFn>>,
}

impl fmt::Debug for LogMgf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LogMgf")
            .field("name", &self.name)
            .field("theta_lo", &self.theta_lo)
            .field("theta_hi", &self.theta_hi)
            .finish()
    }
}

impl LogMgf {
    /// Wraps an arbitrary log-MGF finite on `(theta_lo, theta_hi)`.
    pub fn new<F>(name: impl Into<String>, theta_lo: f64, theta_hi: f64, lambda: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            theta_lo,
            theta_hi,
            lambda: Arc::new(lambda),
            derivative: None,
        }
    }

    /// Attaches an analytic derivative `Lambda'`, used to locate maximizers exactly.
    pub fn with_derivative<F>(mut self, d: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(d));
        self
    }

    /// Limit log-MGF of Gaussian-grain radii with per-coordinate deviation `sigma`.
    pub fn gaussian_grain(sigma: f64) -> Self {
        Self::new(
            format!("gaussian_grain(sigma={sigma})"),
            f64::NEG_INFINITY,
            f64::INFINITY,
            move |t| gaussian_log_mgf(sigma, t),
        )
        .with_derivative(move |t| sigma * gaussian_root(sigma, t))
    }

    /// `Lambda(theta) = mean * theta + variance * theta^2 / 2`.
    pub fn normal(mean: f64, variance: f64) -> Self {
        Self::new(
            format!("normal(mean={mean}, variance={variance})"),
            f64::NEG_INFINITY,
            f64::INFINITY,
            move |t| mean * t + 0.5 * variance * t * t,
        )
        .with_derivative(move |t| mean + variance * t)
    }

    /// `Lambda(theta) = -shape * ln(1 - scale * theta)` for `theta < 1 / scale`.
    pub fn gamma(shape: f64, scale: f64) -> Self {
        Self::new(
            format!("gamma(shape={shape}, scale={scale})"),
            f64::NEG_INFINITY,
            1.0 / scale,
            move |t| -shape * libm::log1p(-scale * t),
        )
        .with_derivative(move |t| shape * scale / (1.0 - scale * t))
    }

    /// `Lambda(theta) = r0 * theta`, the log-MGF of a constant radius `r0`.
    pub fn linear(r0: f64) -> Self {
        Self::new(format!("linear(r0={r0})"), f64::NEG_INFINITY, f64::INFINITY, move |t| {
            r0 * t
        })
        .with_derivative(move |_| r0)
    }

    /// Descriptive name.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Open interval on which the function is finite.
    pub fn finiteness_domain(&self) -> (f64, f64) {
        (self.theta_lo, self.theta_hi)
    }

    /// Evaluates `Lambda(theta)`, `+inf` outside the finiteness domain.
    pub fn eval(&self, theta: f64) -> f64 {
        if theta <= self.theta_lo || theta >= self.theta_hi {
            return f64::INFINITY;
        }
        (self.lambda)(theta)
    }

    /// `Lambda'(theta)`, analytic when available, else a central difference.
    pub fn derivative(&self, theta: f64) -> f64 {
        if let Some(d) = &self.derivative {
            return d(theta);
        }
        let h = 1e-5 * theta.abs().max(1.0);
        let h = h.min(0.5 * (theta - self.theta_lo)).min(0.5 * (self.theta_hi - theta));
        (self.eval(theta + h) - self.eval(theta - h)) / (2.0 * h)
    }
}

/// How the normalized radii of a model are distributed.
#[derive(Debug, Clone)]
pub enum RadiusLawSpec {
    /// Constant normalized radius `rstar`.
    Deterministic {
        /// The radius, `> 0`.
        rstar: f64,
    },
    /// Radii distributed as the norm of an `n`-vector of i.i.d. `N(0, sigma^2)`
    /// coordinates, divided by `sqrt(n)`.
    GaussianGrain {
        /// Per-coordinate standard deviation, `> 0`.
        sigma: f64,
    },
    /// Rate function obtained as the Legendre transform of a log-MGF.
    FromLogMgf(LogMgf),
    /// Piecewise-linear rate function through ordered `(R, I(R))` knots.
    TabulatedConvex {
        /// Knots with strictly increasing `R`.
        knots: Vec<(f64, f64)>,
    },
}

/// Outcome of checking the moment condition
/// `limsup E[X_n^(gamma n)]^(1/n) < inf` for some `gamma > 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentConditionReport {
    /// Witness exponent, `> 1`.
    pub gamma: f64,
    /// Whether the condition holds at `gamma`.
    pub satisfied: bool,
    /// Human-readable justification.
    pub evidence: String,
}

/// Beyond-the-last-knot continuation `I(R_m) + slope (R - R_m) + curvature (R - R_m)^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticTail {
    /// Right derivative at the last knot.
    pub slope: f64,
    /// Second derivative of the tail, `>= 0`.
    pub curvature: f64,
}

#[derive(Debug, Clone)]
struct Piecewise {
    knots: Vec<(f64, f64)>,
    // One entry per segment between consecutive knots.
    curvature: Vec<f64>,
    tail: Option<QuadraticTail>,
}

impl Piecewise {
    fn chord(&self, i: usize) -> f64 {
        let (a, ya) = self.knots[i];
        let (b, yb) = self.knots[i + 1];
        (yb - ya) / (b - a)
    }

    // Right derivative at the left end of segment i.
    fn seg_start_slope(&self, i: usize) -> f64 {
        let h = self.knots[i + 1].0 - self.knots[i].0;
        self.chord(i) - 0.5 * self.curvature[i] * h
    }

    // Left derivative at the right end of segment i.
    fn seg_end_slope(&self, i: usize) -> f64 {
        let h = self.knots[i + 1].0 - self.knots[i].0;
        self.chord(i) + 0.5 * self.curvature[i] * h
    }

    fn last(&self) -> (f64, f64) {
        self.knots[self.knots.len() - 1]
    }

    fn right_end(&self) -> f64 {
        if self.tail.is_some() {
            f64::INFINITY
        } else {
            self.last().0
        }
    }

    fn segment(&self, r: f64) -> usize {
        // Index i with knots[i].0 <= r < knots[i+1].0, for r strictly inside.
        self.knots
            .partition_point(|k| k.0 <= r)
            .saturating_sub(1)
            .min(self.knots.len() - 2)
    }

    fn value(&self, r: f64) -> f64 {
        let first = self.knots[0].0;
        let (m, ym) = self.last();
        if r < first {
            return f64::INFINITY;
        }
        if r > m {
            return match self.tail {
                Some(t) => {
                    let d = r - m;
                    ym + t.slope * d + 0.5 * t.curvature * d * d
                }
                None => f64::INFINITY,
            };
        }
        if let Ok(i) = self
            .knots
            .binary_search_by(|k| k.0.partial_cmp(&r).unwrap_or(core::cmp::Ordering::Less))
        {
            return self.knots[i].1;
        }
        let i = self.segment(r);
        let (a, ya) = self.knots[i];
        let b = self.knots[i + 1].0;
        ya + self.chord(i) * (r - a) + 0.5 * self.curvature[i] * (r - a) * (r - b)
    }

    fn subdifferential(&self, r: f64) -> Subdifferential {
        let first = self.knots[0].0;
        let (m, _) = self.last();
        let nseg = self.knots.len() - 1;
        if r < first {
            return Subdifferential::LEFT_OF_DOMAIN;
        }
        if r > m {
            return match self.tail {
                Some(t) => {
                    let d = t.slope + t.curvature * (r - m);
                    Subdifferential { lo: d, hi: d }
                }
                None => Subdifferential::RIGHT_OF_DOMAIN,
            };
        }
        if let Ok(i) = self
            .knots
            .binary_search_by(|k| k.0.partial_cmp(&r).unwrap_or(core::cmp::Ordering::Less))
        {
            let lo = if i == 0 {
                f64::NEG_INFINITY
            } else {
                self.seg_end_slope(i - 1)
            };
            let hi = if i == nseg {
                self.tail.map_or(f64::INFINITY, |t| t.slope)
            } else {
                self.seg_start_slope(i)
            };
            return Subdifferential { lo, hi };
        }
        let i = self.segment(r);
        let mid = 0.5 * (self.knots[i].0 + self.knots[i + 1].0);
        let d = self.chord(i) + self.curvature[i] * (r - mid);
        Subdifferential { lo: d, hi: d }
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Indicator,
    Gaussian { sigma: f64 },
    Piecewise(Piecewise),
    Legendre(LogMgf),
}

/// A convex rate function with unique zero `R*`.
#[derive(Debug, Clone)]
pub struct RateFunction {
    shape: Shape,
    rstar: f64,
}

impl RateFunction {
    /// Indicator rate function of a constant radius: `0` at `rstar`, `+inf` elsewhere.
    pub fn deterministic(rstar: f64) -> Result<Self> {
        positive("rstar", rstar)?;
        Ok(Self {
            shape: Shape::Indicator,
            rstar,
        })
    }

    /// `I(R) = R^2 / (2 sigma^2) - 1/2 - ln(R^2 / sigma^2) / 2` for `R > 0`.
    pub fn gaussian_grain(sigma: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        Ok(Self {
            shape: Shape::Gaussian { sigma },
            rstar: sigma,
        })
    }

    /// Piecewise-linear interpolation of convex knots, `+inf` outside them.
    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        let segs = knots.len().saturating_sub(1);
        Self::piecewise_quadratic(knots, vec![0.0; segs], None)
    }

    /// Convex piecewise-quadratic rate function. Between knots `i` and `i+1`
    /// the function is the chord plus `curvature[i] / 2 * (R - R_i)(R - R_{i+1})`;
    /// beyond the last knot it continues with `tail`, or is `+inf`.
    pub fn piecewise_quadratic(
        knots: Vec<(f64, f64)>,
        curvature: Vec<f64>,
        tail: Option<QuadraticTail>,
    ) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Invalid("a table needs at least two knots".into()));
        }
        if curvature.len() != knots.len() - 1 {
            return Err(Error::Invalid("need one curvature per segment".into()));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Invalid(format!(
                    "knot radii must increase strictly: {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        if !(knots[0].0 >= 0.0)
            || knots
                .iter()
                .any(|k| !k.0.is_finite() || !k.1.is_finite() || k.1 < -1e-12)
        {
            return Err(Error::Invalid("knots must be finite with R >= 0 and I >= 0".into()));
        }
        if curvature.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::Invalid("curvatures must be finite and >= 0".into()));
        }
        let zeros: Vec<usize> = (0..knots.len()).filter(|&i| knots[i].1.abs() <= 1e-12).collect();
        if zeros.len() != 1 {
            return Err(Error::Invalid(format!(
                "rate table must have exactly one zero knot, found {}",
                zeros.len()
            )));
        }
        let z = zeros[0];
        let rstar = knots[z].0;
        positive("R*", rstar)?;
        let mut knots = knots;
        knots[z].1 = 0.0;
        let pw = Piecewise { knots, curvature, tail };

        let scale = |a: f64, b: f64| 1e-12 * a.abs().max(b.abs()).max(1.0);
        let n = pw.knots.len();
        for i in 1..n - 1 {
            let (l, r) = (pw.seg_end_slope(i - 1), pw.seg_start_slope(i));
            if l > r + scale(l, r) {
                return Err(Error::NonConvexTable(pw.knots[i - 1], pw.knots[i], pw.knots[i + 1]));
            }
        }
        if let Some(t) = tail {
            if !(t.slope.is_finite() && t.curvature.is_finite() && t.curvature >= 0.0)
                || !(t.slope > 0.0 || t.curvature > 0.0)
            {
                return Err(Error::Invalid("tail must be finite and eventually increasing".into()));
            }
            let l = pw.seg_end_slope(n - 2);
            if l > t.slope + scale(l, t.slope) {
                let (m, ym) = pw.last();
                return Err(Error::NonConvexTable(
                    pw.knots[n - 2],
                    pw.knots[n - 1],
                    (m + 1.0, ym + t.slope),
                ));
            }
        }
        let s = pw.subdifferential(rstar);
        if !(s.lo <= 1e-12 && s.hi >= -1e-12) {
            return Err(Error::Invalid(format!(
                "rate function dips below zero next to R* = {rstar}"
            )));
        }
        Ok(Self {
            shape: Shape::Piecewise(pw),
            rstar,
        })
    }

    /// Legendre transform of `lambda`, with `R* = Lambda'(0)`.
    pub fn from_log_mgf(lambda: LogMgf) -> Result<Self> {
        let (lo, hi) = lambda.finiteness_domain();
        if !(hi > 0.0) || !(lo < 0.0) {
            return Err(Error::LogMgfNotFinite {
                theta: if hi > 0.0 { lo } else { hi },
            });
        }
        let l0 = lambda.eval(0.0);
        if !(l0.abs() <= 1e-12) {
            return Err(Error::Invalid(format!("log-MGF must vanish at 0, got {l0}")));
        }
        let probe = 1e-3_f64.min(0.5 * hi);
        if !lambda.eval(probe).is_finite() {
            return Err(Error::LogMgfNotFinite { theta: probe });
        }
        // Sampled midpoint convexity on a symmetric grid inside the domain.
        let span = 4.0_f64.min(0.9 * hi).min(0.9 * -lo);
        let pts: Vec<f64> = (0..=40).map(|k| -span + 2.0 * span * f64::from(k) / 40.0).collect();
        for w in pts.windows(3) {
            let (a, b, c) = (lambda.eval(w[0]), lambda.eval(w[1]), lambda.eval(w[2]));
            if b > 0.5 * (a + c) + 1e-12 * (a.abs() + c.abs()).max(1.0) {
                return Err(Error::Invalid(format!("log-MGF not convex near theta = {}", w[1])));
            }
        }
        let rstar = lambda.derivative(0.0);
        positive("Lambda'(0)", rstar)?;
        let rate = Self {
            shape: Shape::Legendre(lambda),
            rstar,
        };
        let eps = 1e-6 * rstar;
        if rate.value(rstar + eps).is_infinite() && rate.value(rstar - eps).is_infinite() {
            return Self::deterministic(rstar);
        }
        Ok(rate)
    }

    /// The unique zero `R*`.
    pub fn rstar(&self) -> f64 {
        self.rstar
    }

    /// True when `I` is the indicator of `{R*}`.
    pub fn is_deterministic(&self) -> bool {
        matches!(self.shape, Shape::Indicator)
    }

    /// Gaussian-grain parameter, when this is the Gaussian closed form.
    pub fn gaussian_sigma(&self) -> Option<f64> {
        match self.shape {
            Shape::Gaussian { sigma } => Some(sigma),
            _ => None,
        }
    }

    /// Closure of the effective domain, `(lo, hi)` with `hi` possibly `+inf`.
    pub fn domain(&self) -> (f64, f64) {
        match &self.shape {
            Shape::Indicator => (self.rstar, self.rstar),
            Shape::Gaussian { .. } | Shape::Legendre(_) => (0.0, f64::INFINITY),
            Shape::Piecewise(p) => (p.knots[0].0, p.right_end()),
        }
    }

    /// Points where `I` may fail to be differentiable (knots and domain ends).
    pub fn kinks(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Indicator => vec![self.rstar],
            Shape::Gaussian { .. } | Shape::Legendre(_) => Vec::new(),
            Shape::Piecewise(p) => p.knots.iter().map(|k| k.0).collect(),
        }
    }

    /// `I(r)`, `+inf` outside the domain.
    pub fn value(&self, r: f64) -> f64 {
        match &self.shape {
            Shape::Indicator => {
                if r == self.rstar {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Shape::Gaussian { sigma } => gaussian_rate(*sigma, r),
            Shape::Piecewise(p) => p.value(r),
            Shape::Legendre(l) => {
                if r < 0.0 {
                    f64::INFINITY
                } else {
                    legendre_transform(l, r).value
                }
            }
        }
    }

    /// One-sided derivatives `[I'_-(r), I'_+(r)]`.
    pub fn subdifferential(&self, r: f64) -> Subdifferential {
        match &self.shape {
            Shape::Indicator => {
                if r < self.rstar {
                    Subdifferential::LEFT_OF_DOMAIN
                } else if r > self.rstar {
                    Subdifferential::RIGHT_OF_DOMAIN
                } else {
                    Subdifferential {
                        lo: f64::NEG_INFINITY,
                        hi: f64::INFINITY,
                    }
                }
            }
            Shape::Gaussian { sigma } => {
                if r <= 0.0 {
                    return Subdifferential::LEFT_OF_DOMAIN;
                }
                let d = r / (sigma * sigma) - 1.0 / r;
                Subdifferential { lo: d, hi: d }
            }
            Shape::Piecewise(p) => p.subdifferential(r),
            Shape::Legendre(l) => {
                if r < 0.0 {
                    return Subdifferential::LEFT_OF_DOMAIN;
                }
                let t = legendre_transform(l, r);
                if !t.value.is_finite() {
                    if r < self.rstar {
                        Subdifferential::LEFT_OF_DOMAIN
                    } else {
                        Subdifferential::RIGHT_OF_DOMAIN
                    }
                } else {
                    Subdifferential {
                        lo: t.theta,
                        hi: t.theta,
                    }
                }
            }
        }
    }
}

fn positive(what: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{what} must be positive and finite, got {x}")))
    }
}

fn gaussian_rate(sigma: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return f64::INFINITY;
    }
    let q = r / sigma;
    0.5 * q * q - 0.5 - libm::log(q)
}

// Positive root u of u^2 - (theta sigma) u - 1 = 0, computed without cancellation.
fn gaussian_root(sigma: f64, theta: f64) -> f64 {
    let ts = theta * sigma;
    let disc = libm::sqrt(ts * ts + 4.0);
    if ts >= 0.0 {
        0.5 * (ts + disc)
    } else {
        2.0 / (disc - ts)
    }
}

/// Builds the rate function described by `spec`.
pub fn build_rate(spec: &RadiusLawSpec) -> Result<RateFunction> {
    match spec {
        RadiusLawSpec::Deterministic { rstar } => RateFunction::deterministic(*rstar),
        RadiusLawSpec::GaussianGrain { sigma } => RateFunction::gaussian_grain(*sigma),
        RadiusLawSpec::FromLogMgf(l) => RateFunction::from_log_mgf(l.clone()),
        RadiusLawSpec::TabulatedConvex { knots } => RateFunction::tabulated(knots.clone()),
    }
}

/// `[I'_-(r), I'_+(r)]` for `r > 0`.
pub fn subdifferential(rate: &RateFunction, r: f64) -> Subdifferential {
    rate.subdifferential(r)
}

/// Closed-form limit log-MGF of Gaussian-grain radii,
/// `Lambda(theta) = (theta sigma / 2) u + ln u` with `u = (theta sigma + sqrt(theta^2 sigma^2 + 4)) / 2`.
pub fn gaussian_log_mgf(sigma: f64, theta: f64) -> f64 {
    let u = gaussian_root(sigma, theta);
    0.5 * theta * sigma * u + libm::log(u)
}

/// Value and maximizer of `sup_theta (theta r - Lambda(theta))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreResult {
    /// The supremum; `+inf` when no maximizer could be bracketed.
    pub value: f64,
    /// Maximizing `theta` (meaningless when `bracketed` is false).
    pub theta: f64,
    /// False when `theta r - Lambda(theta)` kept increasing without bound.
    pub bracketed: bool,
}

/// Numerical Legendre transform `I(r) = sup_theta (theta r - Lambda(theta))`.
///
/// The concave objective is bracketed by doubling away from `[0, 1]` (or
/// `[-1, 0]`) until it decreases, then maximized to `1e-12` in `theta`, by
/// bisection on `Lambda'(theta) = r` when the derivative is known and by
/// golden-section search otherwise.
pub fn legendre_transform(lambda: &LogMgf, r: f64) -> LegendreResult {
    let f = |t: f64| {
        let l = lambda.eval(t);
        if l.is_finite() {
            t * r - l
        } else {
            f64::NEG_INFINITY
        }
    };
    let (lo_dom, hi_dom) = lambda.finiteness_domain();
    let unbounded = LegendreResult {
        value: f64::INFINITY,
        theta: f64::NAN,
        bracketed: false,
    };

    let (a, b) = match expand(&f, hi_dom, 1.0) {
        Expansion::Bracket(a, b) => (a, b),
        Expansion::Unbounded => return unbounded,
        Expansion::NoProgress(first) => match expand(&f, lo_dom, -1.0) {
            Expansion::Bracket(a, b) => (b, a),
            Expansion::Unbounded => return unbounded,
            Expansion::NoProgress(first_left) => (first_left, first),
        },
    };
    let theta = match &lambda.derivative {
        Some(d) => {
            let (lo, hi) = bisect(|t| d(t) >= r, a, b, 1e-15, 200);
            let (fl, fh) = (f(lo), f(hi));
            if fl >= fh {
                lo
            } else {
                hi
            }
        }
        None => golden_max(f, a, b, 1e-12, 400).x,
    };
    let value = f(theta);
    LegendreResult {
        value: value.max(0.0),
        theta,
        bracketed: true,
    }
}

enum Expansion {
    Bracket(f64, f64),
    NoProgress(f64),
    Unbounded,
}

// Walks 0 -> ±1 -> ±2 -> ... (halving towards a finite domain edge) while f increases.
fn expand<F: Fn(f64) -> f64>(f: &F, edge: f64, dir: f64) -> Expansion {
    let step = |t: f64| {
        let cand = if t == 0.0 { dir } else { 2.0 * t };
        if edge.is_finite() && (cand - edge) * dir >= 0.0 {
            0.5 * (t + edge)
        } else {
            cand
        }
    };
    let mut prev = 0.0;
    let mut fprev = f(0.0);
    let mut cur = step(0.0);
    let mut fcur = f(cur);
    if !(fcur > fprev) {
        return Expansion::NoProgress(cur);
    }
    for _ in 0..2200 {
        let next = step(cur);
        if !next.is_finite() {
            return Expansion::Unbounded;
        }
        if next == cur {
            return Expansion::Bracket(prev, cur);
        }
        let fnext = f(next);
        if !(fnext > fcur) {
            return Expansion::Bracket(prev, next);
        }
        prev = cur;
        fprev = fcur;
        cur = next;
        fcur = fnext;
    }
    let _ = fprev;
    Expansion::Unbounded
}

/// Checks the moment condition at the witness `gamma = 2`.
///
/// For closed-form and bounded laws the condition holds outright. For a
/// log-MGF the Varadhan growth rate `sup_R (gamma ln R - I(R))` is scanned over
/// `R = R* 2^k` and must stay finite and eventually decrease.
pub fn check_moment_condition(spec: &RadiusLawSpec) -> Result<MomentConditionReport> {
    let gamma = 2.0;
    let report = |satisfied, evidence: String| {
        Ok(MomentConditionReport {
            gamma,
            satisfied,
            evidence,
        })
    };
    match spec {
        RadiusLawSpec::Deterministic { .. } => report(true, "radii are bounded (constant)".into()),
        RadiusLawSpec::GaussianGrain { sigma } => report(
            true,
            format!("limit log-MGF of gaussian grains (sigma={sigma}) is finite on all of R"),
        ),
        RadiusLawSpec::TabulatedConvex { knots } => {
            let hi = knots.last().map_or(0.0, |k| k.0);
            report(true, format!("tabulated rate function has bounded support, R <= {hi}"))
        }
        RadiusLawSpec::FromLogMgf(l) => {
            let rate = RateFunction::from_log_mgf(l.clone())?;
            let growth: Vec<f64> = (0..48)
                .map(|k| {
                    let r = rate.rstar() * libm::ldexp(1.0, k);
                    gamma * libm::log(r) - rate.value(r)
                })
                .collect();
            let sup = growth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let tail_decreasing = growth.windows(2).rev().take(8).all(|w| w[1] <= w[0]);
            let satisfied = sup.is_finite() && tail_decreasing;
            report(
                satisfied,
                format!("sup over R = R*·2^k of {gamma}·ln R - I(R) is {sup:.6}; tail decreasing: {tail_decreasing}"),
            )
        }
    }
}
