//! Adaptive Gauss-Kronrod quadrature, with a log-domain driver for integrands
//! whose magnitude spans thousands of nats.

#![allow(clippy::excessive_precision)]

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::scalar::golden_max;

// 21-point Kronrod nodes on [0, 1]; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_687_758_306_919,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Target relative error of each integral.
    pub rel_tol: f64,
    /// Integrand support is cut where the log-integrand falls this many nats
    /// below its maximum.
    pub truncation_nats: f64,
    /// Maximum number of interval bisections per integral.
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            truncation_nats: 60.0,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    /// Checks the tolerances are usable.
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.truncation_nats > 0.0) || self.max_subdivisions == 0 {
            return Err(Error::Invalid(alloc::format!("bad quadrature config {self:?}")));
        }
        Ok(())
    }
}

fn kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[10] * fc;
    let mut g = 0.0;
    for j in 0..10 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Outcome of [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    /// Integral estimate.
    pub value: f64,
    /// Absolute error estimate.
    pub abs_err: f64,
}

/// Adaptive G10/K21 integration of `f` over the partition `breaks`.
pub fn integrate<F>(mut f: F, breaks: &[f64], cfg: &QuadratureConfig) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (v, e) = kronrod21(&mut f, w[0], w[1]);
            segs.push((w[0], w[1], v, e));
        }
    }
    let mut splits = 0;
    loop {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if err <= cfg.rel_tol * total.abs() || err == 0.0 {
            return Ok(QuadResult {
                value: total,
                abs_err: err,
            });
        }
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Quadrature {
                achieved: f64::NAN,
                requested: cfg.rel_tol,
            });
        }
        if splits >= cfg.max_subdivisions {
            return Err(Error::Quadrature {
                achieved: err / total.abs(),
                requested: cfg.rel_tol,
            });
        }
        let (idx, _) = segs.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, s)| if s.3 > acc.1 { (i, s.3) } else { acc },
        );
        let (a, b, _, _) = segs.swap_remove(idx);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Err(Error::Quadrature {
                achieved: err / total.abs(),
                requested: cfg.rel_tol,
            });
        }
        let (v1, e1) = kronrod21(&mut f, a, m);
        let (v2, e2) = kronrod21(&mut f, m, b);
        segs.push((a, m, v1, e1));
        segs.push((m, b, v2, e2));
        splits += 1;
    }
}

/// Result of a log-domain integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogIntegral {
    /// `ln` of the integral.
    pub log_value: f64,
    /// Interval actually integrated, after truncation.
    pub support: (f64, f64),
    /// Location of the maximum of the log-integrand.
    pub peak: f64,
}

/// Computes `ln(integral of exp(h(x)) dx)` over `[lo, hi]` for a log-concave
/// (hence unimodal) integrand. `hi` may be `+inf`.
///
/// The maximum is located from `hint`, the support is truncated where `h`
/// drops `cfg.truncation_nats` below the maximum, and the shifted integrand
/// `exp(h - max)` is integrated adaptively.
pub fn log_integrate<H>(h: H, lo: f64, hi: f64, hint: f64, cfg: &QuadratureConfig) -> Result<LogIntegral>
where
    H: Fn(f64) -> f64,
{
    if !(hi > lo) {
        return Err(Error::Invalid(alloc::format!("empty integration range [{lo}, {hi}]")));
    }
    let (peak, hmax) = locate_peak(&h, lo, hi, hint)?;
    let cut = hmax - cfg.truncation_nats;
    let right = find_cut(&h, peak, hi, cut, 1.0);
    let left = find_cut(&h, peak, lo, cut, -1.0);

    let mut breaks = vec![left];
    if peak > left && peak < right {
        breaks.push(peak);
    }
    breaks.push(right);
    if right <= left {
        return Err(Error::Quadrature {
            achieved: f64::NAN,
            requested: cfg.rel_tol,
        });
    }
    let r = integrate(|x| libm::exp(h(x) - hmax), &breaks, cfg)?;
    if !(r.value > 0.0) {
        return Err(Error::Quadrature {
            achieved: f64::NAN,
            requested: cfg.rel_tol,
        });
    }
    Ok(LogIntegral {
        log_value: hmax + libm::log(r.value),
        support: (left, right),
        peak,
    })
}

fn clamp_open(x: f64, lo: f64, hi: f64) -> f64 {
    if x > lo && x < hi {
        return x;
    }
    if x <= lo {
        let s = 1e-6 * lo.abs().max(1e-6);
        if hi.is_finite() {
            (lo + s).min(0.5 * (lo + hi))
        } else {
            lo + s
        }
    } else {
        let s = 1e-6 * hi.abs().max(1e-6);
        if lo.is_finite() {
            (hi - s).max(0.5 * (lo + hi))
        } else {
            hi - s
        }
    }
}

fn locate_peak<H: Fn(f64) -> f64>(h: &H, lo: f64, hi: f64, hint: f64) -> Result<(f64, f64)> {
    let x0 = clamp_open(hint, lo, hi);
    let h0 = h(x0);
    if !h0.is_finite() {
        return Err(Error::Invalid(alloc::format!("log-integrand not finite at hint {x0}")));
    }
    let step0 = 1e-3 * x0.abs().max(1e-3);
    let (a, b) = match (walk(h, x0, h0, step0, hi, 1.0), walk(h, x0, h0, step0, lo, -1.0)) {
        (Some(r), _) => r,
        (None, Some((a, b))) => (b, a),
        (None, None) => ((x0 - step0).max(lo), (x0 + step0).min(hi)),
    };
    let r = golden_max(h, a, b, 1e-13, 300);
    if !r.value.is_finite() {
        return Err(Error::Invalid(alloc::format!(
            "log-integrand has no finite maximum near {hint}"
        )));
    }
    Ok((r.x, r.value))
}

/// Walks from `x0` towards `limit` with doubling steps while `h` increases.
/// Returns `(behind, beyond)` bracketing the maximum, or `None` if the first
/// step does not increase `h`.
fn walk<H: Fn(f64) -> f64>(h: &H, x0: f64, h0: f64, step0: f64, limit: f64, dir: f64) -> Option<(f64, f64)> {
    let clamp = |x: f64| if (x - limit) * dir > 0.0 { limit } else { x };
    let mut step = step0;
    let mut behind = x0;
    let mut cur = clamp(x0 + dir * step);
    let mut hc = h(cur);
    if !(hc > h0) {
        return None;
    }
    loop {
        if cur == limit {
            return Some((behind, cur));
        }
        step *= 2.0;
        let next = clamp(cur + dir * step);
        let hn = h(next);
        if !(hn > hc) {
            return Some((behind, next));
        }
        behind = cur;
        cur = next;
        hc = hn;
    }
}

fn find_cut<H: Fn(f64) -> f64>(h: &H, peak: f64, limit: f64, cut: f64, dir: f64) -> f64 {
    if limit.is_finite() && h(limit) >= cut {
        return limit;
    }
    let mut inner = peak;
    let mut step = 1e-3 * peak.abs().max(1e-2);
    let outer = loop {
        let mut x = peak + dir * step;
        if limit.is_finite() && (x - limit) * dir >= 0.0 {
            x = limit;
        }
        if h(x) < cut || x == limit {
            break x;
        }
        inner = x;
        step *= 2.0;
    };
    // Tighten so the truncated region stays small but always below the cut.
    let mut lo = inner;
    let mut hi = outer;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < cut {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo).abs() <= 1e-6 * hi.abs().max(1e-6) {
            break;
        }
    }
    hi
}
