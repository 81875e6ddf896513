// Oracles and generators shared by the integration tests. Each oracle is
// written independently of the library code it checks.
#![allow(dead_code, clippy::excessive_precision)]

use hdbool_core::rate_fn::QuadraticTail;
use hdbool_core::RateFunction;
use rand::Rng;

pub const HALF_LN_2PIE: f64 = 1.418_938_533_204_672_7;

// 40-digit evaluations of the Gaussian-grain closed forms at sigma = 1.
pub const GAUSS_C: f64 = 1.246_979_603_717_467_061_050_009_768;
pub const GAUSS_TAU_V: f64 = -1.612_085_713_764_618_051_197_561_857;
pub const GAUSS_TAU_D: f64 = -2.220_283_375_926_864_624_164_581_531;
pub const GAUSS_TAU_P: f64 = -2.171_770_693_488_732_839_353_152_806;

pub fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// ln E[Xbar^k] for Xbar = sigma chi_n / sqrt(n).
pub fn chi_log_moment(sigma: f64, n: u32, k: u32) -> f64 {
    let (nf, kf) = (f64::from(n), f64::from(k));
    kf * (sigma / nf.sqrt()).ln() + 0.5 * kf * 2f64.ln() + lgamma(0.5 * (nf + kf)) - lgamma(0.5 * nf)
}

/// ln E[(X + X')^n] by binomial expansion over chi moments.
pub fn binomial_pair_moment(sigma: f64, n: u32) -> f64 {
    let ln_choose = |k: u32| lgamma(f64::from(n) + 1.0) - lgamma(f64::from(k) + 1.0) - lgamma(f64::from(n - k) + 1.0);
    let terms: Vec<f64> = (0..=n)
        .map(|k| ln_choose(k) + chi_log_moment(sigma, n, k) + chi_log_moment(sigma, n, n - k))
        .collect();
    log_sum_exp(&terms)
}

/// ln Q(a, x), the regularized upper incomplete gamma function.
pub fn log_upper_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let prefix = a * x.ln() - x - lgamma(a);
    if x < a + 1.0 {
        // series for P
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..100_000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        let p = (prefix + sum.ln()).exp();
        (-p).ln_1p()
    } else {
        // modified Lentz continued fraction for Q
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..100_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        prefix + h.ln()
    }
}

/// ln P(Xbar >= t) for Gaussian grains.
pub fn gaussian_log_tail(sigma: f64, n: u32, t: f64) -> f64 {
    let nf = f64::from(n);
    log_upper_gamma_q(0.5 * nf, 0.5 * nf * (t / sigma).powi(2))
}

/// Largest fixed point of s = 1 - exp(-y s) by monotone iteration from s = 1.
pub fn gw_survival_by_iteration(y: f64) -> f64 {
    let mut s = 1.0f64;
    for _ in 0..1_000_000 {
        let next = 1.0 - (-y * s).exp();
        if (next - s).abs() < 1e-16 {
            return next;
        }
        s = next;
    }
    s
}

/// ln of the volume of the radius-r ball in dimension n.
pub fn log_ball(n: u32, r: f64) -> f64 {
    let nf = f64::from(n);
    0.5 * nf * std::f64::consts::PI.ln() - lgamma(0.5 * nf + 1.0) + nf * r.ln()
}

/// A random convex piecewise-quadratic rate function with a unique zero.
///
/// Each segment is described by its end derivatives `a <= b`; derivatives are
/// sorted across segments, negative left of `R*` and positive right of it.
pub fn random_rate<R: Rng>(rng: &mut R) -> (RateFunction, String) {
    let rstar: f64 = rng.random_range(0.3..3.0);
    let left = rng.random_range(0..=3usize);
    let right = rng.random_range(1..=4usize);

    let mut left_slopes: Vec<f64> = (0..2 * left).map(|_| -rng.random_range(0.02..6.0)).collect();
    left_slopes.sort_by(f64::total_cmp);
    let mut right_slopes: Vec<f64> = (0..2 * right).map(|_| rng.random_range(0.02..6.0)).collect();
    right_slopes.sort_by(f64::total_cmp);
    if rng.random_bool(0.3) {
        right_slopes[0] = 0.0;
    }

    let mut xs = vec![rstar];
    let room = rstar * 0.9;
    let mut widths: Vec<f64> = (0..left).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = widths.iter().sum();
    widths.iter_mut().for_each(|w| *w *= room / total.max(room));
    for w in &widths {
        let x = xs[0] - w;
        xs.insert(0, x);
    }
    for _ in 0..right {
        let x = xs[xs.len() - 1] + rng.random_range(0.05..1.5);
        xs.push(x);
    }

    let slopes: Vec<(f64, f64)> = left_slopes
        .chunks(2)
        .chain(right_slopes.chunks(2))
        .map(|c| (c[0], c[1]))
        .collect();
    let curvature: Vec<f64> = slopes
        .iter()
        .zip(xs.windows(2))
        .map(|(s, w)| (s.1 - s.0) / (w[1] - w[0]))
        .collect();
    let chords: Vec<f64> = slopes.iter().map(|s| 0.5 * (s.0 + s.1)).collect();

    let mut ys = vec![0.0; xs.len()];
    for i in (0..left).rev() {
        ys[i] = ys[i + 1] - chords[i] * (xs[i + 1] - xs[i]);
    }
    for i in left..left + right {
        ys[i + 1] = ys[i] + chords[i] * (xs[i + 1] - xs[i]);
    }
    let last_slope = slopes[slopes.len() - 1].1;
    let tail = if rng.random_bool(0.8) {
        Some(QuadraticTail {
            slope: last_slope + rng.random_range(0.0..2.0),
            curvature: rng.random_range(0.0..3.0),
        })
    } else {
        None
    };
    let knots: Vec<(f64, f64)> = xs.iter().cloned().zip(ys.iter().cloned()).collect();
    let desc = format!("knots {knots:?} curvature {curvature:?} tail {tail:?}");
    let rate = RateFunction::piecewise_quadratic(knots, curvature, tail).unwrap_or_else(|e| panic!("{e}: {desc}"));
    (rate, desc)
}
