//! Log-domain helpers and special functions.

use core::f64::consts::{LN_2, PI};

/// `ln(2 * pi * e) / 2`, the exponential growth rate of the volume of a ball of
/// radius `sqrt(n)` in dimension `n`.
pub const HALF_LN_2PIE: f64 = 1.418_938_533_204_672_7;

/// Natural logarithm of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln(exp(a) + exp(b))` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + libm::log1p(libm::exp(lo - hi))
}

/// `ln(sum exp(x_i))` by max-shifted accumulation.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    let s: f64 = xs.iter().map(|&x| libm::exp(x - max)).sum();
    max + libm::log(s)
}

/// `ln(1 - exp(-lambda))` for `lambda >= 0`, given `ln(lambda)`.
///
/// This is the log of the probability that a Poisson(`lambda`) variable is positive.
pub fn log_poisson_positive(log_lambda: f64) -> f64 {
    if log_lambda == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if log_lambda < -12.0 {
        // 1 - e^{-l} = l (1 - l/2 + l^2/6 - ...)
        let l = libm::exp(log_lambda);
        return log_lambda + libm::log1p(-l / 2.0 + l * l / 6.0);
    }
    let l = libm::exp(log_lambda);
    if l < LN_2 {
        libm::log(-libm::expm1(-l))
    } else {
        libm::log1p(-libm::exp(-l))
    }
}

/// Log of the volume of the unit ball in dimension `n`.
pub fn log_unit_ball_volume(n: u32) -> f64 {
    let nf = f64::from(n);
    0.5 * nf * libm::log(PI) - ln_gamma(0.5 * nf + 1.0)
}

/// Welford running mean and variance. Adding a value equal to the running
/// mean leaves the mean bit-identical.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningMoments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    /// Incorporates one observation.
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Number of observations.
    pub fn count(&self) -> u64 {
        self.count
    }

    /// Sample mean (zero when empty).
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Standard error of the mean; infinite with fewer than two observations.
    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            return f64::INFINITY;
        }
        let n = self.count as f64;
        libm::sqrt(self.m2 / (n - 1.0) / n)
    }
}
