//! Seeded Monte Carlo of the Boolean model.
//!
//! Every sample `i` draws from its own ChaCha8 stream (`seed_from_u64(seed)`
//! with stream `i`), so results do not depend on how samples are scheduled.
//! Points are generated only through their norms: all tested events are
//! rotation invariant, and a uniform point of `B(0, r)` has norm `r U^(1/n)`.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::finite_n::{
    coverage_probability, log_ball_volume, log_mean_palm_degree, ModelSpec, QuadratureConfig, RadiusLaw,
};
use crate::math::RunningMoments;

/// Name of the generator recorded with every estimate.
pub const GENERATOR: &str = "ChaCha8Rng(seed_from_u64(seed), stream = sample index)";

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    /// Number of independent samples.
    pub samples: u64,
    /// Base seed.
    pub seed: u64,
    /// Spatial cutoff as a multiple of the radius-integrand support (>= 1).
    pub truncation_multiplier: f64,
    /// Largest allowed expected number of points per sample.
    pub max_expected_points: f64,
    /// Nats below the peak at which the radius-integrand support is cut.
    pub support_nats: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
            truncation_multiplier: 1.0,
            max_expected_points: 1e6,
            support_nats: 20.0,
        }
    }
}

impl McConfig {
    /// Checks ranges.
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Invalid("samples must be >= 1".into()));
        }
        if !(self.truncation_multiplier >= 1.0 && self.truncation_multiplier.is_finite()) {
            return Err(Error::Invalid(format!(
                "truncation_multiplier must be >= 1 (a cutoff inside the integrand support biases the estimate), got {}",
                self.truncation_multiplier
            )));
        }
        if !(self.max_expected_points > 0.0) {
            return Err(Error::Invalid("max_expected_points must be positive".into()));
        }
        if !(self.support_nats > 0.0 && self.support_nats.is_finite()) {
            return Err(Error::Invalid("support_nats must be positive".into()));
        }
        Ok(())
    }
}

/// A Monte Carlo estimate with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    /// Sample mean.
    pub mean: f64,
    /// Standard error of the mean (infinite for a single sample).
    pub stderr: f64,
    /// Number of samples.
    pub samples: u64,
    /// Base seed.
    pub seed: u64,
    /// Generator description.
    pub generator: &'static str,
    /// Exact value the estimate targets, when available.
    pub exact_reference: Option<f64>,
}

/// Which quantity a simulation estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McQuantity {
    /// Indicator that the origin is covered.
    Coverage,
    /// Number of balls meeting the ball of the typical point.
    PalmDegree,
    /// Conditional mean of the Palm degree given the typical radius.
    ConditionalPoissonDegree,
}

impl McQuantity {
    /// Short name.
    pub fn name(self) -> &'static str {
        match self {
            McQuantity::Coverage => "coverage",
            McQuantity::PalmDegree => "palm_degree",
            McQuantity::ConditionalPoissonDegree => "conditional_poisson_degree",
        }
    }
}

/// Uniform point of the closed ball `B(0, radius)` in dimension `n`.
pub fn sample_point_in_ball<R: Rng + ?Sized>(n: u32, radius: f64, rng: &mut R) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let mut norm = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>());
    while norm == 0.0 {
        x = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        norm = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>());
    }
    let u: f64 = rng.random();
    let scale = radius * libm::pow(u, 1.0 / f64::from(n)) / norm;
    x.iter_mut().for_each(|v| *v *= scale);
    x
}

/// Everything needed to draw sample `i` of one simulation.
#[derive(Debug, Clone)]
pub struct McPlan {
    quantity: McQuantity,
    n: u32,
    law: RadiusLaw,
    log_intensity: f64,
    r_max: f64,
    empty: bool,
    seed: u64,
    cap: f64,
    q: QuadratureConfig,
    exact_reference: Option<f64>,
}

impl McPlan {
    /// Validates inputs, derives the spatial cutoff and checks the point cap.
    pub fn new(spec: &ModelSpec, n: u32, cfg: &McConfig, quantity: McQuantity) -> Result<Self> {
        cfg.validate()?;
        spec.validate()?;
        let q = QuadratureConfig::default();
        let support_q = QuadratureConfig {
            truncation_nats: cfg.support_nats,
            ..q
        };
        let law = RadiusLaw::new(&spec.radius_law, n, &q)?;
        let support = law.log_nth_moment(n, &support_q)?.support;
        let r_max = support.1 * cfg.truncation_multiplier;
        if !(r_max.is_finite() && r_max >= support.1) {
            return Err(Error::Invalid(format!(
                "spatial cutoff {r_max} lies inside the integrand support ending at {}",
                support.1
            )));
        }
        let exact_reference = Some(match quantity {
            McQuantity::Coverage => coverage_probability(spec, n, &q)?.probability,
            _ => libm::exp(log_mean_palm_degree(spec, n, &q)?),
        });
        let plan = Self {
            quantity,
            n,
            law,
            log_intensity: spec.log_intensity(n),
            r_max,
            empty: spec.is_empty(),
            seed: cfg.seed,
            cap: cfg.max_expected_points,
            q,
            exact_reference,
        };
        if !plan.empty && quantity != McQuantity::ConditionalPoissonDegree {
            let reach = match quantity {
                McQuantity::Coverage => r_max,
                _ => plan.law.hint() + r_max,
            };
            plan.check_cap(plan.expected_points(reach))?;
        }
        Ok(plan)
    }

    /// Quantity being estimated.
    pub fn quantity(&self) -> McQuantity {
        self.quantity
    }

    /// Normalized spatial cutoff `r_max`.
    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Exact value the simulation targets.
    pub fn exact_reference(&self) -> Option<f64> {
        self.exact_reference
    }

    fn expected_points(&self, reach: f64) -> f64 {
        libm::exp(self.log_intensity + log_ball_volume(self.n, reach * libm::sqrt(f64::from(self.n))))
    }

    fn check_cap(&self, expected: f64) -> Result<()> {
        if expected > self.cap {
            return Err(Error::PointCapExceeded {
                expected,
                cap: self.cap,
            });
        }
        Ok(())
    }

    fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    // Number of points t with |t| <= reach sqrt(n) that satisfy `hit(|t| / sqrt(n), radius)`.
    fn count_hits<F>(&self, rng: &mut ChaCha8Rng, reach: f64, mut hit: F, stop_at_first: bool) -> Result<u64>
    where
        F: FnMut(f64, f64) -> bool,
    {
        let mean = self.expected_points(reach);
        self.check_cap(mean)?;
        if !(mean > 0.0) {
            return Ok(0);
        }
        let count = Poisson::new(mean)
            .map_err(|e| Error::Invalid(format!("Poisson mean {mean}: {e}")))?
            .sample(rng) as u64;
        let inv_n = 1.0 / f64::from(self.n);
        let mut hits = 0;
        for _ in 0..count {
            let u: f64 = rng.random();
            let norm = reach * libm::pow(u, inv_n);
            let radius = self.law.sample(rng);
            if hit(norm, radius) {
                hits += 1;
                if stop_at_first {
                    break;
                }
            }
        }
        Ok(hits)
    }

    /// Value of sample `index`.
    pub fn sample(&self, index: u64) -> Result<f64> {
        if self.empty {
            return Ok(0.0);
        }
        let mut rng = self.rng(index);
        match self.quantity {
            McQuantity::Coverage => {
                let hits = self.count_hits(&mut rng, self.r_max, |norm, x| norm <= x, true)?;
                Ok(if hits > 0 { 1.0 } else { 0.0 })
            }
            McQuantity::PalmDegree => {
                let s = self.law.sample(&mut rng);
                let hits = self.count_hits(&mut rng, s + self.r_max, |norm, x| norm <= s + x, false)?;
                Ok(hits as f64)
            }
            McQuantity::ConditionalPoissonDegree => {
                let s = self.law.sample(&mut rng);
                let sqrt_n = libm::sqrt(f64::from(self.n));
                let shifted = self.law.log_shifted_moment(s, self.n, &self.q)?;
                Ok(libm::exp(
                    self.log_intensity + log_ball_volume(self.n, sqrt_n) + shifted,
                ))
            }
        }
    }

    /// Reduces per-sample values, taken in sample order, to an estimate.
    pub fn summarize(&self, values: &[f64]) -> McEstimate {
        let mut m = RunningMoments::default();
        values.iter().for_each(|&v| m.push(v));
        self.estimate(&m)
    }

    /// Estimate from moments accumulated in sample order.
    pub fn estimate(&self, moments: &RunningMoments) -> McEstimate {
        let (mean, stderr) = if self.empty {
            (0.0, 0.0)
        } else {
            (moments.mean(), moments.stderr())
        };
        McEstimate {
            mean,
            stderr,
            samples: moments.count(),
            seed: self.seed,
            generator: GENERATOR,
            exact_reference: self.exact_reference,
        }
    }

    /// Runs all samples sequentially.
    pub fn run(&self, samples: u64) -> Result<McEstimate> {
        let values = (0..samples).map(|i| self.sample(i)).collect::<Result<Vec<f64>>>()?;
        Ok(self.summarize(&values))
    }
}

fn simulate(spec: &ModelSpec, n: u32, cfg: &McConfig, quantity: McQuantity) -> Result<McEstimate> {
    McPlan::new(spec, n, cfg, quantity)?.run(cfg.samples)
}

/// Fraction of samples in which some ball covers the origin; targets `P(0 in C_n)`.
pub fn mc_coverage(spec: &ModelSpec, n: u32, cfg: &McConfig) -> Result<McEstimate> {
    simulate(spec, n, cfg, McQuantity::Coverage)
}

/// Mean number of balls of the reduced process meeting the ball of the origin,
/// whose radius is drawn from the radius law; targets `E^0_n[D_n]`.
pub fn mc_palm_degree(spec: &ModelSpec, n: u32, cfg: &McConfig) -> Result<McEstimate> {
    simulate(spec, n, cfg, McQuantity::PalmDegree)
}

/// Mean over draws of the origin's radius `S` of the exact conditional mean
/// degree `exp(n rho_n) E[Vol B(0, (X + S) sqrt n)]`.
pub fn mc_conditional_poisson_degree(spec: &ModelSpec, n: u32, cfg: &McConfig) -> Result<McEstimate> {
    simulate(spec, n, cfg, McQuantity::ConditionalPoissonDegree)
}
