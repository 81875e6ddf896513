//! Thresholds and finite-dimension asymptotics of high-dimensional Poisson
//! Boolean models.
//!
//! In dimension `n` the model is a homogeneous Poisson process of intensity
//! `exp(n * rho_n)` whose points carry closed balls of radius `X_n * sqrt(n)`,
//! where the normalized radii `X_n` satisfy a large deviations principle with a
//! convex rate function `I`. Three critical values of the asymptotic
//! log-intensity `rho` organize the behaviour of the model as `n` grows:
//!
//! * the degree threshold `tau_d`, below which the typical ball meets no other;
//! * the percolation threshold `tau_p`, above which an infinite cluster appears;
//! * the volume-fraction threshold `tau_v`, above which space is covered.
//!
//! The crate is `no_std` (with `alloc`) and is organized as:
//!
//! * [`rate_fn`]: rate functions built from closed forms, log-MGFs or tables.
//! * [`thresholds`]: the three variational problems and their certificates.
//! * [`finite_n`]: exact log-domain quantities at a fixed dimension.
//! * [`percolation`]: the Poisson branching-process probe.
//! * [`simulate`]: seeded Monte Carlo of the Boolean model.
//!
//! All logarithms are natural; exponents and thresholds are in nats.

#![no_std]
#![warn(missing_docs)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod finite_n;
pub mod math;
pub mod percolation;
pub mod quad;
pub mod rate_fn;
pub mod scalar;
pub mod simulate;
pub mod thresholds;

pub use error::{Error, Result};
pub use finite_n::{FiniteNPoint, ModelSpec, QuadratureConfig, RhoRule};
pub use percolation::BranchingProbe;
pub use rate_fn::{LogMgf, MomentConditionReport, RadiusLawSpec, RateFunction, Subdifferential};
pub use simulate::{McConfig, McEstimate, McQuantity};
pub use thresholds::{OptimalityCertificate, Regime, Target, ThresholdReport};
