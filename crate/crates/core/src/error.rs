use alloc::string::String;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A tabulated rate function is not convex; carries the offending knots.
    #[error("rate table is not convex at knots {0:?}, {1:?}, {2:?}")]
    NonConvexTable((f64, f64), (f64, f64), (f64, f64)),

    /// The log-MGF is not finite on a right neighbourhood of zero.
    #[error("log-MGF is not finite at theta = {theta}")]
    LogMgfNotFinite {
        /// First probed point where the log-MGF was not finite.
        theta: f64,
    },

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge: achieved relative error {achieved:e}, requested {requested:e}")]
    Quadrature {
        /// Relative error estimate at exit.
        achieved: f64,
        /// Requested relative tolerance.
        requested: f64,
    },

    /// A tail probability is zero even in the log domain.
    #[error("tail probability P(X >= {threshold}) underflows at n = {n}")]
    TailUnderflow {
        /// Normalized radius threshold.
        threshold: f64,
        /// Dimension.
        n: u32,
    },

    /// Monte Carlo run refused because the expected point count is too large.
    #[error("expected {expected:e} points per sample exceeds cap {cap:e}; use a smaller n or rho")]
    PointCapExceeded {
        /// Expected number of points per sample.
        expected: f64,
        /// Configured cap.
        cap: f64,
    },

    /// Two computations that must agree did not; indicates a solver bug.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    /// True for errors that indicate a bug or numerical breakdown rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Consistency(_) | Error::Quadrature { .. })
    }
}

/// Crate result alias.
pub type Result<T> = core::result::Result<T, Error>;
