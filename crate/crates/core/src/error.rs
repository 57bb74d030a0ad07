//! Error taxonomy for the laboratory.
//!
//! Errors are typed so the CLI can map them onto its exit-code contract:
//! configuration problems, numerical-tolerance failures, and capacity
//! (degree-headroom) violations are distinguishable without string matching.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LandauError {
    /// Soft-potential exponent outside the admissible open interval (−3, 0).
    #[error("soft-potential exponent must lie in (-3, 0), got {0}")]
    GammaOutOfRange(f64),

    /// The unconvolved kernel a(v) is singular at v = 0 once γ ≤ −2 and must
    /// never be evaluated there silently.
    #[error("collision kernel singular at v = 0 for gamma = {gamma} <= -2")]
    SingularKernel { gamma: f64 },

    /// An adaptive quadrature failed to reach its target within the panel budget.
    #[error(
        "quadrature did not converge: residual {residual:.3e} > target {target:.3e} after {panels} panels"
    )]
    QuadratureNoConvergence {
        residual: f64,
        target: f64,
        panels: usize,
    },

    /// Coefficient lookup outside the tabulated radius range.
    #[error("radius {r} outside coefficient table range [0, {r_max}]")]
    OutOfTableRange { r: f64, r_max: f64 },

    /// Spectral degree headroom exhausted (e.g. derivative order vs. basis cap).
    #[error("degree headroom exceeded: operation needs degree {needed}, capacity is {available}")]
    CapacityExceeded { needed: usize, available: usize },

    /// A structural invariant (symmetry, positive semidefiniteness, kernel row)
    /// failed its post-assembly check.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    /// Not enough resolved data to perform a fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Invalid argument combination at an API boundary.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Configuration file / parameter validation failure.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LandauError>;
