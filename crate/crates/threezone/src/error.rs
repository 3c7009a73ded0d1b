//! Error taxonomy shared by all modules.

use thiserror::Error;

/// Which of the standing hypotheses a system violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// Real center in the middle, centers or saddles outside.
    H1,
    /// Only crossing points on `x = ±1` apart from tangencies.
    H2,
    /// Clockwise periodic annulus through all three zones.
    H3,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Hypothesis::H1 => write!(f, "H1"),
            Hypothesis::H2 => write!(f, "H2"),
            Hypothesis::H3 => write!(f, "H3"),
        }
    }
}

/// Library-wide error type. Payloads are reported in `f64` regardless of
/// the working scalar.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("degenerate zone ({side}): a^2 + b*c = {disc:e} is too close to zero")]
    DegenerateZone { side: &'static str, disc: f64 },

    #[error("hypothesis {which} violated: {detail}")]
    HypothesisViolation { which: Hypothesis, detail: String },

    #[error("h = {h} lies outside the annulus interval ({lo}, {hi})")]
    OutOfAnnulus { h: f64, lo: f64, hi: f64 },

    #[error("the {side} zone is not a saddle")]
    NotASaddle { side: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ill-conditioned computation: {0}")]
    IllConditioned(String),

    #[error("design system is rank-deficient for the requested targets")]
    SingularDesign,

    #[error("perturbation back-solve degenerated under both parameter conventions")]
    NonInvertibleConvention,

    #[error("adaptive quadrature failed to reach tolerance {tol:e} within budget")]
    QuadratureFailure { tol: f64 },

    #[error("sliding segment detected on x = {line} at y = {y}: hypothesis H2 fails")]
    SlidingDetected { line: f64, y: f64 },

    #[error("integration step failure at t = {t}: {detail}")]
    StepFailure { t: f64, detail: String },

    #[error("trajectory escaped the annulus band before completing the revolution")]
    OrbitEscaped,

    #[error("invalid targets: {0}")]
    InvalidTargets(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
