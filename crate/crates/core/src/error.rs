//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by estimation, resampling, and simulation routines.
///
/// Messages are module-qualified so they can be surfaced verbatim in
/// CLI reports.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A basis was evaluated outside its admissible domain.
    #[error(
        "basis: domain error: x = {x} is not admissible for basis `{basis}` (requires x > {lower})"
    )]
    Domain { basis: String, x: f64, lower: f64 },

    /// A custom basis returned vectors of the wrong length.
    #[error(
        "basis: custom basis `{basis}` returned a vector of length {got}, declared p = {declared}"
    )]
    BasisShape {
        basis: String,
        got: usize,
        declared: usize,
    },

    /// The sample cannot support the requested estimator.
    #[error("sample: degenerate sample: {0}")]
    DegenerateSample(String),

    /// Sample construction was handed inconsistent pieces.
    #[error("sample: invalid sample: {0}")]
    InvalidSample(String),

    /// The Newton Hessian is singular and the gradient fallback stalled.
    #[error("drm_fit: singular Hessian and stalled gradient ascent at iteration {iteration}")]
    SingularHessian { iteration: usize },

    /// A CDF estimator was queried below the detection limit.
    #[error("drm_fit: estimator undefined below the LLOD: x = {x} < r = {r}")]
    BelowLlod { x: f64, r: f64 },

    /// The asymptotic variance does not exist at the plug-in values.
    #[error("asymptotics: variance undefined: {0}")]
    VarianceUndefined(String),

    /// A matrix solve failed or the matrix is numerically singular.
    #[error("asymptotics: singular matrix: {0}")]
    SingularMatrix(String),

    /// Confidence level outside (0, 1).
    #[error("intervals: invalid confidence level {0}; must lie in (0, 1)")]
    InvalidLevel(f64),

    /// Point estimate at the boundary of its parameter space; the
    /// transformed interval is undefined.
    #[error("intervals: degenerate estimate {0}; logit interval undefined at 0 or 1")]
    DegenerateEstimate(f64),

    /// Too many bootstrap replicates failed to produce an estimate.
    #[error("comparators: estimator failed on {failed} of {total} bootstrap replicates")]
    EstimatorFailure { failed: usize, total: usize },

    /// More than the tolerated fraction of simulation replicates failed.
    #[error("sim: scenario infeasible: {failed} of {reps} replicates failed: {detail}")]
    ScenarioInfeasible {
        failed: usize,
        reps: usize,
        detail: String,
    },

    /// A scenario or configuration value is invalid.
    #[error("config: {0}")]
    Config(String),

    /// A dataset file could not be parsed.
    #[error("parse: line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A required group has no observations.
    #[error("parse: empty group: {0}")]
    EmptyGroup(String),
}

pub type Result<T> = std::result::Result<T, Error>;
