//! Non-fatal diagnostics attached to fits and estimates.

use serde::{Deserialize, Serialize};

/// Machine-readable class of a diagnostic message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    /// Newton iteration hit `max_iter` without meeting the gradient
    /// tolerance (typical under complete separation).
    NonConvergence,
    /// The weighted second-moment matrix of Q is numerically rank
    /// deficient (condition C4 check).
    ConditionC4,
    /// A variance could not be computed; the point estimate stands.
    VarianceUnavailable,
    /// A plug-in variance quantity was negative and clamped to zero.
    NegativeVarianceClamped,
    /// The estimated cutoff sits close to the detection limit.
    LlodProximity,
    /// The cutoff came from the grid fallback rather than a root.
    GridFallback,
    /// A confidence interval was suppressed.
    CiSuppressed,
    /// A nontrivial fraction of bootstrap replicates failed.
    BootstrapFailures,
    /// A matrix solve succeeded but the matrix is badly conditioned.
    IllConditioned,
    /// The Youden height was clamped into [0, 1].
    HeightClamped,
}

/// A warning that does not abort estimation but should reach the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}
