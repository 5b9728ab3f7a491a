//! Confidence intervals for the cutoff and the Youden index.
//!
//! The cutoff gets a plain Wald interval. The index gets a logit-scale
//! Wald interval mapped back through expit, which keeps endpoints inside
//! (0, 1) and improves coverage when the index sits near the boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stat::{expit, logit, normal_quantile};

/// Which construction produced the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiKind {
    WaldC,
    LogitJ,
    PercentileBootstrap,
}

/// A two-sided confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub kind: CiKind,
}

impl ConfidenceInterval {
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

fn check_level(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidLevel(level));
    }
    Ok(normal_quantile(0.5 * (1.0 + level)))
}

/// Wald interval for the cutoff: c_hat -+ z * sigma_c / sqrt(n).
pub fn ci_cutoff(c_hat: f64, sigma2_c: f64, n: usize, level: f64) -> Result<ConfidenceInterval> {
    let z = check_level(level)?;
    if sigma2_c < 0.0 || !sigma2_c.is_finite() {
        return Err(Error::Config(format!(
            "intervals: sigma2_c must be a nonnegative finite number, got {sigma2_c}"
        )));
    }
    if n < 2 {
        return Err(Error::Config(format!("intervals: need n >= 2, got {n}")));
    }
    let half = z * (sigma2_c / n as f64).sqrt();
    Ok(ConfidenceInterval {
        lower: c_hat - half,
        upper: c_hat + half,
        level,
        kind: CiKind::WaldC,
    })
}

/// Logit-transformed interval for the Youden index.
///
/// Undefined at j_hat in {0, 1}; callers treat that as an absent
/// interval with a diagnostic rather than a fatal error.
pub fn ci_youden(j_hat: f64, sigma2_j: f64, n: usize, level: f64) -> Result<ConfidenceInterval> {
    let z = check_level(level)?;
    if !(j_hat > 0.0 && j_hat < 1.0) {
        return Err(Error::DegenerateEstimate(j_hat));
    }
    if sigma2_j < 0.0 || !sigma2_j.is_finite() {
        return Err(Error::Config(format!(
            "intervals: sigma2_j must be a nonnegative finite number, got {sigma2_j}"
        )));
    }
    if n < 2 {
        return Err(Error::Config(format!("intervals: need n >= 2, got {n}")));
    }
    let half = z * sigma2_j.sqrt() / ((n as f64).sqrt() * j_hat * (1.0 - j_hat));
    let (lower, upper) = if half == 0.0 {
        (j_hat, j_hat)
    } else {
        let center = logit(j_hat);
        (expit(center - half), expit(center + half))
    };
    Ok(ConfidenceInterval {
        lower,
        upper,
        level,
        kind: CiKind::LogitJ,
    })
}
