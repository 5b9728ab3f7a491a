//! Nonparametric comparator: ECDF point estimates and percentile
//! bootstrap intervals.
//!
//! The ECDF method maximizes the raw empirical CDF difference over the
//! pooled detected points, with below-LLOD counts contributing mass at
//! the censoring boundary. Bootstrap resampling draws each group
//! independently with replacement, treating censored observations as
//! indistinguishable below-limit atoms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{Diagnostic, DiagnosticKind};
use crate::error::{Error, Result};
use crate::intervals::{CiKind, ConfidenceInterval};
use crate::rng::SubRng;
use crate::sample::BiomarkerSample;

/// ECDF-based point estimates of the Youden index and cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcdfEstimate {
    pub j_e: f64,
    /// The maximizing detected point (smallest on ties).
    pub c_e: f64,
}

/// Maximize F0_emp - F1_emp over the pooled detected points.
pub fn ecdf_youden(sample: &BiomarkerSample) -> Result<EcdfEstimate> {
    if sample.m0() == 0 || sample.m1() == 0 {
        return Err(Error::DegenerateSample(format!(
            "ecdf needs detected observations in both groups (m0 = {}, m1 = {})",
            sample.m0(),
            sample.m1()
        )));
    }
    let n0 = sample.n0() as f64;
    let n1 = sample.n1() as f64;
    let healthy = sample.healthy_detected();
    let diseased = sample.diseased_detected();
    let pooled = sample.pooled_sorted();

    let (mut i0, mut i1) = (0usize, 0usize);
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    let mut idx = 0;
    while idx < pooled.len() {
        let x = pooled[idx].0;
        while idx < pooled.len() && pooled[idx].0 == x {
            idx += 1;
        }
        while i0 < healthy.len() && healthy[i0] <= x {
            i0 += 1;
        }
        while i1 < diseased.len() && diseased[i1] <= x {
            i1 += 1;
        }
        let f0 = (sample.healthy_below() + i0) as f64 / n0;
        let f1 = (sample.diseased_below() + i1) as f64 / n1;
        let d = f0 - f1;
        if d > best.0 {
            best = (d, x);
        }
    }
    Ok(EcdfEstimate {
        j_e: best.0,
        c_e: best.1,
    })
}

/// A percentile-bootstrap interval plus resampling bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub interval: ConfidenceInterval,
    /// Replicates whose estimator returned an error.
    pub failures: usize,
    pub replicates: usize,
    pub diagnostics: Vec<Diagnostic>,
}

/// Resample one group with replacement: the group's atoms are its
/// detected values plus `below` indistinguishable censored units.
fn resample_group(detected: &[f64], below: usize, n: usize, rng: &mut SubRng) -> (Vec<f64>, usize) {
    let mut new_detected = Vec::with_capacity(detected.len());
    let mut new_below = 0usize;
    for _ in 0..n {
        let k = rng.next_index(n);
        if k < below {
            new_below += 1;
        } else {
            new_detected.push(detected[k - below]);
        }
    }
    (new_detected, new_below)
}

/// Type-7 empirical quantile of sorted data.
fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Nonparametric percentile bootstrap for any scalar statistic of a
/// two-group sample.
///
/// Each group is resampled independently with replacement, preserving
/// n0 and n1 and re-deriving below-LLOD counts. Replicate `j` draws
/// from the substream keyed by (seed, j, group), so results are
/// identical regardless of thread count or execution order.
pub fn bootstrap_percentile_ci<F>(
    estimator: F,
    sample: &BiomarkerSample,
    b: usize,
    level: f64,
    seed: u64,
) -> Result<BootstrapCi>
where
    F: Fn(&BiomarkerSample) -> Result<f64> + Sync,
{
    if b < 100 {
        return Err(Error::Config(format!(
            "comparators: bootstrap needs B >= 100 replicates, got {b}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidLevel(level));
    }
    let llod = sample.llod();
    let outcomes: Vec<Option<f64>> = (0..b as u64)
        .into_par_iter()
        .map(|j| {
            let mut rng0 = SubRng::substream(seed, j, 0);
            let mut rng1 = SubRng::substream(seed, j, 1);
            let (h, hb) = resample_group(
                sample.healthy_detected(),
                sample.healthy_below(),
                sample.n0(),
                &mut rng0,
            );
            let (d, db) = resample_group(
                sample.diseased_detected(),
                sample.diseased_below(),
                sample.n1(),
                &mut rng1,
            );
            let resampled = BiomarkerSample::new(h, d, hb, db, llod).ok()?;
            estimator(&resampled).ok().filter(|v| v.is_finite())
        })
        .collect();

    let mut estimates: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let failures = b - estimates.len();
    if estimates.is_empty() {
        return Err(Error::EstimatorFailure {
            failed: failures,
            total: b,
        });
    }
    estimates.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    let interval = ConfidenceInterval {
        lower: quantile_type7(&estimates, alpha / 2.0),
        upper: quantile_type7(&estimates, 1.0 - alpha / 2.0),
        level,
        kind: CiKind::PercentileBootstrap,
    };
    let mut diagnostics = Vec::new();
    if failures * 20 > b {
        diagnostics.push(Diagnostic::new(
            DiagnosticKind::BootstrapFailures,
            format!(
                "comparators: estimator failed on {failures} of {b} bootstrap replicates; \
                 interval computed from the {} successes",
                estimates.len()
            ),
        ));
    }
    Ok(BootstrapCi {
        interval,
        failures,
        replicates: b,
        diagnostics,
    })
}
