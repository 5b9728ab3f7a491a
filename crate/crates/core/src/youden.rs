//! Optimal cutoff and Youden index from a fitted density ratio model.
//!
//! The cutoff estimate solves theta'Q(x) = 0: the fitted log density
//! ratio changes sign exactly where the two estimated densities cross.
//! Candidate roots are bracketed between consecutive detected points
//! and refined by bisection; among multiple roots the one with the
//! largest estimated height F0 - F1 wins. When no root exists in the
//! data range the cutoff falls back to the best detected point.

use serde::{Deserialize, Serialize};

use crate::asymptotics;
use crate::diagnostics::{Diagnostic, DiagnosticKind};
use crate::drm::DrmFit;
use crate::error::Result;

/// How the cutoff was located.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootStatus {
    /// Unique sign change, refined by bisection.
    AnalyticRoot,
    /// Several roots; the one maximizing the height was chosen.
    MultipleRootsResolved,
    /// No root in the data range; argmax over detected points.
    GridFallback,
}

/// Point estimates of (cutoff, Youden index) with optional variances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct YoudenEstimate {
    pub c_hat: f64,
    pub j_hat: f64,
    pub root_status: RootStatus,
    /// Asymptotic variance of sqrt(n)(c_hat - c); absent when the fit
    /// did not converge, the cutoff is a grid fallback, or the variance
    /// is undefined.
    pub sigma2_c: Option<f64>,
    /// Asymptotic variance of sqrt(n)(j_hat - J); absent when the fit
    /// did not converge or the plug-in computation fails.
    pub sigma2_j: Option<f64>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Estimated height H(x) = F0(x) - F1(x) at x >= llod.
pub fn height(fit: &DrmFit, x: f64) -> Result<f64> {
    Ok(fit.cdf_healthy(x)? - fit.cdf_diseased(x)?)
}

/// Relative tolerance for bisection: |interval| <= 1e-10 * data range.
const ROOT_REL_TOL: f64 = 1e-10;

fn bisect(fit: &DrmFit, mut lo: f64, mut hi: f64, g_lo: f64, tol: f64) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval no longer splittable in f64
        }
        let g_mid = fit.log_density_ratio(mid)?;
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if (g_lo < 0.0) == (g_mid < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// All roots of theta'Q(x) = 0 over [min t_i, max t_i], found by sign
/// scanning consecutive distinct detected points.
fn scan_roots(fit: &DrmFit) -> Result<Vec<f64>> {
    let mut values: Vec<f64> = fit.values().collect();
    values.dedup();
    let range = values[values.len() - 1] - values[0];
    let tol = ROOT_REL_TOL * range;
    let g: Vec<f64> = values
        .iter()
        .map(|&t| fit.log_density_ratio(t))
        .collect::<Result<_>>()?;
    let mut roots = Vec::new();
    for i in 0..values.len() {
        if g[i] == 0.0 {
            roots.push(values[i]);
        }
        if i + 1 < values.len()
            && g[i] != 0.0
            && g[i + 1] != 0.0
            && (g[i] < 0.0) != (g[i + 1] < 0.0)
        {
            roots.push(bisect(fit, values[i], values[i + 1], g[i], tol)?);
        }
    }
    Ok(roots)
}

/// Locate the cutoff estimate; grid fallback is a status, never an error.
pub fn find_cutoff(fit: &DrmFit) -> Result<(f64, RootStatus)> {
    let roots = scan_roots(fit)?;
    if roots.is_empty() {
        // argmax of the height over detected points, smallest wins ties
        let mut best = (f64::NEG_INFINITY, f64::NAN);
        for t in fit.values() {
            if t == best.1 {
                continue;
            }
            let h = height(fit, t)?;
            if h > best.0 {
                best = (h, t);
            }
        }
        return Ok((best.1, RootStatus::GridFallback));
    }
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for &root in &roots {
        let h = height(fit, root)?;
        if h > best.0 {
            best = (h, root);
        }
    }
    let status = if roots.len() == 1 {
        RootStatus::AnalyticRoot
    } else {
        RootStatus::MultipleRootsResolved
    };
    Ok((best.1, status))
}

/// Full point estimation: cutoff, Youden index, and plug-in variances.
///
/// Variance failures degrade to absent values with diagnostics; they
/// never fail the point estimates.
pub fn estimate(fit: &DrmFit) -> Result<YoudenEstimate> {
    let (c_hat, root_status) = find_cutoff(fit)?;
    let mut diagnostics = Vec::new();

    let raw_h = height(fit, c_hat)?;
    let j_hat = raw_h.clamp(0.0, 1.0);
    if (raw_h - j_hat).abs() > 1e-12 {
        diagnostics.push(Diagnostic::new(
            DiagnosticKind::HeightClamped,
            format!("youden: height {raw_h:.6e} at the cutoff clamped into [0, 1]"),
        ));
    }

    if root_status == RootStatus::GridFallback {
        diagnostics.push(Diagnostic::new(
            DiagnosticKind::GridFallback,
            "youden: no root of the fitted log density ratio in the data range; \
             cutoff set to the best detected point"
                .to_string(),
        ));
    }

    // Proximity to the detection limit: the cutoff asymptotics assume
    // the true cutoff lies strictly above it.
    if fit.llod().is_finite() {
        let lo = fit.values().next().unwrap_or(f64::NAN);
        let hi = fit.values().last().unwrap_or(f64::NAN);
        let spacing = (hi - lo) / fit.points().len() as f64;
        if c_hat - fit.llod() < spacing {
            diagnostics.push(Diagnostic::new(
                DiagnosticKind::LlodProximity,
                format!(
                    "youden: estimated cutoff {c_hat:.6} is within one average point \
                     spacing of the detection limit {:.6}; variance estimates may be unreliable",
                    fit.llod()
                ),
            ));
        }
    }

    let (mut sigma2_c, mut sigma2_j) = (None, None);
    if !fit.converged {
        diagnostics.push(Diagnostic::new(
            DiagnosticKind::CiSuppressed,
            "youden: fit did not converge; variances and confidence intervals suppressed"
                .to_string(),
        ));
    } else {
        match asymptotics::var_youden(fit, c_hat) {
            Ok((v, diags)) => {
                sigma2_j = Some(v);
                diagnostics.extend(diags);
            }
            Err(e) => diagnostics.push(Diagnostic::new(
                DiagnosticKind::VarianceUnavailable,
                format!("youden: variance of the index unavailable: {e}"),
            )),
        }
        if root_status == RootStatus::GridFallback {
            diagnostics.push(Diagnostic::new(
                DiagnosticKind::VarianceUnavailable,
                "youden: cutoff variance requires an interior root; none exists".to_string(),
            ));
        } else {
            match asymptotics::var_cutoff(fit, c_hat) {
                Ok((v, diags)) => {
                    sigma2_c = Some(v);
                    diagnostics.extend(diags);
                }
                Err(e) => diagnostics.push(Diagnostic::new(
                    DiagnosticKind::VarianceUnavailable,
                    format!("youden: variance of the cutoff unavailable: {e}"),
                )),
            }
        }
    }

    Ok(YoudenEstimate {
        c_hat,
        j_hat,
        root_status,
        sigma2_c,
        sigma2_j,
        diagnostics,
    })
}
