//! Plug-in asymptotic variances for the cutoff and Youden index.
//!
//! The limiting variances are built from the truncated moments
//!
//!   A0(t) = int_r^t omega/(1+rho*omega) dF0,
//!   A1(t) = int_r^t omega/(1+rho*omega) q(x) dF0,
//!   A2(t) = int_r^t omega/(1+rho*omega) q(x)q(x)' dF0,
//!
//! realized here as sums over the fitted discrete measure {p_i at t_i}.
//! With A the (p+1)x(p+1) block matrix of full-range moments,
//! S = rho/(1+rho) A and V = S - rho*(A0,A1')'(A0,A1'), the cutoff
//! variance is Q(c)'S^-1 V S^-1 Q(c) / (beta'qdot(c))^2 and the index
//! variance combines binomial terms with an A-correction. All solves
//! are factorization-based; no matrix is inverted explicitly.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::diagnostics::{Diagnostic, DiagnosticKind};
use crate::drm::DrmFit;
use crate::error::{Error, Result};

/// Condition-number threshold above which solves get a warning.
const COND_WARN: f64 = 1e10;

/// Denominator threshold below which the cutoff variance is undefined.
const DENOM_TOL: f64 = 1e-8;

/// Everything the limiting variance formulas need, evaluated at the
/// plug-in values.
#[derive(Debug, Clone)]
pub struct AsymptoticQuantities {
    pub a0_c: f64,
    pub a0_inf: f64,
    pub a1_c: Vec<f64>,
    pub a1_inf: Vec<f64>,
    pub a2_inf: DMatrix<f64>,
    /// Block matrix [[A0, A1'], [A1, A2]] of full-range moments.
    pub a: DMatrix<f64>,
    /// S = rho/(1+rho) * A.
    pub s: DMatrix<f64>,
    /// V = S - rho * (A0, A1')'(A0, A1').
    pub v: DMatrix<f64>,
    pub f0_c: f64,
    pub f1_c: f64,
}

/// Truncated moments (A0(t), A1(t), A2(t)) under the fitted measure.
/// `t = f64::INFINITY` gives the full-range versions.
pub fn plug_in_a(fit: &DrmFit, t: f64) -> Result<(f64, Vec<f64>, DMatrix<f64>)> {
    let p = fit.basis().p();
    let n1 = fit.n1() as f64;
    let mut a0 = 0.0;
    let mut a1 = vec![0.0; p];
    let mut a2 = DMatrix::zeros(p, p);
    for (&(x, _), &sigma) in fit.points().iter().zip(fit.sigma()) {
        if x > t {
            break; // points are sorted
        }
        // p_i * omega_i / (1 + rho*omega_i) = sigma_i(1 - sigma_i)/n1
        let c = sigma * (1.0 - sigma) / n1;
        let q = fit.basis().eval_q(x)?;
        a0 += c;
        for j in 0..p {
            a1[j] += c * q[j];
            for k in 0..p {
                a2[(j, k)] += c * q[j] * q[k];
            }
        }
    }
    Ok((a0, a1, a2))
}

/// Assemble all plug-in quantities at the cutoff `c_hat`.
pub fn quantities(fit: &DrmFit, c_hat: f64) -> Result<AsymptoticQuantities> {
    let (a0_c, a1_c, _) = plug_in_a(fit, c_hat)?;
    let (a0_inf, a1_inf, a2_inf) = plug_in_a(fit, f64::INFINITY)?;
    let p = fit.basis().p();
    let dim = p + 1;
    let mut a = DMatrix::zeros(dim, dim);
    a[(0, 0)] = a0_inf;
    for j in 0..p {
        a[(0, j + 1)] = a1_inf[j];
        a[(j + 1, 0)] = a1_inf[j];
        for k in 0..p {
            a[(j + 1, k + 1)] = a2_inf[(j, k)];
        }
    }
    let rho = fit.rho;
    let s = &a * (rho / (1.0 + rho));
    let mut avec = DVector::zeros(dim);
    avec[0] = a0_inf;
    for j in 0..p {
        avec[j + 1] = a1_inf[j];
    }
    let v = &s - (&avec * avec.transpose()) * rho;
    Ok(AsymptoticQuantities {
        a0_c,
        a0_inf,
        a1_c,
        a1_inf,
        a2_inf,
        a,
        s,
        v,
        f0_c: fit.cdf_healthy(c_hat)?,
        f1_c: fit.cdf_diseased(c_hat)?,
    })
}

fn condition_diagnostic(name: &str, m: &DMatrix<f64>) -> Option<Diagnostic> {
    let eigs = m.clone().symmetric_eigenvalues();
    let max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 || max / min > COND_WARN {
        Some(Diagnostic::new(
            DiagnosticKind::IllConditioned,
            format!(
                "asymptotics: matrix {name} is ill-conditioned \
                 (eigenvalue range [{min:.3e}, {max:.3e}]); variance estimates may be inaccurate"
            ),
        ))
    } else {
        None
    }
}

/// Plug-in variance of sqrt(n)(c_hat - c).
///
/// Undefined when beta'qdot(c_hat) is numerically zero: the local
/// expansion divides by that slope, so near-zero values mean the normal
/// approximation carries no information.
pub fn var_cutoff(fit: &DrmFit, c_hat: f64) -> Result<(f64, Vec<Diagnostic>)> {
    let qdot = fit.basis().eval_qdot(c_hat)?;
    let denom: f64 = fit.theta_hat[1..]
        .iter()
        .zip(&qdot)
        .map(|(b, qd)| b * qd)
        .sum();
    if denom.abs() < DENOM_TOL {
        return Err(Error::VarianceUndefined(format!(
            "slope beta'qdot at the cutoff is {denom:.3e}; below tolerance {DENOM_TOL:.0e}"
        )));
    }
    let q = quantities(fit, c_hat)?;
    let mut diagnostics = Vec::new();
    if let Some(d) = condition_diagnostic("S", &q.s) {
        diagnostics.push(d);
    }
    let chol = Cholesky::new(q.s.clone())
        .ok_or_else(|| Error::SingularMatrix("S is not positive definite".to_string()))?;
    let aug = DVector::from_vec(fit.basis().eval_aug(c_hat)?);
    let w = chol.solve(&aug);
    let mut sigma2 = (w.transpose() * &q.v * &w)[(0, 0)] / (denom * denom);
    if sigma2 < 0.0 {
        diagnostics.push(Diagnostic::new(
            DiagnosticKind::NegativeVarianceClamped,
            format!("asymptotics: cutoff variance {sigma2:.3e} clamped to zero"),
        ));
        sigma2 = 0.0;
    }
    Ok((sigma2, diagnostics))
}

/// Plug-in variance of sqrt(n)(j_hat - J).
pub fn var_youden(fit: &DrmFit, c_hat: f64) -> Result<(f64, Vec<Diagnostic>)> {
    let q = quantities(fit, c_hat)?;
    let mut diagnostics = Vec::new();
    if let Some(d) = condition_diagnostic("A", &q.a) {
        diagnostics.push(d);
    }
    let chol = Cholesky::new(q.a.clone())
        .ok_or_else(|| Error::SingularMatrix("A is not positive definite".to_string()))?;
    let dim = fit.basis().dim();
    let mut ac = DVector::zeros(dim);
    ac[0] = q.a0_c;
    for j in 0..dim - 1 {
        ac[j + 1] = q.a1_c[j];
    }
    let solved = chol.solve(&ac);
    let mut bracket = q.a0_c - ac.dot(&solved);
    if bracket < 0.0 {
        // The population version is nonnegative; finite-sample plug-ins
        // can dip below zero.
        if bracket < -1e-12 {
            diagnostics.push(Diagnostic::new(
                DiagnosticKind::NegativeVarianceClamped,
                format!("asymptotics: A-correction term {bracket:.3e} clamped to zero"),
            ));
        }
        bracket = 0.0;
    }
    let rho = fit.rho;
    let binom0 = (rho + 1.0) * (q.f0_c - q.f0_c * q.f0_c);
    let binom1 = (rho + 1.0) / rho * (q.f1_c - q.f1_c * q.f1_c);
    let mut sigma2 = binom0 + binom1 - (rho + 1.0).powi(3) / rho * bracket;
    if sigma2 < 0.0 {
        diagnostics.push(Diagnostic::new(
            DiagnosticKind::NegativeVarianceClamped,
            format!("asymptotics: index variance {sigma2:.3e} clamped to zero"),
        ));
        sigma2 = 0.0;
    }
    Ok((sigma2, diagnostics))
}

/// The ECDF-method variance bound sigma_N^2 at the plug-in values; the
/// DRM index variance never exceeds it at the population level.
pub fn nonparametric_variance_bound(fit: &DrmFit, c_hat: f64) -> Result<f64> {
    let f0 = fit.cdf_healthy(c_hat)?;
    let f1 = fit.cdf_diseased(c_hat)?;
    let rho = fit.rho;
    Ok((rho + 1.0) * (f0 - f0 * f0) + (rho + 1.0) / rho * (f1 - f1 * f1))
}
