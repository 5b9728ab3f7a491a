//! Maximum empirical-likelihood fitting of the density ratio model.
//!
//! The profile (dual) log-likelihood over theta = (alpha, beta')' is
//!
//!   l(theta) = sum_{diseased detected} theta'Q(t)
//!            - sum_{all detected} log[1 + rho * exp{theta'Q(t)}],
//!
//! a concave function maximized by damped Newton from theta = 0. The
//! fitted weights place mass (1/n0) / (1 + rho*omega_i) on each detected
//! point t_i, with omega_i = exp{theta'Q(t_i)}; together with the
//! detected fractions m_k/n_k these yield step-function estimators of
//! the two CDFs, valid above the detection limit.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::basis::BasisSpec;
use crate::diagnostics::{Diagnostic, DiagnosticKind};
use crate::error::{Error, Result};
use crate::sample::{BiomarkerSample, Group};
use crate::stat::{expit, log1p_exp};

/// Newton solver controls.
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Convergence tolerance on the sup-norm of the gradient.
    pub tol: f64,
    /// Iteration cap; hitting it yields `converged = false`, not an error.
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

/// Design pieces shared by the likelihood, score, and Hessian.
pub(crate) struct Prepared {
    points: Vec<(f64, Group)>,
    /// m x (p+1) matrix of augmented basis rows Q(t_i)'.
    aug: DMatrix<f64>,
    diseased: Vec<bool>,
    log_rho: f64,
}

fn prepare(sample: &BiomarkerSample, basis: &BasisSpec) -> Result<Prepared> {
    if sample.m0() == 0 || sample.m1() == 0 {
        return Err(Error::DegenerateSample(format!(
            "need detected observations in both groups (m0 = {}, m1 = {})",
            sample.m0(),
            sample.m1()
        )));
    }
    let points = sample.pooled_sorted();
    let dim = basis.dim();
    let mut aug = DMatrix::zeros(points.len(), dim);
    let mut diseased = Vec::with_capacity(points.len());
    for (i, &(t, g)) in points.iter().enumerate() {
        let row = basis.eval_aug(t)?;
        for (j, v) in row.iter().enumerate() {
            aug[(i, j)] = *v;
        }
        diseased.push(g == Group::Diseased);
    }
    Ok(Prepared {
        points,
        aug,
        diseased,
        log_rho: sample.rho().ln(),
    })
}

fn loglik_at(prep: &Prepared, theta: &DVector<f64>) -> f64 {
    let u = &prep.aug * theta;
    let mut ll = 0.0;
    for i in 0..u.len() {
        if prep.diseased[i] {
            ll += u[i];
        }
        ll -= log1p_exp(u[i] + prep.log_rho);
    }
    ll
}

fn score_at(prep: &Prepared, theta: &DVector<f64>) -> DVector<f64> {
    let u = &prep.aug * theta;
    let mut g = DVector::zeros(prep.aug.ncols());
    for i in 0..u.len() {
        let sigma = expit(u[i] + prep.log_rho);
        let coeff = if prep.diseased[i] {
            1.0 - sigma
        } else {
            -sigma
        };
        for j in 0..g.len() {
            g[j] += coeff * prep.aug[(i, j)];
        }
    }
    g
}

fn hessian_at(prep: &Prepared, theta: &DVector<f64>) -> DMatrix<f64> {
    let u = &prep.aug * theta;
    let dim = prep.aug.ncols();
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..u.len() {
        let sigma = expit(u[i] + prep.log_rho);
        let w = sigma * (1.0 - sigma);
        for j in 0..dim {
            let qj = prep.aug[(i, j)];
            for k in j..dim {
                h[(j, k)] -= w * qj * prep.aug[(i, k)];
            }
        }
    }
    for j in 0..dim {
        for k in 0..j {
            h[(j, k)] = h[(k, j)];
        }
    }
    h
}

fn check_theta(theta: &[f64], basis: &BasisSpec) -> Result<()> {
    if theta.len() != basis.dim() {
        return Err(Error::Config(format!(
            "drm_fit: theta has length {}, expected p+1 = {} for basis `{}`",
            theta.len(),
            basis.dim(),
            basis.name()
        )));
    }
    Ok(())
}

/// Dual empirical log-likelihood at `theta`.
pub fn dual_loglik(theta: &[f64], sample: &BiomarkerSample, basis: &BasisSpec) -> Result<f64> {
    check_theta(theta, basis)?;
    let prep = prepare(sample, basis)?;
    Ok(loglik_at(&prep, &DVector::from_column_slice(theta)))
}

/// Analytic gradient of `dual_loglik` with respect to theta.
pub fn dual_score(theta: &[f64], sample: &BiomarkerSample, basis: &BasisSpec) -> Result<Vec<f64>> {
    check_theta(theta, basis)?;
    let prep = prepare(sample, basis)?;
    Ok(score_at(&prep, &DVector::from_column_slice(theta))
        .iter()
        .copied()
        .collect())
}

/// Analytic Hessian of `dual_loglik`; negative semidefinite everywhere.
pub fn dual_hessian(
    theta: &[f64],
    sample: &BiomarkerSample,
    basis: &BasisSpec,
) -> Result<DMatrix<f64>> {
    check_theta(theta, basis)?;
    let prep = prepare(sample, basis)?;
    Ok(hessian_at(&prep, &DVector::from_column_slice(theta)))
}

/// A fitted density ratio model.
#[derive(Debug, Clone)]
pub struct DrmFit {
    /// MELE (alpha, beta')'.
    pub theta_hat: Vec<f64>,
    /// Detected fraction m0/n0.
    pub zeta0_hat: f64,
    /// Detected fraction m1/n1.
    pub zeta1_hat: f64,
    /// Sample-size ratio n1/n0.
    pub rho: f64,
    /// Dual log-likelihood at `theta_hat`.
    pub loglik: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    pub diagnostics: Vec<Diagnostic>,
    points: Vec<(f64, Group)>,
    /// Baseline weights p_i, aligned to `points`.
    weights: Vec<f64>,
    /// sigma_i = rho*omega_i / (1 + rho*omega_i); the stable carrier of
    /// the fitted tilt.
    sigma: Vec<f64>,
    /// log tilt theta'Q(t_i) at each point.
    log_tilt: Vec<f64>,
    /// Prefix sums of p_i and p_i*omega_i for O(log m) CDF queries.
    cum_w0: Vec<f64>,
    cum_w1: Vec<f64>,
    n0: usize,
    n1: usize,
    llod: f64,
    basis: BasisSpec,
}

impl DrmFit {
    /// Assemble a fit from a solved theta. `pub(crate)` so synthetic
    /// fits can be constructed in unit tests of downstream modules.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_solution(
        sample: &BiomarkerSample,
        basis: &BasisSpec,
        prep: &Prepared,
        theta: DVector<f64>,
        iterations: usize,
        grad_norm: f64,
        converged: bool,
        mut diagnostics: Vec<Diagnostic>,
    ) -> Self {
        let n0 = sample.n0() as f64;
        let n1 = sample.n1() as f64;
        let u = &prep.aug * &theta;
        let mut sigma = Vec::with_capacity(u.len());
        let mut weights = Vec::with_capacity(u.len());
        let mut cum_w0 = Vec::with_capacity(u.len());
        let mut cum_w1 = Vec::with_capacity(u.len());
        let (mut acc0, mut acc1) = (0.0f64, 0.0f64);
        for i in 0..u.len() {
            let s = expit(u[i] + prep.log_rho);
            sigma.push(s);
            let w0 = (1.0 - s) / n0;
            weights.push(w0);
            acc0 += w0;
            acc1 += s / n1; // p_i * omega_i
            cum_w0.push(acc0);
            cum_w1.push(acc1);
        }
        let log_tilt: Vec<f64> = u.iter().copied().collect();
        let loglik = loglik_at(prep, &theta);
        let (zeta0_hat, zeta1_hat) = sample.zeta_hats();

        // Condition C4 check: the fitted second-moment matrix of Q must
        // be numerically positive definite for the asymptotics to apply.
        let dim = basis.dim();
        let mut moment = DMatrix::<f64>::zeros(dim, dim);
        for (i, w) in weights.iter().enumerate() {
            for j in 0..dim {
                for k in 0..dim {
                    moment[(j, k)] += w * prep.aug[(i, j)] * prep.aug[(i, k)];
                }
            }
        }
        let eigs = moment.symmetric_eigenvalues();
        let max_eig = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig.is_nan() || min_eig <= 1e-10 * max_eig.max(0.0) {
            diagnostics.push(Diagnostic::new(
                DiagnosticKind::ConditionC4,
                format!(
                    "drm_fit: condition C4 check failed: weighted Q moment matrix is near-singular \
                     (min eigenvalue {min_eig:.3e}, max {max_eig:.3e})"
                ),
            ));
        }

        Self {
            theta_hat: theta.iter().copied().collect(),
            zeta0_hat,
            zeta1_hat,
            rho: sample.rho(),
            loglik,
            iterations,
            grad_norm,
            converged,
            diagnostics,
            points: prep.points.clone(),
            weights,
            sigma,
            log_tilt,
            cum_w0,
            cum_w1,
            n0: sample.n0(),
            n1: sample.n1(),
            llod: sample.llod(),
            basis: basis.clone(),
        }
    }

    /// Sorted pooled detected points with group labels.
    pub fn points(&self) -> &[(f64, Group)] {
        &self.points
    }

    /// Sorted pooled detected values.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|&(t, _)| t)
    }

    /// Fitted baseline weights p_i, aligned with `points`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Fitted tilt omega_i = exp{theta'Q(t_i)} at each detected point.
    /// Can overflow for extreme tilts; prefer [`DrmFit::tilted_weights`]
    /// for anything summed.
    pub fn omega(&self) -> Vec<f64> {
        self.log_tilt.iter().map(|&u| u.exp()).collect()
    }

    /// The products p_i * omega_i — the diseased-CDF increments —
    /// computed through the saturation-safe form sigma_i / n1. These
    /// sum to zeta1_hat at a converged fit even where omega overflows
    /// or p_i underflows.
    pub fn tilted_weights(&self) -> Vec<f64> {
        let n1 = self.n1 as f64;
        self.sigma.iter().map(|&s| s / n1).collect()
    }

    pub(crate) fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n(&self) -> usize {
        self.n0 + self.n1
    }

    pub fn llod(&self) -> f64 {
        self.llod
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    /// theta'Q(x) — the fitted log density ratio.
    pub fn log_density_ratio(&self, x: f64) -> Result<f64> {
        let aug = self.basis.eval_aug(x)?;
        Ok(aug.iter().zip(&self.theta_hat).map(|(q, t)| q * t).sum())
    }

    fn count_le(&self, x: f64) -> usize {
        self.points.partition_point(|&(t, _)| t <= x)
    }

    /// MELE of the healthy CDF at x >= llod; right-continuous. Clamped
    /// into [0, 1]: away from convergence the score identity holds only
    /// to the gradient tolerance, which can spill a hair past 1.
    pub fn cdf_healthy(&self, x: f64) -> Result<f64> {
        if x < self.llod {
            return Err(Error::BelowLlod { x, r: self.llod });
        }
        let k = self.count_le(x);
        let mass = if k == 0 { 0.0 } else { self.cum_w0[k - 1] };
        Ok((1.0 - self.zeta0_hat + mass).clamp(0.0, 1.0))
    }

    /// MELE of the diseased CDF at x >= llod; right-continuous.
    pub fn cdf_diseased(&self, x: f64) -> Result<f64> {
        if x < self.llod {
            return Err(Error::BelowLlod { x, r: self.llod });
        }
        let k = self.count_le(x);
        let mass = if k == 0 { 0.0 } else { self.cum_w1[k - 1] };
        Ok((1.0 - self.zeta1_hat + mass).clamp(0.0, 1.0))
    }
}

/// Maximize the dual log-likelihood by damped Newton with backtracking.
///
/// Starts at theta = 0 (the no-separation point, always feasible). A
/// non-negative-definite Hessian triggers a gradient-ascent fallback
/// step; only a stalled fallback is an error. Hitting `max_iter` returns
/// a fit with `converged = false` and a diagnostic, since the point
/// estimates remain meaningful under complete separation.
pub fn fit_drm(
    sample: &BiomarkerSample,
    basis: &BasisSpec,
    options: &FitOptions,
) -> Result<DrmFit> {
    let dim = basis.dim();
    if sample.m0() < dim || sample.m1() < dim {
        return Err(Error::DegenerateSample(format!(
            "need at least p+1 = {dim} detected points per group (m0 = {}, m1 = {})",
            sample.m0(),
            sample.m1()
        )));
    }
    let prep = prepare(sample, basis)?;
    let first = prep.points[0].0;
    if prep.points.iter().all(|&(t, _)| t == first) {
        return Err(Error::DegenerateSample(
            "all detected values are identical".to_string(),
        ));
    }

    let mut theta = DVector::zeros(dim);
    let mut ll = loglik_at(&prep, &theta);
    let mut grad = score_at(&prep, &theta);
    let mut grad_norm = grad.amax();
    let mut diagnostics = Vec::new();
    let mut iterations = 0usize;
    let mut converged = grad_norm <= options.tol;

    while !converged && iterations < options.max_iter {
        iterations += 1;
        let neg_hess = -hessian_at(&prep, &theta);
        let (mut direction, newton_ok) = match Cholesky::new(neg_hess) {
            Some(chol) => (chol.solve(&grad), true),
            None => (grad.clone(), false),
        };
        if !direction.iter().all(|d| d.is_finite()) {
            direction = grad.clone();
        }
        let slope: f64 = grad.dot(&direction);

        let mut next: Option<(DVector<f64>, f64)> = None;
        if newton_ok && slope.abs() <= 1e-14 * (1.0 + ll.abs()) {
            // Quadratic regime: the certifiable improvement is below the
            // objective's rounding floor, so Armijo cannot distinguish
            // progress. The raw Newton step is safe here.
            let candidate = &theta + &direction;
            let cand_ll = loglik_at(&prep, &candidate);
            if cand_ll.is_finite() {
                next = Some((candidate, cand_ll));
            }
        } else {
            // Armijo backtracking, factor 0.5.
            let mut step = 1.0f64;
            for _ in 0..60 {
                let candidate = &theta + &direction * step;
                let cand_ll = loglik_at(&prep, &candidate);
                if cand_ll.is_finite() && cand_ll >= ll + 1e-4 * step * slope {
                    next = Some((candidate, cand_ll));
                    break;
                }
                step *= 0.5;
            }
        }
        let Some((candidate, cand_ll)) = next else {
            if !newton_ok {
                return Err(Error::SingularHessian {
                    iteration: iterations,
                });
            }
            // No certifiable progress at working precision.
            break;
        };
        let unchanged = candidate == theta;
        theta = candidate;
        ll = cand_ll;
        grad = score_at(&prep, &theta);
        grad_norm = grad.amax();
        converged = grad_norm <= options.tol;
        if unchanged && !converged {
            // Stalled at float resolution; stop rather than spin.
            break;
        }
    }

    // Under complete separation the dual likelihood approaches its
    // supremum along a ray: the gradient vanishes there even though no
    // maximizer exists. Detect the saturated classification and treat
    // the fit as non-converged so intervals get suppressed downstream.
    if converged {
        let u = &prep.aug * &theta;
        let mut min_diseased = f64::INFINITY;
        let mut max_healthy = f64::NEG_INFINITY;
        for i in 0..u.len() {
            let sigma = expit(u[i] + prep.log_rho);
            if prep.diseased[i] {
                min_diseased = min_diseased.min(sigma);
            } else {
                max_healthy = max_healthy.max(sigma);
            }
        }
        if min_diseased >= 1.0 - 1e-6 && max_healthy <= 1e-6 {
            converged = false;
            diagnostics.push(Diagnostic::new(
                DiagnosticKind::NonConvergence,
                "drm_fit: detected groups are completely separated under the fitted tilt; \
                 the likelihood has no interior maximum and theta stopped along a divergent ray"
                    .to_string(),
            ));
        }
    } else {
        diagnostics.push(Diagnostic::new(
            DiagnosticKind::NonConvergence,
            format!(
                "drm_fit: Newton did not reach gradient tolerance {:.1e} after {} iterations \
                 (|grad| = {:.3e}); data may be completely separated",
                options.tol, iterations, grad_norm
            ),
        ));
    }

    Ok(DrmFit::from_solution(
        sample,
        basis,
        &prep,
        theta,
        iterations,
        grad_norm,
        converged,
        diagnostics,
    ))
}

/// Build a fit directly from a supplied theta, bypassing optimization.
/// Test scaffolding for downstream modules.
#[cfg(test)]
pub(crate) fn fit_with_theta(sample: &BiomarkerSample, basis: &BasisSpec, theta: &[f64]) -> DrmFit {
    let prep = prepare(sample, basis).unwrap();
    let theta = DVector::from_column_slice(theta);
    let grad = score_at(&prep, &theta).amax();
    DrmFit::from_solution(sample, basis, &prep, theta, 0, grad, true, Vec::new())
}
