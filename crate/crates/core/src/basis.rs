//! Density-ratio basis functions q(x).
//!
//! The model tilts the healthy distribution by exp{alpha + beta' q(x)},
//! so q fixes the parametric part of the model. Built-ins cover the
//! usual cases: `linear` (logistic-regression tilt, exact for gamma
//! scale families), `log-quadratic` (exact for lognormal), and `x-logx`
//! (exact for gamma shape-and-rate families). Custom bases supply their
//! own q and dq/dx.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type BasisFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
enum BasisKind {
    Linear,
    LogQuadratic,
    XLogX,
    Custom { q: BasisFn, qdot: BasisFn },
}

/// A prespecified basis q(x) with its derivative and admissible domain.
///
/// Immutable after construction; shared freely across threads.
#[derive(Clone)]
pub struct BasisSpec {
    kind: BasisKind,
    name: String,
    p: usize,
    domain_lower: f64,
}

impl fmt::Debug for BasisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BasisSpec")
            .field("name", &self.name)
            .field("p", &self.p)
            .field("domain_lower", &self.domain_lower)
            .finish()
    }
}

impl BasisSpec {
    /// q(x) = x. The DRM becomes a logistic tilt in x itself.
    pub fn linear() -> Self {
        Self {
            kind: BasisKind::Linear,
            name: "linear".to_string(),
            p: 1,
            domain_lower: f64::NEG_INFINITY,
        }
    }

    /// q(x) = (log x, log^2 x); requires x > 0.
    pub fn log_quadratic() -> Self {
        Self {
            kind: BasisKind::LogQuadratic,
            name: "loglog".to_string(),
            p: 2,
            domain_lower: 0.0,
        }
    }

    /// q(x) = (x, log x); requires x > 0.
    pub fn x_log_x() -> Self {
        Self {
            kind: BasisKind::XLogX,
            name: "xlogx".to_string(),
            p: 2,
            domain_lower: 0.0,
        }
    }

    /// A user-supplied basis.
    ///
    /// The declared dimension `p` is trusted for sizing but the output
    /// lengths of `q` and `qdot` are cross-checked on every evaluation.
    pub fn custom(
        name: impl Into<String>,
        p: usize,
        domain_lower: f64,
        q: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        qdot: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if p == 0 {
            return Err(Error::Config("basis dimension p must be >= 1".to_string()));
        }
        Ok(Self {
            kind: BasisKind::Custom {
                q: Arc::new(q),
                qdot: Arc::new(qdot),
            },
            name: name.into(),
            p,
            domain_lower,
        })
    }

    /// Resolve a CLI basis name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "linear" => Ok(Self::linear()),
            "loglog" => Ok(Self::log_quadratic()),
            "xlogx" => Ok(Self::x_log_x()),
            other => Err(Error::Config(format!(
                "unknown basis `{other}`; expected one of linear, loglog, xlogx"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Dimension of q(x).
    pub fn p(&self) -> usize {
        self.p
    }

    /// Dimension of the augmented vector Q(x) = (1, q(x)')'.
    pub fn dim(&self) -> usize {
        self.p + 1
    }

    /// Smallest admissible x (exclusive).
    pub fn domain_lower(&self) -> f64 {
        self.domain_lower
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if !x.is_finite() || x <= self.domain_lower {
            return Err(Error::Domain {
                basis: self.name.clone(),
                x,
                lower: self.domain_lower,
            });
        }
        Ok(())
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.p {
            return Err(Error::BasisShape {
                basis: self.name.clone(),
                got: v.len(),
                declared: self.p,
            });
        }
        Ok(())
    }

    /// Evaluate q(x).
    pub fn eval_q(&self, x: f64) -> Result<Vec<f64>> {
        self.check_domain(x)?;
        let v = match &self.kind {
            BasisKind::Linear => vec![x],
            BasisKind::LogQuadratic => {
                let l = x.ln();
                vec![l, l * l]
            }
            BasisKind::XLogX => vec![x, x.ln()],
            BasisKind::Custom { q, .. } => q(x),
        };
        self.check_len(&v)?;
        Ok(v)
    }

    /// Evaluate dq/dx at x.
    pub fn eval_qdot(&self, x: f64) -> Result<Vec<f64>> {
        self.check_domain(x)?;
        let v = match &self.kind {
            BasisKind::Linear => vec![1.0],
            BasisKind::LogQuadratic => vec![1.0 / x, 2.0 * x.ln() / x],
            BasisKind::XLogX => vec![1.0, 1.0 / x],
            BasisKind::Custom { qdot, .. } => qdot(x),
        };
        self.check_len(&v)?;
        Ok(v)
    }

    /// Evaluate the augmented vector Q(x) = (1, q(x)')'.
    pub fn eval_aug(&self, x: f64) -> Result<Vec<f64>> {
        let q = self.eval_q(x)?;
        let mut out = Vec::with_capacity(self.p + 1);
        out.push(1.0);
        out.extend_from_slice(&q);
        Ok(out)
    }
}
