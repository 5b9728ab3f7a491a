//! Two-group biomarker data with lower-limit-of-detection support.

use crate::error::{Error, Result};

/// Group labels for pooled observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Healthy,
    Diseased,
}

/// Two independent samples of a biomarker, split into detected values
/// (>= the LLOD `r`) and per-group counts of observations below `r`.
///
/// The no-LLOD case is `r = -inf` with zero below counts. An observation
/// exactly equal to a finite `r` counts as detected.
#[derive(Debug, Clone, PartialEq)]
pub struct BiomarkerSample {
    healthy_detected: Vec<f64>,
    diseased_detected: Vec<f64>,
    healthy_below: usize,
    diseased_below: usize,
    llod: f64,
}

impl BiomarkerSample {
    /// Build from pre-split parts. Detected values are sorted; every
    /// detected value must be finite and >= `llod`.
    pub fn new(
        mut healthy_detected: Vec<f64>,
        mut diseased_detected: Vec<f64>,
        healthy_below: usize,
        diseased_below: usize,
        llod: f64,
    ) -> Result<Self> {
        if llod.is_nan() || llod == f64::INFINITY {
            return Err(Error::InvalidSample(format!(
                "llod must be finite or -inf, got {llod}"
            )));
        }
        if llod == f64::NEG_INFINITY && (healthy_below > 0 || diseased_below > 0) {
            return Err(Error::InvalidSample(
                "below-LLOD counts must be zero when llod = -inf".to_string(),
            ));
        }
        for (name, vals) in [
            ("healthy", &healthy_detected),
            ("diseased", &diseased_detected),
        ] {
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSample(format!(
                    "{name} values must be finite"
                )));
            }
            if vals.iter().any(|&v| v < llod) {
                return Err(Error::InvalidSample(format!(
                    "{name} detected values must be >= llod = {llod}"
                )));
            }
        }
        if healthy_detected.len() + healthy_below == 0 {
            return Err(Error::InvalidSample("healthy group is empty".to_string()));
        }
        if diseased_detected.len() + diseased_below == 0 {
            return Err(Error::InvalidSample("diseased group is empty".to_string()));
        }
        healthy_detected.sort_by(f64::total_cmp);
        diseased_detected.sort_by(f64::total_cmp);
        Ok(Self {
            healthy_detected,
            diseased_detected,
            healthy_below,
            diseased_below,
            llod,
        })
    }

    /// Split raw observations by the LLOD: values `< llod` become
    /// below-LLOD counts, values `>= llod` are detected.
    pub fn from_raw(healthy: &[f64], diseased: &[f64], llod: f64) -> Result<Self> {
        let split = |vals: &[f64]| {
            let mut detected = Vec::with_capacity(vals.len());
            let mut below = 0usize;
            for &v in vals {
                if v < llod {
                    below += 1;
                } else {
                    detected.push(v);
                }
            }
            (detected, below)
        };
        let (hd, hb) = split(healthy);
        let (dd, db) = split(diseased);
        Self::new(hd, dd, hb, db, llod)
    }

    pub fn healthy_detected(&self) -> &[f64] {
        &self.healthy_detected
    }

    pub fn diseased_detected(&self) -> &[f64] {
        &self.diseased_detected
    }

    pub fn healthy_below(&self) -> usize {
        self.healthy_below
    }

    pub fn diseased_below(&self) -> usize {
        self.diseased_below
    }

    /// Detection limit r (may be -inf).
    pub fn llod(&self) -> f64 {
        self.llod
    }

    /// Detected count in the healthy group.
    pub fn m0(&self) -> usize {
        self.healthy_detected.len()
    }

    /// Detected count in the diseased group.
    pub fn m1(&self) -> usize {
        self.diseased_detected.len()
    }

    /// Total detected count.
    pub fn m(&self) -> usize {
        self.m0() + self.m1()
    }

    pub fn n0(&self) -> usize {
        self.m0() + self.healthy_below
    }

    pub fn n1(&self) -> usize {
        self.m1() + self.diseased_below
    }

    pub fn n(&self) -> usize {
        self.n0() + self.n1()
    }

    /// Sample-size ratio n1/n0.
    pub fn rho(&self) -> f64 {
        self.n1() as f64 / self.n0() as f64
    }

    /// Detected fractions (m0/n0, m1/n1) — the MELEs of the detection
    /// probabilities.
    pub fn zeta_hats(&self) -> (f64, f64) {
        (
            self.m0() as f64 / self.n0() as f64,
            self.m1() as f64 / self.n1() as f64,
        )
    }

    /// Pooled detected points with group labels, sorted ascending
    /// (ties: healthy before diseased, then input order).
    pub fn pooled_sorted(&self) -> Vec<(f64, Group)> {
        let mut pooled: Vec<(f64, Group)> = self
            .healthy_detected
            .iter()
            .map(|&v| (v, Group::Healthy))
            .chain(self.diseased_detected.iter().map(|&v| (v, Group::Diseased)))
            .collect();
        pooled.sort_by(|a, b| f64::total_cmp(&a.0, &b.0));
        pooled
    }
}
