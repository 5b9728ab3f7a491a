//! Estimation report structures and serialization.

use serde::{Deserialize, Serialize};
use youden_drm::{ConfidenceInterval, Diagnostic, RootStatus};

/// Per-method results for one biomarker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub j_hat: f64,
    pub c_hat: f64,
    pub ci_j: Option<ConfidenceInterval>,
    pub ci_c: Option<ConfidenceInterval>,
    /// How the DRM cutoff was located; absent for the ECDF method.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub root_status: Option<RootStatus>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub converged: Option<bool>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiomarkerReport {
    /// Absent for single-marker datasets.
    pub biomarker: Option<String>,
    pub n0: usize,
    pub n1: usize,
    pub m0: usize,
    pub m1: usize,
    pub methods: Vec<MethodReport>,
}

/// The full `estimate` output. Serializes losslessly to JSON;
/// `llod: null` means no detection limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub input: String,
    pub basis: String,
    pub llod: Option<f64>,
    pub level: f64,
    pub seed: u64,
    pub bootstrap_b: usize,
    pub biomarkers: Vec<BiomarkerReport>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl EstimateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Flat CSV rendering: one row per (biomarker, method).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "biomarker,method,j_hat,j_lower,j_upper,c_hat,c_lower,c_upper,root_status,converged,diagnostics\n",
        );
        for b in &self.biomarkers {
            for m in &b.methods {
                let status = m
                    .root_status
                    .map(|s| {
                        serde_json::to_value(s)
                            .ok()
                            .and_then(|v| v.as_str().map(str::to_string))
                            .unwrap_or_default()
                    })
                    .unwrap_or_default();
                let diags = m
                    .diagnostics
                    .iter()
                    .map(|d| d.message.replace(',', ";"))
                    .collect::<Vec<_>>()
                    .join(" | ");
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},\"{}\"\n",
                    b.biomarker.as_deref().unwrap_or(""),
                    m.method,
                    m.j_hat,
                    fmt_opt(m.ci_j.map(|ci| ci.lower)),
                    fmt_opt(m.ci_j.map(|ci| ci.upper)),
                    m.c_hat,
                    fmt_opt(m.ci_c.map(|ci| ci.lower)),
                    fmt_opt(m.ci_c.map(|ci| ci.upper)),
                    status,
                    m.converged.map(|c| c.to_string()).unwrap_or_default(),
                    diags,
                ));
            }
        }
        out
    }
}
