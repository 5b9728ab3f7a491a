//! The `estimate` and `simulate` pipelines behind the CLI surface.

use std::fs;
use std::path::{Path, PathBuf};

use youden_drm::comparators::{bootstrap_percentile_ci, ecdf_youden};
use youden_drm::sim::{Method, ScenarioConfig, SimMetrics};
use youden_drm::{
    ci_cutoff, ci_youden, fit_drm, youden, BasisSpec, BiomarkerSample, Error, FitOptions,
};

use crate::dataset::{parse_dataset, NamedSample};
use crate::report::{BiomarkerReport, EstimateReport, MethodReport};

/// CLI failure carrying the process exit code: 2 for data/config
/// problems, 3 for estimation failures.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub exit_code: i32,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

fn data_err(message: impl Into<String>) -> CliError {
    CliError {
        message: message.into(),
        exit_code: 2,
    }
}

fn estimation_err(message: impl Into<String>) -> CliError {
    CliError {
        message: message.into(),
        exit_code: 3,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. }
            | Error::EmptyGroup(_)
            | Error::Config(_)
            | Error::InvalidSample(_)
            | Error::InvalidLevel(_) => 2,
            _ => 3,
        };
        CliError {
            message: e.to_string(),
            exit_code: code,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EstimateArgs {
    pub input: PathBuf,
    pub basis: String,
    pub llod: f64,
    pub level: f64,
    pub methods: Vec<Method>,
    pub bootstrap_b: usize,
    pub seed: u64,
}

fn drm_report(
    sample: &BiomarkerSample,
    basis: &BasisSpec,
    level: f64,
    label: &str,
) -> Result<MethodReport, CliError> {
    let fit = fit_drm(sample, basis, &FitOptions::default())
        .map_err(|e| estimation_err(format!("{label}: {e}")))?;
    let est = youden::estimate(&fit).map_err(|e| estimation_err(format!("{label}: {e}")))?;
    let n = sample.n();
    let ci_j = est
        .sigma2_j
        .and_then(|s2| ci_youden(est.j_hat, s2, n, level).ok());
    let ci_c = est
        .sigma2_c
        .and_then(|s2| ci_cutoff(est.c_hat, s2, n, level).ok());
    let mut diagnostics = fit.diagnostics.clone();
    diagnostics.extend(est.diagnostics.clone());
    Ok(MethodReport {
        method: "drm".to_string(),
        j_hat: est.j_hat,
        c_hat: est.c_hat,
        ci_j,
        ci_c,
        root_status: Some(est.root_status),
        converged: Some(fit.converged),
        diagnostics,
    })
}

fn ecdf_report(
    sample: &BiomarkerSample,
    level: f64,
    bootstrap_b: usize,
    seed: u64,
    label: &str,
) -> Result<MethodReport, CliError> {
    let est = ecdf_youden(sample).map_err(|e| estimation_err(format!("{label}: {e}")))?;
    let (mut ci_j, mut ci_c) = (None, None);
    let mut diagnostics = Vec::new();
    if bootstrap_b >= 100 {
        match bootstrap_percentile_ci(
            |s| ecdf_youden(s).map(|e| e.j_e),
            sample,
            bootstrap_b,
            level,
            seed,
        ) {
            Ok(b) => {
                diagnostics.extend(b.diagnostics.clone());
                ci_j = Some(b.interval);
            }
            Err(e) => return Err(estimation_err(format!("{label}: {e}"))),
        }
        match bootstrap_percentile_ci(
            |s| ecdf_youden(s).map(|e| e.c_e),
            sample,
            bootstrap_b,
            level,
            seed.wrapping_add(1),
        ) {
            Ok(b) => {
                diagnostics.extend(b.diagnostics.clone());
                ci_c = Some(b.interval);
            }
            Err(e) => return Err(estimation_err(format!("{label}: {e}"))),
        }
    }
    Ok(MethodReport {
        method: "ecdf".to_string(),
        j_hat: est.j_e,
        c_hat: est.c_e,
        ci_j,
        ci_c,
        root_status: None,
        converged: None,
        diagnostics,
    })
}

/// Parse the dataset and estimate (J, c) per biomarker and method.
pub fn run_estimate(args: &EstimateArgs) -> Result<EstimateReport, CliError> {
    if !args.input.exists() {
        return Err(data_err(format!(
            "input file not found: {}",
            args.input.display()
        )));
    }
    let basis = BasisSpec::from_name(&args.basis)?;
    let samples: Vec<NamedSample> = parse_dataset(&args.input, args.llod)?;
    let mut biomarkers = Vec::with_capacity(samples.len());
    for named in &samples {
        let label = named.name.clone().unwrap_or_else(|| "value".to_string());
        let s = &named.sample;
        let mut methods = Vec::new();
        for method in &args.methods {
            match method {
                Method::Drm => methods.push(drm_report(s, &basis, args.level, &label)?),
                Method::Ecdf => methods.push(ecdf_report(
                    s,
                    args.level,
                    args.bootstrap_b,
                    args.seed,
                    &label,
                )?),
            }
        }
        biomarkers.push(BiomarkerReport {
            biomarker: named.name.clone(),
            n0: s.n0(),
            n1: s.n1(),
            m0: s.m0(),
            m1: s.m1(),
            methods,
        });
    }
    Ok(EstimateReport {
        input: args.input.display().to_string(),
        basis: args.basis.clone(),
        llod: (args.llod != f64::NEG_INFINITY).then_some(args.llod),
        level: args.level,
        seed: args.seed,
        bootstrap_b: args.bootstrap_b,
        biomarkers,
    })
}

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub scenario: String,
    pub workers: Option<usize>,
    pub out: PathBuf,
}

/// Scenario source: a JSON config path, or a builtin name like
/// `gamma_J0.4_200_200_nollod`.
pub fn load_scenario(spec: &str) -> Result<ScenarioConfig, CliError> {
    let path = Path::new(spec);
    if path.exists() {
        let text = fs::read_to_string(path)
            .map_err(|e| data_err(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| data_err(format!("invalid scenario config {}: {e}", path.display())))
    } else {
        ScenarioConfig::builtin(spec).map_err(CliError::from)
    }
}

/// Metric rows as CSV: one row per (method, quantity, metric).
pub fn metrics_to_csv(metrics: &SimMetrics) -> String {
    let mut out = String::from("method,quantity,metric,value\n");
    for row in &metrics.rows {
        let mut push = |metric: &str, value: f64| {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.method.name(),
                row.quantity_name(),
                metric,
                value
            ));
        };
        push("rb_percent", row.rb_percent);
        push("mse", row.mse);
        if let Some(cp) = row.cp_percent {
            push("cp_percent", cp);
        }
        if let Some(al) = row.al {
            push("al", al);
        }
    }
    out
}

/// Run a scenario and write `metrics.csv` plus `summary.json` into the
/// output directory. Both files are byte-identical across runs and
/// worker counts for a fixed seed.
pub fn run_simulate(args: &SimulateArgs) -> Result<SimMetrics, CliError> {
    let config = load_scenario(&args.scenario)?;
    let scenario = config.build()?;
    let metrics = scenario.run(args.workers)?;
    fs::create_dir_all(&args.out)
        .map_err(|e| data_err(format!("cannot create {}: {e}", args.out.display())))?;
    let csv_path = args.out.join("metrics.csv");
    fs::write(&csv_path, metrics_to_csv(&metrics))
        .map_err(|e| data_err(format!("cannot write {}: {e}", csv_path.display())))?;
    let summary = serde_json::json!({
        "scenario": config,
        "resolved": {
            "param": scenario.param,
            "true_j": scenario.true_j,
            "true_c": scenario.true_c,
            "llod": format_llod(scenario.resolve_llod()),
            "basis": scenario.basis.name(),
        },
        "metrics": metrics,
    });
    let json_path = args.out.join("summary.json");
    fs::write(
        &json_path,
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )
    .map_err(|e| data_err(format!("cannot write {}: {e}", json_path.display())))?;
    Ok(metrics)
}

fn format_llod(r: f64) -> serde_json::Value {
    if r == f64::NEG_INFINITY {
        serde_json::Value::Null
    } else {
        serde_json::json!(r)
    }
}
