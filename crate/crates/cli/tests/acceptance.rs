//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible under `--nocapture`). Statistical criteria
//! run fixed-seed Monte Carlo and compare against published targets at
//! stated tolerances.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use youden_drm::rng::SubRng;
use youden_drm::sim::{Family, LlodField, Method, Quantity, ScenarioConfig, SimMetrics};
use youden_drm::{
    dual_hessian, dual_loglik, dual_score, fit_drm, youden, BasisSpec, BiomarkerSample, FitOptions,
};

fn check(name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {name}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{name}: {detail}");
}

fn check_time(name: &str, elapsed: Duration, budget_s: u64) {
    let ok = elapsed <= Duration::from_secs(budget_s);
    check(
        &format!("{name} runtime"),
        ok,
        &format!("{:.2}s of {budget_s}s budget", elapsed.as_secs_f64()),
    );
}

/// Random positive two-group fixtures spanning sizes, bases, and LLODs.
fn random_fixture(k: u64) -> (BiomarkerSample, BasisSpec) {
    let mut rng = SubRng::substream(0xACCE97, k, 0);
    let n0 = 10 + rng.next_index(191);
    let n1 = 10 + rng.next_index(191);
    let mu1 = 2.6 + 0.6 * rng.next_f64();
    let healthy: Vec<f64> = (0..n0).map(|_| rng.lognormal(2.5, 0.3)).collect();
    let diseased: Vec<f64> = (0..n1).map(|_| rng.lognormal(mu1, 0.5)).collect();
    let llod = if k.is_multiple_of(2) {
        f64::NEG_INFINITY
    } else {
        let mut pooled: Vec<f64> = healthy.iter().chain(&diseased).copied().collect();
        pooled.sort_by(f64::total_cmp);
        pooled[pooled.len() * 15 / 100]
    };
    let basis = match k % 3 {
        0 => BasisSpec::linear(),
        1 => BasisSpec::log_quadratic(),
        _ => BasisSpec::x_log_x(),
    };
    (
        BiomarkerSample::from_raw(&healthy, &diseased, llod).unwrap(),
        basis,
    )
}

/// Criterion 1: score identities on 200 random fixtures.
#[test]
fn criterion_01_score_identities() {
    let start = Instant::now();
    let mut converged = 0usize;
    let mut worst: f64 = 0.0;
    for k in 0..200u64 {
        let (sample, basis) = random_fixture(k);
        if sample.m0() < basis.dim() || sample.m1() < basis.dim() {
            continue;
        }
        let Ok(fit) = fit_drm(&sample, &basis, &FitOptions::default()) else {
            continue;
        };
        if !fit.converged {
            continue;
        }
        converged += 1;
        let sum_w: f64 = fit.weights().iter().sum();
        let sum_w_omega: f64 = fit.tilted_weights().iter().sum();
        worst = worst
            .max((sum_w - fit.zeta0_hat).abs())
            .max((sum_w_omega - fit.zeta1_hat).abs());
    }
    check(
        "criterion 01 (score identities)",
        converged >= 150 && worst <= 1e-8,
        &format!("{converged}/200 converged fits, worst identity residual {worst:.2e}"),
    );
    check_time("criterion 01", start.elapsed(), 10);
}

/// Criterion 2: analytic gradient and Hessian vs central differences.
#[test]
fn criterion_02_gradient_hessian_checks() {
    let start = Instant::now();
    let mut worst_grad: f64 = 0.0;
    let mut worst_hess: f64 = 0.0;
    for k in 0..50u64 {
        let (sample, basis) = random_fixture(1000 + k);
        let mut rng = SubRng::substream(0xFD, k, 1);
        let theta: Vec<f64> = (0..basis.dim())
            .map(|_| rng.next_f64() * 2.0 - 1.0)
            .collect();
        let h = 1e-5;
        let g = dual_score(&theta, &sample, &basis).unwrap();
        let hess = dual_hessian(&theta, &sample, &basis).unwrap();
        for j in 0..basis.dim() {
            let mut up = theta.clone();
            up[j] += h;
            let mut dn = theta.clone();
            dn[j] -= h;
            let fd = (dual_loglik(&up, &sample, &basis).unwrap()
                - dual_loglik(&dn, &sample, &basis).unwrap())
                / (2.0 * h);
            worst_grad = worst_grad.max((fd - g[j]).abs() / g[j].abs().max(1.0));
            let gu = dual_score(&up, &sample, &basis).unwrap();
            let gd = dual_score(&dn, &sample, &basis).unwrap();
            for l in 0..basis.dim() {
                let fd2 = (gu[l] - gd[l]) / (2.0 * h);
                worst_hess =
                    worst_hess.max((fd2 - hess[(j, l)]).abs() / hess[(j, l)].abs().max(1.0));
            }
        }
    }
    check(
        "criterion 02 (gradient/Hessian finite differences)",
        worst_grad <= 1e-5 && worst_hess <= 1e-4,
        &format!("worst relative error: gradient {worst_grad:.2e}, Hessian {worst_hess:.2e}"),
    );
    check_time("criterion 02", start.elapsed(), 5);
}

/// Coarse-to-fine grid maximization of the dual likelihood over
/// [-5, 5]^2; independent of the Newton solver.
fn grid_search(sample: &BiomarkerSample, basis: &BasisSpec) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let (mut c0, mut c1, mut half, mut step) = (0.0f64, 0.0f64, 5.0f64, 0.05f64);
    while step > 2e-5 {
        let steps = (2.0 * half / step).round() as i64;
        for i in 0..=steps {
            let a = c0 - half + i as f64 * step;
            for j in 0..=steps {
                let b = c1 - half + j as f64 * step;
                let ll = dual_loglik(&[a, b], sample, basis).unwrap();
                if ll > best.0 {
                    best = (ll, a, b);
                }
            }
        }
        c0 = best.1;
        c1 = best.2;
        half = 2.0 * step;
        step /= 10.0;
    }
    (best.1, best.2)
}

/// Criterion 3: Newton solution matches brute-force grid search.
#[test]
fn criterion_03_grid_search_oracle() {
    let start = Instant::now();
    let basis = BasisSpec::linear();
    let mut tested = 0usize;
    let mut worst: f64 = 0.0;
    let mut k = 0u64;
    while tested < 10 && k < 100 {
        k += 1;
        let mut rng = SubRng::substream(0x6121D, k, 0);
        let m0 = 3 + rng.next_index(3);
        let m1 = 3 + rng.next_index(3);
        let healthy: Vec<f64> = (0..m0).map(|_| 0.3 + 2.0 * rng.next_f64()).collect();
        let diseased: Vec<f64> = (0..m1).map(|_| 0.8 + 2.0 * rng.next_f64()).collect();
        let sample = BiomarkerSample::from_raw(&healthy, &diseased, f64::NEG_INFINITY).unwrap();
        let Ok(fit) = fit_drm(&sample, &basis, &FitOptions::default()) else {
            continue;
        };
        if !fit.converged || fit.theta_hat.iter().any(|t| t.abs() > 4.5) {
            continue;
        }
        let (a, b) = grid_search(&sample, &basis);
        worst = worst
            .max((fit.theta_hat[0] - a).abs())
            .max((fit.theta_hat[1] - b).abs());
        tested += 1;
    }
    check(
        "criterion 03 (grid-search oracle)",
        tested == 10 && worst <= 1e-3,
        &format!("{tested} fixtures, worst |theta - grid| = {worst:.2e}"),
    );
    check_time("criterion 03", start.elapsed(), 30);
}

fn gamma_200_metrics() -> &'static SimMetrics {
    static METRICS: OnceLock<SimMetrics> = OnceLock::new();
    METRICS.get_or_init(|| {
        // single worker: the runtime budget is stated single-threaded
        ScenarioConfig {
            target_j: Some(0.4),
            n0: 200,
            n1: 200,
            reps: 1000,
            bootstrap_b: 0,
            methods: vec![Method::Drm],
            ..ScenarioConfig::new(Family::Gamma)
        }
        .build()
        .unwrap()
        .run(Some(1))
        .unwrap()
    })
}

/// Criterion 4: published point-estimation metrics, gamma J0 = 0.4,
/// (200, 200), no LLOD.
#[test]
fn criterion_04_point_metrics_reproduction() {
    let start = Instant::now();
    let m = gamma_200_metrics();
    let j = m.row(Method::Drm, Quantity::J).unwrap();
    let c = m.row(Method::Drm, Quantity::C).unwrap();
    check(
        "criterion 04 (J RB)",
        (j.rb_percent - 0.41).abs() <= 1.0,
        &format!("RB = {:.3}% vs 0.41 +- 1.0", j.rb_percent),
    );
    check(
        "criterion 04 (J MSE)",
        (j.mse - 0.13e-2).abs() <= 0.30 * 0.13e-2,
        &format!("MSE = {:.4e} vs 1.3e-3 +- 30%", j.mse),
    );
    check(
        "criterion 04 (c RB)",
        c.rb_percent.abs() <= 1.0,
        &format!("RB = {:.3}% vs 0.00 +- 1.0", c.rb_percent),
    );
    check(
        "criterion 04 (c MSE)",
        (c.mse - 4.27e-2).abs() <= 0.30 * 4.27e-2,
        &format!("MSE = {:.4e} vs 4.27e-2 +- 30%", c.mse),
    );
    check_time("criterion 04", start.elapsed(), 120);
}

/// Criterion 5: published interval metrics on the same scenario.
#[test]
fn criterion_05_interval_metrics_reproduction() {
    let start = Instant::now();
    let m = gamma_200_metrics();
    let j = m.row(Method::Drm, Quantity::J).unwrap();
    let c = m.row(Method::Drm, Quantity::C).unwrap();
    let (cp_j, al_j) = (j.cp_percent.unwrap(), j.al.unwrap());
    let (cp_c, al_c) = (c.cp_percent.unwrap(), c.al.unwrap());
    check(
        "criterion 05 (J CP)",
        (cp_j - 96.0).abs() <= 2.0,
        &format!("CP = {cp_j:.1}% vs 96.0 +- 2.0 ({} intervals)", j.ci_count),
    );
    check(
        "criterion 05 (J AL)",
        (al_j - 0.14).abs() <= 0.01,
        &format!("AL = {al_j:.4} vs 0.14 +- 0.01"),
    );
    check(
        "criterion 05 (c CP)",
        (cp_c - 95.6).abs() <= 2.0,
        &format!("CP = {cp_c:.1}% vs 95.6 +- 2.0"),
    );
    check(
        "criterion 05 (c AL)",
        (al_c - 0.82).abs() <= 0.05,
        &format!("AL = {al_c:.4} vs 0.82 +- 0.05"),
    );
    check_time("criterion 05", start.elapsed(), 120);
}

/// Criterion 6: LLOD tables, gamma q15 = 1.37, (100, 100), J0 = 0.4.
#[test]
fn criterion_06_llod_metrics_reproduction() {
    let start = Instant::now();
    let metrics = ScenarioConfig {
        target_j: Some(0.4),
        n0: 100,
        n1: 100,
        llod: LlodField::Name("q15".to_string()),
        reps: 1000,
        bootstrap_b: 0,
        methods: vec![Method::Drm],
        ..ScenarioConfig::new(Family::Gamma)
    }
    .build()
    .unwrap()
    .run(None)
    .unwrap();
    let j = metrics.row(Method::Drm, Quantity::J).unwrap();
    let c = metrics.row(Method::Drm, Quantity::C).unwrap();
    check(
        "criterion 06 (J RB under LLOD)",
        (j.rb_percent - 1.10).abs() <= 1.0,
        &format!("RB = {:.3}% vs 1.10 +- 1.0", j.rb_percent),
    );
    check(
        "criterion 06 (c MSE under LLOD)",
        (c.mse - 11.48e-2).abs() <= 0.30 * 11.48e-2,
        &format!("MSE = {:.4e} vs 1.148e-1 +- 30%", c.mse),
    );
    check_time("criterion 06", start.elapsed(), 120);
}

/// Criterion 7: lognormal setting with the log-quadratic basis.
#[test]
fn criterion_07_lognormal_reproduction() {
    let start = Instant::now();
    let metrics = ScenarioConfig {
        target_j: Some(0.6),
        n0: 200,
        n1: 200,
        reps: 1000,
        bootstrap_b: 0,
        methods: vec![Method::Drm],
        ..ScenarioConfig::new(Family::Lognormal)
    }
    .build()
    .unwrap()
    .run(None)
    .unwrap();
    let j = metrics.row(Method::Drm, Quantity::J).unwrap();
    let c = metrics.row(Method::Drm, Quantity::C).unwrap();
    check(
        "criterion 07 (lognormal J RB)",
        (j.rb_percent - 0.20).abs() <= 1.0,
        &format!("RB = {:.3}% vs 0.20 +- 1.0", j.rb_percent),
    );
    let cp_c = c.cp_percent.unwrap();
    check(
        "criterion 07 (lognormal c CP)",
        (cp_c - 95.2).abs() <= 2.0,
        &format!("CP = {cp_c:.1}% vs 95.2 +- 2.0"),
    );
    check_time("criterion 07", start.elapsed(), 180);
}

/// Criterion 8: the ECDF comparator's published bias signature.
#[test]
fn criterion_08_ecdf_bias_signature() {
    let start = Instant::now();
    let metrics = ScenarioConfig {
        target_j: Some(0.2),
        n0: 50,
        n1: 50,
        reps: 1000,
        bootstrap_b: 0,
        methods: vec![Method::Ecdf],
        ..ScenarioConfig::new(Family::Gamma)
    }
    .build()
    .unwrap()
    .run(None)
    .unwrap();
    let j = metrics.row(Method::Ecdf, Quantity::J).unwrap();
    check(
        "criterion 08 (ECDF J RB)",
        (j.rb_percent - 40.2).abs() <= 3.0,
        &format!("RB = {:.2}% vs 40.2 +- 3.0", j.rb_percent),
    );
    check_time("criterion 08", start.elapsed(), 120);
}

/// Criterion 9: DMD worked example (requires the public fixture).
#[test]
fn criterion_09_dmd_integration() {
    let path = std::env::var("DMD_CSV")
        .unwrap_or_else(|_| format!("{}/../../data/dmd.csv", env!("CARGO_MANIFEST_DIR")));
    if !std::path::Path::new(&path).exists() {
        println!(
            "ACCEPTANCE criterion 09 (DMD): SKIPPED — fixture not found at {path}; \
             place the DMD biomarker CSV there (columns biomarker,group,value) or set DMD_CSV"
        );
        return;
    }
    let samples =
        youden_drm_cli::dataset::parse_dataset(std::path::Path::new(&path), f64::NEG_INFINITY)
            .expect("DMD fixture parses");
    let ck = samples
        .iter()
        .find(|s| s.name.as_deref().map(str::to_ascii_lowercase).as_deref() == Some("ck"))
        .expect("CK biomarker present");
    assert_eq!((ck.sample.n0(), ck.sample.n1()), (127, 67));
    let fit = fit_drm(&ck.sample, &BasisSpec::linear(), &FitOptions::default()).unwrap();
    let est = youden::estimate(&fit).unwrap();
    let n = ck.sample.n();
    let ci_j = youden_drm::ci_youden(est.j_hat, est.sigma2_j.unwrap(), n, 0.95).unwrap();
    let ci_c = youden_drm::ci_cutoff(est.c_hat, est.sigma2_c.unwrap(), n, 0.95).unwrap();
    check(
        "criterion 09 (DMD CK J)",
        (est.j_hat - 0.59).abs() <= 0.01
            && (ci_j.lower - 0.48).abs() <= 0.01
            && (ci_j.upper - 0.69).abs() <= 0.01,
        &format!(
            "J = {:.3} ({:.3}, {:.3})",
            est.j_hat, ci_j.lower, ci_j.upper
        ),
    );
    check(
        "criterion 09 (DMD CK c)",
        (est.c_hat - 61.13).abs() <= 0.05
            && (ci_c.lower - 54.59).abs() <= 0.05
            && (ci_c.upper - 67.68).abs() <= 0.05,
        &format!(
            "c = {:.3} ({:.3}, {:.3})",
            est.c_hat, ci_c.lower, ci_c.upper
        ),
    );

    // Worked-example values for biomarker H under the same basis.
    if let Some(h) = samples
        .iter()
        .find(|s| s.name.as_deref().map(str::to_ascii_lowercase).as_deref() == Some("h"))
    {
        let fit = fit_drm(&h.sample, &BasisSpec::linear(), &FitOptions::default()).unwrap();
        let est = youden::estimate(&fit).unwrap();
        check(
            "criterion 09 (DMD H point estimates)",
            (est.j_hat - 0.36).abs() <= 0.01 && (est.c_hat - 87.74).abs() <= 0.05,
            &format!("J = {:.3}, c = {:.3}", est.j_hat, est.c_hat),
        );
    }
}

/// Criterion 10: consistency at scale plus the variance plug-in.
#[test]
fn criterion_10_consistency_at_scale() {
    let start = Instant::now();
    let sc = ScenarioConfig {
        target_j: Some(0.6),
        n0: 20_000,
        n1: 20_000,
        reps: 50,
        bootstrap_b: 0,
        methods: vec![Method::Drm],
        ..ScenarioConfig::new(Family::Gamma)
    }
    .build()
    .unwrap();
    let n = (sc.n0 + sc.n1) as f64;
    let mut abs_c = 0.0f64;
    let mut abs_j = 0.0f64;
    let mut scaled: Vec<f64> = Vec::with_capacity(sc.reps);
    let mut mean_var = 0.0f64;
    for rep in 0..sc.reps as u64 {
        let sample = sc.generate(rep);
        let fit = fit_drm(&sample, &sc.basis, &FitOptions::default()).unwrap();
        let est = youden::estimate(&fit).unwrap();
        abs_c += (est.c_hat - 7.02).abs();
        abs_j += (est.j_hat - 0.6).abs();
        scaled.push(n.sqrt() * (est.c_hat - sc.true_c));
        mean_var += est.sigma2_c.expect("variance defined at scale");
    }
    let reps = sc.reps as f64;
    abs_c /= reps;
    abs_j /= reps;
    mean_var /= reps;
    let mean = scaled.iter().sum::<f64>() / reps;
    let mc_var = scaled.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (reps - 1.0);
    check(
        "criterion 10 (cutoff consistency)",
        abs_c < 0.05,
        &format!("mean |c_hat - 7.02| = {abs_c:.4}"),
    );
    check(
        "criterion 10 (index consistency)",
        abs_j < 0.01,
        &format!("mean |J_hat - 0.6| = {abs_j:.5}"),
    );
    check(
        "criterion 10 (variance plug-in)",
        (mc_var / mean_var - 1.0).abs() <= 0.15,
        &format!(
            "MC var {mc_var:.3} vs mean plug-in {mean_var:.3} (ratio {:.3})",
            mc_var / mean_var
        ),
    );
    check_time("criterion 10", start.elapsed(), 180);
}

/// Criterion 11: simulate output is bit-identical across runs and
/// worker counts.
#[test]
fn criterion_11_simulate_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("scenario.json");
    std::fs::write(
        &config,
        r#"{"family":"gamma","target_J":0.4,"n0":40,"n1":40,"llod":"q15","reps":60,"seed":11,"bootstrap_B":100,"methods":["drm","ecdf"]}"#,
    )
    .unwrap();
    let run = |out: &std::path::Path, workers: &str| {
        let st = std::process::Command::new(env!("CARGO_BIN_EXE_youden-drm"))
            .args([
                "simulate",
                "--scenario",
                config.to_str().unwrap(),
                "--workers",
                workers,
                "--out",
                out.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(
            st.status.success(),
            "{}",
            String::from_utf8_lossy(&st.stderr)
        );
        (
            std::fs::read(out.join("metrics.csv")).unwrap(),
            std::fs::read(out.join("summary.json")).unwrap(),
        )
    };
    let a = run(&dir.path().join("w1a"), "1");
    let b = run(&dir.path().join("w1b"), "1");
    let c = run(&dir.path().join("w8"), "8");
    check(
        "criterion 11 (rerun determinism)",
        a == b,
        "two single-worker runs give identical bytes",
    );
    check(
        "criterion 11 (worker-count invariance)",
        a == c,
        "1 worker vs 8 workers give identical bytes",
    );
}
