use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use spdmeans::means::geometric_mean2;
use spdmeans::spd::SpdMatrix;
use tempfile::TempDir;

fn spdmeans(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spdmeans")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn matrix_entries(v: &Value) -> Vec<f64> {
    v["data"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

const COMMUTING_PAIR: &str = r#"{"weights": [0.5, 0.5], "matrices": [
    {"n": 2, "field": "real", "data": [1, 0, 0, 4]},
    {"n": 2, "field": "real", "data": [9, 0, 0, 1]}]}"#;

const GENERAL_PAIR: &str = r#"{"weights": [0.5, 0.5], "matrices": [
    {"n": 2, "field": "real", "data": [[2, 1], [1, 3]]},
    {"n": 2, "field": "real", "data": [[1, -0.5], [-0.5, 4]]}]}"#;

#[test]
fn verify_theorem1_passes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let run =
        spdmeans(&["verify", "--suite", "theorem1", "--trials", "50", "--n", "3", "--m", "3", "--seed", "42", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let report = json_file(&out);
    assert_eq!(report["suite"], "theorem1");
    assert_eq!(report["trials"], 50);
    assert_eq!(report["seed"], 42);
    assert_eq!(report["asserted_violations"], 0);
    for r in report["results"].as_array().unwrap() {
        assert_eq!(r["status_counts"]["violated"], 0, "{}", r["check_id"]);
    }
}

#[test]
fn unknown_suite_is_usage_error() {
    let run = spdmeans(&["verify", "--suite", "nosuch", "--seed", "1"]);
    assert_eq!(code(&run), 1);
    assert!(String::from_utf8_lossy(&run.stderr).contains("nosuch"));
}

#[test]
fn missing_seed_is_usage_error() {
    assert_eq!(code(&spdmeans(&["verify", "--suite", "theorem1", "--trials", "2"])), 1);
    assert_eq!(code(&spdmeans(&["search", "--target", "g-leq-omega", "--trials", "2"])), 1);
}

#[test]
fn reports_identical_across_runs_and_thread_counts() {
    let dir = TempDir::new().unwrap();
    let mut reports = Vec::new();
    for (i, threads) in ["1", "4"].into_iter().enumerate() {
        let out = dir.path().join(format!("r{i}.json"));
        let run =
            spdmeans(&["verify", "--suite", "all", "--trials", "20", "--seed", "42", "--threads", threads, "-o", out.to_str().unwrap()]);
        assert!(matches!(code(&run), 0 | 3), "{}", String::from_utf8_lossy(&run.stderr));
        let mut report = json_file(&out);
        report.as_object_mut().unwrap().remove("wall_clock_seconds");
        reports.push(report);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn csv_export_has_one_row_per_trial_and_check() {
    let run = spdmeans(&["verify", "--suite", "theorem2", "--trials", "3", "--seed", "5", "--format", "csv"]);
    assert_eq!(code(&run), 0);
    let text = String::from_utf8(run.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("trial,check_id,status,margin,instance_digest"));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    assert_eq!(rows.len() % 3, 0);
    assert!(rows.iter().all(|r| r.split(',').count() == 5));
}

#[test]
fn report_summarizes_a_verify_run() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let run = spdmeans(&["verify", "--suite", "proposition5", "--trials", "5", "--seed", "3", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&run), 0);
    let summary = spdmeans(&["report", out.to_str().unwrap()]);
    assert_eq!(code(&summary), 0);
    let text = String::from_utf8(summary.stdout).unwrap();
    assert!(text.contains("prop5_i"));
    assert!(text.contains("asserted violations: 0"));
}

#[test]
fn compute_wasserstein_commuting_closed_form() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "pair.json", COMMUTING_PAIR);
    let run = spdmeans(&["compute", "--mean", "wasserstein", input.to_str().unwrap()]);
    assert_eq!(code(&run), 0);
    let v: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(v["converged"], true);
    // ((√1 + √9)/2)², ((√4 + √1)/2)²
    let expected = [4.0, 0.0, 0.0, 2.25];
    for (x, e) in matrix_entries(&v["value"]).iter().zip(expected) {
        assert!((x - e).abs() <= 1e-10 * 4.0, "{x} vs {e}");
    }
}

#[test]
fn compute_cartan_pair_matches_geodesic_midpoint() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "pair.json", GENERAL_PAIR);
    let run = spdmeans(&["compute", "--mean", "cartan", input.to_str().unwrap()]);
    assert_eq!(code(&run), 0);
    let v: Value = serde_json::from_slice(&run.stdout).unwrap();
    let a = SpdMatrix::from_real_rows(2, &[2.0, 1.0, 1.0, 3.0]).unwrap();
    let b = SpdMatrix::from_real_rows(2, &[1.0, -0.5, -0.5, 4.0]).unwrap();
    let g = geometric_mean2(&a, &b).unwrap();
    let scale = g.frobenius_norm();
    for (i, x) in matrix_entries(&v["value"]).iter().enumerate() {
        let e = g.matrix()[(i / 2, i % 2)].re;
        assert!((x - e).abs() <= 1e-8 * scale, "{x} vs {e}");
    }
}

#[test]
fn compute_closed_form_and_parameter() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "pair.json", COMMUTING_PAIR);
    let run = spdmeans(&["compute", "--mean", "power", "--param", "0.5", input.to_str().unwrap()]);
    assert_eq!(code(&run), 0);
    let v: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(v["mean"]["kind"], "power");
    assert!(v.get("iterations").is_none());
    assert_eq!(code(&spdmeans(&["compute", "--mean", "power", input.to_str().unwrap()])), 1);
    assert_eq!(code(&spdmeans(&["compute", "--mean", "median", input.to_str().unwrap()])), 1);
}

#[test]
fn compute_reports_non_convergence() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "pair.json", GENERAL_PAIR);
    let out = dir.path().join("out.json");
    let run = spdmeans(&["compute", "--mean", "wasserstein", "--max-iter", "1", input.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(code(&run), 2);
    assert_eq!(json_file(&out)["converged"], false);
}

#[test]
fn compute_truncated_input_exits_one() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "cut.json", &COMMUTING_PAIR[..60]);
    let run = spdmeans(&["compute", "--mean", "cartan", input.to_str().unwrap()]);
    assert_eq!(code(&run), 1);
    assert!(!run.stderr.is_empty());
    assert!(run.stdout.is_empty());
}

#[test]
fn compute_rejects_indefinite_input() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "bad.json", r#"{"weights": [1], "matrices": [{"n": 2, "field": "real", "data": [1, 2, 2, 1]}]}"#);
    assert_eq!(code(&spdmeans(&["compute", "--mean", "arithmetic", input.to_str().unwrap()])), 1);
}

#[test]
fn distance_between_commuting_pair() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "pair.json", COMMUTING_PAIR);
    let run = spdmeans(&["distance", "--metric", "cartan", input.to_str().unwrap()]);
    assert_eq!(code(&run), 0);
    let v: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(v["metric_id"], "cartan");
    let expected = (9f64.ln().powi(2) + 4f64.ln().powi(2)).sqrt();
    assert!((v["value"].as_f64().unwrap() - expected).abs() <= 1e-12);
    assert_eq!(code(&spdmeans(&["distance", "--metric", "taxicab", input.to_str().unwrap()])), 1);
}

#[test]
fn search_unknown_target_exits_one() {
    assert_eq!(code(&spdmeans(&["search", "--target", "bogus", "--seed", "1"])), 1);
}

#[test]
fn search_commuting_g_leq_omega_is_empty() {
    let run = spdmeans(&["search", "--target", "g-leq-omega", "--commuting", "--trials", "200", "--seed", "1"]);
    assert_eq!(code(&run), 0);
    let v: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(v["target"], "g_leq_omega");
    assert!(v["hits"].as_array().unwrap().is_empty());
}

#[test]
fn search_hits_are_reverified() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("findings.json");
    let run = spdmeans(&["search", "--target", "omega-monotonicity", "--trials", "1000", "--seed", "1", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let v = json_file(&out);
    for hit in v["hits"].as_array().unwrap() {
        assert_eq!(hit["status"], "violated");
        let re = &hit["reverification"];
        assert_eq!(re["persists"], true);
        assert!(re["residual_tol"].as_f64().unwrap() <= 1e-12 / 100.0 * (1.0 + 1e-12));
    }
}
