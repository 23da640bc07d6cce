//! Acceptance checks that exercise the installed binary end to end,
//! including the run-to-run determinism criterion.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypersphere"))
}

fn tmp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("hypersphere_accept_{}_{name}", std::process::id()));
    p
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn criterion(number: u32, description: &str, pass: bool, detail: String) {
    println!(
        "criterion {number:02} [{}] {description} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {number} failed: {description}: {detail}");
}

#[test]
fn criterion_12_verify_runs_are_byte_identical() {
    let out1 = tmp_path("verify1.json");
    let out2 = tmp_path("verify2.json");
    let s1 = run(bin()
        .args(["verify", "--seed", "42", "--out"])
        .arg(&out1))
    .status;
    let s2 = run(bin()
        .args(["verify", "--seed", "42", "--out"])
        .arg(&out2))
    .status;
    let mut doc1: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out1).unwrap()).unwrap();
    let mut doc2: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out2).unwrap()).unwrap();
    let report_count = doc1["reports"].as_array().map(|a| a.len()).unwrap_or(0);
    doc1.as_object_mut().unwrap().remove("timestamp");
    doc2.as_object_mut().unwrap().remove("timestamp");
    let bytes1 = serde_json::to_vec(&doc1).unwrap();
    let bytes2 = serde_json::to_vec(&doc2).unwrap();
    let pass = s1.success() && s2.success() && bytes1 == bytes2 && report_count > 0;
    let _ = std::fs::remove_file(&out1);
    let _ = std::fs::remove_file(&out2);
    criterion(
        12,
        "two verify runs with one seed are byte-identical modulo the timestamp",
        pass,
        format!(
            "exit codes {:?}/{:?}, {} reports, identical = {}",
            s1.code(),
            s2.code(),
            report_count,
            bytes1 == bytes2
        ),
    );
}

#[test]
fn rule_file_round_trip_and_recertification() {
    let path = tmp_path("rule10.json");
    let build = run(bin().args(["rule", "--n", "10", "--out"]).arg(&path));
    assert!(build.status.success());
    let stdout = String::from_utf8_lossy(&build.stdout);
    assert!(stdout.contains("N = 242"), "stdout: {stdout}");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["d"], 2);
    assert_eq!(doc["exactness"], 20);
    assert_eq!(doc["nodes"].as_array().unwrap().len(), 242);
    assert_eq!(doc["weights"].as_array().unwrap().len(), 242);
    let verify = run(bin()
        .args(["rule", "--verify"])
        .arg(&path)
        .args(["--degree", "20"]));
    assert!(verify.status.success());
    let _ = std::fs::remove_file(&path);
}

#[test]
fn rule_smallest_case_prints_two_nodes() {
    let out = run(bin().args(["rule", "--n", "0"]));
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("N = 2"), "stdout: {stdout}");
}

#[test]
fn approx_reproduces_a_polynomial_input() {
    // The vanishing catalogue function is a degree-4 polynomial, so plain
    // truncation at n >= 4 reproduces it to roundoff.
    let out = run(bin().args([
        "approx",
        "--op",
        "hyper",
        "--n",
        "6",
        "--corpus",
        "vanishing",
    ]));
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let row = stdout
        .lines()
        .find(|l| l.starts_with("6,hyper"))
        .expect("row present");
    let l2: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert!(l2 <= 1e-9, "l2 error {l2:e}");
}

#[test]
fn approx_lasso_at_zero_level_matches_hyper() {
    let hyper = run(bin().args([
        "approx", "--op", "hyper", "--n", "5", "--corpus", "franke_sphere",
    ]));
    let lasso = run(bin().args([
        "approx", "--op", "lasso", "--n", "5", "--lambda", "0", "--corpus", "franke_sphere",
    ]));
    assert!(hyper.status.success() && lasso.status.success());
    let grab = |out: &Output| -> (f64, f64) {
        let text = String::from_utf8_lossy(&out.stdout).to_string();
        let row = text.lines().find(|l| l.starts_with("5,")).unwrap().to_string();
        let cells: Vec<&str> = row.split(',').collect();
        (cells[3].parse().unwrap(), cells[4].parse().unwrap())
    };
    let (h_l2, h_w) = grab(&hyper);
    let (l_l2, l_w) = grab(&lasso);
    assert!((h_l2 - l_l2).abs() <= 1e-8, "{h_l2} vs {l_l2}");
    assert!((h_w - l_w).abs() <= 1e-8);
}

#[test]
fn approx_hard_denoises_a_noisy_polynomial() {
    // Noise floor sits well under 0.12 for sigma 0.02 at this node count;
    // thresholding above it zeroes the noise-only coefficients.
    let common = [
        "--n",
        "8",
        "--corpus",
        "vanishing",
        "--noise",
        "0.02",
        "--seed",
        "7",
    ];
    let hyper_out = run(bin().args(["approx", "--op", "hyper"]).args(common));
    let hard_out = run(bin()
        .args(["approx", "--op", "hard", "--lambda", "0.12"])
        .args(common));
    assert!(hyper_out.status.success() && hard_out.status.success());
    let grab = |out: &Output| -> (f64, usize) {
        let text = String::from_utf8_lossy(&out.stdout).to_string();
        let row = text.lines().find(|l| l.starts_with("8,")).unwrap().to_string();
        let cells: Vec<&str> = row.split(',').collect();
        (cells[3].parse().unwrap(), cells[5].parse().unwrap())
    };
    let (hyper_err, hyper_sparsity) = grab(&hyper_out);
    let (hard_err, hard_sparsity) = grab(&hard_out);
    assert!(
        hard_sparsity > hyper_sparsity,
        "sparsity {hard_sparsity} vs {hyper_sparsity}"
    );
    assert!(hard_err < hyper_err, "error {hard_err} vs {hyper_err}");
}

#[test]
fn verify_single_law_and_expected_violation_filters() {
    let table = run(bin().args([
        "verify",
        "--law",
        "thm5.1.composition",
        "--m",
        "7",
        "--n",
        "4",
        "--lambda",
        "0.2",
    ]));
    assert!(table.status.success());
    let stdout = String::from_utf8_lossy(&table.stdout);
    assert!(stdout.contains("thm5.1.composition_tables.m7.n4.lam0.2"));
    assert!(stdout.contains("1/1 laws"));

    let pyth = run(bin().args(["verify", "--law", "pythagorean", "--op", "filtered"]));
    assert!(pyth.status.success());
    let stdout = String::from_utf8_lossy(&pyth.stdout);
    assert!(stdout.contains("expected violation"));
}

#[test]
fn exit_codes_for_bad_configuration_and_io() {
    let bad_corpus = run(bin().args(["approx", "--op", "hyper", "--n", "3", "--corpus", "nope"]));
    assert_eq!(bad_corpus.status.code(), Some(3));
    let bad_env = run(bin()
        .args(["verify", "--law", "quadrature"])
        .env("HYPERSPHERE_TOL_SCALE", "banana"));
    assert_eq!(bad_env.status.code(), Some(3));
    let bad_out = run(bin().args([
        "rule",
        "--n",
        "1",
        "--out",
        "/nonexistent_dir_zzz/rule.json",
    ]));
    assert_eq!(bad_out.status.code(), Some(4));
}

#[test]
fn threads_env_does_not_change_results() {
    let out1 = tmp_path("thr1.json");
    let out2 = tmp_path("thr2.json");
    let s1 = run(bin()
        .args(["verify", "--law", "thm5.2", "--out"])
        .arg(&out1)
        .env("HYPERSPHERE_THREADS", "1"))
    .status;
    let s2 = run(bin()
        .args(["verify", "--law", "thm5.2", "--out"])
        .arg(&out2)
        .env("HYPERSPHERE_THREADS", "4"))
    .status;
    assert!(s1.success() && s2.success());
    let mut d1: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out1).unwrap()).unwrap();
    let mut d2: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out2).unwrap()).unwrap();
    for d in [&mut d1, &mut d2] {
        let obj = d.as_object_mut().unwrap();
        obj.remove("timestamp");
        obj["config"].as_object_mut().unwrap().remove("threads");
    }
    assert_eq!(d1["reports"], d2["reports"]);
    let _ = std::fs::remove_file(&out1);
    let _ = std::fs::remove_file(&out2);
}

#[test]
fn table_emits_csv_and_svg() {
    let csv = tmp_path("table.csv");
    let svg = tmp_path("table.svg");
    let out = run(bin()
        .args(["table", "--n", "2,4,6", "--op", "hyper,filtered", "--corpus", "zonal_abs", "--out"])
        .arg(&csv)
        .arg("--svg")
        .arg(&svg));
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.lines().next().unwrap().starts_with("# {"));
    assert!(text.contains("n,operator,lambda,l2_error,l2w_error,sparsity"));
    // One row per (degree, operator); all finite.
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let err: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!(err.is_finite());
    }
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_text.starts_with("<svg"));
    assert!(svg_text.contains("polyline"));
    let _ = std::fs::remove_file(&csv);
    let _ = std::fs::remove_file(&svg);
}

#[test]
fn table_of_a_constant_function_is_a_zero_column() {
    let out = run(bin().args(["table", "--n", "2,5", "--op", "hyper", "--corpus", "const1"]));
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for row in text.lines().skip(2) {
        let err: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!(err <= 1e-10, "constant column entry {err:e}");
    }
}
