//! End-to-end tests of the binary: exit-code contract, JSON schema shape,
//! determinism, config-file merging, and the CSV export paths.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scalemax"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON: {e}\n---\n{}",
            String::from_utf8_lossy(&output.stdout)
        )
    })
}

fn scratch_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("scalemax-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn compare_rh_theorem_case_exits_zero() {
    let out = run(&[
        "compare",
        "--baseline",
        "gg:beta=0.8,alpha=0.5",
        "--lambda",
        "1,3",
        "--theta",
        "0.5,3.5",
        "--order",
        "rh",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json_of(&out);
    assert_eq!(report["command"], "compare");
    assert_eq!(report["rh"]["outcome"], "holds");
    assert_eq!(report["majorization"]["majorized"], true);
    assert_eq!(report["exit_code"], 0);
    assert!(report["applicable_rules"]
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["rule"] == "weak-supermajorization-rh" && r["validated"] == true));
    // Verdict schema: grid and tolerance ride along with every verdict.
    assert!(report["rh"]["grid"]["points"].is_u64());
    assert_eq!(report["rh"]["grid"]["spacing"], "log");
    assert!(report["rh"]["tolerance"].is_f64());
}

#[test]
fn compare_identical_models_lr_exits_zero() {
    let out = run(&[
        "compare",
        "--baseline",
        "exp",
        "--lambda",
        "1,3",
        "--theta",
        "1,3",
        "--order",
        "lr",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_of(&out);
    assert_eq!(report["lr"]["overall"]["outcome"], "holds");
    // Both certification routes ride along in the report.
    assert_eq!(report["lr"]["direct"]["direction"], "increasing");
    assert!(report["lr"]["composed"]["outcome"].is_string());
}

#[test]
fn compare_accepts_order_lists() {
    let out = run(&[
        "compare",
        "--baseline",
        "exp",
        "--lambda",
        "1,2",
        "--theta",
        "0.5,2",
        "--order",
        "rh,lr",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_of(&out);
    assert!(report["st"].is_null());
    assert_eq!(report["rh"]["outcome"], "holds");
    assert_eq!(report["lr"]["overall"]["outcome"], "holds");
}

#[test]
fn compare_length_mismatch_is_usage_error() {
    let out = run(&[
        "compare",
        "--baseline",
        "exp",
        "--lambda",
        "1,3",
        "--theta",
        "1,3,5",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("entries"));
}

#[test]
fn compare_refuted_order_exits_one() {
    let out = run(&[
        "compare",
        "--baseline",
        "exp",
        "--lambda",
        "0.5,3.5",
        "--theta",
        "1,3",
        "--order",
        "rh",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = json_of(&out);
    assert_eq!(report["rh"]["outcome"], "fails");
    assert!(report["rh"]["witness"]["t1"].is_f64());
}

#[test]
fn compare_underflowed_grid_is_inconclusive() {
    // Far beyond the decay scale of a square-exponential tail every density
    // underflows: the likelihood-ratio question has no usable grid points.
    let out = run(&[
        "compare",
        "--baseline",
        "gg:beta=2,alpha=2",
        "--lambda",
        "1,2",
        "--theta",
        "0.5,2",
        "--order",
        "lr",
        "--grid",
        "100000,200000,50,log",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
    let report = json_of(&out);
    assert_eq!(report["lr"]["overall"]["outcome"], "inconclusive");
}

#[test]
fn compare_outlier_form() {
    let out = run(&[
        "compare",
        "--baseline",
        "gg:beta=0.8,alpha=0.5",
        "--outlier",
        "p=2,lambda1=1,q=3,lambda=2",
        "--lambda1-star",
        "0.4",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json_of(&out);
    assert_eq!(report["lambda"], serde_json::json!([1.0, 1.0, 2.0, 2.0, 2.0]));
    assert_eq!(report["lr"]["overall"]["outcome"], "holds");
    assert!(report["applicable_rules"]
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["rule"] == "outlier-lr"));
}

#[test]
fn compare_two_baseline_form() {
    let out = run(&[
        "compare",
        "--baseline",
        "exp",
        "--baseline2",
        "gamma:shape=0.5",
        "--outlier",
        "p=1,lambda1=2,q=2,lambda=1",
        "--lambda1-star",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json_of(&out);
    assert!(report["applicable_rules"]
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["rule"] == "two-baseline-lr"));
    assert_eq!(report["rf_over_rg"]["outcome"], "holds");
    assert!(report["conditions_secondary"].is_object());
}

#[test]
fn compare_rejects_baseline2_without_outlier() {
    let out = run(&[
        "compare",
        "--baseline",
        "exp",
        "--baseline2",
        "gamma:shape=0.5",
        "--lambda",
        "1,2",
        "--theta",
        "0.5,2",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn compare_bad_baseline_spec_reports_position() {
    let out = run(&[
        "compare",
        "--baseline",
        "gg:beta=x,alpha=1",
        "--lambda",
        "1",
        "--theta",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte 8"));
}

#[test]
fn verify_conditions_exponential_all_hold() {
    let out = run(&["verify-conditions", "--baseline", "exp"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_of(&out);
    assert_eq!(report["all_hold"], true);
    assert_eq!(report["report"]["psi_decreasing"]["outcome"], "holds");
    assert_eq!(report["report"]["chi_increasing"]["outcome"], "holds");
    assert_eq!(report["report"]["eta_increasing"]["outcome"], "holds");
}

#[test]
fn verify_conditions_gamma_half_all_hold() {
    let out = run(&["verify-conditions", "--baseline", "gamma:shape=0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_of(&out);
    assert_eq!(report["all_hold"], true);
    let notes = report["report"]["annotations"].as_array().unwrap();
    assert!(notes
        .iter()
        .any(|n| n.as_str().unwrap().contains("alpha <= beta")));
}

#[test]
fn verify_conditions_weibull_two_annotates_region() {
    let out = run(&["verify-conditions", "--baseline", "weibull:shape=2"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_of(&out);
    assert_eq!(report["report"]["psi_decreasing"]["outcome"], "holds");
    let notes = report["report"]["annotations"].as_array().unwrap();
    assert!(notes
        .iter()
        .any(|n| n.as_str().unwrap().contains("beta = 2 > 1")));
}

#[test]
fn majorize_report() {
    let out = run(&["majorize", "--x", "2,2", "--y", "1,3"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_of(&out);
    assert_eq!(report["majorized"], true);
    assert_eq!(report["weakly_supermajorized"], true);
    assert_eq!(report["relation"]["prefix_sums_x"], serde_json::json!([2.0, 4.0]));

    let out = run(&["majorize", "--x", "1,2", "--y", "0.5,2"]);
    let report = json_of(&out);
    assert_eq!(report["majorized"], false);
    assert_eq!(report["weakly_supermajorized"], true);
}

#[test]
fn simulate_matches_analytic_cdf() {
    let out = run(&[
        "simulate", "--baseline", "exp", "--lambda", "1,2", "--n", "10000", "--seed", "7",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json_of(&out);
    let ks = report["ks_distance"].as_f64().unwrap();
    assert!(ks < 0.02, "ks = {ks}");
    assert_eq!(report["self_check_within_band"], true);
}

#[test]
fn simulate_csv_export_respects_output_dir() {
    let dir = scratch_path("outdir");
    std::fs::create_dir_all(&dir).unwrap();
    let out = bin()
        .args([
            "simulate", "--baseline", "exp", "--lambda", "1", "--n", "50", "--seed", "3",
            "--csv", "batch.csv",
        ])
        .env("SCALEMAX_OUTPUT_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("batch.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# model="));
    assert!(header.contains("seed=3"));
    assert_eq!(lines.count(), 50);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn falsify_finds_no_counterexample() {
    let out = run(&[
        "falsify", "--theorem", "thm2", "--trials", "100", "--seed", "1",
        "--grid-points", "500",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json_of(&out);
    assert_eq!(report["rule"], "weak-supermajorization-rh");
    assert_eq!(report["tally"]["holds"], 100);
    assert!(report["counterexample"].is_null());
}

#[test]
fn falsify_accepts_descriptive_rule_ids() {
    let out = run(&[
        "falsify", "--theorem", "two-scale-lr", "--trials", "5", "--seed", "2",
        "--grid-points", "400",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_of(&out);
    assert_eq!(report["rule"], "two-scale-lr");
    assert_eq!(report["assertion_mode"], true);
}

#[test]
fn falsify_drop_mode_reports_without_asserting() {
    let out = run(&[
        "falsify", "--theorem", "thm6", "--trials", "20", "--seed", "3",
        "--drop", "min-scale", "--grid-points", "400",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_of(&out);
    assert_eq!(report["assertion_mode"], false);
    assert!(report["dropped_hypothesis"].as_str().unwrap().contains("minimum"));
}

#[test]
fn falsify_unknown_rule_is_usage_error() {
    let out = run(&["falsify", "--theorem", "thm99", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn reports_are_deterministic() {
    let args = [
        "compare",
        "--baseline",
        "gg:beta=0.8,alpha=0.5",
        "--lambda",
        "1,3",
        "--theta",
        "0.5,3.5",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);

    let sim = [
        "simulate", "--baseline", "exp", "--lambda", "1,2", "--n", "2000", "--seed", "11",
    ];
    let a = run(&sim);
    let b = run(&sim);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_supplies_missing_flags() {
    let path = scratch_path("config.txt");
    std::fs::write(
        &path,
        "# comparison defaults\nbaseline=exp\nlambda=1,2\ntheta=0.5,2\norder=rh\n",
    )
    .unwrap();
    let out = run(&["compare", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json_of(&out);
    assert_eq!(report["baseline"], "exp");
    assert_eq!(report["rh"]["outcome"], "holds");

    // Command line wins over the file.
    let out = run(&[
        "compare",
        "--config",
        path.to_str().unwrap(),
        "--theta",
        "1,2",
        "--order",
        "lr",
    ]);
    let report = json_of(&out);
    assert_eq!(report["theta"], serde_json::json!([1.0, 2.0]));
    assert!(report["rh"].is_null());
    assert_eq!(report["lr"]["overall"]["outcome"], "holds");
    std::fs::remove_file(&path).ok();
}

#[test]
fn config_file_parse_error_carries_line() {
    let path = scratch_path("bad-config.txt");
    std::fs::write(&path, "baseline=exp\nnot a pair\n").unwrap();
    let out = run(&["compare", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn grid_and_tol_overrides_are_echoed() {
    let out = run(&[
        "compare",
        "--baseline",
        "exp",
        "--lambda",
        "1,2",
        "--theta",
        "0.5,2",
        "--order",
        "rh",
        "--grid",
        "0.01,20,500,log",
        "--tol",
        "1e-7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_of(&out);
    assert_eq!(report["grid"]["t_min"], 0.01);
    assert_eq!(report["grid"]["points"], 500);
    assert_eq!(report["tolerance"], 1e-7);
}

#[test]
fn dump_grid_writes_csv() {
    let path = scratch_path("dump.csv");
    let out = run(&[
        "verify-conditions",
        "--baseline",
        "exp",
        "--grid",
        "0.01,10,20,log",
        "--dump-grid",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("t,psi,eta,chi"));
    assert_eq!(csv.lines().count(), 21);
    std::fs::remove_file(&path).ok();
}

#[test]
fn usage_error_for_missing_subcommand_flags() {
    let out = run(&["compare"]);
    assert_eq!(out.status.code(), Some(4));
    let out = run(&["simulate", "--lambda", "1"]);
    assert_eq!(out.status.code(), Some(4));
}
