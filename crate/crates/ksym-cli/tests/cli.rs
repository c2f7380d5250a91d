use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn ksym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksym"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("{name}.json"))
        .to_string_lossy()
        .into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn decompose_flag_manifold_file() {
    let out = ksym(&["decompose", &fixture("su3_order3")]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["result"]["dim_g0"], 2);
    assert_eq!(r["result"]["kprime"], 3);
    assert_eq!(r["result"]["effective"], true);
    assert_eq!(r["result"]["systems"].as_array().unwrap().len(), 7);
    assert_eq!(r["tolerance"], 1e-9);
    assert_eq!(r["fixture"]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn identity_fixture_has_trivial_decomposition() {
    let out = ksym(&["decompose", "--fixture", &fixture("su2_identity")]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["result"]["dim_g0"], 3);
    assert_eq!(r["result"]["dim_m"].as_array().unwrap().len(), 0);
    assert_eq!(r["result"]["systems"][1]["kind"], "Underdetermined");
}

#[test]
fn corrupted_json_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"name\": \"x\", \"automorphism\": ").unwrap();
    let out = ksym(&["decompose", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
}

#[test]
fn non_automorphism_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec: Value = serde_json::from_str(&std::fs::read_to_string(fixture("su3_order3")).unwrap()).unwrap();
    spec["automorphism"]["matrix"][0][1] = Value::from(0.5);
    let p = dir.path().join("broken.json");
    std::fs::write(&p, spec.to_string()).unwrap();
    assert_eq!(ksym(&["decompose", path_str(&p)]).status.code(), Some(2));
}

#[test]
fn full_suite_on_three_symmetric_fixture_passes() {
    let out = ksym(&["verify", "--fixture", &fixture("su3_order3")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().count() >= 15);
    assert!(text.lines().all(|l| l.ends_with("PASS")), "{text}");
}

#[test]
fn tiny_tolerance_flags_numerical_failures() {
    let out = ksym(&["verify", "--fixture", &fixture("su3_order3"), "--tol", "1e-15"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn only_filter_gives_a_single_identity() {
    let out = ksym(&["verify", "--fixture", &fixture("su3_order3"), "--only", "dH_closed"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("dH_closed"));
}

#[test]
fn nonpositive_tolerance_is_rejected() {
    let out = ksym(&["verify", "--fixture", "su3_order3", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_for_equal_config_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for run in 0..2 {
        let verify = dir.path().join(format!("verify{run}.json"));
        let out = ksym(&[
            "verify",
            "--fixture",
            "su3_order4",
            "--seed",
            "7",
            "--out",
            path_str(&verify),
        ]);
        assert_eq!(out.status.code(), Some(0));
        let residuals = ksym(&[
            "system-residuals",
            "--fixture",
            "su3_order5",
            "--seed",
            "7",
            "--cells",
            "8",
        ]);
        reports.push((std::fs::read(&verify).unwrap(), residuals.stdout));
    }
    assert_eq!(reports[0], reports[1]);
    let other = ksym(&[
        "system-residuals",
        "--fixture",
        "su3_order5",
        "--seed",
        "8",
        "--cells",
        "8",
    ]);
    assert_ne!(other.stdout, reports[0].1);
}

#[test]
fn system_residuals_agree_between_formulations() {
    let out = ksym(&[
        "system-residuals",
        "--fixture",
        "su3_order4",
        "--m",
        "2",
        "--cells",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    let s = r["residuals"]["max_system"].as_f64().unwrap();
    let l = r["residuals"]["max_laurent"].as_f64().unwrap();
    assert!(s > 0.1 && (s - l).abs() < 1e-10 * s);
    assert!(r["regrouping"]["vertical"].as_f64().unwrap() < 1e-10 * s);
}

#[test]
fn underdetermined_orders_report_the_lift() {
    let out = ksym(&[
        "system-residuals",
        "--fixture",
        "su2_involution",
        "--m",
        "3",
        "--cells",
        "6",
    ]);
    let r = &json(&out)["result"];
    assert_eq!(r["class"]["kind"], "Underdetermined");
    assert_eq!(r["lift"]["lifted_order"], 4);
    assert!((r["lift"]["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn system_file_input_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let g = ksym::lattice::LatticeGrid::unit_square(6).unwrap();
    let zero = ksym::loopsys::SystemData::zeros(g, 8, 2, ksym::loopsys::Convention::Minus);
    let p: PathBuf = dir.path().join("u.json");
    std::fs::write(&p, serde_json::to_string(&zero.to_file()).unwrap()).unwrap();
    let out = ksym(&["system-residuals", "--fixture", "su3_order3", "--input", path_str(&p)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = &json(&out)["result"];
    assert_eq!(r["residuals"]["max_system"], 0.0);
    assert_eq!(r["cells"], 6);
}

#[test]
fn sphere_relaxation_drops_the_residual() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("plot.csv");
    let out = ksym(&[
        "solve",
        "--fixture",
        &fixture("su2_involution"),
        "--out",
        path_str(dir.path()),
        "--emit-plot-data",
        path_str(&plot),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report["result"]["residual_drop"].as_f64().unwrap() >= 1e3);
    let history = std::fs::read_to_string(dir.path().join("history.csv")).unwrap();
    let rows: Vec<f64> = history
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(rows[0] / rows[rows.len() - 1] >= 1e3);
    assert!(dir.path().join("field.json").is_file());
    let plot_text = std::fs::read_to_string(&plot).unwrap();
    assert_eq!(plot_text.lines().count(), 1 + 16 * 16);
}

#[test]
fn zero_steps_reports_the_initial_state() {
    let out = ksym(&["solve", "--fixture", "su2_involution", "--steps", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    assert_eq!(r["steps_taken"], 0);
    assert_eq!(r["initial_residual"], r["final_residual"]);
}

#[test]
fn huge_rate_exits_with_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let out = ksym(&[
        "solve",
        "--fixture",
        "su2_involution",
        "--rate",
        "0.01",
        "--amplitude",
        "1e-6",
        "--tol",
        "1e-14",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join("history.csv").is_file());
}

#[test]
fn solve_rejects_unsupported_fixture() {
    let out = ksym(&["solve", "--fixture", "su3_order4", "--steps", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn isometry_classification_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("quarter.json");
    std::fs::write(&p, r#"{"matrix": [[0.0, 1.0], [-1.0, 0.0]], "k": 2}"#).unwrap();
    let out = ksym(&["classify-isometry", path_str(&p)]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    assert_eq!(r["member"], true);
    assert_eq!(r["epsilon"], -1);
}

#[test]
fn fixture_files_match_the_builtins() {
    for f in ksym::fixtures::all() {
        let text = std::fs::read_to_string(fixture(&f.name)).unwrap();
        let spec: ksym::fixtures::FixtureSpec = serde_json::from_str(&text).unwrap();
        let m = spec.automorphism.matrix().unwrap();
        assert_eq!(&m, f.tau.map(), "{}", f.name);
        assert_eq!(spec.automorphism.order, f.tau.order());
    }
}
