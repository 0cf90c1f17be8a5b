//! End-to-end tests of the `hle` binary: flag handling, JSON shapes,
//! CSV artifacts, config precedence, and exit codes.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn hle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hle"))
        .args(args)
        .output()
        .expect("the binary runs")
}

/// Runs the binary, asserts success, and parses stdout as JSON.
fn hle_json(args: &[&str]) -> Value {
    let out = hle(args);
    assert!(
        out.status.success(),
        "exit {:?}; stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON document")
}

fn field_f64(value: &Value, key: &str) -> f64 {
    value[key].as_f64().unwrap_or_else(|| panic!("missing numeric field {key:?} in {value}"))
}

/// A scratch path under the target directory, unique per test.
fn scratch(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn classify_reports_the_homogeneous_pair_inside_e() {
    let v = hle_json(&["classify", "--n", "3", "--p", "2", "--q", "2", "--a", "-2", "--b", "-2"]);
    assert_eq!(v["regime"], "homogeneous");
    assert_eq!(v["in_E"], "inside");
    // a = b = -2 sits exactly on the compatibility line, which the closed
    // half-plane convention counts as inside; the margin itself is zero.
    assert_eq!(field_f64(&v["margins"], "E_line"), 0.0);
}

#[test]
fn classify_reports_the_reflection_fixed_point_inside_q() {
    let v =
        hle_json(&["classify", "--n", "5", "--p", "3", "--q", "3", "--a", "-0.5", "--b", "-0.5"]);
    assert_eq!(v["regime"], "anticoercive");
    assert_eq!(v["in_Q"], "inside");
    assert!(field_f64(&v["margins"], "E_line_p") > 0.0);
}

#[test]
fn invalid_exponent_is_a_usage_error() {
    let out = hle(&["classify", "--n", "3", "--p", "0.5", "--q", "2", "--a", "0", "--b", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("p"), "stderr should name the offending flag: {stderr}");
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let out = hle(&["classify", "--n", "3", "--p", "2", "--q", "2", "--a", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn power_reports_the_explicit_solution() {
    let v = hle_json(&["power", "--n", "5", "--p", "3", "--q", "3", "--a", "-0.5", "--b", "-0.5"]);
    assert!((field_f64(&v, "alpha") + 1.5).abs() < 1e-12);
    assert!((field_f64(&v, "beta") + 1.5).abs() < 1e-12);
    assert!((field_f64(&v, "lambda1") - 2.25).abs() < 1e-12);
    assert!((field_f64(&v, "lambda2") - 2.25).abs() < 1e-12);
    assert_eq!(v["positive"], true);
}

#[test]
fn power_on_the_line_reports_the_family() {
    let v = hle_json(&["power", "--n", "3", "--p", "2", "--q", "2", "--a", "-2", "--b", "-2"]);
    assert_eq!(v["on_line"], true);
    assert!((field_f64(&v, "slope") - 1.0).abs() < 1e-15);
    assert!(field_f64(&v, "offset").abs() < 1e-15);
    let range = v["alpha_range"].as_array().expect("positive subfamily exists");
    assert!((range[0].as_f64().unwrap() + 1.0).abs() < 1e-15);
    assert!(range[1].as_f64().unwrap().abs() < 1e-15);
}

#[test]
fn kelvin_fixed_point_is_its_own_image() {
    let v = hle_json(&["kelvin", "--n", "5", "--p", "3", "--q", "3", "--a", "-0.5", "--b", "-0.5"]);
    assert_eq!(field_f64(&v["image"], "a"), -0.5);
    assert_eq!(field_f64(&v["image"], "b"), -0.5);
    assert_eq!(field_f64(&v["fixed_point"], "a"), -0.5);
    assert_eq!(field_f64(&v["fixed_point"], "b"), -0.5);
}

#[test]
fn shooting_profile_round_trips_through_verify() {
    let csv = scratch("shooting-profile.csv");
    let path = csv.to_str().expect("scratch paths are UTF-8");
    let v = hle_json(&[
        "solve", "--method", "shooting", "--n", "3", "--p", "3", "--q", "3", "--a", "0", "--b",
        "0", "--grid", "512", "--out", path,
    ]);
    assert_eq!(v["method"], "shooting");
    let gamma = v["gamma"].as_array().expect("shooting reports gamma");
    assert!((gamma[0].as_f64().unwrap() - 18.9475).abs() < 1e-2);
    assert!(field_f64(&v, "boundary_defect") < 1e-8);
    assert_eq!(v["nodes"], 513);

    let text = fs::read_to_string(&csv).expect("profile CSV was written");
    assert!(text.starts_with("r,u,v\n"));
    assert_eq!(text.lines().count(), 514);

    let stats = hle_json(&[
        "verify", "--n", "3", "--p", "3", "--q", "3", "--a", "0", "--b", "0", "--profile", path,
    ]);
    assert_eq!(stats["pass"], true);
    assert!(field_f64(&stats, "sup_rel") < 1e-3);
}

#[test]
fn rayleigh_reproduces_the_biharmonic_eigenvalue() {
    let v = hle_json(&[
        "solve", "--method", "rayleigh", "--n", "3", "--p", "2", "--q", "2", "--a", "0", "--b",
        "0", "--grid", "2048",
    ]);
    assert_eq!(v["method"], "rayleigh");
    let m = field_f64(&v, "m_value");
    assert!((m - 97.409).abs() / 97.409 < 0.01, "m = {m}");
    assert_eq!(field_f64(&v, "boundary_defect"), 0.0);
}

#[test]
fn solve_refuses_the_scale_degenerate_pair() {
    let out =
        hle(&["solve", "--method", "shooting", "--n", "3", "--p", "2", "--q", "2", "--a", "0", "--b", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).expect("error object is JSON");
    assert_eq!(v["error"], "solve");
    assert!(v["detail"].as_str().unwrap().contains("variational"));
}

/// The verdict codes in the CSV must be reproducible from direct library
/// calls at the cell centres.
#[test]
fn region_csv_agrees_with_direct_classification() {
    let out = hle(&["region", "--n", "5", "--p", "3", "--q", "3", "--grid", "16"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).expect("CSV is UTF-8");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,b,code"));

    let e = hle_core::ExponentPair::new(5, 3.0, 3.0).unwrap();
    let mut rows = 0usize;
    for (idx, line) in lines.enumerate() {
        rows += 1;
        if idx % 7 != 0 {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let a: f64 = fields[0].parse().unwrap();
        let b: f64 = fields[1].parse().unwrap();
        let code: u8 = fields[2].parse().unwrap();
        let w = hle_core::WeightPair::new(a, b).unwrap();
        let verdict = hle_core::regions::membership_e(e, w, hle_core::DEFAULT_BOUNDARY_EPS);
        use hle_core::TriState::{Boundary, Inside};
        let expected = if verdict.in_e == Boundary || verdict.in_q == Boundary {
            3
        } else if verdict.in_q == Inside {
            2
        } else if verdict.in_e == Inside {
            1
        } else {
            0
        };
        assert_eq!(code, expected, "cell ({a}, {b})");
    }
    assert_eq!(rows, 256);
}

#[test]
fn region_summary_counts_every_cell() {
    let csv = scratch("region-map.csv");
    let path = csv.to_str().expect("scratch paths are UTF-8");
    let v = hle_json(&["region", "--n", "5", "--p", "3", "--q", "3", "--grid", "32", "--out", path]);
    let cells = &v["cells"];
    let total = cells["outside"].as_u64().unwrap()
        + cells["E_only"].as_u64().unwrap()
        + cells["Q"].as_u64().unwrap()
        + cells["boundary"].as_u64().unwrap();
    assert_eq!(total, 32 * 32);
    assert!(cells["Q"].as_u64().unwrap() > 0, "Q should be visible at this resolution");
    let text = fs::read_to_string(&csv).expect("grid CSV was written");
    assert!(text.starts_with("a,b,code\n"));
    assert_eq!(text.lines().count(), 32 * 32 + 1);
}

#[test]
fn region_help_documents_the_codes() {
    let out = hle(&["region", "--help"]);
    assert!(out.status.success());
    let help = String::from_utf8_lossy(&out.stdout);
    assert!(help.contains("0 = outside E"), "help should document the cell codes:\n{help}");
}

#[test]
fn config_supplies_defaults_and_flags_override() {
    let cfg = scratch("defaults.cfg");
    fs::write(&cfg, "eps = 0.25 # coarse verdicts\ngrid = 4\n").unwrap();
    let path = cfg.to_str().expect("scratch paths are UTF-8");

    let v = hle_json(&[
        "classify", "--n", "5", "--p", "3", "--q", "3", "--a", "-0.5", "--b", "-0.5", "--config",
        path,
    ]);
    assert_eq!(field_f64(&v, "boundary_tolerance"), 0.25);

    let v = hle_json(&[
        "classify", "--n", "5", "--p", "3", "--q", "3", "--a", "-0.5", "--b", "-0.5", "--config",
        path, "--eps", "1e-9",
    ]);
    assert_eq!(field_f64(&v, "boundary_tolerance"), 1e-9);

    // grid from the config drives region resolution: 4 x 4 cells + header.
    let out = hle(&["region", "--n", "5", "--p", "3", "--q", "3", "--config", path]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 17);
}

#[test]
fn unknown_config_key_is_rejected() {
    let cfg = scratch("bad.cfg");
    fs::write(&cfg, "epsilon = 2\n").unwrap();
    let out = hle(&[
        "classify", "--n", "3", "--p", "3", "--q", "3", "--a", "0", "--b", "0", "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("epsilon"), "stderr should name the unknown key: {stderr}");
}

#[test]
fn verify_missing_profile_is_a_computational_error() {
    let out = hle(&[
        "verify", "--n", "3", "--p", "3", "--q", "3", "--a", "0", "--b", "0", "--profile",
        "/nonexistent/profile.csv",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).expect("error object is JSON");
    assert_eq!(v["error"], "io");
}
