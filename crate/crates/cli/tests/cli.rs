//! End-to-end tests of the `evolv` binary: exit-code protocol, report
//! contents, schema conformance, chart emission and byte determinism.

mod common;

use common::{evolv, exit_code, load_schema, stdout_json, validate};

use evolv_core::{read_gfield, write_gfield, FieldRole, GridField, GridSpec, Window};
use num_complex::Complex64;
use std::path::Path;

fn rhs_spec() -> GridSpec {
    GridSpec {
        n: 1,
        freq_extent: vec![16.0, 16.0],
        points_per_axis: 256,
        sigma: 1.0,
        window: Window::RaisedCosine { rho: 0.25 },
    }
}

/// Writes a Gaussian bump right-hand side centered at (t0, 0).
fn write_bump_rhs(path: &Path, t0: f64) {
    let field = GridField::sample_spatial(rhs_spec(), FieldRole::Rhs, |x: &[f64]| {
        let q = ((x[0] - t0).powi(2) + x[1].powi(2)) / (2.0 * 0.04);
        Complex64::new((-q).exp(), 0.0)
    })
    .expect("rhs builds");
    write_gfield(&field, path).expect("rhs writes");
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(exit_code(&evolv(dir.path(), &["--help"])), 0);
    assert_eq!(exit_code(&evolv(dir.path(), &["analyze", "--help"])), 0);
    assert_eq!(exit_code(&evolv(dir.path(), &["--version"])), 0);
}

#[test]
fn unknown_flag_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = evolv(dir.path(), &["analyze", "d0", "--no-such-flag"]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn analyze_heat_reports_bounded_and_zero_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = evolv(dir.path(), &["analyze", "d0 - d1^2"]);
    assert_eq!(exit_code(&out), 0);
    let report = stdout_json(&out);
    assert_eq!(report["classification"], "bounded");
    assert_eq!(report["omega0"]["kind"], "finite");
    assert!(report["omega0"]["value"].as_f64().unwrap().abs() <= 1e-6);
    assert_eq!(report["verdicts"]["exact_1d"]["classification"], "bounded");
    assert_eq!(report["verdicts"]["numeric"]["classification"], "bounded");
    assert_eq!(report["log_region"]["violation_count"], 0);
    // The constrained supremum of a dissipative operator stays at zero, so
    // the constant growth model must win.
    assert_eq!(report["sigma_curve"]["fit"]["model"], "constant");
}

#[test]
fn analyze_shifted_square_reports_unbounded() {
    let dir = tempfile::tempdir().unwrap();
    let out = evolv(dir.path(), &["analyze", "d0 - i*(d1+1)^2"]);
    assert_eq!(exit_code(&out), 2);
    let report = stdout_json(&out);
    assert_eq!(report["classification"], "unbounded");
}

#[test]
fn analyze_terms_file_with_pure_space_operator() {
    let dir = tempfile::tempdir().unwrap();
    let p = evolv_core::parse_operator("d1", 1).unwrap();
    let terms = serde_json::to_string(&p.to_json_value()).unwrap();
    std::fs::write(dir.path().join("terms.json"), terms).unwrap();
    let out = evolv(dir.path(), &["analyze", "--json", "terms.json"]);
    assert_eq!(exit_code(&out), 2);
    let report = stdout_json(&out);
    assert_eq!(report["classification"], "unbounded");
    let kinds: Vec<&str> = report["verdicts"]["numeric"]["evidence"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["kind"].as_str().unwrap())
        .collect();
    assert!(kinds.contains(&"zero_slice"), "evidence kinds: {kinds:?}");
}

#[test]
fn analyze_parse_error_exits_one_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let out = evolv(dir.path(), &["analyze", "d0 + ("]);
    assert_eq!(exit_code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("byte "), "stderr: {stderr}");
}

#[test]
fn analyze_n_flag_must_match_terms_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = evolv_core::parse_operator("d1", 1).unwrap();
    let terms = serde_json::to_string(&p.to_json_value()).unwrap();
    std::fs::write(dir.path().join("terms.json"), terms).unwrap();
    let out = evolv(dir.path(), &["analyze", "--json", "terms.json", "--n", "2"]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn analyze_report_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["analyze", "d0 - d1^2", "--seed", "7"];
    let first = evolv(dir.path(), &args);
    let second = evolv(dir.path(), &args);
    assert_eq!(exit_code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn analyze_report_validates_against_published_schema() {
    let dir = tempfile::tempdir().unwrap();
    let schema = load_schema("analysis_report.v1.json");
    for args in [
        vec!["analyze", "d0 - d1^2"],
        vec!["analyze", "d0 - i*(d1+1)^2"],
        vec!["analyze", "1"],
        vec!["analyze", "d0 - d1^2", "--timings"],
    ] {
        let out = evolv(dir.path(), &args);
        let report = stdout_json(&out);
        validate(&report, &schema).unwrap_or_else(|e| panic!("{args:?}: {e}"));
    }
}

#[test]
fn analyze_report_file_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = evolv(dir.path(), &["analyze", "d0 - d1^2", "--report", "report.json"]);
    assert_eq!(exit_code(&out), 0);
    assert!(out.stdout.is_empty());
    let body = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(report["schema"], "evolv.analysis_report.v1");
}

#[test]
fn fundsol_heat_defaults_writes_field_and_passing_battery() {
    let dir = tempfile::tempdir().unwrap();
    let out = evolv(dir.path(), &["fundsol", "d0 - d1^2"]);
    assert_eq!(
        exit_code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout_json(&out);

    let field = read_gfield(&dir.path().join("n.gfield")).expect("field file written");
    assert_eq!(field.role(), FieldRole::N);
    assert_eq!(field.spec().points_per_axis, 256);

    let battery = report["battery"].as_array().unwrap();
    let names: Vec<&str> = battery.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(
        names,
        [
            "line_min_modulus",
            "delta_property",
            "sigma_independence",
            "causal_support",
            "decay_rate"
        ]
    );
    for check in battery {
        assert!(check["pass"].as_bool().unwrap(), "failing check: {check}");
        assert!(check["tolerance"].is_number());
    }
    let delta = &battery[1];
    for residual in delta["details"].as_array().unwrap() {
        assert!(residual.as_f64().unwrap() <= 1e-3);
    }
    assert_eq!(report["config"]["sigma_source"], "omega0+1");
    assert_eq!(report["figures"]["n_slice"].as_array().unwrap().len(), 256);
}

#[test]
fn fundsol_report_validates_against_published_schema() {
    let dir = tempfile::tempdir().unwrap();
    let schema = load_schema("analysis_report.v1.json");
    let out = evolv(dir.path(), &["fundsol", "d0 - d1^2", "--timings"]);
    assert_eq!(exit_code(&out), 0);
    validate(&stdout_json(&out), &schema).unwrap();
}

#[test]
fn fundsol_sigma_on_spectrum_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = evolv(dir.path(), &["fundsol", "d0 - d1^2", "--sigma", "0"]);
    assert_eq!(exit_code(&out), 4);
    assert!(!dir.path().join("n.gfield").exists());
}

#[test]
fn fundsol_unbounded_without_sigma_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = evolv(dir.path(), &["fundsol", "d0 + d1^2"]);
    assert_eq!(exit_code(&out), 4);
}

#[test]
fn fundsol_wave_pair_only_skips_field_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = evolv(dir.path(), &["fundsol", "d0^2 - d1^2", "--pair-only"]);
    assert_eq!(
        exit_code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!dir.path().join("n.gfield").exists());
    let report = stdout_json(&out);
    assert!(report["battery"].is_array());
    assert!(report["figures"]["n_slice"].is_null());
    assert!(report["config"]["output"].is_null());
}

#[test]
fn fundsol_charts_write_figure_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = evolv(dir.path(), &["fundsol", "d0 - d1^2", "--charts"]);
    assert_eq!(exit_code(&out), 0);
    let report = stdout_json(&out);
    let files: Vec<String> = report["figures"]["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap().to_string())
        .collect();
    assert_eq!(
        files,
        ["n.sigma_curve.csv", "n.sigma_curve.svg", "n.decay.svg", "n.n_slice.svg"]
    );
    for name in &files {
        let body = std::fs::read_to_string(dir.path().join(name)).unwrap();
        if name.ends_with(".svg") {
            assert!(body.starts_with("<svg "), "{name} is not SVG");
        }
    }
    let csv = std::fs::read_to_string(dir.path().join("n.sigma_curve.csv")).unwrap();
    assert!(csv.starts_with("r,sigma,lambda_re,lambda_im,xi_0"));
    // One data row per radius in the report.
    assert_eq!(csv.lines().count(), 1 + report["sigma_curve"]["radii"].as_array().unwrap().len());
}

#[test]
fn solve_heat_bump_reports_small_residual() {
    let dir = tempfile::tempdir().unwrap();
    write_bump_rhs(&dir.path().join("bump.gfield"), 1.0);
    let out = evolv(
        dir.path(),
        &["solve", "d0 - d1^2", "--rhs", "bump.gfield", "--sigma", "1"],
    );
    assert_eq!(
        exit_code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout_json(&out);
    assert_eq!(report["schema"], "evolv.solve_report.v1");
    assert!(report["residual"].as_f64().unwrap() <= 1e-3);
    assert_eq!(report["pass"], true);
    let schema = load_schema("solve_report.v1.json");
    validate(&report, &schema).unwrap();

    let solution = read_gfield(&dir.path().join("solution.gfield")).unwrap();
    assert_eq!(solution.role(), FieldRole::Solution);
    assert!(solution.abs_mass() > 0.0);
}

#[test]
fn solve_zero_rhs_returns_zero_field() {
    let dir = tempfile::tempdir().unwrap();
    let zero = GridField::sample_spatial(rhs_spec(), FieldRole::Rhs, |_: &[f64]| {
        Complex64::new(0.0, 0.0)
    })
    .unwrap();
    write_gfield(&zero, &dir.path().join("zero.gfield")).unwrap();
    let out = evolv(
        dir.path(),
        &["solve", "d0 - d1^2", "--rhs", "zero.gfield", "--sigma", "1"],
    );
    assert_eq!(exit_code(&out), 0);
    let solution = read_gfield(&dir.path().join("solution.gfield")).unwrap();
    assert!(solution.values().iter().all(|v| v.norm() == 0.0));
}

#[test]
fn solve_rhs_supported_in_negative_time_exits_five() {
    let dir = tempfile::tempdir().unwrap();
    write_bump_rhs(&dir.path().join("acausal.gfield"), -3.0);
    let out = evolv(
        dir.path(),
        &["solve", "d0 - d1^2", "--rhs", "acausal.gfield", "--sigma", "1"],
    );
    assert_eq!(exit_code(&out), 5);
    assert!(!dir.path().join("solution.gfield").exists());
}

#[test]
fn thread_cap_flag_and_env_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let out = evolv(dir.path(), &["analyze", "d0 - 3", "--threads", "2"]);
    assert_eq!(exit_code(&out), 0);

    let out = std::process::Command::new(env!("CARGO_BIN_EXE_evolv"))
        .args(["analyze", "d0 - 3"])
        .current_dir(dir.path())
        .env("EVOLV_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));

    let out = std::process::Command::new(env!("CARGO_BIN_EXE_evolv"))
        .args(["analyze", "d0 - 3"])
        .current_dir(dir.path())
        .env("EVOLV_THREADS", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn timings_flag_adds_timings_section() {
    let dir = tempfile::tempdir().unwrap();
    let plain = stdout_json(&evolv(dir.path(), &["analyze", "d0 - 3"]));
    assert!(plain.get("timings").is_none());
    let timed = stdout_json(&evolv(dir.path(), &["analyze", "d0 - 3", "--timings"]));
    assert!(timed["timings"]["total_ms"].is_number());
}
