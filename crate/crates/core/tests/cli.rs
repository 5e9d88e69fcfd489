use std::path::Path;
use std::process::{Command, Output};

use bergman_wold::cli::{self, RunOptions};
use bergman_wold::linalg::{c, CMatrix, MatrixLiteral};

fn wold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wold")).args(args).output().expect("spawn wold")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn jordan_scenario_matches_expectation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"scenarios": [{"name": "jordan3", "builder": {"kind": "jordan_shift", "dim": 3}, "m": 1,
            "expected": "hypotheses_violated(regularity)"}]}"#,
    );
    let out = wold(&["run", "--config", &cfg, "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = &report["reports"][0];
    assert_eq!(r["verdict"], "hypotheses_violated(regularity)");
    assert_eq!(r["dims"]["H_inf"], 0);
    assert_eq!(r["regularity"]["verdict"], "not_regular");
    assert!(r["regularity"]["codim_profile"].as_array().is_some_and(|a| !a.is_empty()));
    assert_eq!(r["predicates"]["row_partial_isometry"], true);
    assert!(report.get("generated_at_unix").is_none());
}

#[test]
fn spherical_coisometry_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"scenarios": [{"name": "sphere", "builder": {"kind": "spherical_coisometry", "d": 5, "n": 2, "seed": 7},
            "m": 2, "expected": {"verdict": "theorem_3_7_consistent", "dim_h_inf": 5}}]}"#,
    );
    let out = wold(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["generated_at_unix"].is_u64());
    let r = &report["reports"][0];
    assert_eq!(r["dims"]["H_inf"], 5);
    assert_eq!(r["matches"], true);
    for key in ["identity", "reducing", "coisometry", "gram"] {
        assert!(r["residuals"][key].as_f64().unwrap() <= 1e-9, "{key}");
    }
}

#[test]
fn mismatch_exits_one_and_names_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"scenarios": [
            {"name": "fine", "builder": {"kind": "jordan_shift", "dim": 2}, "m": 1},
            {"name": "wrong", "builder": {"kind": "jordan_shift", "dim": 3}, "m": 1,
             "expected": "theorem_3_7_consistent"}]}"#,
    );
    let out = wold(&["run", "--config", &cfg, "--no-timestamp", "--format", "text"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("wrong:"), "{stderr}");
    assert!(stderr.contains("expected theorem_3_7_consistent"), "{stderr}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().count(), 2);
    assert!(stdout.lines().nth(1).unwrap().contains("MISMATCH"));
}

#[test]
fn failing_residual_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"scenarios": [{"name": "loose", "builder": {"kind": "random_commuting", "n": 2, "d": 4, "seed": 3,
            "contraction_scale": 0.7}, "m": 1, "expected": "theorem_3_7_consistent"}]}"#,
    );
    let out = wold(&["run", "--config", &cfg, "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("loose:") && stderr.contains("residual identity="), "{stderr}");
}

#[test]
fn malformed_json_exits_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\"scenarios\": [\n  {\"name\": \"x\",, }\n]}");
    let out = wold(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "{stderr}");
    assert!(out.stdout.is_empty());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        r#"{"scenarios": []}"#,
        r#"{"scenarios": [{"name": "a", "builder": {"kind": "jordan_shift", "dim": 3}, "m": 0}]}"#,
        r#"{"scenarios": [{"name": "a", "builder": {"kind": "jordan_shift", "dim": 3}, "m": 1, "expected": "maybe"}]}"#,
        r#"{"scenarios": [{"name": "a", "builder": {"kind": "hilbert_hotel"}, "m": 1}]}"#,
        r#"{"scenarios": [{"name": "a", "builder": {"kind": "jordan_shift", "dim": 3}, "m": 1, "colour": 1}]}"#,
    ] {
        let cfg = write_config(dir.path(), body);
        assert_eq!(wold(&["run", "--config", &cfg]).status.code(), Some(2), "{body}");
    }
    assert_eq!(wold(&["run", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(wold(&["run"]).status.code(), Some(2));
}

#[test]
fn matrix_literal_files_resolve_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut j = CMatrix::zeros(2, 2);
    j[(1, 0)] = c(1.0, 0.0);
    std::fs::create_dir(dir.path().join("ops")).unwrap();
    std::fs::write(dir.path().join("ops/j.json"), serde_json::to_string(&MatrixLiteral::from_matrix(&j)).unwrap())
        .unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"scenarios": [{"name": "file", "builder": {"kind": "matrix_literal", "files": ["ops/j.json"]}, "m": 1,
            "expected": {"verdict": "hypotheses_violated(regularity)", "dim_orbit": 2}}]}"#,
    );
    let out = wold(&["run", "--config", &cfg, "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn floats_are_printed_with_seventeen_digits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"scenarios": [{"name": "s", "builder": {"kind": "spherical_coisometry", "d": 3, "n": 2, "seed": 1}, "m": 1}]}"#,
    );
    let out = wold(&["run", "--config", &cfg, "--no-timestamp"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"rank\":1.0000000000000000e-10"), "{text}");
    let mut checked = 0;
    let re_float = text.split(['[', ']', ',', ':', '{', '}']).filter(|t| t.contains('e') && t.contains('.'));
    for token in re_float.filter(|t| t.chars().next().is_some_and(|ch| ch == '-' || ch.is_ascii_digit())) {
        let mantissa = token.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.len(), 18, "{token}");
        checked += 1;
    }
    assert!(checked > 20);
}

#[test]
fn overrides_apply_to_every_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"scenarios": [{"name": "j", "builder": {"kind": "jordan_shift", "dim": 4}, "m": 1, "max_degree": 1}]}"#,
    );
    let opts = RunOptions { tol: Some(1e-6), max_degree: Some(3), timestamp: false, parallel: 1 };
    let rep = cli::run(Path::new(&cfg), &opts).unwrap();
    let r = &rep.reports[0];
    assert_eq!(r.parameters.max_degree, Some(3));
    assert_eq!(r.parameters.tolerances.identity, 1e-6);
    assert_eq!(r.gram_degree, Some(3));
    let bad = RunOptions { tol: Some(-1.0), ..opts };
    assert!(cli::run(Path::new(&cfg), &bad).is_err());
}

#[test]
fn verify_identities_subcommand() {
    let out = wold(&["verify-identities", "--max-m", "3", "--max-n", "2", "--max-deg", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS weighted_binomial"));
    assert!(!text.contains("FAIL"));
    let json = wold(&["verify-identities", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["mutations_rejected"], true);
    assert_eq!(v["params"]["weighted_max_m"], 5);
}

#[test]
fn bundled_demo_config_passes() {
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/demo.json");
    let out = wold(&["run", "--config", cfg, "--no-timestamp", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 4);
}
