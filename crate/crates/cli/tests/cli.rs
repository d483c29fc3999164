use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str], catalog: Option<&std::path::Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_finsler-lab"));
    c.args(args).env_remove("FINSLER_LAB_CATALOG");
    if let Some(p) = catalog {
        c.env("FINSLER_LAB_CATALOG", p);
    }
    c.output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn check<'a>(v: &'a Value, name: &str) -> &'a Value {
    v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

const WITNESS: &str = r#"
[metric.witness]
description = "phi = 1 + s^2 does not solve the projective flatness equation"
mu = 0.0
lambda = 1.0
a = [0.2, 0.0, 0.0]
expected_k = 0.0
regularity = "regular"
family = { kind = "custom", expr = "1 + s^2" }
"#;

fn temp_catalog(src: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".toml").tempfile().unwrap();
    f.write_all(src.as_bytes()).unwrap();
    f
}

#[test]
fn verify_passes_with_exit_zero_and_full_schema() {
    let o = lab(&["verify", "funk", "--samples", "10", "--seed", "3"], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    for key in ["schema", "metric", "n", "samples", "seed", "rng", "checks", "k_expected", "k_fit_mean", "k_fit_max_dev", "pass", "wall_time_ms"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["schema"], "finsler-lab/1");
    assert_eq!(v["n"], 3);
    assert_eq!(v["pass"], true);
    for c in v["checks"].as_array().unwrap() {
        for key in ["name", "max_residual", "tolerance", "pass"] {
            assert!(c.get(key).is_some());
        }
    }
}

#[test]
fn reports_are_deterministic_across_execution_modes() {
    let strip = |o: &Output| {
        let mut v = json(o);
        v.as_object_mut().unwrap().remove("wall_time_ms");
        v
    };
    let a = lab(&["verify", "k1-example", "--samples", "12", "--seed", "42"], None);
    let b = lab(&["verify", "k1-example", "--samples", "12", "--seed", "42", "--sequential"], None);
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn unknown_names_and_bad_flags_exit_two() {
    assert_eq!(lab(&["verify", "no-such-metric"], None).status.code(), Some(2));
    assert_eq!(lab(&["verify", "funk", "--dim", "7"], None).status.code(), Some(2));
    assert_eq!(lab(&["pde-scan", "funk", "--grid", "20by20"], None).status.code(), Some(2));
    assert_eq!(lab(&["verify", "funk", "--tol", "nonsense=1e-3"], None).status.code(), Some(2));
}

#[test]
fn wrong_deformation_exits_two() {
    let src = r#"
[deformation.misrouted]
description = "kappa = 1 chart routed to the kappa = 0 deformation"
deformation = "parallel"
mu = -1.0
lambda = 1.0
a = [0.0, 0.0, 0.0]
"#;
    let f = temp_catalog(src);
    let o = lab(&["deform-check", "misrouted"], Some(f.path()));
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn non_solution_fails_with_residual_two() {
    let f = temp_catalog(WITNESS);
    let o = lab(&["pde-scan", "witness", "--grid", "4x4"], Some(f.path()));
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    let pde = check(&v, "pde");
    assert_eq!(pde["pass"], false);
    assert!((pde["max_residual"].as_f64().unwrap() - 2.0).abs() < 1e-9, "{pde}");

    let o = lab(&["verify", "witness", "--samples", "5"], Some(f.path()));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
}

#[test]
fn deform_check_and_scan_pass() {
    let o = lab(&["deform-check", "parallel-k0", "--samples", "8"], None);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["deformation"], "parallel");
    assert!(check(&v, "identity")["max_residual"].as_f64().unwrap() < 1e-10);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.json");
    let o = lab(&["pde-scan", "km1-example-1", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["grid"], serde_json::json!([20, 20]));
    assert!(check(&v, "ode-r2")["pass"].as_bool().unwrap());
}

#[test]
fn list_shows_builtin_and_user_entries() {
    let f = temp_catalog(WITNESS);
    let o = lab(&["list", "--json"], Some(f.path()));
    assert_eq!(o.status.code(), Some(0));
    let names: Vec<String> = json(&o)
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap().to_string())
        .collect();
    assert!(names.iter().any(|n| n == "funk"));
    assert!(names.iter().any(|n| n == "witness"));

    let dup = temp_catalog(&WITNESS.replace("witness", "funk"));
    assert_eq!(lab(&["list"], Some(dup.path())).status.code(), Some(2));
}

#[test]
fn info_lists_checks() {
    let o = lab(&["info", "k0-example-2"], None);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let names: Vec<&str> = v["checks"]["verify"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert!(names.contains(&"k-psi"));
    assert!(!names.contains(&"spray"), "spray is undefined for a degenerate metric");
}
