use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nonholonomic_cli::output::embedded_config;
use nonholonomic_cli::{run, RunConfig};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nonholonomic"));
    c.env_remove("NONHOLONOMIC_TOLERANCE");
    c
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn error_of(out: &Output) -> (i32, Value) {
    let code = out.status.code().expect("exit code");
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is error JSON");
    (code, v["error"].clone())
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn tensors_on_the_sphere() {
    let out = bin().args(["tensors", "--chart", "sphere.json", "--at", "1.0,0.5"]).output().unwrap();
    let doc = json_stdout(&out);
    let r = &doc["result"];
    let (s, c) = (1.0f64.sin(), 1.0f64.cos());
    assert!((f(&r["metric"][0][0]) - 1.0).abs() < 1e-14);
    assert!((f(&r["metric"][1][1]) - s * s).abs() < 1e-14);
    assert!(f(&r["metric"][0][1]).abs() < 1e-14);
    // Γ̄_φφ^θ = −sinθ cosθ and Γ̄_θφ^φ = cot θ
    assert!((f(&r["christoffel"][1][1][0]) + s * c).abs() < 1e-12);
    assert!((f(&r["christoffel"][0][1][1]) - c / s).abs() < 1e-12);
    assert!((f(&r["scalar_curvature"]) - 2.0).abs() < 1e-10);
    for key in ["torsion", "contortion", "affine_connection", "cartan_curvature", "riemann_curvature", "einstein"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(doc["config"]["at"], serde_json::json!([1.0, 0.5]));
    assert_eq!(doc["config"]["tolerance"], "default");
}

#[test]
fn spectrum_on_the_ring() {
    let out = bin().args(["spectrum", "--manifold", "ring", "--r", "1", "--measure", "qep"]).output().unwrap();
    let doc = json_stdout(&out);
    let levels = doc["result"]["levels"].as_array().unwrap();
    let deg: Vec<u64> = levels.iter().map(|l| l["degeneracy"].as_u64().unwrap()).collect();
    assert_eq!(deg, vec![1, 2, 2, 2]);
    for (m, l) in levels.iter().enumerate().skip(1) {
        let exact = (m * m) as f64 / 2.0;
        assert!((f(&l["energy"]) - exact).abs() < 0.01 * exact);
    }
    assert_eq!(doc["result"]["measure"], "qep");
}

#[test]
fn burgers_on_the_dislocation() {
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("square.json");
    std::fs::write(&lp, "[[-1,-1],[1,-1],[1,1],[-1,1]]").unwrap();
    let out = bin()
        .args(["burgers", "--chart", "dislocation.json", "--loop"])
        .arg(&lp)
        .output()
        .unwrap();
    let r = json_stdout(&out)["result"].clone();
    let eps = 0.1;
    assert!(f(&r["b"][0]).abs() < 1e-6);
    assert!((f(&r["b"][1]) - 2.0 * std::f64::consts::PI * eps).abs() < 1e-6);
    assert!((f(&r["b_over_2pi"][1]) - eps).abs() < 1e-6);
    assert!((f(&r["winding"]["number"]) - 1.0).abs() < 1e-9);
}

#[test]
fn chart_file_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad_dim = dir.path().join("triad.json");
    std::fs::write(&bad_dim, r#"{"dim":2,"kind":"triad","exprs":["1","0","1"]}"#).unwrap();
    let out = bin().args(["tensors", "--at", "1,1", "--chart"]).arg(&bad_dim).output().unwrap();
    let (code, e) = error_of(&out);
    assert_eq!(code, 2);
    assert_eq!(e["kind"], "dimension_mismatch");

    let bad_fn = dir.path().join("frob.json");
    std::fs::write(&bad_fn, r#"{"dim":2,"kind":"map","exprs":["q1*frob(q2)","q2"]}"#).unwrap();
    let out = bin().args(["tensors", "--at", "1,1", "--chart"]).arg(&bad_fn).output().unwrap();
    let (code, e) = error_of(&out);
    assert_eq!(code, 2);
    assert_eq!(e["kind"], "parse");
    assert!(e["message"].as_str().unwrap().contains("frob"));
    assert_eq!(e["exit_code"], 2);

    let polar = dir.path().join("polar.json");
    std::fs::write(&polar, r#"{"dim":2,"kind":"map","exprs":["q1*cos(q2)","q1*sin(q2)"]}"#).unwrap();
    let out = bin().args(["tensors", "--at", "2,0.3", "--chart"]).arg(&polar).output().unwrap();
    let r = json_stdout(&out)["result"].clone();
    assert!((f(&r["metric"][1][1]) - 4.0).abs() < 1e-12);
}

#[test]
fn numeric_failures_exit_with_three() {
    let out = bin().args(["tensors", "--chart", "polar", "--at", "0,1"]).output().unwrap();
    let (code, e) = error_of(&out);
    assert_eq!(code, 3);
    assert_eq!(e["exit_code"], 3);
    let out = bin()
        .args(["spectrum", "--manifold", "ring", "--points", "8", "--ladder", "0.01"])
        .output()
        .unwrap();
    let (code, e) = error_of(&out);
    assert_eq!(code, 3);
    assert_eq!(e["kind"], "grid_too_coarse");
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["frobnicate"],
        vec!["tensors", "--chart", "polar", "--at", "1,x"],
        vec!["tensors", "--chart", "polar", "--at", "1,2,3"],
        vec!["tensors", "--chart", "nowhere", "--at", "1,2"],
        vec!["tensors", "--chart", "polar", "--at", "1,2", "--tolerance", "sloppy"],
        vec!["geodesic", "--chart", "polar", "--at", "1,0", "--velocity", "0,1", "--step", "-0.1"],
        vec!["spectrum", "--manifold", "ring", "--measure", "weird"],
    ] {
        let out = bin().args(&args).output().unwrap();
        let (code, e) = error_of(&out);
        assert_eq!(code, 2, "{args:?}: {e}");
    }
    assert!(bin().arg("--help").output().unwrap().status.success());
    assert!(bin().arg("--version").output().unwrap().status.success());
}

#[test]
fn trajectory_csv_has_header_and_config() {
    let out = bin()
        .args(["geodesic", "--chart", "polar", "--at", "1,0", "--velocity", "0,1", "--t-end", "0.5", "--step", "0.1"])
        .args(["--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: "));
    assert_eq!(lines.next().unwrap(), "t,q1,q2,qdot1,qdot2");
    assert_eq!(lines.count(), 6);
    let cfg = embedded_config(&text).unwrap();
    assert_eq!(cfg.step, Some(0.1));
}

#[test]
fn output_files_embed_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.json");
    let out = bin()
        .args(["autoparallel", "--chart", "synthetic-torsion", "--param", "alpha=0.2", "--at", "0.1,0"])
        .args(["--velocity", "1,1", "--output"])
        .arg(&target)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    let cfg = embedded_config(&text).unwrap();
    assert_eq!(cfg.params.get("alpha"), Some(&0.2));
    assert_eq!(cfg, RunConfig::from_json(&cfg.to_json()).unwrap());
}

#[test]
fn tolerance_profile_comes_from_the_environment() {
    let out = bin()
        .env("NONHOLONOMIC_TOLERANCE", "strict")
        .args(["tensors", "--chart", "polar", "--at", "1,0"])
        .output()
        .unwrap();
    assert_eq!(json_stdout(&out)["config"]["tolerance"], "strict");
    let out = bin()
        .env("NONHOLONOMIC_TOLERANCE", "strict")
        .args(["tensors", "--chart", "polar", "--at", "1,0", "--tolerance", "loose"])
        .output()
        .unwrap();
    assert_eq!(json_stdout(&out)["config"]["tolerance"], "loose");
}

#[test]
fn variation_command_reports_delta_b() {
    let out = bin()
        .args(["variation", "--chart", "polar", "--at", "1,0", "--velocity", "0.3,1", "--step", "0.01"])
        .args(["--deltaq", "0.1*sin(pi*(t-ta)/(tb-ta))", "--deltaq", "0.05*t*(tb-t)"])
        .output()
        .unwrap();
    let r = json_stdout(&out)["result"].clone();
    assert!(f(&r["delta_b_max"]) < 1e-10);
    let out = bin()
        .args(["run", "--config"])
        .arg(configs_dir().join("variation_synthetic_torsion.json"))
        .output()
        .unwrap();
    let r = json_stdout(&out)["result"].clone();
    assert!(f(&r["delta_b_max"]) > 1e-5);
}

#[test]
fn amplitude_summarises_the_kernel() {
    let out = bin()
        .args(["amplitude", "--manifold", "ring", "--points", "128", "--epsilon", "0.02", "--slices", "5"])
        .output()
        .unwrap();
    let r = json_stdout(&out)["result"].clone();
    let (lo, hi) = (f(&r["row_sum_range"][0]), f(&r["row_sum_range"][1]));
    assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    let modes = r["modes"].as_array().unwrap();
    assert_eq!(modes.len(), 4);
    assert!((f(&modes[0]["eigenvalue"]) - 1.0).abs() < 1e-12);
    for md in modes {
        let lam = f(&md["eigenvalue"]);
        assert!((f(&md["eigenvalue_sliced"]) - lam.powi(5)).abs() < 1e-12);
    }
    // E_1 ≈ ħ²/(2Mr²) already at one slice
    assert!((f(&modes[1]["energy"]) - 0.5).abs() < 0.01);
}

#[test]
fn shipped_configs_round_trip_and_are_deterministic() {
    let dir = configs_dir();
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let cfg = RunConfig::load(&path).unwrap();
        let a = run(cfg.clone(), &dir).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let b = run(cfg, &dir).unwrap();
        assert_eq!(a.text, b.text, "{}", path.display());
        let back = embedded_config(&a.text).unwrap();
        assert_eq!(back, a.config, "{}", path.display());
        assert_eq!(back.clone().resolve().unwrap(), back);
        n += 1;
    }
    assert!(n >= 7);
}
