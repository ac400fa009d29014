use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    out: PathBuf,
    stderr: String,
}

fn run_in(dir: &TempDir, command: &str, config: &str, extra: &[&str]) -> Run {
    let cfg = dir.path().join(format!("{command}.json"));
    fs::write(&cfg, config).unwrap();
    let out = dir.path().join(format!("out-{command}-{}", extra.len()));
    let output = Command::new(env!("CARGO_BIN_EXE_tropifs"))
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .env_remove("TROPIFS_THREADS")
        .output()
        .unwrap();
    Run {
        code: output.status.code().expect("exited normally"),
        out,
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
    }
}

fn run(command: &str, config: &str) -> (TempDir, Run) {
    let dir = TempDir::new().unwrap();
    let r = run_in(&dir, command, config, &[]);
    (dir, r)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

const SYS_A: &str = r#"{"system": {"sys_a": {}}, "invariant": {"mode": "constant"}}"#;

// Two points, one map fixing each; the weight at p1 peaks at -0.5, so
// normalization fails there.
const BROKEN: &str = r#"{"system": {"inline": {
    "space": {"explicit": {"labels": ["a", "b"], "dist": [[0, 1], [1, 0]], "resolution": 0}},
    "index_dist": [[0, 2], [2, 0]],
    "maps": [[0, 0], [1, 1]],
    "weights": [[0, -0.5], [-1, -1]]}}}"#;

#[test]
fn validate_binary_example() {
    let (_d, r) = run("validate", r#"{"system": {"section31": {"depth": 4}}}"#);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r.out.join("validation.json"));
    assert_eq!(v["valid"], true);
    assert_eq!(v["gamma_hat"], 0.5);
    assert_eq!(v["points"], 16);
}

#[test]
fn validate_broken_normalization() {
    let (_d, r) = run("validate", BROKEN);
    assert_eq!(r.code, 2);
    let v = json(&r.out.join("validation.json"));
    assert_eq!(v["valid"], false);
}

#[test]
fn broken_system_fails_other_commands_as_domain_error() {
    let (_d, r) = run("mane", BROKEN);
    assert_eq!(r.code, 2);
}

#[test]
fn missing_config_file() {
    let dir = TempDir::new().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_tropifs"))
        .args(["validate", "--config"])
        .arg(dir.path().join("absent.json"))
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(3));
    assert!(!String::from_utf8_lossy(&status.stderr).is_empty());
}

#[test]
fn malformed_config_and_usage() {
    let (_d, r) = run("validate", r#"{"system": {"sys_a": {}}, "tol_aubry": -1}"#);
    assert_eq!(r.code, 3);
    let (_d, r) = run("validate", r#"{"system": {"sys_a": {}, "section31": {"depth": 3}}}"#);
    assert_eq!(r.code, 3);
    let (_d, r) = run("mane", r#"{"fuzzy": {"tol": 1e-9}}"#);
    assert_eq!(r.code, 3);
    let bad = Command::new(env!("CARGO_BIN_EXE_tropifs")).arg("nonsense").output().unwrap();
    assert_eq!(bad.status.code(), Some(3));
    let help = Command::new(env!("CARGO_BIN_EXE_tropifs")).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn mane_sys_a() {
    let (_d, r) = run("mane", SYS_A);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let a = json(&r.out.join("aubry.json"));
    assert_eq!(a["aubry"], serde_json::json!([{"index": 0, "label": "p0"}]));
    let rows = csv_rows(&r.out.join("S.csv"));
    assert_eq!(rows, vec![vec!["p0", "0", "0"], vec!["p1", "-1", "-1"]]);
}

#[test]
fn mane_binary_depth3() {
    let (_d, r) = run("mane", r#"{"system": {"section31": {"depth": 3}}}"#);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let a = json(&r.out.join("aubry.json"));
    let labels: Vec<&str> = a["aubry"].as_array().unwrap().iter().map(|p| p["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["111", "222"]);
}

#[test]
fn mane_writes_bottom_tokens() {
    // Constant maps onto p0 leave p1 unreachable.
    let cfg = r#"{"system": {"inline": {
        "space": {"explicit": {"labels": ["p0", "p1"], "dist": [[0, 1], [1, 0]], "resolution": 0}},
        "index_dist": [[0]], "maps": [[0, 0]], "weights": [[0, 0]]}}}"#;
    let (_d, r) = run("mane", cfg);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = csv_rows(&r.out.join("S.csv"));
    assert_eq!(rows[1], vec!["p1", "-inf", "-inf"]);
}

#[test]
fn invariant_constant_sys_a() {
    let (_d, r) = run("invariant", SYS_A);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let d = json(&r.out.join("density.json"));
    assert_eq!(d["densities"][0]["values"], serde_json::json!([0.0, -1.0]));
    assert_eq!(json(&r.out.join("verify.json"))["all_passed"], true);
}

#[test]
fn invariant_enumerate_two_alphas() {
    let cfg = r#"{"system": {"section31": {"depth": 5}}, "invariant": {"mode": "enumerate", "alphas": [0, 0.5]}}"#;
    let (_d, r) = run("invariant", cfg);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let d = json(&r.out.join("density.json"));
    let ds = d["densities"].as_array().unwrap();
    assert_eq!(ds.len(), 2);
    let v = json(&r.out.join("verify.json"));
    assert_eq!(v["reports"].as_array().unwrap().len(), 2);
    assert_eq!(v["all_passed"], true);
    let boundary: Vec<f64> = ds.iter().map(|e| e["boundary"]["22222"].as_f64().unwrap()).collect();
    assert_eq!(boundary, [0.0, -0.5]);
}

#[test]
fn invariant_boundary_by_label() {
    let cfg = r#"{"system": {"section31": {"depth": 3}},
        "invariant": {"mode": "boundary", "boundary": {"anchor": "111", "values": {"111": 0, "222": -0.25}}}}"#;
    let (_d, r) = run("invariant", cfg);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let d = json(&r.out.join("density.json"));
    let labels: Vec<&str> = d["labels"].as_array().unwrap().iter().map(|l| l.as_str().unwrap()).collect();
    let values = d["densities"][0]["values"].as_array().unwrap();
    let at = |w: &str| values[labels.iter().position(|l| *l == w).unwrap()].as_f64().unwrap();
    assert_eq!(at("111"), 0.0);
    assert_eq!(at("222"), -0.25);
    assert_eq!(at("121"), -2.0);
    assert_eq!(at("212"), -2.25);

    let unknown = cfg.replace("\"222\"", "\"999\"");
    let (_d, r) = run("invariant", &unknown);
    assert_eq!(r.code, 3);
}

#[test]
fn invariant_constant_on_place_dependent_system() {
    let cfg = r#"{"system": {"section31": {"depth": 3}}, "invariant": {"mode": "constant"}}"#;
    let (_d, r) = run("invariant", cfg);
    assert_eq!(r.code, 2);
}

#[test]
fn fuzzy_sys_a() {
    let (_d, r) = run("fuzzy", SYS_A);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = csv_rows(&r.out.join("attractor.csv"));
    assert_eq!(rows[0], vec!["p0", "1"]);
    let u1: f64 = rows[1][1].parse().unwrap();
    assert_eq!(u1, (-1.0f64).exp());
    let summary = json(&r.out.join("fuzzy.json"));
    assert_eq!(summary["converged"], true);
}

#[test]
fn fuzzy_from_fixed_point_has_empty_trace() {
    let cfg = r#"{"system": {"section31": {"depth": 5}}, "fuzzy": {"start": {"lambda_alpha": 0.25}}}"#;
    let (_d, r) = run("fuzzy", cfg);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let trace = csv_rows(&r.out.join("trace.csv"));
    assert!(trace.is_empty(), "{trace:?}");
    assert_eq!(json(&r.out.join("fuzzy.json"))["iterations"], 1);
}

#[test]
fn fuzzy_trace_ratios_within_contraction_for_constant_weights() {
    let cfg = r#"{"system": {"shift": {"symbols": 2, "depth": 6, "maps": [
        {"prefix": [1], "weight": 0}, {"prefix": [2], "weight": -0.75}]}}}"#;
    let (_d, r) = run("fuzzy", cfg);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let s = json(&r.out.join("fuzzy.json"));
    let gamma = s["gamma_hat"].as_f64().unwrap();
    for row in csv_rows(&r.out.join("trace.csv")) {
        if let Ok(ratio) = row[2].parse::<f64>() {
            assert!(ratio <= gamma, "ratio {ratio} above {gamma}");
        }
    }
}

#[test]
fn fuzzy_nonconvergence_keeps_trace() {
    let cfg = r#"{"system": {"grid": {"a": 0, "b": 1, "n": 65, "maps": [
        {"slope": 0.25, "offset": 0, "weight": 0}, {"slope": 0.25, "offset": 0.75, "weight": -0.5}]}},
        "fuzzy": {"max_iters": 1}}"#;
    let (_d, r) = run("fuzzy", cfg);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert_eq!(csv_rows(&r.out.join("trace.csv")).len(), 1);
    assert_eq!(json(&r.out.join("fuzzy.json"))["converged"], false);
}

#[test]
fn demo31_report() {
    let (_d, r) = run("demo31", r#"{"demo31": {"depth": 5, "alphas": [0, 0.25, 0.5]}}"#);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let d = json(&r.out.join("demo31.json"));
    assert_eq!(d["all_invariant"], true);
    assert_eq!(d["all_distinct"], true);
    assert_eq!(d["pairwise"].as_array().unwrap().len(), 3);

    let (_d, r) = run("demo31", r#"{"demo31": {"depth": 5, "alphas": [1.5]}}"#);
    assert_eq!(r.code, 3);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let cfg = r#"{"system": {"random": {"space": {"grid": {"a": 0, "b": 1, "n": 40}}, "num_maps": 3, "seed": 11}},
        "invariant": {"mode": "enumerate", "levels": [0, -0.5, "-inf"]}}"#;
    let dir = TempDir::new().unwrap();
    for cmd in ["validate", "mane", "invariant", "fuzzy"] {
        let a = run_in(&dir, cmd, cfg, &[]);
        let b = run_in(&dir, cmd, cfg, &["--threads", "3"]);
        assert_eq!(a.code, b.code, "{cmd}: {} / {}", a.stderr, b.stderr);
        let mut names: Vec<_> = fs::read_dir(&a.out).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            assert_eq!(fs::read(a.out.join(&name)).unwrap(), fs::read(b.out.join(&name)).unwrap(), "{cmd}: {name:?}");
        }
    }
}

#[test]
fn seed_flag_overrides_config_seed() {
    let cfg = r#"{"system": {"random": {"space": {"shift": {"symbols": 2, "depth": 4}}, "num_maps": 3, "seed": 1}}}"#;
    let dir = TempDir::new().unwrap();
    let a = run_in(&dir, "mane", cfg, &[]);
    let b = run_in(&dir, "mane", cfg, &["--seed", "2"]);
    let c = run_in(&dir, "mane", &cfg.replace("\"seed\": 1", "\"seed\": 2"), &["--seed", "2", "--threads", "1"]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    let s = |r: &Run| fs::read(r.out.join("S.csv")).unwrap();
    assert_ne!(s(&a), s(&b));
    assert_eq!(s(&b), s(&c));
}

#[test]
fn shipped_configs_run() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut files: Vec<PathBuf> = fs::read_dir(&configs).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert!(!files.is_empty());
    let dir = TempDir::new().unwrap();
    for file in files {
        let config = fs::read_to_string(&file).unwrap();
        for cmd in ["validate", "mane", "invariant", "fuzzy"] {
            let r = run_in(&dir, cmd, &config, &[]);
            assert_eq!(r.code, 0, "{} {cmd}: {}", file.display(), r.stderr);
        }
    }
}
