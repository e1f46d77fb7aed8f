//! End-to-end tests of the `qfim` binary: golden reports, exit codes,
//! determinism and the negative control.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qfim"))
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

fn compute(spec: &Path, extra: &[&str]) -> Output {
    bin().args(extra).arg("compute").arg(spec).output().expect("binary runs")
}

fn golden_specs() -> Vec<PathBuf> {
    let mut specs: Vec<PathBuf> = fs::read_dir(golden_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(".spec.json"))
        .collect();
    specs.sort();
    specs
}

fn report_path(spec: &Path) -> PathBuf {
    let s = spec.to_string_lossy();
    PathBuf::from(s.replace(".spec.json", ".report.json"))
}

/// Set `QFIM_UPDATE_GOLDEN=1` to rewrite the reports after an intended change.
#[test]
fn reports_match_golden_files_byte_for_byte() {
    let update = std::env::var_os("QFIM_UPDATE_GOLDEN").is_some();
    let specs = golden_specs();
    assert!(specs.len() >= 5);
    for spec in specs {
        let out = compute(&spec, &[]);
        assert_eq!(out.status.code(), Some(0), "{}: {}", spec.display(), String::from_utf8_lossy(&out.stderr));
        let golden = report_path(&spec);
        if update {
            fs::write(&golden, &out.stdout).unwrap();
            continue;
        }
        let expected = fs::read(&golden).unwrap();
        assert!(out.stdout == expected, "report for {} differs from golden file", spec.display());
    }
}

fn report(name: &str) -> Value {
    let text = fs::read_to_string(golden_dir().join(format!("{name}.report.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn at(v: &Value, path: &[&str], i: usize, j: usize) -> f64 {
    let mut cur = v;
    for key in path {
        cur = &cur[*key];
    }
    cur[i][j].as_f64().unwrap()
}

// The golden files are produced by the binary itself, so pin their key
// numbers to hand-derived values.
#[test]
fn golden_values_match_closed_forms() {
    let q = report("qubit");
    assert!((at(&q, &["pure_geometry", "h", "re"], 0, 0) - 0.25).abs() < 1e-12);
    assert!((at(&q, &["pure_geometry", "h", "re"], 1, 1) - 0.25).abs() < 1e-12);
    assert!((at(&q, &["pure_geometry", "h", "im"], 0, 1) - 0.25).abs() < 1e-12);
    assert!((at(&q, &["pure_geometry", "omega"], 0, 1) + 0.25).abs() < 1e-12);
    assert!((at(&q, &["quantum", "metric_part"], 1, 1) - 1.0).abs() < 1e-10);

    let b = report("bernoulli");
    assert!((at(&b, &["classical", "fisher"], 0, 0) - 1.0 / 0.21).abs() < 1e-9);
    let bt = report("bernoulli_table");
    assert!((at(&bt, &["classical", "fisher"], 0, 0) - 1.0 / 0.21).abs() < 1e-6);

    let p = report("phase_encoding");
    assert!((at(&p, &["pure_geometry", "g"], 0, 0) - 0.5).abs() < 1e-12);
    assert!((at(&p, &["pure_geometry", "dominance_gap"], 0, 0) - 0.5).abs() < 1e-12);
    assert!(at(&p, &["classical", "fisher"], 0, 0).abs() < 1e-12);
    assert!((at(&p, &["quantum", "metric_part"], 0, 0) - 2.0).abs() < 1e-9);
    let recovery = p["checks"].as_array().unwrap().iter().find(|c| c["name"] == "classical-recovery").unwrap();
    assert_eq!(recovery["status"], "not_applicable");

    let g = report("gaussian");
    assert!((at(&g, &["classical", "fisher"], 0, 0) - 1.0).abs() < 1e-4);
}

#[test]
fn repeated_runs_are_identical() {
    let spec = golden_dir().join("random_density.spec.json");
    let a = compute(&spec, &[]);
    let b = compute(&spec, &[]);
    assert_eq!(a.stdout, b.stdout);
    let v1 = bin().args(["verify", "--seed", "5", "--count", "2"]).output().unwrap();
    let v2 = bin().args(["verify", "--seed", "5", "--count", "2"]).output().unwrap();
    assert_eq!(v1.status.code(), Some(0));
    assert_eq!(v1.stdout, v2.stdout);
}

#[test]
fn out_flag_writes_same_bytes() {
    let spec = golden_dir().join("qubit.spec.json");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = bin().arg("compute").arg(&spec).arg("--out").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(fs::read(&path).unwrap(), fs::read(report_path(&spec)).unwrap());
}

#[test]
fn flipped_omega_fails_the_symplectic_check() {
    let spec = golden_dir().join("qubit.spec.json");
    let out = compute(&spec, &["--inject-fault", "flip-omega-sign"]);
    assert_eq!(out.status.code(), Some(2));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let check = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "symplectic-assembly")
        .unwrap();
    assert_eq!(check["status"], "fail");

    let v = bin()
        .args(["--inject-fault", "flip-omega-sign", "verify", "--seed", "1", "--count", "1"])
        .output()
        .unwrap();
    assert_eq!(v.status.code(), Some(2));
}

fn write_spec(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("spec.json");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn input_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"kind":"catalog","catalog":{"name":"bernoulli"},"theta":[1.5]}"#, "parameter 0"),
        (r#"{"kind":"catalog","catalog":{"name":"qubit"},"theta":[1.0]}"#, "dimension"),
        ("{\"kind\": \"catalog\",\n \"theta\": [0.1], \"extra\": 1}", "line 2"),
        (r#"{"kind":"probability","space":{"points":[0,1]},"theta":[0.3],"table":{"center":[0.7,0.3],"plus":[],"minus":[]}}"#, ""),
    ];
    for (text, needle) in cases {
        let out = compute(&write_spec(dir.path(), text), &[]);
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert_eq!(out.status.code(), Some(3), "{text}: {stderr}");
        assert!(out.stdout.is_empty());
        assert!(stderr.contains(needle), "{stderr}");
    }
    let missing = compute(&dir.path().join("nope.json"), &[]);
    assert_eq!(missing.status.code(), Some(3));
    let zero = bin().args(["verify", "--count", "0"]).output().unwrap();
    assert_eq!(zero.status.code(), Some(3));
}

#[test]
fn unnormalized_state_fails() {
    let dir = tempfile::tempdir().unwrap();
    let h = 1e-5;
    let psi = |t: f64| format!("[[{}, 0.0], [{}, 0.0]]", 1.1 * (t / 2.0).cos(), (t / 2.0).sin());
    let text = format!(
        r#"{{"kind":"pure_state","space":{{"points":[0,1]}},"theta":[0.8],
            "table":{{"steps":[{h}],"center":{},"plus":[{}],"minus":[{}]}}}}"#,
        psi(0.8),
        psi(0.8 + h),
        psi(0.8 - h)
    );
    let out = compute(&write_spec(dir.path(), &text), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn catalog_list_names_every_model() {
    let out = bin().args(["catalog", "list"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["bernoulli", "qubit", "phase_encoding", "gaussian_grid", "random_pure", "random_density"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}
