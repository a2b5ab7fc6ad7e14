use std::path::Path;
use std::process::{Command, Output};

fn qndanneal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qndanneal")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut full: Vec<&str> = args.to_vec();
    let out = dir.to_str().unwrap();
    full.extend(["--out", out]);
    qndanneal(&full)
}

fn meta(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("meta.json")).unwrap()).unwrap()
}

fn column(dir: &Path, file: &str, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(dir.join(file)).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].parse().unwrap()).collect()
}

const FAST_LZ: &[&str] = &["--t-grid", "1:8:4", "--steps", "400"];

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(qndanneal(&[]).status.code(), Some(2));
    assert_eq!(qndanneal(&["warp"]).status.code(), Some(2));
    assert_eq!(qndanneal(&["coherence", "--bogus"]).status.code(), Some(2));
    assert_eq!(qndanneal(&["coherence", "--mode", "partial"]).status.code(), Some(2));
    assert_eq!(qndanneal(&["coherence", "--t-grid", "0:5:4:log"]).status.code(), Some(2));
    assert_eq!(qndanneal(&["tts", "--x0", "1", "--x0", "2"]).status.code(), Some(2));
    assert_eq!(qndanneal(&["x0-scan", "--preset", "lz"]).status.code(), Some(2));
    assert_eq!(qndanneal(&["coherence", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
    assert_eq!(qndanneal(&["--help"]).status.code(), Some(0));
}

#[test]
fn zero_coupling_gives_identical_coherence_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["coherence", "--x0", "0", "--t-grid", "0:5:26:lin", "--steps", "500"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let a = column(dir.path(), "coherence.csv", "coherence_meter");
    let b = column(dir.path(), "coherence.csv", "coherence_coherent");
    assert_eq!(a.len(), 26);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn meter_lowers_lz_coherence() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["coherence", "--x0", "2", "--t-grid", "0:20:81:lin", "--steps", "2000"]);
    assert_eq!(o.status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut args = vec!["fidelity-scan"];
    args.extend(FAST_LZ);
    assert_eq!(run_in(a.path(), &args).status.code(), Some(0));
    assert_eq!(run_in(b.path(), &args).status.code(), Some(0));
    for f in ["fidelity.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
    assert_eq!(meta(a.path())["content_hash"], meta(b.path())["content_hash"]);
}

#[test]
fn csv_floats_carry_seventeen_digits() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["fidelity-scan"];
    args.extend(FAST_LZ);
    run_in(dir.path(), &args);
    let text = std::fs::read_to_string(dir.path().join("fidelity.csv")).unwrap();
    let field = text.lines().nth(1).unwrap().split(',').nth(2).unwrap();
    let mantissa = field.split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{field}");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 5, "steps": 300, "t_grid": {"min": 1.0, "max": 4.0, "count": 3, "log": true}}"#)
        .unwrap();
    let out = dir.path().join("run");
    let o = run_in(&out, &["fidelity-scan", "--config", cfg.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = meta(&out);
    assert_eq!(m["seed"], 7);
    assert_eq!(m["config"]["steps"], 300);
    assert_eq!(m["config"]["t_grid"]["count"], 3);
}

#[test]
fn config_for_another_experiment_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"experiment": "tts"}"#).unwrap();
    assert_eq!(qndanneal(&["gadget", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn meta_json_reproduces_the_run() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let mut args = vec!["omega-scan", "--omega", "0", "--omega", "0.5", "--seed", "3"];
    args.extend(FAST_LZ);
    assert_eq!(run_in(first.path(), &args).status.code(), Some(0));
    let meta_path = first.path().join("meta.json");
    let o = run_in(second.path(), &["omega-scan", "--config", meta_path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(meta(first.path())["content_hash"], meta(second.path())["content_hash"]);
    assert_eq!(meta(second.path())["config"]["omega"], serde_json::json!([0.0, 0.5]));
}

#[test]
fn gadget_checks_pass_for_positive_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["gadget", "--coefficient", "0.7"]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("PASS ground_manifold"), "{stdout}");
    assert!(stdout.contains("PASS gap_ratio"), "{stdout}");
    let ground = csv::Reader::from_path(dir.path().join("gadget_decomposed.csv")).unwrap().records().count();
    assert_eq!(ground, 16);
}

#[test]
fn negative_gadget_coefficient_is_informational() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["gadget", "--coefficient", "-1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("INFO ground_manifold"));
}

#[test]
fn gadget_reads_problem_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("problem.json");
    std::fs::write(
        &p,
        r#"{"n": 4, "J": [[0,0.2,0,0],[0.2,0,0,0],[0,0,0,-0.1],[0,0,-0.1,0]], "h": [0.1,-0.3,0.2,0],
            "three_body": [{"sites": [1, 2, 3], "c": 0.5}]}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let o = run_in(&out, &["gadget", "--problem", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS ground_manifold"));
}

#[test]
fn lz_check_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["lz-check", "--x0", "0", "--x0", "1", "--t-grid", "4:40:4", "--steps", "8000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(column(dir.path(), "lz.csv", "v").len(), 8);
}

#[test]
fn uncoupled_tts_ratio_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["tts", "--mode", "none", "--n-qubits", "2", "--instances", "2", "--steps", "300"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(column(dir.path(), "tts_summary.csv", "mean_ratio"), vec![1.0]);
}

#[test]
fn spectrum_branches_rescale() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["spectrum", "--t-grid", "0:20:21:lin"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS branch_rescaling"));
}
