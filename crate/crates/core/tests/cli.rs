use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gwprobe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwprobe")).args(args).output().unwrap()
}

fn preset(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../presets")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("cfg.json");
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const TUNED: &str = r#""system": {"omega0": 1.0, "alpha_bar": 0.5, "gamma": 1.0, "delta": 0.0, "m": 1.0, "L": 1.0},
    "constants": {"G": 1e-4, "c": 10.0, "hbar": 1.0}"#;

#[test]
fn usage_errors_exit_64() {
    assert_eq!(gwprobe(&[]).status.code(), Some(64));
    assert_eq!(gwprobe(&["bogus", "--config", "x.json"]).status.code(), Some(64));
    assert_eq!(gwprobe(&["response"]).status.code(), Some(64));
    let cfg = preset("physical.json");
    assert_eq!(
        gwprobe(&["response", "--config", &cfg, "--format", "xml"])
            .status
            .code(),
        Some(64)
    );
    assert_eq!(gwprobe(&["--help"]).status.code(), Some(0));
}

#[test]
fn validation_errors_exit_1_and_name_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{{{TUNED}, \"extra\": 1}}"));
    let out = gwprobe(&["couplings", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("extra"));

    let cfg = write_config(
        dir.path(),
        &format!("{{{}}}", TUNED.replace("\"gamma\": 1.0", "\"gamma\": 0.0")),
    );
    let out = gwprobe(&["couplings", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));

    let missing = dir.path().join("nope.json");
    assert_eq!(
        gwprobe(&["couplings", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn numerical_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // Omega = 0 hits the free-mass pole.
    let cfg = write_config(
        dir.path(),
        &format!("{{{TUNED}, \"grid\": {{\"min\": 0, \"max\": 1, \"count\": 3, \"spacing\": \"lin\"}}}}"),
    );
    let out = gwprobe(&["response", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solve_tuned"));
}

#[test]
fn writes_output_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("s.svg");
    let cfg = write_config(
        dir.path(),
        &format!(
            "{{{TUNED}, \"grid\": {{\"min\": 0.1, \"max\": 10, \"count\": 20}}, \"plot\": {:?}}}",
            plot.to_str().unwrap()
        ),
    );
    let out_path = dir.path().join("s.csv");
    let out = gwprobe(&["spectrum", "--config", &cfg, "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("omega [rad/s],"));
    assert_eq!(csv.lines().count(), 21);
    assert!(std::fs::read_to_string(&plot).unwrap().contains("<polyline"));
}

#[test]
fn json_reports_echo_config_and_version() {
    let out = gwprobe(&["gauge-check", "--config", &preset("physical.json")]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["system"]["m"], 40.0);
    assert!(v["result"]["max_transfer_deviation"].as_f64().unwrap() <= 1e-10);

    let out = gwprobe(&["commutator", "--config", &preset("detuned.json")]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["system"]["m"], "infinite");
    assert!(v["result"]["max_deviation_with_gw"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["result"]["points"].as_array().unwrap().len(), 4);
}

#[test]
fn commutator_needs_detuned_free_mass() {
    let out = gwprobe(&["commutator", "--config", &preset("physical.json")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_thread_count_is_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_gwprobe"))
        .args(["couplings", "--config", &preset("physical.json")])
        .env("GWPROBE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(64));
}
