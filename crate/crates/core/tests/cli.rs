use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sepstab"));
    c.env_remove("SEPSTAB_DIM_CAP");
    c
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn machine(mode: &str, file: &str) -> (Output, Value) {
    let path = configs().join(file);
    let out = run(&[mode, "--config", path.to_str().unwrap(), "--format", "machine"]);
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out, v)
}

fn assert_error_line(out: &Output, kind: &str) {
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let lines: Vec<&str> = stderr.lines().collect();
    assert_eq!(lines.len(), 1, "{stderr}");
    let v: Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(v["error"]["kind"], kind, "{stderr}");
    assert!(v["error"]["message"].is_string());
}

#[test]
fn construct_bell_machine() {
    let (out, v) = machine("construct", "bell_construct.toml");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(v["schemaVersion"], 1);
    assert!(v["residual"]["PQ_minus_psi"].as_f64().unwrap() <= 1e-12);
    assert!(v["residual"]["commutator"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn certify_is_byte_deterministic() {
    let (a, v) = machine("certify", "bell_certify.toml");
    let (b, _) = machine("certify", "bell_certify.toml");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let adjusted = v["bounds"]["confidence_adjusted_bound"].as_f64().unwrap();
    assert!((adjusted - 0.8).abs() <= 0.15);
    assert_eq!(v["bounds"]["exact_bound"].as_f64().unwrap(), 0.8);
}

#[test]
fn channel_bound_identity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("id.toml");
    fs::write(
        &cfg,
        "epsilon = 0.05\ndelta = 0.01\nseed = 1\n[target]\ngenerator = \"bell\"\n[noise]\nname = \"identity\"\n",
    )
    .unwrap();
    let out_file = dir.path().join("report.json");
    let out = run(&[
        "channel-bound",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "machine",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(out_file).unwrap()).unwrap();
    assert_eq!(v["bounds"]["bound"].as_f64().unwrap(), 1.0);
}

#[test]
fn bundled_configs_pass() {
    for (mode, file) in [
        ("verify", "ghz3_verify.toml"),
        ("channel-bound", "qutrit_channel.toml"),
        ("channel-bound", "bell_kraus_channel.toml"),
        ("certify", "inline_certify.toml"),
    ] {
        let (out, v) = machine(mode, file);
        assert_eq!(out.status.code(), Some(0), "{file}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(v["passed"], true);
    }
}

#[test]
fn human_format_has_tables() {
    let path = configs().join("bell_construct.toml");
    let out = run(&["construct", "--config", path.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("sepstab construct  PASS"));
    assert!(text.contains("\nResiduals\nname "));
    assert!(text.contains("elapsed:"));
}

#[test]
fn failures_are_single_json_lines() {
    assert_error_line(&run(&["construct", "--config", "/definitely/missing.toml"]), "IoError");
    assert_error_line(&run(&["frobnicate"]), "UsageError");
    assert_error_line(&run(&["construct"]), "UsageError");

    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let bad_toml = write("bad.toml", "[target\n");
    assert_error_line(&run(&["construct", "--config", &bad_toml]), "ParseError");
    let no_seed = write("noseed.toml", "epsilon = 0.1\ndelta = 0.1\n[target]\ngenerator = \"bell\"\n");
    assert_error_line(&run(&["certify", "--config", &no_seed]), "ValidationError");
    let few =
        write("few.toml", "epsilon = 0.05\ndelta = 0.01\nseed = 1\nsamples = 10\n[target]\ngenerator = \"bell\"\n");
    assert_error_line(&run(&["certify", "--config", &few]), "InvalidParameters");
    let big = write("big.toml", "[target]\ngenerator = \"ghz\"\nparties = 4\n");
    let out = bin().env("SEPSTAB_DIM_CAP", "8").args(["construct", "--config", &big]).output().unwrap();
    assert_error_line(&out, "DimensionCap");
    let bad_kraus = write("k.toml", "kraus = [[[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]]\n");
    let uses = write(
        "uses.toml",
        &format!("epsilon = 0.1\ndelta = 0.1\nseed = 1\n[target]\ngenerator = \"bell\"\n[noise]\nkraus_file = \"{bad_kraus}\"\n"),
    );
    assert_error_line(&run(&["channel-bound", "--config", &uses]), "NotCPTP");
}

#[test]
fn help_exits_cleanly() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("channel-bound"));
}
