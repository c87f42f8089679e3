//! End-to-end checks of the binary: spec'd subcommands, exit codes,
//! determinism of emitted bytes, and config-file precedence.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_annulus-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("annulus-lab-test-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn points_csv_matches_fixture() {
    let out = run(&["points", "--lambda", "5", "--delta", "0.5", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y"));
    assert_eq!(lines.count(), 28);
}

#[test]
fn points_json_roundtrip() {
    let out = run(&["points", "--lambda", "5", "--delta", "0.5", "--format", "json"]);
    assert!(out.status.success());
    let pairs: Vec<[i64; 2]> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(pairs.len(), 28);
    assert!(pairs.windows(2).all(|w| w[0] <= w[1]), "sorted output");
}

#[test]
fn regions_status_json() {
    let out = run(&["regions", "--which", "A", "--p", "12", "--alpha", "0.2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"proved-with-eps\""), "got: {text}");
}

#[test]
fn exit_codes() {
    // Missing delta/alpha: argument error → 2.
    let out = run(&["points", "--lambda", "5"]);
    assert_eq!(out.status.code(), Some(2));
    // Both provided: also 2.
    let out = run(&["points", "--lambda", "5", "--delta", "0.5", "--alpha", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    // Clap-level unknown flag is a usage error (clap exits 2 as well).
    let out = run(&["points", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    // Capacity violation → 3.
    let out = run(&["energy", "--lambda", "900000", "--delta", "0.9", "--m", "2"]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn byte_identical_reruns() {
    let args = ["sweep", "--quantity", "point-count", "--alpha", "0.5", "--lmin", "8", "--lmax", "64"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);

    // Thread cap must not change the bytes.
    let c = bin().args(args).env("ANNULUS_LAB_THREADS", "1").output().unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn expsum_deterministic_under_seed() {
    let args =
        ["expsum", "--lambda", "64", "--delta", "0.0625", "--samples", "8", "--seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "stderr: {}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("M,emp_sup,envelope,trivial,muller"));
}

#[test]
fn sweep_writes_rows_and_fit() {
    let dir = tmpdir("sweep");
    let out_path = dir.join("rows.csv");
    let out = run(&[
        "sweep",
        "--quantity",
        "energy",
        "--m",
        "2",
        "--alpha",
        "0.4",
        "--lmin",
        "16",
        "--lmax",
        "128",
        "--out",
        out_path.to_str().unwrap(),
        "--plot",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    // Fit JSON lands on stdout when rows go to a file.
    let fit: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(fit.get("slope").is_some());
    let rows = std::fs::read_to_string(&out_path).unwrap();
    assert!(rows.starts_with("lambda,delta,p,quantity,value,method,error"));
    assert_eq!(rows.lines().count(), 1 + 4); // header + λ ∈ {16,32,64,128}
    // The plot was emitted next to the rows, deterministically.
    let svg_path = out_path.with_extension("svg");
    let svg_a = std::fs::read(&svg_path).unwrap();
    assert!(svg_a.starts_with(b"<svg"));
    let out2 = run(&[
        "sweep", "--quantity", "energy", "--m", "2", "--alpha", "0.4", "--lmin", "16",
        "--lmax", "128", "--out", out_path.to_str().unwrap(), "--plot",
    ]);
    assert!(out2.status.success());
    assert_eq!(svg_a, std::fs::read(&svg_path).unwrap());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn config_file_fills_and_flags_override() {
    let dir = tmpdir("config");
    let cfg_path = dir.join("run.conf");
    std::fs::write(&cfg_path, "lambda=5\ndelta=0.5\nformat=csv\n").unwrap();
    let out = run(&["points", "--config", cfg_path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 29);

    // A flag overrides the file: δ = 0.01 keeps only the 12-point shell.
    let out = run(&[
        "points",
        "--config",
        cfg_path.to_str().unwrap(),
        "--delta",
        "0.01",
    ]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 13);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn kernel_norm_and_energy_json() {
    let out = run(&["kernel-norm", "--lambda", "5", "--delta", "0.5", "--p", "4"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["support_size"], 28);
    assert_eq!(v["parseval"]["method"], "parseval");

    let out = run(&["energy", "--lambda", "5", "--delta", "0.5", "--m", "2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["m"], 2);
    assert_eq!(v["set_size"], 28);
    // Energy is serialized as a decimal string.
    assert!(v["energy"].is_string());
}

#[test]
fn caps_and_parabola_commands() {
    let out = run(&["caps", "--lambda", "40", "--delta", "0.3", "--format", "csv"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("scale,s,m,regime,count,ratio"));

    let out = run(&[
        "points", "--curve", "parabola", "--lambda", "100", "--delta", "1e-6",
    ]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 22); // header + 21
}
