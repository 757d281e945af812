use std::fs;
use std::process::Command;

fn mmp(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mmp")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

const CONFIG: &str = r#"
[grid]
n = 8
length = 25.132741228718345

[params]
mu = 1.0
gamma = 1.0
chi = 0.5
nu = 1.0

[init]
kind = "decay-character"
r_star = 0.0
seed = 3
amplitude = 0.01

[time]
dt = 0.25
t_end = 5.0
output_every = 1

[output]
dir = "unused"
"#;

#[test]
fn usage_errors_exit_two() {
    assert_eq!(mmp(&[]).0, 2);
    assert_eq!(mmp(&["simulate"]).0, 2);
    assert_eq!(mmp(&["no-such-command"]).0, 2);
    assert_eq!(mmp(&["fit-rate", "--csv", "/nonexistent.csv", "--column", "x", "--window", "1", "2"]).0, 2);
    assert_eq!(mmp(&["--help"]).0, 0);
}

#[test]
fn symbol_check_reports_the_bound_failure() {
    let (code, out, _) = mmp(&["symbol-check", "--samples", "100"]);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["bound"]["violations"].as_u64().unwrap() > 0);
    assert!(v["bound"]["lemma_constant"].as_f64().unwrap() > 0.0);
}

#[test]
fn decay_char_and_selftest() {
    let (code, out, _) = mmp(&["decay-char", "--r", "-0.5", "--expect", "-0.5"]);
    assert_eq!(code, 0, "{out}");
    let (code, _, _) = mmp(&["decay-char", "--profile", "log-oscillating", "--expect", "0"]);
    assert_eq!(code, 1);
    assert_eq!(mmp(&["selftest"]).0, 0);
}

#[test]
fn simulate_fit_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let run = dir.path().join("run");
    let (code, out, err) = mmp(&["compare-linear", "--config", cfg.to_str().unwrap(), "--out-dir", run.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}{err}");
    for name in ["config.toml", "norms.csv", "compare.csv", "manifest.json"] {
        assert!(run.join(name).exists(), "{name}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["summary"]["rows"], 21);

    let csv = run.join("norms.csv");
    let (code, out, _) = mmp(&["fit-rate", "--csv", csv.to_str().unwrap(), "--column", "l2_z_sq", "--window", "1", "5"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["fit"]["exponent"].as_f64().unwrap() < 0.0);

    let (code, out, _) = mmp(&["report", "--run", run.to_str().unwrap(), "--window", "1", "5"]);
    assert!(code == 0 || code == 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["mode"], "torus");
}

#[test]
fn linear_decay_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lin.csv");
    let (code, stdout, _) = mmp(&["linear-decay", "--r", "0", "--points", "40", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("t,l2_z_sq,l2_u_sq,l2_w_sq,l2_b_sq,h1_z_sq\n"));
    assert_eq!(text.lines().count(), 42);
}
