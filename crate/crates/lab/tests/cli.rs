use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(args)
        .env("LAB_OUTPUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn list_shows_twelve_presets() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["list"], dir.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().next().unwrap().starts_with("rearrange-oracle"));
    assert!(text.lines().last().unwrap().starts_with("confinement"));
}

#[test]
fn rearrange_oracle_passes_and_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = lab(&["run", "--preset", "rearrange-oracle", "--set", "seed=7"], d.path());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let s = summary(a.path());
    assert_eq!(s["status"], "pass");
    assert_eq!(s["checks"][0]["metrics"]["matches"], 200.0);
    for f in ["summary.json", "norms.csv", "norms.svg"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let settings = |d: &Path| {
        let text = fs::read_to_string(d.join("config.toml")).unwrap();
        text.lines().filter(|l| !l.starts_with("dir =")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(settings(a.path()), settings(b.path()));
}

#[test]
fn flatness_reports_profile_and_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["run", "--preset", "flatness", "--set", "potential.sweep=[2.0]"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let s = summary(dir.path());
    let p = s["checks"][0]["metrics"]["fitted_exponent"].as_f64().unwrap();
    assert!((p - 2.0).abs() <= 0.1);
    let csv = fs::read_to_string(dir.path().join("profiles.csv")).unwrap();
    assert!(csv.starts_with("strength,r,delta,abs_u1\n"));
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, "preset = \"hardy\"\ntrials = 10\n[mesh]\ncells = 200\n").unwrap();
    let out = dir.path().join("out");
    let o = lab(&["run", cfg.to_str().unwrap(), "--set", "seed=3"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["preset"], "hardy");
    assert_eq!(s["seed"], 3);
    assert_eq!(s["checks"][0]["metrics"]["functions"], 10.0);
}

#[test]
fn malformed_config_exits_2_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "preset = \"eigen\"\n[mesh\ncells = 4\n").unwrap();
    let out = dir.path().join("out");
    let o = lab(&["run", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let o = lab(&["run", "--preset", "eigen", "--set", "mesh.cells=4"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_preset_suggests_nearest() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["run", "--preset", "confinment"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("did you mean `confinement`"));
}

#[test]
fn check_failure_exits_1_with_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["run", "--preset", "truncation-cauchy", "--set", "mesh.cells=400"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let s = summary(dir.path());
    assert_eq!(s["status"], "check-failure");
    assert!(dir.path().join("sequence.csv").exists());
}

#[test]
fn solver_failure_exits_3_and_keeps_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["run", "--preset", "confinement", "--set", "time.m_max=1000"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let s = summary(dir.path());
    assert_eq!(s["status"], "solver-failure");
    assert!(s["error"].as_str().unwrap().contains("invalid argument"));
    assert!(dir.path().join("config.toml").exists());
}
