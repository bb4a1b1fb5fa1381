use std::process::Command;

use riscc_sim::output::{read_csv, read_json};

fn riscc() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_riscc"));
    c.env_remove("RISCC_SEED");
    c
}

fn simulate(dir: &std::path::Path, name: &str, extra: &[&str], env_seed: Option<&str>) -> String {
    let out = dir.join(name);
    let mut cmd = riscc();
    cmd.args(["simulate", "--scenario", "paper_default", "--experiment", "wf_vs_equal", "--trials", "4"])
        .args(["--grid", "-20,-10", "--out"])
        .arg(&out)
        .args(extra);
    if let Some(s) = env_seed {
        cmd.env("RISCC_SEED", s);
    }
    let status = cmd.status().unwrap();
    assert!(status.success());
    std::fs::read_to_string(out).unwrap()
}

#[test]
fn simulate_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate(dir.path(), "a.csv", &["--seed", "7"], None);
    let b = simulate(dir.path(), "b.csv", &["--seed", "7"], None);
    assert_eq!(a, b);
    let rows = read_csv(&a).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.seed == 7 && r.trials == 4));
}

#[test]
fn seed_flag_beats_environment_beats_file() {
    let dir = tempfile::tempdir().unwrap();
    let flag = read_csv(&simulate(dir.path(), "f.csv", &["--seed", "3"], Some("5"))).unwrap();
    assert!(flag.iter().all(|r| r.seed == 3));
    let env = read_csv(&simulate(dir.path(), "e.csv", &[], Some("5"))).unwrap();
    assert!(env.iter().all(|r| r.seed == 5));
    let file = read_csv(&simulate(dir.path(), "d.csv", &[], None)).unwrap();
    assert!(file.iter().all(|r| r.seed == 1));
}

#[test]
fn simulate_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let text = simulate(dir.path(), "r.json", &["--format", "json"], None);
    let doc = read_json(&text).unwrap();
    assert_eq!(doc.experiment, "wf_vs_equal");
    assert!(!doc.rows.is_empty());
}

#[test]
fn validate_succeeds_on_default() {
    let out = riscc().args(["validate", "--scenario", "paper_default"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn bitalloc_prints_plan_and_losses() {
    let out = riscc().args(["bitalloc", "--cbar", "1e6,1e6,1e6,1e6", "--extra", "1"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("plan [1, 0, 0, 0]"), "{text}");
    assert!(text.contains("se_loss_approx 3.41"), "{text}");
}

#[test]
fn errors_exit_nonzero_with_diagnostic() {
    let cases: [&[&str]; 4] = [
        &["simulate", "--scenario", "/missing.json", "--experiment", "wf_vs_equal", "--out", "/tmp/unused.csv"],
        &["simulate", "--scenario", "paper_default", "--experiment", "bogus", "--out", "/tmp/unused.csv"],
        &["bitalloc", "--cbar", "1,-2", "--extra", "3"],
        &["validate", "--scenario", "paper_default", "--seed", "x"],
    ];
    for args in cases {
        let out = riscc().args(args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn bad_environment_seed_is_an_error() {
    let out = riscc().args(["validate", "--scenario", "paper_default"]).env("RISCC_SEED", "abc").output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("RISCC_SEED"));
}
