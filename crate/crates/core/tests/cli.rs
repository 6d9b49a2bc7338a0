use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lakin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lakin"))
        .args(args)
        .env("LAKIN_THREADS", "2")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

fn synth(dir: &Path, patients: usize) {
    let out = lakin(&["--seed", "5", "synth", "--out", p(dir), "--patients", &patients.to_string()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn empty_manifest_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    fs::write(&m, "[]").unwrap();
    let out = lakin(&["features", "--manifest", p(&m), "--out", p(&dir.path().join("f"))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(rows(&dir.path().join("f/features.csv")), 0);
}

#[test]
fn full_cohort_tables() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 36);
    let f = dir.path().join("f");
    let out = lakin(&["features", "--manifest", p(&dir.path().join("manifest.json")), "--out", p(&f)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(rows(&f.join("features.csv")), 72);
    assert_eq!(rows(&f.join("lr_features.csv")), 36);
}

#[test]
fn one_corrupt_trial_is_skipped() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 5);
    fs::write(dir.path().join("trials/P03-LLA.csv"), "t,ax\n0,1\n").unwrap();
    let f = dir.path().join("f");
    let out = lakin(&["features", "--manifest", p(&dir.path().join("manifest.json")), "--out", p(&f)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1 trial(s) failed"));
    assert_eq!(rows(&f.join("features.csv")), 9);
    assert_eq!(rows(&f.join("lr_features.csv")), 4);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 6);
    let m = dir.path().join("manifest.json");
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = lakin(&["evaluate", "--manifest", p(&m), "--segmentation", "auto", "--out", p(&out_dir)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let mut files: Vec<_> = fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.iter().map(|f| fs::read(f).unwrap()).collect::<Vec<_>>()
    };
    let a = run("a");
    assert!(!a.is_empty());
    assert_eq!(a, run("b"));
}

#[test]
fn single_trial_report() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 1);
    let m = dir.path().join("manifest.json");
    let text = fs::read_to_string(&m).unwrap();
    let mut entries: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
    entries.truncate(1);
    fs::write(&m, serde_json::to_string(&entries).unwrap()).unwrap();

    let r = dir.path().join("r");
    let out = lakin(&["report", "--manifest", p(&m), "--out", p(&r)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(rows(&r.join("heatmap_theta.csv")), 1);
    assert!(!r.join("trajectory.csv").exists());
}

#[test]
fn invalid_arguments_are_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let out = lakin(&["evaluate", "--classifier", "tree", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = lakin(&["features", "--manifest", p(&dir.path().join("missing.json")), "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}
