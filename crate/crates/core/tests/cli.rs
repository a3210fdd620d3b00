use std::path::Path;
use std::process::{Command, Output};

fn embanks(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_embanks"))
        .args(args)
        .output()
        .expect("embanks runs")
}

fn ok(args: &[&str]) -> String {
    let out = embanks(args);
    assert!(out.status.success(), "embanks {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(dir: &Path, rel: &str) -> String {
    dir.join(rel).to_str().unwrap().to_owned()
}

#[test]
fn synth_ingest_cluster_query() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("spec.toml"),
        "seed = 1\npapers = 200\nauthors = 80\nwrites = 300\ncites = 150\n\
         [[planted]]\nterm = \"qa\"\nfrequency = 0.05\n[[planted]]\nterm = \"qb\"\nfrequency = 0.05\n",
    )
    .unwrap();
    ok(&["synth", "--spec", &p(d, "spec.toml"), "--out", &p(d, "data")]);
    assert!(d.join("data/schema.txt").exists());
    ok(&["ingest", "--schema", &p(d, "data/schema.txt"), "--data", &p(d, "data"), "--out", &p(d, "store")]);
    ok(&["cluster", "--size", "30", "--store", &p(d, "store")]);
    let out = ok(&["query", "--store", &p(d, "store"), "qa qb"]);
    assert!(!out.trim().is_empty());
    let base = ok(&["baseline", "--data", &p(d, "data"), "qa qb"]);
    assert!(!base.trim().is_empty());
}

#[test]
fn bad_invocations_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let missing = embanks(&["query", "--store", &p(dir.path(), "nope"), "x"]);
    assert!(!missing.status.success());
    assert!(!missing.stderr.is_empty());
    assert!(!embanks(&["frobnicate"]).status.success());
}
