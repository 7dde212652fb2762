//! End-to-end checks of the `ratsect` binary.

use std::path::Path;
use std::process::{Command, Output};

fn ratsect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ratsect"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

#[test]
fn classify_cubic_scheme() {
    let out = ratsect(&["classify", "--scheme", "paper-pi6", "--psi", "0.5235987755982988"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["q"], 1);
    assert_eq!(v["m"], 2);
    assert_eq!(v["r_inf"], "-1");
    assert_eq!(v["a"], "-1/4");
    assert_eq!(v["a_taylor"], "1/2");
    assert_eq!(v["certificate"]["is_stable"], true);
}

#[test]
fn classify_reports_instability_with_exit_two() {
    let out = ratsect(&["classify", "--scheme", "paper-pi6", "--psi", "1.2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["certificate"]["is_stable"], false);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(ratsect(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(ratsect(&["classify", "--scheme", "nope", "--psi", "0.5"]).status.code(), Some(1));
    let bad_n = ratsect(&["hnorm-sweep", "--scheme", "cn", "--theta", "0.7", "--s", "1", "--n", "8,,16"]);
    assert_eq!(bad_n.status.code(), Some(1));
}

#[test]
fn sweep_expands_progressions() {
    let out = ratsect(&[
        "hnorm-sweep", "--scheme", "cn", "--theta", "0.7", "--s", "1", "--n", "8,16,...,64", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "scheme,theta,s,n,value,err_est");
    let ns: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(ns, ["8", "16", "32", "64"]);
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn rates_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for p in &paths {
        let out = ratsect(&[
            "rates", "--scheme", "be", "--theta", "0.7853981633974483", "--s", "0.5,1",
            "--n", "8,16,...,256", "--out", p.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = read(&paths[0]);
    assert_eq!(a, read(&paths[1]));
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next(), Some("scheme,mode,theta,s,n,value,err_est"));
    assert_eq!(text.lines().count(), 1 + 2 * 6);
}

#[test]
fn stability_json_is_seeded() {
    let args = ["stability", "--scheme", "be", "--theta", "0.7853981633974483", "--trials", "2", "--seed", "7"];
    let a = ratsect(&args);
    let b = ratsect(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["seed"], 7);
}

#[test]
fn accept_subset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("acc.json");
    let out = ratsect(&["accept", "--only", "1,2,3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 3);
    let v: serde_json::Value = serde_json::from_slice(&read(&path)).unwrap();
    assert_eq!(v["pass"], true);
}
