use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const GAMMA: &str = "forall X . ((exists x . x in X) and (exists y . not y in X)) -> \
                     exists p . exists q . (p in X and not q in X and edge(p,q))\n";

fn tdd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdd")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn replays_a_trace_and_reports_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let phi = write(dir.path(), "gamma.mso", GAMMA);
    let trace = write(
        dir.path(),
        "t.trace",
        "addv 0\naddv 1\naddv 2\nadde 0 1\nadde 1 2\nadde 0 2\nquery\ndele 0 1\nquery\n",
    );
    let out = tdd(&["--depth", "2", "--formula", &phi, "--trace", &trace, "--verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = records(&out);
    assert_eq!(recs.len(), 9);
    assert_eq!(recs[5]["outcome"], "DepthWouldExceed");
    assert_eq!(recs[6]["query"], true);
    assert_eq!(recs[8]["query"], false);
}

#[test]
fn seeded_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let phi = write(dir.path(), "gamma.mso", GAMMA);
    let args = ["--depth", "3", "--formula", &phi, "--seed", "11", "--commands", "120"];
    let a = tdd(&args);
    let b = tdd(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(records(&a).len(), 120);
    assert!(records(&a).iter().all(|r| r["oracle"] == "agree"));
}

#[test]
fn catalog_cache_is_written_then_reused() {
    let dir = tempfile::tempdir().unwrap();
    let phi = write(dir.path(), "gamma.mso", GAMMA);
    let cache = dir.path().join("cache.json");
    let cache = cache.to_str().unwrap();
    let first = tdd(&["--depth", "2", "--formula", &phi, "--catalog-cache", cache]);
    assert!(first.status.success());
    assert!(Path::new(cache).exists());
    let second = tdd(&["--depth", "2", "--formula", &phi, "--catalog-cache", cache]);
    assert!(second.status.success());
    assert!(String::from_utf8_lossy(&second.stderr).contains("cached"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let phi = write(dir.path(), "gamma.mso", GAMMA);
    let bad_trace = write(dir.path(), "bad.trace", "addv 0\nfly 1\n");
    let out = tdd(&["--depth", "2", "--formula", &phi, "--trace", &bad_trace]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = tdd(&["--depth", "12", "--formula", &phi]);
    assert_eq!(out.status.code(), Some(2));

    let triangle = write(dir.path(), "k3.graph", "0 1\n1 2\n0 2\n");
    let out = tdd(&["--depth", "2", "--formula", &phi, "--graph", &triangle]);
    assert_eq!(out.status.code(), Some(2));

    let out = tdd(&["--depth", "2", "--formula", &phi, "--budget-catalog", "1"]);
    assert_eq!(out.status.code(), Some(3));

    let out = tdd(&["--depth", "2", "--formula", "/nonexistent/phi.mso"]);
    assert_eq!(out.status.code(), Some(2));
}
