use std::path::Path;
use std::process::Command;

use roa_core::model::{check_hard, penalized_objective};
use roa_core::qubo::default_penalties;
use roa_core::{Assignment, Instance};

fn roa(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_roa")).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "roa {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    roa(&["gen", "--size", "3", "--seeds", "4..6", "--out", p(dir.path())]);
    for seed in 4..=6 {
        assert!(dir.path().join(format!("n3_s{seed}.json")).exists());
    }
    let file = dir.path().join("n3_s5.json");
    let raw = Instance::from_json(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!((raw.seed, raw.size), (5, 3));

    let out = dir.path().join("sol.json");
    roa(&["solve", "--instance", p(&file), "--solver", "exact", "--out", p(&out)]);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["status"], "optimal");
    let x: Assignment = serde_json::from_value(doc["assignment"].clone()).unwrap();
    let inst = roa_core::instgen::normalize(&raw);
    assert!(check_hard(&inst, &x).unwrap().is_hard_feasible());
    let pen = default_penalties(&inst);
    let reported = doc["penalized_objective"].as_f64().unwrap();
    assert!((penalized_objective(&inst, &x, pen.soft()).unwrap() - reported).abs() < 1e-9);
}

#[test]
fn unknown_solver_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    roa(&["gen", "--size", "2", "--seeds", "0", "--out", p(dir.path())]);
    let out = Command::new(env!("CARGO_BIN_EXE_roa"))
        .args([
            "solve",
            "--instance",
            p(&dir.path().join("n2_s0.json")),
            "--solver",
            "cim",
            "--out",
            p(&dir.path().join("x.json")),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown solver"));
}

#[test]
fn bench_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    roa(&[
        "bench", "--sizes", "2,3", "--seeds", "0..2", "--solvers", "greedy,exact", "--out", p(&run),
    ]);
    let text = std::fs::read_to_string(run.join("results.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 3 * 2);
    assert!(lines[1].starts_with("2,0,greedy,ok,,0,"));
    assert!(lines[2].starts_with("2,0,exact,optimal,,0,"));
    assert!(run.join("assignments/n3_s2_exact.json").exists());

    let summary = dir.path().join("summary.csv");
    roa(&["report", "--in", p(&run), "--out", p(&summary)]);
    let s = std::fs::read_to_string(&summary).unwrap();
    assert_eq!(s.lines().count(), 1 + 4);
    assert!(s.lines().nth(1).unwrap().starts_with("2,exact,3,0,1.0,1.0,"));
    let long = std::fs::read_to_string(dir.path().join("summary_long.csv")).unwrap();
    assert!(long.starts_with("size,solver,metric,value\n"));
}

#[test]
fn default_solver_set_for_small_sizes() {
    let dir = tempfile::tempdir().unwrap();
    roa(&["bench", "--sizes", "2", "--seeds", "1", "--out", p(dir.path())]);
    let text = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let solvers: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(solvers, ["greedy", "exact", "qaoa", "qaoansatz"]);
}

#[test]
fn qubo_export_and_anneal() {
    let dir = tempfile::tempdir().unwrap();
    roa(&["gen", "--size", "2", "--seeds", "3", "--out", p(dir.path())]);
    let qubo = dir.path().join("q.json");
    roa(&["export-qubo", "--instance", p(&dir.path().join("n2_s3.json")), "--out", p(&qubo)]);
    let model = roa_core::QuboModel::from_json(&std::fs::read_to_string(&qubo).unwrap()).unwrap();
    for method in ["sqa", "sa"] {
        let out = dir.path().join(format!("{method}.json"));
        roa(&["anneal", "--qubo", p(&qubo), "--method", method, "--seed", "1", "--out", p(&out)]);
        let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        let bits: Vec<bool> = doc["bits"].as_array().unwrap().iter().map(|b| b == 1).collect();
        assert_eq!(bits.len(), model.n_vars);
        assert!((model.energy(&bits).unwrap() - doc["energy"].as_f64().unwrap()).abs() < 1e-9);
    }
}
