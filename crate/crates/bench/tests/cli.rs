use std::path::Path;
use std::process::{Command, Output};

use apartlearn::mealy::{random_machine, render_dot};

fn learn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_learn"))
        .args(args)
        .env_remove("APARTLEARN_LOG")
        .output()
        .expect("binary runs")
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .collect::<Result<_, _>>()
        .unwrap()
}

#[test]
fn random_model_five_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let res = learn(&[
        "--random",
        "n=20,k=3,p=3",
        "--variant",
        "ads",
        "--oracle",
        "exact",
        "--repeats",
        "5",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert_eq!(&r[0], "random-n20-k3-p3-s7");
        assert_eq!((&r[1], &r[2]), ("20", "3"));
        assert_eq!(&r[8], "true");
        assert_eq!(&r[9], "");
    }
    // the exact oracle makes repeats identical
    assert!(rows.windows(2).all(|w| w[0] == w[1]));
    let summary = String::from_utf8(res.stdout).unwrap();
    assert!(summary.contains("5/5 successful"), "{summary}");
    assert!(summary.contains("± 0.00"), "{summary}");
}

#[test]
fn missing_model_exits_2() {
    let res = learn(&["--model", "missing.dot"]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8(res.stderr).unwrap();
    let json: serde_json::Value = serde_json::from_str(err.lines().last().unwrap()).unwrap();
    assert_eq!(json["error"], "file-not-found");
}

#[test]
fn malformed_model_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.dot");
    std::fs::write(&path, "digraph g {\n s0 -> s0 [label=\"a\"];\n}\n").unwrap();
    let res = learn(&["--model", path.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("\"parse\""));
}

#[test]
fn output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let res = learn(&[
            "--random",
            "n=8,k=2,p=2",
            "--random",
            "n=5,k=3",
            "--variant",
            "plain",
            "--policy",
            "any",
            "--oracle",
            "randomwalk",
            "--extra-states",
            "2",
            "--infix",
            "4",
            "--budget",
            "500",
            "--repeats",
            "4",
            "--seed",
            "3",
            "--out",
            out.to_str().unwrap(),
            "--format",
            "csv",
        ]);
        assert!(
            res.status.success(),
            "{}",
            String::from_utf8_lossy(&res.stderr)
        );
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 1 + 8);
    // rows grouped by model, in command-line order
    let models: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert!(models[..4].iter().all(|m| m.starts_with("random-n8")));
    assert!(models[4..].iter().all(|m| m.starts_with("random-n5")));
}

#[test]
fn dot_model_and_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("target.dot");
    std::fs::write(&path, render_dot(&random_machine(6, 2, 2, 5).unwrap())).unwrap();
    let res = learn(&[
        "--model",
        path.to_str().unwrap(),
        "--format",
        "json",
        "--timing",
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let rows: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    let row = &rows[0];
    assert_eq!(row["model"], "target");
    assert_eq!(row["n"], 6);
    assert_eq!(row["success"], true);
    assert!(row["wall_time_ms"].as_f64().is_some());
}

#[test]
fn verbose_writes_event_lines() {
    let res = learn(&["--random", "n=4,k=2", "--variant", "ads", "--verbose"]);
    assert!(res.status.success());
    let err = String::from_utf8(res.stderr).unwrap();
    let events: Vec<serde_json::Value> = err
        .lines()
        .filter(|l| l.starts_with('{'))
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!events.is_empty());
    assert!(events.iter().all(|e| e["rule"].is_string()
        && e["norm_after"].as_u64() > e["norm_before"].as_u64()
        || e["rule"] == "R4"));
    let resets: u64 = events.iter().map(|e| e["resets"].as_u64().unwrap()).sum();
    let csv_line = String::from_utf8(res.stdout).unwrap();
    let row = csv_line.lines().nth(1).unwrap();
    assert_eq!(
        row.split(',').nth(3).unwrap().parse::<u64>().unwrap(),
        resets
    );
}

#[test]
fn budget_failure_is_reported() {
    let res = learn(&["--random", "n=10,k=3", "--max-queries", "5"]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8(res.stderr).unwrap();
    let json: serde_json::Value = serde_json::from_str(err.lines().last().unwrap()).unwrap();
    assert_eq!(json["error"], "budget");
}

#[test]
fn usage_errors() {
    assert_eq!(learn(&[]).status.code(), Some(2));
    assert_eq!(learn(&["--random", "n=3"]).status.code(), Some(2));
    assert_eq!(
        learn(&["--random", "n=3,k=2", "--repeats", "0"])
            .status
            .code(),
        Some(2)
    );
}
