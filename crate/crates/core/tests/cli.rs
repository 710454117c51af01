//! CLI contract tests: flags, exit codes, output formats and determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gpt_entropy::binary_entropy;

fn h(x: f64) -> f64 {
    binary_entropy(x).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gpt-entropy"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn write_ensemble(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn compute_examples() {
    let out = run(&[
        "compute", "--model", "squared", "--state", "0.5,0.5", "--entropy", "S2'",
    ]);
    let v = stdout_json(&out);
    assert!((v["value"].as_f64().unwrap() - 2.0).abs() < 5e-3);
    assert_eq!(v["bound_direction"], "lower");

    let out = run(&[
        "compute", "--model", "qubit", "--state", "0,0,0", "--entropy", "Sq",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["value"].as_f64().unwrap(), 1.0);
    assert_eq!(v["bound_direction"], "exact");

    let out = run(&[
        "compute", "--model", "squared", "--state", "1,1", "--entropy", "S3",
    ]);
    let v = stdout_json(&out);
    assert!(v["value"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn compute_rejects_bad_input_with_exit_2() {
    let cases: &[&[&str]] = &[
        &["compute", "--model", "cubic", "--state", "0.5,0.5", "--entropy", "S1"],
        &["compute", "--model", "squared", "--state", "0.5", "--entropy", "S1"],
        &["compute", "--model", "squared", "--state", "1.5,0.5", "--entropy", "S1"],
        &["compute", "--model", "squared", "--state", "0.5,0.5", "--entropy", "S7"],
        &["compute", "--model", "squared", "--state", "0.5,0.5", "--entropy", "Sq"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "args: {args:?}");
    }
}

#[test]
fn sweep_grid_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep",
        "--model",
        "squared",
        "--grid-step",
        "0.5",
        "--entropies",
        "S1,S2,S3,S2'",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "c1,c2,S1,S2,S3,S2'");
    assert_eq!(lines.len(), 1 + 9, "9 grid rows for step 0.5");
    assert!(text.ends_with('\n'));
    assert!(!text.contains('\r'));

    // The pure corner row is all zeros; the center row carries the closed
    // forms 1, 1, 1, 2.
    assert!(lines.contains(&"1,0,0,0,0,0"));
    assert!(lines.contains(&"0.5,0.5,1,1,1,2"));

    // Re-parse and recompute the closed-form columns.
    for line in &lines[1..] {
        let fields: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        let (c1, c2) = (fields[0], fields[1]);
        let expected = [
            h(c1).min(h(c2)),
            h(c1).max(h(c2)),
            fields[4], // S3 checked through the library oracle below
            h(c1) + h(c2),
        ];
        for (got, want) in fields[2..].iter().zip(expected) {
            assert!((got - want).abs() < 1e-9, "row {line}");
        }
        let s = gpt_entropy::State::new(vec![c1, c2]);
        assert!((fields[4] - gpt_entropy::models::squared::s3_exact(&s)).abs() < 1e-9);
    }
}

#[test]
fn sweep_unwritable_path_exits_3() {
    let out = run(&[
        "sweep",
        "--model",
        "squared",
        "--grid-step",
        "0.5",
        "--entropies",
        "S1",
        "--out",
        "/nonexistent-dir/sweep.csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run_sweep = |name: &str, threads: Option<&str>| {
        let path = dir.path().join(name);
        let mut cmd = bin();
        cmd.args([
            "sweep",
            "--model",
            "squared",
            "--grid-step",
            "0.25",
            "--entropies",
            "S1,S2,S2'",
            "--force-numerical",
            "--out",
            path.to_str().unwrap(),
        ]);
        if let Some(t) = threads {
            cmd.env("GPT_ENTROPY_THREADS", t);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success());
        fs::read(path).unwrap()
    };
    let a = run_sweep("a.csv", None);
    let b = run_sweep("b.csv", None);
    let c = run_sweep("c.csv", Some("1"));
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn accinfo_and_holevo_reports() {
    let dir = tempfile::tempdir().unwrap();
    let ens = write_ensemble(
        dir.path(),
        "pair.json",
        r#"{ "model": "squared",
             "ensemble": [ { "p": 0.5, "state": [1, 0] },
                           { "p": 0.5, "state": [0, 1] } ] }"#,
    );

    let out = run(&["accinfo", "--ensemble", &ens]);
    let v = stdout_json(&out);
    assert!((v["i_acc"].as_f64().unwrap() - 1.0).abs() < 5e-3);

    let out = run(&["holevo", "--ensemble", &ens, "--entropy", "S2"]);
    let v = stdout_json(&out);
    assert!((v["bound"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!((v["gap"].as_f64().unwrap() - 1.0).abs() < 5e-3);
    assert_eq!(v["s_prime_closed"], true);

    let single = write_ensemble(
        dir.path(),
        "single.json",
        r#"{ "model": "squared", "ensemble": [ { "p": 1.0, "state": [0.5, 0.3] } ] }"#,
    );
    let out = run(&["holevo", "--ensemble", &single, "--entropy", "S2"]);
    let v = stdout_json(&out);
    assert!(v["i_acc"].as_f64().unwrap().abs() < 1e-9);
    assert!(v["gap"].as_f64().unwrap() >= -1e-9);
}

#[test]
fn accinfo_rejects_malformed_json_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_ensemble(dir.path(), "bad.json", "{ this is not json");
    let out = run(&["accinfo", "--ensemble", &bad]);
    assert_eq!(out.status.code(), Some(2));

    let missing = dir.path().join("missing.json");
    let out = run(&["accinfo", "--ensemble", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn same_seed_gives_byte_identical_json() {
    let args = [
        "compute", "--model", "squared", "--state", "0.37,0.81", "--entropy", "S2'",
        "--seed", "11",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let dir = tempfile::tempdir().unwrap();
    let ens = write_ensemble(
        dir.path(),
        "qubit.json",
        r#"{ "model": "qubit",
             "ensemble": [ { "p": 0.5, "state": [0, 0, 1] },
                           { "p": 0.5, "state": [1, 0, 0] } ] }"#,
    );
    let args = ["accinfo", "--ensemble", &ens, "--seed", "3"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_suite_exit_codes() {
    let out = run(&["verify", "--suite", "footnote-pure"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["suite"], "footnote-pure");
    assert!(v["checks"].as_array().unwrap().len() >= 3);

    let out = run(&["verify", "--suite", "no-such-suite"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_qubit_holevo_quick_smoke() {
    let out = run(&["verify", "--suite", "qubit-holevo", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
}
