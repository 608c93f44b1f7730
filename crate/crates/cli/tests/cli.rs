use std::process::{Command, Output};

fn qcsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcsc"))
        .args(args)
        .env_remove("QCSC_SEED")
        .env_remove("QCSC_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn bell() -> (tempfile::TempDir, String) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bell.qc");
    std::fs::write(&path, "qubits 2;\nh 0;\n\ncx 0, 1;\n").unwrap();
    (dir, path.to_string_lossy().into_owned())
}

#[test]
fn simulate_bell_expectation() {
    let (_dir, path) = bell();
    let text = stdout(&qcsc(&["--format", "json", "simulate", &path, "--observable", "ZZ,XX"]));
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["command"], "simulate");
    let rows = doc["results"].as_array().unwrap();
    let value = rows[0]["value"].as_f64().unwrap();
    assert!((value - 2.0).abs() < 1e-12, "{value}");
}

#[test]
fn simulate_bell_counts_are_correlated() {
    let (_dir, path) = bell();
    let text = stdout(&qcsc(&["--format", "csv", "--seed", "3", "simulate", &path, "--shots", "4000"]));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.starts_with("00,") || r.starts_with("11,")));
}

#[test]
fn header_echoes_seed_and_config() {
    let text = stdout(&qcsc(&["--seed", "42", "scale", "--q", "100", "--m", "3", "--l", "2", "--t", "2", "--p", "4"]));
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("qcsc "));
    assert!(first.contains("command=scale seed=42"));
    assert!(text.contains("4800"));
}

#[test]
fn estimate_ft_defaults() {
    let text = stdout(&qcsc(&["--format", "json", "estimate-ft"]));
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = doc["results"].as_array().unwrap();
    assert!(!rows.is_empty());
    assert_eq!(doc["config"]["n_cnot"], 1e7);
}

#[test]
fn seed_from_environment() {
    let a = Command::new(env!("CARGO_BIN_EXE_qcsc"))
        .args(["trotter", "--n", "3", "--steps", "1"])
        .env("QCSC_SEED", "9")
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&a.stdout).contains("seed=9"));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("out.csv");
    let direct = stdout(&qcsc(&["--format", "csv", "overhead-table", "--steps", "10"]));
    let out = qcsc(&["--format", "csv", "-o", file.to_str().unwrap(), "overhead-table", "--steps", "10"]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&file).unwrap(), direct);
}

#[test]
fn exit_codes_by_category() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.qc");
    std::fs::write(&bad, "qubits 2;\ncx 0;\n").unwrap();
    let out = qcsc(&["simulate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2, column 5"), "{err}");

    let out = qcsc(&["scale", "--q", "0"]);
    assert_eq!(out.status.code(), Some(4));

    let out = qcsc(&["simulate", dir.path().join("missing.qc").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(6));

    let out = qcsc(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cut_exact_matches_uncut() {
    let (_dir, path) = bell();
    let text = stdout(&qcsc(&["--format", "json", "cut", "--circuit", &path, "--cut", "0@1", "--observable", "ZZ"]));
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let values: Vec<f64> = doc["results"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|r| r["value"].as_f64())
        .collect();
    assert!(values.iter().all(|v| (v - 1.0).abs() < 1e-10), "{values:?}");
}
