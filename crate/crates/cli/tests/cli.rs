use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn seqpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqpt")).args(args).output().expect("binary runs")
}

fn seqpt_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqpt")).args(args).env(key, value).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    assert!(out.status.success(), "stderr: {}", stderr(out));
    String::from_utf8_lossy(&out.stdout).lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = rows[0].iter().position(|h| h == name).expect("column present");
    rows[1..].iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn design_sizes_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tensor.json");
    let out = seqpt(&["design", "--dim", "6", "--scheme", "tensor", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(file["states"].as_array().unwrap().len(), 72);
    assert_eq!(file["factor_dims"], serde_json::json!([2, 3]));

    let projected = json(&seqpt(&["design", "--dim", "6", "--scheme", "projected"]));
    assert_eq!(projected["states"].as_array().unwrap().len(), 55);

    let out = seqpt(&["design", "--dim", "6", "--scheme", "primepower"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("6 is not a prime power"));
    assert_eq!(seqpt(&["design", "--dim", "6", "--scheme", "projected", "-D", "10"]).status.code(), Some(2));
}

#[test]
fn default_scheme_follows_dimension() {
    let mub = json(&seqpt(&["design", "--dim", "4"]));
    assert_eq!(mub["scheme"], "uniform-MUB");
    assert_eq!(mub["states"].as_array().unwrap().len(), 20);
    let tensor = json(&seqpt(&["design", "--dim", "10"]));
    assert_eq!(tensor["scheme"], "tensor");
}

#[test]
fn plan_values() {
    let m = |args: &[&str]| json(&seqpt(args))["shots"].as_u64().unwrap();
    assert_eq!(m(&["plan", "--scheme", "primepower", "--eps", "0.05", "--conf", "0.95"]), 738);
    // 2 (5/6)^2 ln 40 / 0.01 = 512.34
    assert_eq!(m(&["plan", "--scheme", "tensor", "--dim", "6", "--eps", "0.1", "--conf", "0.95"]), 513);
    // 2 * 64 * ln 40 / 0.01 = 47217.66
    assert_eq!(m(&["plan", "--scheme", "tensor", "--dim", "30", "--eps", "0.1", "--conf", "0.95"]), 47218);
    assert_eq!(m(&["plan", "--scheme", "tensor", "--factors", "3", "--eps", "0.1"]), 47218);
    assert_eq!(seqpt(&["plan", "--scheme", "primepower", "--eps", "0", "--conf", "0.95"]).status.code(), Some(2));
    assert_eq!(seqpt(&["plan", "--scheme", "primepower", "--eps", "0.1", "--conf", "1.5"]).status.code(), Some(2));
}

#[test]
fn estimate_exact_identity() {
    let rows = json(&seqpt(&["estimate", "--dim", "6", "--scheme", "tensor", "--channel", "identity", "--i", "0", "--j", "0", "--mode", "exact"]));
    let est = &rows[0]["estimate"];
    assert!((est[0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(est[1].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(rows[0]["epsilon_bound"], Value::Null);
}

#[test]
fn estimate_with_planned_shots() {
    let args = [
        "estimate", "--dim", "6", "--scheme", "tensor", "--channel", "depolarizing:0.3", "--i", "0", "--j", "0", "--eps",
        "0.05", "--conf", "0.95", "--seed", "1",
    ];
    let row = &json(&seqpt(&args))[0];
    assert_eq!(row["shots"], 2050);
    assert_eq!(row["seed"], 1);
    // depolarizing(λ): χ_00 = 1 − λ + λ/d²
    let exact = 1.0 - 0.3 + 0.3 / 36.0;
    assert!((row["estimate"][0].as_f64().unwrap() - exact).abs() <= 0.05);
    assert!(row["epsilon_bound"].as_f64().unwrap() <= 0.05);
    let counts = row["counts"].as_object().unwrap();
    assert_eq!(counts.values().map(|v| v.as_u64().unwrap()).sum::<u64>(), 2050);
    assert!(counts.contains_key("+11"));
}

#[test]
fn estimate_configuration_errors() {
    let base = ["estimate", "--dim", "6", "--channel", "identity", "--i", "0", "--j", "0"];
    assert_eq!(seqpt(&base).status.code(), Some(2));
    let both = [&base[..], &["--shots", "10", "--eps", "0.1"]].concat();
    assert_eq!(seqpt(&both).status.code(), Some(2));
    let oob = ["estimate", "--dim", "2", "--channel", "identity", "--i", "4", "--j", "0", "--shots", "10"];
    assert_eq!(seqpt(&oob).status.code(), Some(2));
    let unknown = ["estimate", "--dim", "2", "--channel", "nonsense", "--i", "0", "--j", "0", "--shots", "10"];
    assert_eq!(seqpt(&unknown).status.code(), Some(2));
    let zero = ["estimate", "--dim", "2", "--channel", "identity", "--i", "0", "--j", "0", "--shots", "0"];
    assert_eq!(seqpt(&zero).status.code(), Some(2));
}

fn write_channel(dir: &Path, name: &str, spec: &str, dim: &str) -> String {
    let path = dir.join(name);
    let out = seqpt(&["channel", "--dim", dim, "--channel", spec, "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    path.to_str().unwrap().to_string()
}

#[test]
fn channel_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_channel(dir.path(), "cptp.json", "random_cptp:2,5", "3");
    let from_file = json(&seqpt(&["estimate", "--channel", &path, "--i", "1", "--j", "2", "--mode", "exact"]));
    let named = json(&seqpt(&["estimate", "--dim", "3", "--channel", "random_cptp:2,5", "--i", "1", "--j", "2", "--mode", "exact"]));
    assert_eq!(from_file, named);

    let chi = json(&seqpt(&["channel", "--dim", "6", "--channel", "depolarizing:1", "--chi"]));
    assert_eq!(chi["basis"], "weyl");
    assert_eq!(chi["factor_dims"], serde_json::json!([2, 3]));
    assert!((chi["chi"][5][5][0].as_f64().unwrap() - 1.0 / 36.0).abs() < 1e-12);

    let mut bad: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    bad["kraus"][0][0][0] = serde_json::json!([3.0, 0.0]);
    let bad_path = dir.path().join("bad.json");
    std::fs::write(&bad_path, bad.to_string()).unwrap();
    let out = seqpt(&["estimate", "--channel", bad_path.to_str().unwrap(), "--i", "0", "--j", "0", "--shots", "10"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("trace preservation violated"));

    let garbled = dir.path().join("garbled.json");
    std::fs::write(&garbled, "{\"dim\": 2}").unwrap();
    let out = seqpt(&["estimate", "--channel", garbled.to_str().unwrap(), "--i", "0", "--j", "0", "--shots", "10"]);
    assert_eq!(out.status.code(), Some(3));

    let missing = seqpt(&["estimate", "--channel", "absent.json", "--i", "0", "--j", "0", "--shots", "10"]);
    assert_eq!(missing.status.code(), Some(2));
    let mismatch = seqpt(&["estimate", "--channel", &path, "--dim", "4", "--i", "0", "--j", "0", "--shots", "10"]);
    assert_eq!(mismatch.status.code(), Some(3));
}

#[test]
fn estimate_all_and_pairs() {
    let rows = json(&seqpt(&["estimate", "--dim", "2", "--channel", "unitary:1", "--all", "--mode", "exact"]));
    assert_eq!(rows.as_array().unwrap().len(), 16);
    for row in rows.as_array().unwrap() {
        let want = if row["i"] == 1 && row["j"] == 1 { 1.0 } else { 0.0 };
        assert!((row["estimate"][0].as_f64().unwrap() - want).abs() < 1e-12);
    }
    let out = seqpt(&["estimate", "--dim", "6", "--channel", "identity", "--pairs", "0:0,3:4", "--mode", "exact", "--format", "csv"]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][..5], ["scheme", "d", "D", "i", "j"].map(String::from));
}

#[test]
fn verify_identities() {
    let rows = json(&seqpt(&["verify", "--identity", "eq3", "--dim", "5"]));
    assert_eq!(rows[0]["passed"], true);
    assert!(rows[0]["max_deviation"].as_f64().unwrap() < 1e-9);
    assert_eq!(json(&seqpt(&["verify", "--identity", "eq8", "--dim", "6"]))[0]["passed"], true);
    let out = seqpt(&["verify", "--identity", "eq8", "--dim", "7"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(seqpt(&["verify", "--identity", "eq99"]).status.code(), Some(2));
    let projected = json(&seqpt(&["verify", "--identity", "nonuniform2design", "--dim", "10", "-D", "11"]));
    assert_eq!(projected[0]["dims"], serde_json::json!([10, 11]));
}

#[test]
fn sweep_error_scaling() {
    let out = seqpt(&[
        "sweep", "--dim", "6", "--channel", "depolarizing:0.3", "--shots", "500,2000,8000", "--reps", "200", "--summary",
        "--format", "csv", "--seed", "3",
    ]);
    let rows = csv_rows(&out);
    let q95 = column(&rows, "q95_error");
    let bound = column(&rows, "epsilon_bound");
    let max = column(&rows, "max_error");
    assert_eq!(q95.len(), 3);
    // quadrupling M should roughly halve the error
    for k in 0..2 {
        let ratio = q95[k] / q95[k + 1];
        assert!((1.4..=2.9).contains(&ratio), "ratio {ratio}");
    }
    for k in 0..3 {
        assert!(max[k] <= bound[k]);
    }

    let out = seqpt(&["sweep", "--dim", "6", "--channel", "depolarizing:0.3", "--shots", "1000", "--reps", "50", "--format", "csv"]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 51);
    let errors = column(&rows, "error");
    let bounds = column(&rows, "epsilon_bound");
    assert!(errors.iter().zip(&bounds).all(|(e, b)| e <= b));
}

#[test]
fn sweep_exact_mode() {
    let out = seqpt(&[
        "sweep", "--dim", "6", "--channel", "random_cptp:2,3", "--i", "4", "--j", "9", "--shots", "100,200", "--reps", "1",
        "--mode", "exact", "--format", "csv",
    ]);
    let rows = csv_rows(&out);
    assert!(column(&rows, "error").iter().all(|&e| e <= 1e-9));
}

#[test]
fn output_is_reproducible() {
    let args = ["estimate", "--dim", "6", "--channel", "random_cptp:2,4", "--pairs", "0:0,3:8", "--shots", "3000", "--seed", "9"];
    let a = seqpt(&args);
    let b = seqpt(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let serial = seqpt_env(&args, "SEQPT_THREADS", "1");
    assert_eq!(a.stdout, serial.stdout);
    let other_seed = seqpt(&[&args[..args.len() - 1], &["10"]].concat());
    assert_ne!(a.stdout, other_seed.stdout);

    let sweep = ["sweep", "--dim", "6", "--channel", "depolarizing:0.3", "--shots", "300,600", "--reps", "20"];
    assert_eq!(seqpt(&sweep).stdout, seqpt_env(&sweep, "SEQPT_THREADS", "2").stdout);
}

#[test]
fn bad_thread_setting() {
    let out = seqpt_env(&["plan", "--scheme", "primepower", "--eps", "0.1"], "SEQPT_THREADS", "many");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_not_offered_for_files() {
    assert_eq!(seqpt(&["design", "--dim", "2", "--format", "csv"]).status.code(), Some(2));
}
