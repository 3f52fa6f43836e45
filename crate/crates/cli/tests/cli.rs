use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn paamm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paamm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = paamm(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|c| c == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn zero_volatility_fully_active_is_flat() {
    let csv = ok(&[
        "simulate", "--lambda", "1", "--theta", "0.5", "--sigma", "0", "--blocks", "100", "--seed", "7",
    ]);
    assert_eq!(csv.lines().count(), 101);
    for name in ["top_gap", "bot_gap", "lvr", "cum_lvr", "norm_lvr"] {
        assert!(column(&csv, name).iter().all(|&v| v == 0.0), "{name}");
    }
    assert!(!csv.contains("-0.0"));
}

#[test]
fn simulate_is_deterministic_and_writes_summary() {
    let args = [
        "simulate",
        "--lambda",
        "0.25,0.5,0.75,1",
        "--blocks",
        "20000",
        "--sigma",
        "1.5",
        "--seed",
        "3",
    ];
    let a = ok(&args);
    assert_eq!(a, ok(&args));

    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut with_out = args.to_vec();
    with_out.extend(["--out", out]);
    ok(&with_out);
    assert_eq!(fs::read_to_string(dir.path().join("blocks.csv")).unwrap(), a);
    let summary = read_json(&dir.path().join("summary.json"));
    let cum: Vec<f64> = summary
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["cumulative_lvr"].as_f64().unwrap())
        .collect();
    assert_eq!(cum.len(), 4);
    assert!(cum.windows(2).all(|w| w[0] < w[1]), "{cum:?}");
}

#[test]
fn invalid_activeness_is_a_usage_error() {
    for lambda in ["0", "1.5", "-0.2"] {
        let out = paamm(&["moments", "--lambda", lambda]);
        assert_eq!(out.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&out.stderr).contains("(0, 1]"));
    }
    assert_eq!(paamm(&["simulate", "--bogus"]).status.code(), Some(2));
    assert_eq!(paamm(&["simulate", "--theta", "1"]).status.code(), Some(2));
}

#[test]
fn moments_report_closed_form_side_by_side() {
    let text = ok(&[
        "moments",
        "--lambda",
        "1,0.5",
        "--sigma",
        "1",
        "--dt",
        "1e-4",
        "--blocks",
        "200000",
        "--burn-in",
        "1000",
    ]);
    let rows: Value = serde_json::from_str(&text).unwrap();
    for row in rows.as_array().unwrap() {
        let lambda = row["lambda"].as_f64().unwrap();
        let predicted = 1e-4 / (lambda * (2.0 - lambda));
        assert_eq!(row["predicted_second_moment"].as_f64().unwrap(), predicted);
        let ratio = row["ratio"].as_f64().unwrap();
        let se = row["ratio_std_error"].as_f64().unwrap();
        assert!((ratio - 1.0).abs() < 4.0 * se, "λ = {lambda}: {ratio} ± {se}");
    }
}

#[test]
fn frontier_orders_lvr_and_variance() {
    let csv = ok(&[
        "frontier",
        "--lambda",
        "0.25,0.5,0.75,1",
        "--sigma",
        "1",
        "--dt",
        "1e-4",
        "--blocks",
        "200000",
    ]);
    let lvr = column(&csv, "lvr_rate");
    let var = column(&csv, "gap_variance");
    assert!(lvr.windows(2).all(|w| w[0] < w[1]), "{lvr:?}");
    assert!(var.windows(2).all(|w| w[0] > w[1]), "{var:?}");
    for (l, p) in column(&csv, "lambda").iter().zip(column(&csv, "predicted_lvr_rate")) {
        assert_eq!(p, 0.25 / (2.0 * (2.0 - l)));
    }
}

#[test]
fn optimal_lambda_closed_forms() {
    let four: Value = serde_json::from_str(&ok(&["optimal-lambda", "--gamma", "4"])).unwrap();
    assert_eq!(four["lambda_star"].as_f64(), Some(0.5));
    let zero: Value = serde_json::from_str(&ok(&["optimal-lambda", "--gamma", "0"])).unwrap();
    assert_eq!(zero["lambda_star"].as_f64(), Some(1.0));
    assert_eq!(zero["v2"].as_f64(), Some(0.0));
}

#[test]
fn optimal_lambda_oracle_writes_policy_table() {
    let dir = TempDir::new().unwrap();
    ok(&[
        "optimal-lambda",
        "--gamma",
        "4",
        "--rho",
        "10",
        "--dt",
        "1e-4",
        "--sigma",
        "1",
        "--oracle",
        "--states",
        "120",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let report = read_json(&dir.path().join("optimal_lambda.json"));
    let oracle = &report["oracle"];
    assert!(
        oracle["max_policy_deviation_steps"].as_f64().unwrap() <= 1.0 + 1e-9,
        "{oracle}"
    );
    assert!(oracle["v2_relative_error"].as_f64().unwrap() < 0.01, "{oracle}");
    let table = fs::read_to_string(dir.path().join("oracle_policy.csv")).unwrap();
    assert_eq!(table.lines().count(), 121);
}

#[test]
fn replay_constant_and_malformed_files() {
    let dir = TempDir::new().unwrap();
    let flat = dir.path().join("flat.csv");
    let body: String = (0..50).map(|i| format!("{},2500\n", 1_700_000_000 + 12 * i)).collect();
    fs::write(&flat, format!("timestamp,price\n{body}")).unwrap();
    let out = dir.path().join("flat");
    ok(&[
        "replay",
        "--input",
        flat.to_str().unwrap(),
        "--lambda",
        "0.3,1",
        "--out",
        out.to_str().unwrap(),
    ]);
    for s in read_json(&out.join("summary.json")).as_array().unwrap() {
        assert_eq!(s["cumulative_lvr"].as_f64(), Some(0.0));
        assert!(s["predicted_lvr_rate"].is_null());
    }
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["inputs"][0].as_str(), flat.to_str());

    let bad = dir.path().join("bad.csv");
    let mut lines: Vec<String> = (0..30).map(|i| format!("{},100", 1000 + i)).collect();
    lines[16] = "1016,abc".into();
    fs::write(&bad, lines.join("\n")).unwrap();
    let res = paamm(&["replay", "--input", bad.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 17"));

    let missing = paamm(&["replay", "--input", dir.path().join("nope.csv").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn replay_gap_decays_after_a_jump() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("jump.csv");
    let mut body = String::from("1,100\n");
    for t in 2..=12 {
        body.push_str(&format!("{t},110\n"));
    }
    fs::write(&file, body).unwrap();
    let csv = ok(&["replay", "--input", file.to_str().unwrap(), "--lambda", "0.5"]);
    let gaps: Vec<f64> = column(&csv, "top_gap");
    let g = gaps[1];
    assert!((g - 1.1f64.ln()).abs() < 1e-12);
    for w in gaps[1..].windows(2) {
        assert!((w[1] - 0.5 * w[0]).abs() <= w[0] * w[0] / 8.0 + 1e-15, "{w:?}");
    }
}

#[test]
fn rerun_reproduces_outputs_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    ok(&[
        "frontier",
        "--lambda",
        "0.5,1",
        "--blocks",
        "5000",
        "--burn-in",
        "100",
        "--replications",
        "3",
        "--format",
        "json",
        "--out",
        first.to_str().unwrap(),
    ]);
    let manifest = first.join("manifest.json");
    ok(&["rerun", manifest.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    for name in ["frontier.json", "manifest.json"] {
        assert_eq!(
            fs::read(first.join(name)).unwrap(),
            fs::read(second.join(name)).unwrap(),
            "{name}"
        );
    }
    fs::write(dir.path().join("broken.json"), "{").unwrap();
    let res = paamm(&["rerun", dir.path().join("broken.json").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
}
