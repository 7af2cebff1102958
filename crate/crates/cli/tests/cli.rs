use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use binrd::analysis::bsc_wz_oracle;
use serde_json::Value;

fn binrd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binrd"))
        .args(args)
        .env_remove("RD_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = binrd(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    binrd(args).status.code().unwrap()
}

/// Header and rows of a CSV document.
fn csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn floats(rows: &[Vec<String>], col: usize) -> Vec<f64> {
    rows.iter().map(|r| r[col].parse().unwrap()).collect()
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn predictive_curve_rows() {
    let (header, rows) = csv(&ok(&[
        "predictive",
        "--a",
        "0.1",
        "--b",
        "0.4",
        "--points",
        "3",
    ]));
    assert_eq!(header, ["d", "rate"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2][1], "0");

    let (_, rows) = csv(&ok(&[
        "predictive",
        "--a",
        "0.227",
        "--b",
        "0.227",
        "--points",
        "2",
    ]));
    assert_eq!(rows[0], ["0", "0.772744859"]);
}

#[test]
fn invalid_parameters_exit_2() {
    assert_eq!(code(&["predictive", "--a", "1.2", "--b", "0.4"]), 2);
    assert_eq!(code(&["predictive", "--a", "-0.1", "--b", "0.4"]), 2);
    assert_eq!(
        code(&["predictive", "--a", "0.1", "--b", "0.4", "--points", "1"]),
        2
    );
    assert_eq!(code(&["predictive", "--a", "0.1"]), 2);
    assert_eq!(code(&["rate-loss", "--bsc-sweep", "0.1:0.6:5"]), 2);
    assert_eq!(code(&["rate-loss", "--bsc-sweep", "0.1:0.2"]), 2);
    assert_eq!(code(&["simulate", "--n", "0"]), 2);
    assert_eq!(code(&["simulate", "--rule", "xor"]), 2);
    assert_eq!(
        code(&["--threads", "0", "predictive", "--a", "0.1", "--b", "0.4"]),
        2
    );
}

#[test]
fn json_output_carries_provenance() {
    let doc = json(&ok(&[
        "predictive",
        "--a",
        "0.6",
        "--b",
        "0.9",
        "--points",
        "4",
        "--format",
        "json",
    ]));
    assert_eq!(doc["schema"], "predictive_curve");
    assert_eq!(doc["columns"], serde_json::json!(["d", "rate"]));
    assert_eq!(doc["rows"].as_array().unwrap().len(), 4);
    let prov = &doc["provenance"];
    assert_eq!(prov["input"]["a"], 0.6);
    // complement then swap: (0.6, 0.9) -> (0.4, 0.1) -> (0.1, 0.4)
    assert_eq!(prov["canonical"]["a"], 0.1);
    assert_eq!(prov["canonical"]["b"], 0.4);
    assert_eq!(prov["transform"]["complemented"], true);
    assert_eq!(prov["transform"]["swapped"], true);
}

#[test]
fn csv_file_gets_provenance_sidecar_and_stub() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    ok(&[
        "predictive",
        "--a",
        "0.1",
        "--b",
        "0.4",
        "--out",
        out.to_str().unwrap(),
        "--gnuplot-stub",
    ]);
    let (header, rows) = csv(&read(&out));
    assert_eq!(header, ["d", "rate"]);
    assert_eq!(rows.len(), 512);
    let prov = json(&read(&dir.path().join("curve.provenance.json")));
    assert_eq!(prov["provenance"]["command"], "predictive");
    assert!(read(&dir.path().join("curve.gp")).contains("'curve.csv' using 1:2"));
}

#[test]
fn wz_writes_all_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    ok(&[
        "wz",
        "--a",
        "0.1",
        "--b",
        "0.4",
        "--out",
        d,
        "--regions",
        "--grid",
        "64",
    ]);

    let (header, rows) = csv(&read(&dir.path().join("trajectory.csv")));
    assert_eq!(header, ["d", "p", "q", "region"]);
    let mut labels: Vec<&str> = rows.iter().map(|r| r[3].as_str()).collect();
    labels.dedup();
    assert!(labels.len() >= 2, "{labels:?}");

    let (header, rows) = csv(&read(&dir.path().join("regions.csv")));
    assert_eq!(header, ["p", "q", "region"]);
    assert_eq!(rows.len(), 4096);
    assert!(rows
        .iter()
        .all(|r| ["I", "II", "III", "IV"].contains(&r[2].as_str())));

    let (header, _) = csv(&read(&dir.path().join("envelope.csv")));
    assert_eq!(header, ["d", "rate"]);
    let summary = json(&read(&dir.path().join("summary.json")));
    let ts = &summary["time_share"];
    assert!(ts["start"]["d"].as_f64().unwrap() < ts["end"]["d"].as_f64().unwrap());
    assert_eq!(summary["thresholds"]["t1"].as_f64().unwrap(), 0.0833333333);
}

#[test]
fn wz_z_channel_matches_predictive() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    ok(&[
        "wz", "--a", "0", "--b", "0.4", "--out", d, "--points", "128",
    ]);
    let (_, env) = csv(&read(&dir.path().join("envelope.csv")));
    let (_, pred) = csv(&ok(&[
        "predictive",
        "--a",
        "0",
        "--b",
        "0.4",
        "--points",
        "128",
    ]));
    assert_eq!(env.len(), pred.len());
    for (e, p) in env.iter().zip(&pred) {
        assert_eq!(e[0], p[0]);
        let (re, rp): (f64, f64) = (e[1].parse().unwrap(), p[1].parse().unwrap());
        assert!((re - rp).abs() <= 1e-4, "{e:?} vs {p:?}");
    }
}

#[test]
fn ba_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        ok(&[
            "--threads",
            threads,
            "ba",
            "--a",
            "0.1",
            "--b",
            "0.4",
            "--card",
            "3",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        (read(&out.join("curve.csv")), read(&out.join("log.json")))
    };
    let first = run("one", "1");
    let second = run("two", "4");
    assert_eq!(first, second);
    let log = json(&first.1);
    assert_eq!(log["points"].as_array().unwrap().len(), 64);
    assert_eq!(log["provenance"]["settings"]["seed"], 7);
}

#[test]
fn ba_symmetric_channel_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    ok(&[
        "ba", "--a", "0.227", "--b", "0.227", "--card", "3", "--out", d,
    ]);
    let (_, rows) = csv(&read(&dir.path().join("curve.csv")));
    let ds = floats(&rows, 0);
    let rates = floats(&rows, 1);
    // the oracle is evaluated on a dense grid and interpolated at the BA points
    let grid: Vec<f64> = (0..=512).map(|i| 0.227 * i as f64 / 512.0).collect();
    let oracle = bsc_wz_oracle(0.227, &grid).unwrap();
    for (d, r) in ds.iter().zip(&rates) {
        let exact = oracle.interpolate(d.min(0.227)).unwrap();
        assert!((r - exact).abs() <= 1e-3, "d={d}: {r} vs {exact}");
    }
}

#[test]
fn ba_strict_flags_non_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = [
        "ba",
        "--a",
        "0.1",
        "--b",
        "0.4",
        "--max-iter",
        "2",
        "--lambdas",
        "4",
        "--out",
        d,
    ];
    assert_eq!(code(&args), 0);
    let log = json(&read(&dir.path().join("log.json")));
    assert_eq!(log["all_converged"], false);
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(code(&strict), 3);
    assert_eq!(
        code(&["ba", "--a", "0.1", "--b", "0.4", "--card", "1", "--out", d]),
        2
    );
}

#[test]
fn rate_loss_single_channel() {
    let (header, rows) = csv(&ok(&[
        "rate-loss",
        "--a",
        "0",
        "--b",
        "0.3",
        "--points",
        "128",
    ]));
    assert_eq!(header, ["d", "delta"]);
    assert!(floats(&rows, 1).iter().all(|x| x.abs() <= 1e-4));

    let (_, rows) = csv(&ok(&[
        "rate-loss",
        "--a",
        "0.1",
        "--b",
        "0.4",
        "--points",
        "128",
    ]));
    let delta = floats(&rows, 1);
    assert!(delta[0].abs() <= 1e-9 && delta[delta.len() - 1].abs() <= 1e-9);
    assert_eq!(rows.last().unwrap()[0], "0.25");
}

#[test]
fn rate_loss_sweep_finds_peak() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let summary = dir.path().join("peak.json");
    ok(&[
        "rate-loss",
        "--bsc-sweep",
        "0.01:0.49:97",
        "--out",
        out.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    let (header, rows) = csv(&read(&out));
    assert_eq!(header, ["a", "b", "max_delta", "argmax_d"]);
    assert_eq!(rows.len(), 97);
    let peak = &json(&read(&summary))["summary"]["peak"];
    let (t, delta) = (
        peak["a"].as_f64().unwrap(),
        peak["max_delta"].as_f64().unwrap(),
    );
    assert!(
        (t - 0.227).abs() <= 5e-3 && (delta - 0.0765).abs() <= 1e-3,
        "{peak}"
    );
}

#[test]
fn simulate_reports() {
    let doc = json(&ok(&[
        "simulate", "--p", "0", "--q", "0", "--rule", "u", "--n", "1000",
    ]));
    assert_eq!(doc["estimate"], 0.0);
    assert_eq!(doc["errors"], 0);

    let doc = json(&ok(&[
        "simulate", "--a", "0.1", "--b", "0.4", "--p", "0.05", "--q", "0.05", "--rule", "auto",
        "--n", "1000000", "--seed", "1",
    ]));
    assert_eq!(doc["rule"], "u");
    assert_eq!(doc["analytic"], 0.05);
    assert!(doc["z_score"].as_f64().unwrap().abs() <= 4.0);

    let doc = json(&ok(&["simulate", "--rule", "y", "--n", "1000000"]));
    assert_eq!(doc["analytic"], 0.25);
    assert!(doc["z_score"].as_f64().unwrap().abs() <= 4.0);

    let (header, rows) = csv(&ok(&["simulate", "--format", "csv", "--n", "10"]));
    assert_eq!(
        header,
        ["rule", "analytic", "estimate", "stderr", "z_score", "samples"]
    );
    assert_eq!(rows[0][5], "10");
}

#[test]
fn simulate_auto_rule_in_raw_labels() {
    // non-canonical input: the canonical argmax rule is mapped back, so the
    // analytic distortion is the sum of minima of the raw joint
    let doc = json(&ok(&[
        "simulate", "--a", "0.7", "--b", "0.2", "--p", "0.8", "--q", "0.1", "--n", "1000000",
        "--seed", "3",
    ]));
    let ch = binrd::CorrelationChannel::new(0.7, 0.2).unwrap();
    let aux = binrd::AuxChannel::new(0.8, 0.1).unwrap();
    let expected = binrd::joint_pxyu(&ch, &aux).sum_of_mins();
    assert!((doc["analytic"].as_f64().unwrap() - expected).abs() < 1e-9);
    assert!(doc["z_score"].as_f64().unwrap().abs() <= 4.0);
}

#[test]
fn threads_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_binrd"))
        .args(["predictive", "--a", "0.1", "--b", "0.4", "--points", "3"])
        .env("RD_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
