// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn oqs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oqs"))
        .args(args)
        .output()
        .unwrap()
}

fn config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p
}

fn run(command: &str, text: &str, extra: &[&str]) -> (tempfile::TempDir, Output) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), text);
    let out = dir.path().join("out");
    let mut args = vec![
        command,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let o = oqs(&args);
    (dir, o)
}

/// Header comments, column names and rows of a CSV output.
fn read_csv(path: &Path) -> (Vec<String>, Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let comments = text
        .lines()
        .filter(|l| l.starts_with('#'))
        .map(String::from)
        .collect();
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .unwrap();
    let columns = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|x| x.unwrap().iter().map(String::from).collect())
        .collect();
    (comments, columns, rows)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn unknown_keys_are_config_errors() {
    let (_d, o) = run("weights", r#"{"experiment": "w", "bogus": true}"#, &[]);
    assert_eq!(code(&o), 2);
    let (_d, o) = run(
        "weights",
        r#"{"experiment": "w", "grid": {"beta": [0.1]}}"#,
        &[],
    );
    assert_eq!(code(&o), 2);
    let (_d, o) = run("weights", "{not json", &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_config_and_bad_arguments() {
    assert_eq!(
        code(&oqs(&["weights", "--config", "/nonexistent/x.json"])),
        2
    );
    assert_eq!(code(&oqs(&["frobnicate", "--config", "x.json"])), 2);
    let (_d, o) = run("weights", r#"{"experiment": "w"}"#, &["--threads", "0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn weights_output_and_metadata() {
    let text = r#"{"experiment": "wt", "model": {"sites": 4}, "grid": {"betas": {"from": 0.001, "to": 0.01, "points": 4}}}"#;
    let (d, o) = run("weights", text, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = d.path().join("out");
    let (comments, columns, rows) = read_csv(&out.join("wt.csv"));
    assert_eq!(columns, ["beta", "w_plus", "w_minus", "ratio", "expansion"]);
    assert_eq!(rows.len(), 4);
    let hash = format!("{:x}", Sha256::digest(text.as_bytes()));
    assert!(comments.contains(&format!("# config_sha256 {hash}")));
    assert!(comments.iter().any(|c| c.starts_with("# oqs-core ")));
    let meta: Value =
        serde_json::from_str(&fs::read_to_string(out.join("wt.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config_sha256"], hash.as_str());
    assert_eq!(meta["command"], "weights");
    assert_eq!(meta["columns"].as_array().unwrap().len(), 5);
    // ratio follows the expansion at high temperature
    let last = &rows[0];
    let (ratio, expansion): (f64, f64) = (last[3].parse().unwrap(), last[4].parse().unwrap());
    assert!((ratio / expansion - 1.0).abs() < 0.6);
}

#[test]
fn output_is_deterministic() {
    let text = r#"{"experiment": "det", "grid": {"sites": [3], "gammas": [0.3]}, "trajectories": {"count": 8}, "seed": 4}"#;
    let (d1, o1) = run("imbalance", text, &["--threads", "1"]);
    let (d2, o2) = run("imbalance", text, &["--threads", "3"]);
    assert_eq!(code(&o1), 0, "{}", String::from_utf8_lossy(&o1.stderr));
    assert_eq!(code(&o2), 0);
    let a = fs::read_to_string(d1.path().join("out/det.csv")).unwrap();
    let b = fs::read_to_string(d2.path().join("out/det.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn imbalance_rows() {
    let text = r#"{"experiment": "imb", "grid": {"sites": [4], "gammas": [0.2]}, "trajectories": {"count": 16}}"#;
    let (d, o) = run("imbalance", text, &["--seed", "9"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (comments, columns, rows) = read_csv(&d.path().join("out/imb.csv"));
    assert!(comments.contains(&"# seed 9".to_string()));
    assert_eq!(columns, ["sites", "gamma", "method", "delta_n", "stderr"]);
    let methods: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
    assert_eq!(
        methods,
        ["rwa", "redfield", "truncated", "truncated-trajectories"]
    );
    let rwa: f64 = rows[0][3].parse().unwrap();
    assert!(rwa.abs() < 1e-8);
    let red: f64 = rows[1][3].parse().unwrap();
    let tr: f64 = rows[2][3].parse().unwrap();
    assert!(red > 0.0 && tr > 0.0);
}

#[test]
fn errormap_cells() {
    let text = r#"{"experiment": "em", "model": {"sites": 3}, "grid": {"temperatures": [20.0], "gammas": [0.1, 0.2], "points": 21}}"#;
    let (d, o) = run("errormap", text, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (_, columns, rows) = read_csv(&d.path().join("out/em.csv"));
    assert_eq!(
        columns,
        [
            "temperature",
            "gamma",
            "d_rwa_ss",
            "d_trunc_ss",
            "d_rwa_transient",
            "d_trunc_transient",
            "w_ratio",
            "redfield_negative"
        ]
    );
    assert_eq!(rows.len(), 2);
    for r in &rows {
        let d_rwa: f64 = r[2].parse().unwrap();
        let d_tr: f64 = r[3].parse().unwrap();
        assert!(d_tr < d_rwa);
        assert_eq!(r[7], "false");
    }
}

#[test]
fn errormap_large_chain_needs_full() {
    let (_d, o) = run(
        "errormap",
        r#"{"experiment": "em", "model": {"sites": 8}}"#,
        &[],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn optim_compare_traces() {
    let text = r#"{"experiment": "oc", "model": {"sites": 3}, "grid": {"points": 11}}"#;
    let (d, o) = run("optim_compare", text, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (_, columns, rows) = read_csv(&d.path().join("out/oc.csv"));
    assert_eq!(columns.len(), 1 + 4 * 4);
    assert_eq!(columns[1], "redfield_p0");
    assert_eq!(rows.len(), 11);
    let meta: Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("out/oc.meta.json")).unwrap())
            .unwrap();
    let avg = &meta["summary"]["time_averaged_distance"];
    assert!(avg["truncated"].as_f64().unwrap() < avg["truncated-fixed"].as_f64().unwrap());
}

#[test]
fn brownian_table() {
    let text = r#"{"experiment": "bm", "grid": {"temperatures": [10, 50]}}"#;
    let (d, o) = run("brownian", text, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (_, _, rows) = read_csv(&d.path().join("out/bm.csv"));
    let lam: f64 = rows[1][1].parse().unwrap();
    assert!((lam - 1.0).abs() < 0.02);
    let meta: Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("out/bm.meta.json")).unwrap())
            .unwrap();
    assert!(
        (meta["summary"]["ratio_agreement_extrapolated"]
            .as_f64()
            .unwrap()
            - 1.0)
            .abs()
            < 0.05
    );
}

#[test]
fn brownian_fock_truncation_is_rejected() {
    let (_d, o) = run(
        "brownian",
        r#"{"experiment": "bm", "oscillator": {"levels": 12}, "grid": {"temperatures": [50]}}"#,
        &[],
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Fock"));
}
