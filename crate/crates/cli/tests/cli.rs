use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn blockboot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blockboot"))
        .args(args)
        .env_remove("BLOCKBOOT_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn dir_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn tune_matches_library_selector() {
    let out = blockboot(&["tune", "--method", "ebc", "--regime", "exponential", "--n", "10000"]);
    let v = stdout_json(&out);
    let lib = blockboot_core::tuning::ebc_optimal_expo(10_000, 1.0).unwrap();
    assert_eq!(v["b"].as_u64().unwrap() as usize, lib.b);
    assert_eq!(v["ell"].as_u64().unwrap() as usize, lib.ell);
    assert_eq!(v["k1"].as_f64().unwrap(), lib.k1);
}

#[test]
fn oracle_prints_single_json_line() {
    let out = blockboot(&[
        "oracle",
        "--seed",
        "3",
        "--n",
        "100",
        "--h",
        "0.625",
        "--oracle-R",
        "20000",
    ]);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.trim_end().lines().count(), 1);
    let v = stdout_json(&out);
    let p = v["p"].as_f64().unwrap();
    assert!((p - 0.673).abs() < 0.02, "p = {p}");
    assert!(v["std_err"].as_f64().unwrap() > 0.0);
}

#[test]
fn series_round_trip_reproduces_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let sim = blockboot(&[
        "simulate",
        "--seed",
        "11",
        "--n",
        "80",
        "--output-dir",
        dir_arg(dir.path()),
    ]);
    assert!(sim.status.success());
    let series = dir.path().join("series.csv");
    let est = [
        "estimate", "--seed", "11", "--n", "80", "--method", "ebc", "--b", "4", "--ell", "3", "--k1", "0.7", "--c2",
        "1.5", "--B", "500",
    ];
    let direct = stdout_json(&blockboot(&est));
    let mut from_file: Vec<&str> = est.to_vec();
    from_file.extend(["--series", series.to_str().unwrap()]);
    let reread = stdout_json(&blockboot(&from_file));
    assert_eq!(direct, reread);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n": 60, "master_seed": 1}"#).unwrap();
    let run = |seed: Option<&str>| {
        let mut args = vec![
            "estimate",
            "--config",
            cfg.to_str().unwrap(),
            "--method",
            "uns",
            "--b",
            "3",
            "--ell",
            "2",
            "--k1",
            "1.0",
            "--B",
            "400",
        ];
        if let Some(s) = seed {
            args.extend(["--seed", s]);
        }
        stdout_json(&blockboot(&args))
    };
    let from_config = run(None);
    assert_eq!(from_config, run(Some("1")));
    assert_ne!(from_config["p_hat"], run(Some("2"))["p_hat"]);
}

#[test]
fn exit_codes() {
    assert_eq!(blockboot(&["benchmark"]).status.code(), Some(2));
    let out = blockboot(&["oracle", "--seed", "1", "--set", "not_a_key=3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not_a_key"));
    assert_eq!(blockboot(&["oracle", "--n", "100"]).status.code(), Some(2));
    assert_eq!(blockboot(&["frobnicate"]).status.code(), Some(2));
    let infeasible = blockboot(&[
        "estimate", "--seed", "1", "--n", "20", "--method", "uns", "--b", "2", "--ell", "30", "--k1", "1",
    ]);
    assert_eq!(infeasible.status.code(), Some(3));
}

#[test]
fn benchmark_is_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"n": 60, "h": 0.7, "grid_bl": [[3, 2], [2, 80]], "k1_grid": [0.5, 1.0], "c2_grid": [1.0, 2.0],
            "B": 200, "R": 30, "oracle_R": 2000, "master_seed": 5}"#,
    )
    .unwrap();
    let mut reports = Vec::new();
    for workers in ["1", "3"] {
        let out_dir = dir.path().join(format!("w{workers}"));
        let out = blockboot(&[
            "benchmark",
            "--config",
            cfg.to_str().unwrap(),
            "--workers",
            workers,
            "--output-dir",
            dir_arg(&out_dir),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let csv = std::fs::read_to_string(out_dir.join("mse_report.csv")).unwrap();
        assert!(csv.starts_with("method,b,ell,best_k1,best_c2,mse,bias,variance,mc_std_err"));
        let sidecar: Value =
            serde_json::from_str(&std::fs::read_to_string(out_dir.join("mse_report.json")).unwrap()).unwrap();
        assert!(sidecar["oracle_p"].is_number());
        assert!(out_dir.join("mse_grid.csv").exists());
        reports.push(csv);
    }
    assert_eq!(reports[0], reports[1]);
    // the (2, 80) cell exceeds n and is reported with empty fields
    assert!(reports[0].lines().any(|l| l.starts_with("UNS,2,80,,")));
}

#[test]
fn sensitivity_scan_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"n": 60, "grid_bl": [[3, 2]], "k1_grid": [0.3, 0.6, 1.2], "B": 100, "R": 20, "oracle_R": 1000, "master_seed": 2}"#,
    )
    .unwrap();
    let out = blockboot(&[
        "benchmark",
        "--config",
        cfg.to_str().unwrap(),
        "--scan",
        "k1",
        "--cell",
        "3,2",
        "--method",
        "uns",
        "--output-dir",
        dir_arg(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sensitivity.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn curves_and_cumulants_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = blockboot(&["curves", "--beta-grid", "2.5:10:5", "--output-dir", dir_arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["g0", "g1", "g2", "bminmax", "q_exponents"] {
        let csv = std::fs::read_to_string(dir.path().join(format!("{name}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 6, "{name}");
    }
    let out = blockboot(&[
        "cumulants",
        "--seed",
        "4",
        "--n-list",
        "100,200",
        "--R",
        "1000",
        "--output-dir",
        dir_arg(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("cumulants.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}
