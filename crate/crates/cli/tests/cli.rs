//! End-to-end checks of the command-line surface: flags, exit codes,
//! JSON schema round-trips, and the documented output formats.

use std::collections::BTreeMap;
use std::process::{Command, Output};

use serde::Deserialize;

fn gmacfb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmacfb"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[derive(Deserialize)]
struct Record {
    schema_version: String,
    command: String,
    params: BTreeMap<String, serde_json::Value>,
    results: BTreeMap<String, serde_json::Value>,
}

fn parse_record(out: &Output) -> Record {
    serde_json::from_str(&stdout(out)).expect("valid JSON record")
}

fn result_f64(rec: &Record, key: &str) -> f64 {
    rec.results[key].as_f64().unwrap_or_else(|| panic!("{key} is a number"))
}

#[test]
fn capacity_json_roundtrip_and_values() {
    let out = gmacfb(&["capacity", "--senders", "2", "--power", "1", "--json"]);
    assert!(out.status.success());
    let rec = parse_record(&out);
    assert_eq!(rec.schema_version, "1");
    assert_eq!(rec.command, "capacity");
    assert!(!rec.params.is_empty() && !rec.results.is_empty());
    assert!((result_f64(&rec, "phi") - 1.311).abs() < 1e-2);
    let expected = 0.5 * (1.0 + 2.0 * result_f64(&rec, "phi")).ln();
    assert!((result_f64(&rec, "sum_capacity") - expected).abs() < 1e-9);
}

#[test]
fn capacity_zero_power_and_bits() {
    let out = gmacfb(&["capacity", "--senders", "3", "--power", "0", "--json"]);
    assert!(out.status.success());
    let rec = parse_record(&out);
    assert_eq!(result_f64(&rec, "sum_capacity"), 0.0);
    let bits = gmacfb(&["capacity", "--senders", "2", "--power", "1", "--json", "--bits"]);
    let rec_bits = parse_record(&bits);
    let nats = gmacfb(&["capacity", "--senders", "2", "--power", "1", "--json"]);
    let rec_nats = parse_record(&nats);
    let ratio = result_f64(&rec_nats, "sum_capacity") / result_f64(&rec_bits, "sum_capacity");
    assert!((ratio - std::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn capacity_usage_errors() {
    let out = gmacfb(&["capacity", "--senders", "1", "--power", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = gmacfb(&["capacity", "--senders", "2"]);
    assert_eq!(out.status.code(), Some(2)); // clap: missing --power
}

#[test]
fn sweep_csv_shape_and_endpoints() {
    let out = gmacfb(&[
        "sweep", "--senders", "2", "--power-min", "1e-6", "--power-max", "1e6", "--points",
        "3", "--log-grid",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "P,phi,C_L,C_nofb,C_coop,low_gap,high_gap");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|t| t.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    // low gap vanishes on the left end, high gap on the right end.
    assert!(rows[0][5].abs() < 1e-6);
    assert!(rows[2][6].abs() < 1e-3);
    // phi column is monotone.
    assert!(rows[0][1] < rows[1][1] && rows[1][1] < rows[2][1]);
}

#[test]
fn sweep_single_point_matches_capacity() {
    let out = gmacfb(&[
        "sweep", "--senders", "2", "--power-min", "1", "--power-max", "1", "--points", "1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|t| t.parse().unwrap()).collect();
    let cap = parse_record(&gmacfb(&["capacity", "--senders", "2", "--power", "1", "--json"]));
    assert!((row[1] - result_f64(&cap, "phi")).abs() < 1e-12);
    assert!((row[2] - result_f64(&cap, "sum_capacity")).abs() < 1e-12);
}

#[test]
fn sweep_rejects_bad_ranges() {
    let out = gmacfb(&[
        "sweep", "--senders", "2", "--power-min", "10", "--power-max", "1", "--points", "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = gmacfb(&[
        "sweep", "--senders", "2", "--power-min", "0", "--power-max", "1", "--points", "2",
        "--log-grid",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dual_defaults_close_the_gap() {
    let out = gmacfb(&["dual", "--senders", "2", "--power", "1", "--json"]);
    assert!(out.status.success());
    let rec = parse_record(&out);
    assert!(result_f64(&rec, "duality_gap").abs() < 1e-6);
}

#[test]
fn dual_penalty_dominated_regime() {
    let out = gmacfb(&[
        "dual", "--senders", "2", "--power", "1", "--gamma", "0", "--lambda", "1000", "--json",
    ]);
    assert!(out.status.success());
    let rec = parse_record(&out);
    // J ~= lambda N P and the bound is far above the capacity.
    assert!((result_f64(&rec, "j_value") - 2000.0).abs() / 2000.0 < 1e-2);
    assert!(result_f64(&rec, "duality_gap") > 1.0);
}

#[test]
fn dual_rejects_negative_multipliers() {
    let out = gmacfb(&["dual", "--senders", "2", "--power", "1", "--gamma", "-0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn riccati_closed_form_values() {
    let out = gmacfb(&["riccati", "--senders", "2", "--beta", "1.1", "--json"]);
    assert!(out.status.success());
    let rec = parse_record(&out);
    let eig = rec.results["eigenvalues"].as_array().unwrap();
    let l1 = eig[0].as_f64().unwrap();
    assert!((l1 - (1.1f64.powi(4) - 1.0) / 2.0).abs() < 1e-12);
    assert!(result_f64(&rec, "dare_residual") < 1e-9);
    assert!(result_f64(&rec, "lambda_phi_defect") < 1e-8);
}

#[test]
fn riccati_iterative_agreement() {
    let out = gmacfb(&["riccati", "--senders", "3", "--beta", "1.1", "--iterative", "--json"]);
    assert!(out.status.success());
    let rec = parse_record(&out);
    assert!(result_f64(&rec, "iterative_vs_circulant") < 1e-8);
    assert!(result_f64(&rec, "iterative_init_agreement") < 1e-8);
}

#[test]
fn riccati_rejects_beta_at_most_one() {
    let out = gmacfb(&["riccati", "--senders", "2", "--beta", "0.9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn riccati_unreachable_tolerance_exits_4() {
    // A relative tolerance below the roundoff floor of the iteration can
    // never be met; the command reports a convergence failure.
    let out = gmacfb(&[
        "riccati", "--senders", "8", "--beta", "1.5", "--iterative", "--tol", "1e-17",
        "--max-iters", "5000",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("convergence"), "got: {err}");
}

#[test]
fn simulate_reports_bound_and_powers() {
    let out = gmacfb(&[
        "simulate", "--senders", "2", "--beta", "1.25", "--rate", "0.2", "--blocklength",
        "64", "--trials", "2000", "--seed", "7", "--power", "1", "--json",
    ]);
    assert!(out.status.success());
    let rec = parse_record(&out);
    assert_eq!(rec.results["bits_per_axis"].as_u64(), Some(6));
    assert!(result_f64(&rec, "error_rate") <= result_f64(&rec, "analytic_error_bound"));
    assert_eq!(rec.results["power_feasible"].as_bool(), Some(true));
}

#[test]
fn simulate_usage_errors() {
    let out = gmacfb(&[
        "simulate", "--senders", "2", "--beta", "1.25", "--rate", "0.2", "--blocklength",
        "64", "--trials", "0", "--power", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = gmacfb(&[
        "simulate", "--senders", "2", "--beta", "1.25", "--rate", "0.01", "--blocklength",
        "64", "--trials", "10", "--power", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("nearest feasible rate"), "got: {err}");
}

#[test]
fn maxcorr_demo_triple() {
    let out = gmacfb(&[
        "maxcorr", "--demo-triple", "--samples", "20000", "--seed", "5", "--json",
    ]);
    assert!(out.status.success());
    let rec = parse_record(&out);
    assert!((result_f64(&rec, "partial_correlation") + 0.5).abs() < 1e-12);
    assert!((result_f64(&rec, "best_nonlinear_estimate") - 0.5).abs() < 0.05);
    assert_eq!(rec.results["linear_achieves"].as_bool(), Some(true));
}

#[test]
fn maxcorr_covariance_file() {
    let dir = std::env::temp_dir();
    let path = dir.join("gmacfb_cov_ok.txt");
    std::fs::write(&path, "3\n1 0 1\n0 1 1\n1 1 3\n").unwrap();
    let out = gmacfb(&[
        "maxcorr", "--covariance", path.to_str().unwrap(), "--samples", "20000", "--degree",
        "1", "--json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = parse_record(&out);
    assert!((result_f64(&rec, "partial_correlation") + 0.5).abs() < 1e-12);
}

#[test]
fn maxcorr_input_errors_exit_3() {
    let dir = std::env::temp_dir();
    let bad_shape = dir.join("gmacfb_cov_bad.txt");
    std::fs::write(&bad_shape, "2\n1 0\n").unwrap();
    let out = gmacfb(&["maxcorr", "--covariance", bad_shape.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let not_psd = dir.join("gmacfb_cov_npsd.txt");
    std::fs::write(&not_psd, "2\n1 2\n2 1\n").unwrap();
    let out = gmacfb(&["maxcorr", "--covariance", not_psd.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let out = gmacfb(&["maxcorr", "--covariance", "/nonexistent/cov.txt"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn every_command_round_trips_through_the_schema() {
    let invocations: Vec<Vec<&str>> = vec![
        vec!["capacity", "--senders", "2", "--power", "1", "--json"],
        vec![
            "sweep", "--senders", "2", "--power-min", "0.5", "--power-max", "2", "--points",
            "3", "--json",
        ],
        vec!["dual", "--senders", "2", "--power", "1", "--json"],
        vec!["riccati", "--senders", "2", "--beta", "1.2", "--json"],
        vec![
            "simulate", "--senders", "2", "--beta", "1.3", "--rate", "0.25", "--blocklength",
            "16", "--trials", "50", "--power", "1", "--json",
        ],
        vec!["maxcorr", "--demo-triple", "--samples", "5000", "--degree", "1", "--json"],
    ];
    for args in invocations {
        let out = gmacfb(&args);
        assert!(out.status.success(), "{args:?}");
        let rec = parse_record(&out);
        assert_eq!(rec.schema_version, "1", "{args:?}");
        assert!(!rec.results.is_empty(), "{args:?}");
    }
}
