use std::process::{Command, Output};

use topoqfi::models::ModelFamily;
use topoqfi::scaling::{exponent_scan, scan_table, Quantity};

fn topoqfi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topoqfi")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn chern_edge_row_has_no_closed_form() {
    let out = topoqfi(&["edge-qfi", "--model", "chern-wire", "--lambda", "-3.9", "--kx", "1.5707963267948966", "--sizes", "32"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("lambda,L,F_closed_form,F_numeric,cfi_position,flags\n"));
    let row = &rows(&text)[0];
    assert_eq!(row[2], "");
    assert!(row[3].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn json_to_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("edge.json");
    let out = topoqfi(&[
        "edge-qfi",
        "--lambda-grid",
        "0.1:0.5:3",
        "--sizes",
        "8,16",
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 6);
    assert_eq!(arr[2]["lambda"], 0.3);
    assert_eq!(arr[2]["L"], 8);
    let (a, b) = (arr[5]["F_closed_form"].as_f64().unwrap(), arr[5]["F_numeric"].as_f64().unwrap());
    assert!((a - b).abs() < 1e-8 * a);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": "manybody-qfi", "lambdas": [0.3], "sizes": [16], "method": "pbc-sum"}"#).unwrap();
    let out = topoqfi(&["manybody-qfi", "--config", cfg.to_str().unwrap(), "--lambda", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&stdout(&out));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][0].parse::<f64>().unwrap(), 1.0);
    assert_eq!(r[0][1], "16");
    let f: f64 = r[0][2].parse().unwrap();
    assert!((f - (256.0 - 48.0 + 2.0) / 12.0).abs() < 1e-6 * f);
}

#[test]
fn printed_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = topoqfi(&["exponent-scan", "--model", "chern-wire", "--t2", "1.5", "--lambda", "-3.5,-3.6", "--sizes", "8,16,32,64,128", "--print-config"]);
    assert_eq!(first.status.code(), Some(0));
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, &first.stdout).unwrap();
    let second = topoqfi(&["exponent-scan", "--config", path.to_str().unwrap(), "--print-config"]);
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn estimate_is_reproducible_across_thread_counts() {
    let args = |threads: &'static str| {
        ["estimate", "--samples", "2000", "--reps", "16", "--seed", "7", "--threads", threads]
    };
    let a = topoqfi(&args("1"));
    let b = topoqfi(&args("4"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    for key in ["lambda_hat_mean", "sample_variance", "predicted_crb", "ratio", "per_run_estimates", "run_failures"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["per_run_estimates"].as_array().unwrap().len(), 16);
}

#[test]
fn ssh_pbc_sum_is_extensive() {
    let out = topoqfi(&["manybody-qfi", "--lambda", "0.5", "--sizes", "4096", "--method", "pbc-sum"]);
    assert_eq!(out.status.code(), Some(0));
    let f: f64 = rows(&stdout(&out))[0][2].parse().unwrap();
    assert!((f / 4096.0 / (2.0 / 3.0) - 1.0).abs() < 5e-3);
}

#[test]
fn exponent_scan_matches_library_csv() {
    let sizes = [8usize, 16, 32, 64, 128];
    let lambdas = [0.5, 1.0];
    let expected = scan_table(&exponent_scan(&ModelFamily::ssh(), Quantity::ManybodyPbc, &lambdas, &sizes).unwrap()).to_csv();
    let out = topoqfi(&["exponent-scan", "--quantity", "manybody_pbc", "--lambda", "0.5,1", "--sizes", "8,16,32,64,128"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), expected);
}

#[test]
fn closed_forms_table() {
    let out = topoqfi(&["closed-forms", "--lambda", "0.5", "--sizes", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in ["edge_phi_z", "edge_tpt_limit", "ssh_ring_critical", "chern_critical_sum", "ssh_continuum_per_site"] {
        assert!(text.contains(name), "{name}");
    }
    let ring = rows(&text).into_iter().find(|r| r[0] == "ssh_ring_critical").unwrap();
    assert!((ring[3].parse::<f64>().unwrap() - 5.0 / 3.0).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(topoqfi(&["edge-qfi"]).status.code(), Some(2));
    assert_eq!(topoqfi(&["exponent-scan", "--lambda-grid", "0:1:x", "--sizes", "8,16,32,64,128"]).status.code(), Some(2));
    assert_eq!(topoqfi(&["exponent-scan", "--lambda", "0.5", "--sizes", "8,16"]).status.code(), Some(2));
    assert_eq!(topoqfi(&["estimate", "--lambda", "0.5", "--interval", "0.6:0.9"]).status.code(), Some(2));
    assert_eq!(topoqfi(&["edge-qfi", "--lambda", "0.5", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
    assert_eq!(topoqfi(&["manybody-qfi", "--model", "chern-bloch", "--method", "closed-form", "--lambda", "-3"]).status.code(), Some(3));
    assert_eq!(topoqfi(&["--help"]).status.code(), Some(0));
}
