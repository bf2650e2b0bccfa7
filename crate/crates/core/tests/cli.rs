use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn aoi_eve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aoi-eve"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = aoi_eve(&full);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn analyze_reports_both_receivers() {
    let v = json(&["analyze", "--rho", "0.5", "--mu", "1", "--beta", "0.5"]);
    assert_eq!(v["delta_b"].as_f64(), Some(3.5));
    let de = v["delta_e"].as_f64().unwrap();
    assert!((de - 5.083_333_333_333_333).abs() < 1e-12);
    let expected =
        aoi_eve::aoi_pair(&aoi_eve::SystemParams::from_load(0.5, 1.0, 0.5).unwrap()).unwrap();
    // JSON numbers round-trip exactly
    assert_eq!(de, expected.delta_e);
    assert_eq!(v["objective"].as_f64().unwrap(), de / 12.25);
}

#[test]
fn optimize_and_asymptote() {
    let v = json(&["optimize", "--beta", "1", "--a", "1"]);
    assert!((v["rho_star"].as_f64().unwrap() - 0.531).abs() < 1e-3);
    assert_eq!(v["converged"], Value::Bool(true));
    assert_eq!(v["objective"], "welfare");

    let v = json(&["optimize"]);
    assert_eq!(v["objective"], "min_aoi");

    let v = json(&["asymptote", "--a", "1"]);
    assert!((v["rho_tilde"].as_f64().unwrap() - 0.389).abs() < 1e-3);
}

#[test]
fn json_round_trips_library_values() {
    let v = json(&["optimize", "--beta", "0.3", "--a", "2", "--mu", "1.5"]);
    let r =
        aoi_eve::maximize_objective(0.3, aoi_eve::TradeoffWeight::new(2.0).unwrap(), 1.5).unwrap();
    assert_eq!(v["rho_star"].as_f64().unwrap(), r.rho_star);
    assert_eq!(
        v["objective_at_star"].as_f64().unwrap(),
        r.objective_at_star
    );
    assert_eq!(v["bracket"][0].as_f64().unwrap(), r.bracket.0);
    assert_eq!(v["iterations"].as_u64().unwrap() as usize, r.iterations);
}

#[test]
fn exit_statuses() {
    assert_eq!(aoi_eve(&["analyze", "--rho", "1.2"]).status.code(), Some(2));
    assert_eq!(aoi_eve(&["analyze", "--rho"]).status.code(), Some(64));
    assert_eq!(aoi_eve(&["sweep"]).status.code(), Some(64));
    assert_eq!(
        aoi_eve(&[
            "simulate",
            "--rho",
            "0.5",
            "--arrivals",
            "1",
            "--replications",
            "1"
        ])
        .status
        .code(),
        Some(3)
    );
}

#[test]
fn simulate_is_seeded() {
    let args = [
        "simulate",
        "--rho",
        "0.5",
        "--beta",
        "0.5",
        "--arrivals",
        "20000",
        "--seed",
        "42",
        "--format",
        "json",
    ];
    let a = aoi_eve(&args);
    let b = aoi_eve(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["result"]["replications"].as_array().unwrap().len(), 10);
    assert_eq!(v["delta_b_theory"].as_f64(), Some(3.5));
}

#[test]
fn simulate_writes_trace_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("events.csv");
    let out = dir.path().join("result.csv");
    let status = aoi_eve(&[
        "simulate",
        "--rho",
        "0.5",
        "--beta",
        "0.5",
        "--arrivals",
        "500",
        "--replications",
        "2",
        "--trace",
        trace.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(status.status.success());
    let events = fs::read_to_string(trace).unwrap();
    assert!(events.starts_with("event_time,event_kind,packet_id,generation_time\n"));
    let result = fs::read_to_string(out).unwrap();
    assert!(result.lines().next().unwrap().contains("delta_b_hat"));
    assert_eq!(result.lines().count(), 2);
}

#[test]
fn sweep_files_are_named_by_grid_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = [
        "sweep",
        "--figure",
        "fig1",
        "--beta-list",
        "0.1,0.5,1",
        "--out",
        d,
    ];
    let first = aoi_eve(&args);
    assert!(
        first.status.success(),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let listed = String::from_utf8(first.stdout).unwrap();
    let paths: Vec<&str> = listed.lines().collect();
    assert_eq!(paths.len(), 2);
    let names: Vec<String> = paths
        .iter()
        .map(|p| {
            std::path::Path::new(p)
                .file_name()
                .unwrap()
                .to_string_lossy()
                .into_owned()
        })
        .collect();
    assert!(names[0].starts_with("fig1_") && names[0].ends_with(".csv"));
    assert!(names[1].starts_with("fig1_argmax_"));
    let bytes = fs::read(paths[0]).unwrap();
    assert!(bytes.starts_with(b"beta,a,rho,f,status\n"));

    let again = aoi_eve(&args);
    assert_eq!(listed.as_bytes(), again.stdout.as_slice());
    assert_eq!(bytes, fs::read(paths[0]).unwrap());
}

#[test]
fn sweep_to_stdout_in_json_lines() {
    let out = aoi_eve(&[
        "sweep",
        "--figure",
        "asymptote",
        "--a-list",
        "0.5,1,2",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 3);
    assert!((rows[1]["rho_tilde"].as_f64().unwrap() - 0.389).abs() < 1e-3);
}

#[test]
fn sweep_grid_flags() {
    let out = aoi_eve(&[
        "sweep",
        "--figure",
        "fig2",
        "--a-list",
        "1",
        "--grid-beta-min",
        "0.1",
        "--grid-beta-max",
        "0.3",
        "--grid-beta-step",
        "0.1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "a,beta,rho_star,below_ceiling,status");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("1.0,0.1,"));
    assert!(lines[3].starts_with("1.0,0.3,"));
}
