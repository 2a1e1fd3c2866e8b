use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn nlsgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlsgraph")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(subcommand: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![subcommand, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    nlsgraph(&args)
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

const SHORT_RUN: &str = r#"
p = 5.0

[graph]
kind = "star"
halflines = 3
truncation = 15.0

[grid]
h = 0.1

[datum]
kind = "line_soliton"
launch = 1
x0 = 7.0
v0 = -0.3

[integrator]
dt = 0.02

[run]
t_end = 4.0
record_every = 10
snapshot_times = [0.0, 2.0, 4.0]
observables = ["f", "orbital"]
orbital_exclusion = 2.0
"#;

const SHORT_FLOW: &str = r#"
p = 5.0

[graph]
kind = "bubble_tower"
perimeters = [2.0, 4.0]
truncation = 15.0

[grid]
h = 0.1

[groundstate]
omega = 1.0
"#;

#[test]
fn invalid_config_exits_2_with_a_line_number_and_writes_nothing() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), "bad.toml", &SHORT_RUN.replace("dt = 0.02", "dt = -0.02"));
    let result = run("simulate", &config, &out, &[]);
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("line 19"), "{stderr}");
    assert!(!out.exists());

    let config = write_config(tmp.path(), "typo.toml", &SHORT_RUN.replace("record_every", "record_evry"));
    let result = run("simulate", &config, &out, &[]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("record_evry"));
    assert!(!out.exists());
}

#[test]
fn missing_tables_and_bad_flags_exit_2() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), "flow.toml", SHORT_FLOW);
    assert_eq!(run("simulate", &config, &out, &[]).status.code(), Some(2));
    assert_eq!(run("scan-velocity", &config, &out, &[]).status.code(), Some(2));
    assert_eq!(run("groundstate", &config, &out, &["--workers", "0"]).status.code(), Some(2));
    assert_eq!(nlsgraph(&["simulate"]).status.code(), Some(2));
    assert_eq!(nlsgraph(&["simulate", "--config", "/nonexistent/config.toml"]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn simulate_writes_every_table_and_a_consistent_summary() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let config = write_config(tmp.path(), "run.toml", SHORT_RUN);
    let result = run("simulate", &config, &out, &[]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    for file in ["graph.json", "observables.csv", "edges.csv", "snapshots.csv", "summary.json"] {
        assert!(out.join(file).is_file(), "{file} missing");
    }

    let mut reader = csv::Reader::from_path(out.join("observables.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let column = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 21);
    let series = |name: &str| -> Vec<f64> { rows.iter().map(|r| r[column(name)].parse().unwrap()).collect() };
    let drift = |xs: Vec<f64>| xs.iter().map(|x| ((x - xs[0]) / xs[0]).abs()).fold(0.0, f64::max);
    let s = summary(&out);
    assert_eq!(s["status"], "completed");
    assert_eq!(s["mass_drift"].as_f64().unwrap(), drift(series("mass")));
    assert_eq!(s["energy_drift"].as_f64().unwrap(), drift(series("energy")));
    let momentum = series("momentum");
    assert_eq!(s["momentum_initial"].as_f64().unwrap(), momentum[0]);
    assert_eq!(s["momentum_final"].as_f64().unwrap(), *momentum.last().unwrap());
    let kinetic = series("kinetic");
    let argmax = (0..kinetic.len()).fold(0, |best, i| if kinetic[i] > kinetic[best] { i } else { best });
    assert_eq!(s["collision_time"].as_f64().unwrap(), series("time")[argmax]);
    assert!(rows.iter().all(|r| !r[column("F")].is_empty() && !r[column("orbital_distance")].is_empty()));

    let snapshots = fs::read_to_string(out.join("snapshots.csv")).unwrap();
    assert!(snapshots.starts_with("time,edge_id,x,re,im,abs2"));
    let times: std::collections::BTreeSet<&str> = snapshots.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(times.len(), 3);
}

#[test]
fn identical_inputs_give_identical_outputs() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), "run.toml", SHORT_RUN);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run("simulate", &config, &a, &[]).status.success());
    assert!(run("simulate", &config, &b, &[]).status.success());
    for file in ["graph.json", "observables.csv", "edges.csv", "snapshots.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file} differs");
    }

    let flow = write_config(tmp.path(), "flow.toml", SHORT_FLOW);
    let (c, d, e) = (tmp.path().join("c"), tmp.path().join("d"), tmp.path().join("e"));
    assert!(run("groundstate", &flow, &c, &["--seed", "7"]).status.success());
    assert!(run("groundstate", &flow, &d, &["--seed", "7"]).status.success());
    assert!(run("groundstate", &flow, &e, &["--seed", "8"]).status.success());
    for file in ["diagnostics.csv", "state.csv", "summary.json"] {
        assert_eq!(fs::read(c.join(file)).unwrap(), fs::read(d.join(file)).unwrap(), "{file} differs");
    }
    assert_ne!(fs::read(c.join("diagnostics.csv")).unwrap(), fs::read(e.join("diagnostics.csv")).unwrap());
}

#[test]
fn ground_state_file_feeds_a_simulation() {
    let tmp = TempDir::new().unwrap();
    let flow = write_config(tmp.path(), "flow.toml", SHORT_FLOW);
    let state_dir = tmp.path().join("state");
    let result = run("groundstate", &flow, &state_dir, &[]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let s = summary(&state_dir);
    assert_eq!(s["classification"], "convergent");

    let text = format!(
        "{SHORT_FLOW}\n[datum]\nkind = \"file\"\npath = \"state/state.csv\"\n\n[integrator]\ndt = 0.05\n\n[run]\nt_end = 5.0\n"
    )
    .replace("[groundstate]\nomega = 1.0\n", "");
    let config = write_config(tmp.path(), "from_file.toml", &text);
    let out = tmp.path().join("evolved");
    let result = run("simulate", &config, &out, &[]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));

    // the ground state rotates in phase; its modulus and energy stay put
    let evolved = summary(&out);
    assert!(evolved["mass_drift"].as_f64().unwrap() < 1e-9);
    assert!(evolved["energy_drift"].as_f64().unwrap() < 1e-4, "{}", evolved["energy_drift"]);
    let mut reader = csv::Reader::from_path(out.join("observables.csv")).unwrap();
    let first = reader.records().next().unwrap().unwrap();
    let mass: f64 = first[1].parse().unwrap();
    let energy: f64 = first[2].parse().unwrap();
    assert!((mass - s["mu"].as_f64().unwrap()).abs() < 1e-12 * mass);
    assert!((energy - s["energy"].as_f64().unwrap()).abs() < 1e-12 * energy.abs());
}

#[test]
fn exported_graph_reloads_as_the_same_experiment() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), "run.toml", SHORT_RUN);
    let first = tmp.path().join("first");
    assert!(run("simulate", &config, &first, &[]).status.success());
    let text = SHORT_RUN.replace(
        "kind = \"star\"\nhalflines = 3\ntruncation = 15.0",
        "kind = \"file\"\npath = \"first/graph.json\"",
    );
    let config = write_config(tmp.path(), "reload.toml", &text);
    let second = tmp.path().join("second");
    let result = run("simulate", &config, &second, &[]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    assert_eq!(fs::read(first.join("observables.csv")).unwrap(), fs::read(second.join("observables.csv")).unwrap());
}

#[test]
fn mass_guard_violation_exits_3_and_keeps_the_partial_run() {
    let tmp = TempDir::new().unwrap();
    let text = SHORT_RUN.replace("[run]\n", "[run]\nmass_guard = 1e-18\n").replace("dt = 0.02", "dt = 0.02\ntolerance = 1e-4");
    let config = write_config(tmp.path(), "guard.toml", &text);
    let out = tmp.path().join("out");
    let result = run("simulate", &config, &out, &[]);
    assert_eq!(result.status.code(), Some(3), "{}", String::from_utf8_lossy(&result.stderr));
    let s = summary(&out);
    assert_eq!(s["status"], "mass_guard_abort");
    assert!(s["t_final"].as_f64().unwrap() < 4.0);
    assert!(out.join("observables.csv").is_file());
}

#[test]
fn unfinished_flow_exits_4_after_writing_its_report() {
    let tmp = TempDir::new().unwrap();
    let text = SHORT_FLOW.replace("omega = 1.0", "omega = 1.0\nmax_iterations = 3");
    let config = write_config(tmp.path(), "short.toml", &text);
    let out = tmp.path().join("out");
    let result = run("groundstate", &config, &out, &[]);
    assert_eq!(result.status.code(), Some(4), "{}", String::from_utf8_lossy(&result.stderr));
    let s = summary(&out);
    assert_eq!(s["classification"], "undetermined");
    assert_eq!(s["stop"], "max_iterations");
    assert!(out.join("diagnostics.csv").is_file() && out.join("state.csv").is_file());
}

#[test]
fn velocity_scan_writes_one_directory_and_row_per_member() {
    let tmp = TempDir::new().unwrap();
    let text = format!("{SHORT_RUN}\n[scan]\nvelocities = [-0.2, -0.3, -0.4]\n");
    let config = write_config(tmp.path(), "scan.toml", &text);
    let (serial, parallel) = (tmp.path().join("serial"), tmp.path().join("parallel"));
    assert!(run("scan-velocity", &config, &serial, &[]).status.success());
    assert!(run("scan-velocity", &config, &parallel, &["--workers", "3"]).status.success());
    for k in 0..3 {
        let member = format!("v_{k:03}");
        assert_eq!(
            fs::read(serial.join(&member).join("observables.csv")).unwrap(),
            fs::read(parallel.join(&member).join("observables.csv")).unwrap()
        );
    }
    let table = fs::read_to_string(serial.join("scan_velocity.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(
        lines.next().unwrap(),
        "index,v,status,reflected,collision_time,max_empty_edge_peak,launch_fraction,momentum_ratio"
    );
    let values: Vec<&str> = lines.map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(values, ["-0.2", "-0.3", "-0.4"]);
    assert_eq!(fs::read(serial.join("scan_velocity.csv")).unwrap(), fs::read(parallel.join("scan_velocity.csv")).unwrap());
}

#[test]
fn position_scan_reports_centroids() {
    let tmp = TempDir::new().unwrap();
    let text = format!("{}\n[scan]\npositions = [6.0, 8.0]\n", SHORT_RUN.replace("v0 = -0.3", "v0 = 0.0"));
    let config = write_config(tmp.path(), "scan.toml", &text);
    let out = tmp.path().join("out");
    assert!(run("scan-position", &config, &out, &["--workers", "2"]).status.success());
    let s = summary(&out);
    let members = s["members"].as_array().unwrap();
    assert_eq!(members.len(), 2);
    for (m, x0) in members.iter().zip([6.0, 8.0]) {
        assert_eq!(m["directory"], format!("x0_{:03}", m["index"].as_u64().unwrap()));
        let c0 = m["summary"]["centroid_initial"].as_f64().unwrap();
        assert!((c0 - x0).abs() < 0.05, "initial centroid {c0} for x0 = {x0}");
    }
    assert!(out.join("scan_position.csv").is_file());
}
