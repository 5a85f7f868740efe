//! End-to-end checks of the run directory layout: determinism of the files
//! an experiment writes, failure reporting, and sweep aggregation.

use std::fs;
use std::path::Path;

use benkdv::config::ExperimentConfig;
use benkdv::experiment::{config_hash, run_experiment, sweep, RunStatus, SweepJob};

fn rough_config(seed: u64) -> ExperimentConfig {
    let text = format!(
        r#"{{
        "model": {{"N": 1, "M": 1, "gamma": 1.0, "a": [], "b": [0.5]}},
        "grid": {{"length": 60.0, "n": 256}},
        "evolve": {{"dt": 0.01, "t_end": 0.1, "output_every": 2}},
        "initial_data": {{"random_hs": {{"s": 2.0, "seed": 3, "amplitude": 0.2,
                          "envelope": {{"center": 0.0, "width": 10.0}}}}}},
        "diagnostics": [{{"mass": null}}, {{"sobolev": {{"s": 1.0}}}}],
        "seed": {seed}
    }}"#
    );
    ExperimentConfig::from_json(&text).unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

#[test]
fn identical_runs_write_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let config = rough_config(7);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let out_a = run_experiment(&config, &a).unwrap();
    let out_b = run_experiment(&config, &b).unwrap();

    assert_eq!(out_a.status, RunStatus::Completed);
    assert_eq!(out_a.status, out_b.status);
    for name in ["series.csv", "config.json", "manifest.json"] {
        assert_eq!(read(&a, name), read(&b, name), "{name} differs between runs");
    }
    let snaps: Vec<_> = fs::read_dir(a.join("snapshots"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert!(!snaps.is_empty());
    for name in &snaps {
        let rel = Path::new("snapshots").join(name);
        let rel = rel.to_str().unwrap();
        assert_eq!(read(&a, rel), read(&b, rel), "{rel} differs between runs");
    }
}

#[test]
fn seed_changes_the_series() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    run_experiment(&rough_config(7), &a).unwrap();
    run_experiment(&rough_config(8), &b).unwrap();
    assert_ne!(read(&a, "series.csv"), read(&b, "series.csv"));
    assert_ne!(config_hash(&rough_config(7)), config_hash(&rough_config(8)));
}

#[test]
fn manifest_describes_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let config = rough_config(11);
    let dir = tmp.path().join("run");
    run_experiment(&config, &dir).unwrap();

    let manifest: serde_json::Value =
        serde_json::from_slice(&read(&dir, "manifest.json")).unwrap();
    assert_eq!(manifest["crate_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["config_hash"], format!("{:016x}", config_hash(&config)));
    assert_eq!(manifest["status"], "completed");
    assert_eq!(manifest["series"], "series.csv");
    assert_eq!(manifest["grid"]["n"], 256);
    assert_eq!(manifest["seed"], 11);

    let header = String::from_utf8(read(&dir, "series.csv")).unwrap();
    let header = header.lines().next().unwrap().to_string();
    assert_eq!(header, "time,mass,sobolev[s=1]");

    let reparsed = ExperimentConfig::from_json(
        &String::from_utf8(read(&dir, "config.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(config_hash(&reparsed), config_hash(&config));
}

#[test]
fn instability_is_recorded_not_propagated() {
    let text = r#"{
        "model": {"N": 1, "M": 1, "gamma": 0.0, "a": [], "b": [6.0]},
        "grid": {"length": 20.0, "n": 128},
        "evolve": {"dt": 0.05, "t_end": 1.0},
        "initial_data": {"gaussian": {"amplitude": 80.0, "width": 1.0, "center": 0.0}},
        "seed": 1
    }"#;
    let config = ExperimentConfig::from_json(text).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("blowup");
    let outcome = run_experiment(&config, &dir).unwrap();

    assert!(matches!(outcome.status, RunStatus::Unstable { .. }));
    assert_eq!(outcome.status.exit_code(), 2);
    assert!(outcome.series.is_none());
    assert!(!dir.join("series.csv").exists());
    let manifest: serde_json::Value =
        serde_json::from_slice(&read(&dir, "manifest.json")).unwrap();
    assert!(manifest["status"].as_str().unwrap().starts_with("unstable"));
    assert_eq!(manifest["series"], serde_json::Value::Null);
}

#[test]
fn boundary_contamination_aborts_the_run() {
    let text = r#"{
        "model": {"N": 1, "M": 1, "gamma": 1.0, "a": [], "b": [0.5]},
        "grid": {"length": 40.0, "n": 256},
        "evolve": {"dt": 0.005, "t_end": 3.0, "boundary_mass_threshold": 1e-10},
        "initial_data": {"gaussian": {"amplitude": 0.5, "width": 2.0, "center": 0.0}},
        "seed": 1
    }"#;
    let config = ExperimentConfig::from_json(text).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let outcome = run_experiment(&config, &tmp.path().join("spread")).unwrap();
    match outcome.status {
        RunStatus::Contaminated { t, fraction } => {
            assert!(t > 0.0 && t <= 3.0);
            assert!(fraction > 1e-10);
        }
        other => panic!("expected contamination, got {}", other.label()),
    }
}

#[test]
fn sweep_output_is_independent_of_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let jobs = vec![
        SweepJob {
            name: "broken".into(),
            config: Err("malformed config: expected value at line 1".into()),
        },
        SweepJob { name: "run-a".into(), config: Ok(rough_config(1)) },
        SweepJob { name: "run-b".into(), config: Ok(rough_config(2)) },
    ];

    let serial_dir = tmp.path().join("serial");
    let parallel_dir = tmp.path().join("parallel");
    let serial = sweep(&jobs, 1, &serial_dir).unwrap();
    let parallel = sweep(&jobs, 4, &parallel_dir).unwrap();

    let serial_bytes = fs::read(&serial).unwrap();
    assert_eq!(serial_bytes, fs::read(&parallel).unwrap());

    let table = String::from_utf8(serial_bytes).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "config,hash,status,detail");
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("broken,-,config-error,"));
    assert!(rows[2].starts_with("run-a,") && rows[2].contains(",completed,"));

    for job in &jobs[1..] {
        let hash = config_hash(job.config.as_ref().unwrap());
        let sub = format!("{}-{hash:016x}", job.name);
        assert_eq!(
            read(&serial_dir.join(&sub), "series.csv"),
            read(&parallel_dir.join(&sub), "series.csv"),
            "{sub} series differs across worker counts"
        );
    }
}

#[test]
fn failed_runs_become_rows_not_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let unstable = ExperimentConfig::from_json(
        r#"{
        "model": {"N": 1, "M": 1, "gamma": 0.0, "a": [], "b": [6.0]},
        "grid": {"length": 20.0, "n": 128},
        "evolve": {"dt": 0.05, "t_end": 1.0},
        "initial_data": {"gaussian": {"amplitude": 80.0, "width": 1.0, "center": 0.0}},
        "seed": 1
    }"#,
    )
    .unwrap();
    let jobs = vec![SweepJob { name: "hot".into(), config: Ok(unstable) }];
    let aggregate = sweep(&jobs, 1, tmp.path()).unwrap();
    let table = fs::read_to_string(aggregate).unwrap();
    let row = table.lines().nth(1).unwrap();
    assert!(row.starts_with("hot,") && row.contains("unstable"), "row: {row}");
}

#[test]
fn opcheck_flag_writes_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = rough_config(3);
    config.opcheck = true;
    let dir = tmp.path().join("checked");
    run_experiment(&config, &dir).unwrap();
    let report = fs::read_to_string(dir.join("opcheck.txt")).unwrap();
    assert!(report.lines().count() >= 5);
    for line in report.lines() {
        assert!(
            line.starts_with("PASS") || line.starts_with("FAIL"),
            "unexpected line: {line}"
        );
    }
}
