//! Black-box tests of the benkdv binary: exit codes, output layout, and the
//! determinism guarantees the CLI advertises.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn benkdv(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_benkdv"))
        .args(args)
        .current_dir(dir)
        .env_remove("BENKDV_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn write_rough_config(path: &Path, seed: u64) {
    let text = format!(
        r#"{{
        "model": {{"N": 1, "M": 1, "gamma": 1.0, "a": [], "b": [0.5]}},
        "grid": {{"length": 60.0, "n": 256}},
        "evolve": {{"dt": 0.01, "t_end": 0.1, "output_every": 5}},
        "initial_data": {{"random_hs": {{"s": 2.0, "seed": 3, "amplitude": 0.2,
                          "envelope": {{"center": 0.0, "width": 10.0}}}}}},
        "diagnostics": [{{"mass": null}}],
        "seed": {seed}
    }}"#
    );
    fs::write(path, text).unwrap();
}

#[test]
fn preset_round_trips_through_run() {
    let tmp = tempfile::tempdir().unwrap();
    let config_path = tmp.path().join("m1.json");

    let emit = benkdv(
        &["preset", "kdv-criticality-m1", "--out", config_path.to_str().unwrap()],
        tmp.path(),
    );
    assert!(emit.status.success(), "{}", stderr_of(&emit));
    assert!(config_path.exists());

    let run_dir = tmp.path().join("run");
    let run = benkdv(
        &["run", config_path.to_str().unwrap(), "--out", run_dir.to_str().unwrap()],
        tmp.path(),
    );
    assert!(run.status.success(), "{}", stderr_of(&run));
    assert!(run_dir.join("series.csv").exists());
    assert!(run_dir.join("manifest.json").exists());
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.starts_with("completed -> "), "stdout: {stdout}");
}

#[test]
fn unknown_preset_fails_with_the_catalog() {
    let tmp = tempfile::tempdir().unwrap();
    let out = benkdv(&["preset", "kdv-criticality-m9", "--out", "x.json"], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_of(&out);
    assert!(err.contains("unknown preset") && err.contains("kdv-soliton"), "stderr: {err}");
}

#[test]
fn malformed_config_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.json");
    fs::write(&path, "{\"grid\": {\"length\": 40.0").unwrap();
    let out = benkdv(&["run", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_of(&out).starts_with("error: "), "stderr: {}", stderr_of(&out));
}

#[test]
fn contaminated_run_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("spread.json");
    fs::write(
        &path,
        r#"{
        "model": {"N": 1, "M": 1, "gamma": 1.0, "a": [], "b": [0.5]},
        "grid": {"length": 40.0, "n": 256},
        "evolve": {"dt": 0.005, "t_end": 3.0, "boundary_mass_threshold": 1e-10},
        "initial_data": {"gaussian": {"amplitude": 0.5, "width": 2.0, "center": 0.0}},
        "seed": 1
    }"#,
    )
    .unwrap();
    let run_dir = tmp.path().join("run");
    let out = benkdv(
        &["run", path.to_str().unwrap(), "--out", run_dir.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("contaminated"), "stdout: {stdout}");
    assert!(!run_dir.join("series.csv").exists());
}

#[test]
fn seed_flag_overrides_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("rough.json");
    write_rough_config(&path, 7);

    let base = tmp.path().join("base");
    let reseeded = tmp.path().join("reseeded");
    let replay = tmp.path().join("replay");
    for (dir, extra) in
        [(&base, None), (&reseeded, Some("99")), (&replay, Some("99"))]
    {
        let mut args =
            vec!["run", path.to_str().unwrap(), "--out", dir.to_str().unwrap()];
        if let Some(seed) = extra {
            args.extend(["--seed", seed]);
        }
        let out = benkdv(&args, tmp.path());
        assert!(out.status.success(), "{}", stderr_of(&out));
    }

    let series = |dir: &Path| fs::read(dir.join("series.csv")).unwrap();
    assert_ne!(series(&base), series(&reseeded));
    assert_eq!(series(&reseeded), series(&replay));
}

#[test]
fn run_directory_defaults_to_the_hash_name() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("rough.json");
    write_rough_config(&path, 5);
    let out = benkdv(&["run", path.to_str().unwrap()], tmp.path());
    assert!(out.status.success(), "{}", stderr_of(&out));

    let runs = tmp.path().join("runs");
    let entries: Vec<_> = fs::read_dir(&runs)
        .expect("default output dir exists")
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(entries.len(), 1);
    assert!(entries[0].starts_with("run-"), "dir: {}", entries[0]);
}

#[test]
fn sweep_collects_sorted_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let configs = tmp.path().join("configs");
    fs::create_dir(&configs).unwrap();
    write_rough_config(&configs.join("b-second.json"), 2);
    write_rough_config(&configs.join("a-first.json"), 1);
    fs::write(configs.join("broken.json"), "not json").unwrap();
    fs::write(configs.join("ignored.txt"), "not a config").unwrap();

    let out = benkdv(
        &["sweep", configs.to_str().unwrap(), "--workers", "2"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr_of(&out));

    let table = fs::read_to_string(configs.join("sweep/aggregate.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "config,hash,status,detail");
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("a-first,"));
    assert!(rows[2].starts_with("b-second,"));
    assert!(rows[3].starts_with("broken,-,config-error,"));
}

#[test]
fn check_prints_a_verdict_per_entry() {
    let tmp = tempfile::tempdir().unwrap();
    let out = benkdv(&["check"], tmp.path());
    assert!(out.status.success(), "{}", stderr_of(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert!(lines.len() >= 10, "suite printed {} lines", lines.len());
    for line in &lines {
        assert!(line.starts_with("PASS ") || line.starts_with("FAIL "), "line: {line}");
    }
    assert!(lines.iter().all(|l| l.starts_with("PASS ")), "suite has failures:\n{stdout}");
}
