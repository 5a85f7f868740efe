//! Realizing configs into run directories, and sweeping batches of them.
//!
//! A run directory is self-contained: the config that produced it, a
//! manifest with the resolved step size and exit status, the diagnostic
//! series as CSV, and plain-text snapshots. Every file is written to a
//! temporary name and renamed into place, so a crash never leaves a
//! half-written table that later tooling would happily parse.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{ExperimentConfig, GridSpec};
use crate::diag::{self, DiagnosticSeries};
use crate::error::Error;
use crate::Result;
use crate::evolve::{evolve, EvolveConfig, Trajectory};
use crate::exec;
use crate::field::inverse_transform;
use crate::grid::make_grid;
use crate::initial::{
    generate_initial_data, Envelope, GaussianData, InitialData, RandomHsData, SolitonData,
    SplitData,
};
use crate::opcheck;
use crate::params::{DispersionMode, ModelParams};

/// How a run ended; everything except `Completed` maps to exit code 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Completed,
    Unstable { t: f64 },
    Contaminated { t: f64, fraction: f64 },
}

impl RunStatus {
    pub fn exit_code(self) -> u8 {
        match self {
            RunStatus::Completed => 0,
            RunStatus::Unstable { .. } | RunStatus::Contaminated { .. } => 2,
        }
    }

    pub fn label(self) -> String {
        match self {
            RunStatus::Completed => "completed".into(),
            RunStatus::Unstable { t } => format!("unstable(t={t})"),
            RunStatus::Contaminated { t, fraction } => {
                format!("contaminated(t={t} fraction={fraction})")
            }
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub status: RunStatus,
    /// Path of the diagnostic table; absent when the run died before its
    /// first snapshot interval completed.
    pub series: Option<PathBuf>,
}

/// FNV-1a over the canonical JSON form; stable across processes, so run
/// directories keyed by it collide exactly when configs coincide.
pub fn config_hash(config: &ExperimentConfig) -> u64 {
    let canonical = serde_json::to_string(config).expect("config serializes");
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for byte in canonical.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn series_csv(series: &DiagnosticSeries) -> String {
    let mut out = String::from("time");
    for name in &series.names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (t, row) in series.times.iter().zip(&series.rows) {
        out.push_str(&format!("{t}"));
        for value in row {
            out.push_str(&format!(",{value}"));
        }
        out.push('\n');
    }
    out
}

fn write_snapshots(dir: &Path, traj: &Trajectory) -> Result<usize> {
    let sub = dir.join("snapshots");
    fs::create_dir_all(&sub)?;
    let nodes = traj.grid().nodes().to_vec();
    for (idx, (t, field)) in traj.times.iter().zip(&traj.snapshots).enumerate() {
        let samples = inverse_transform(field);
        let mut text = format!("# t = {t}\n");
        for (x, u) in nodes.iter().zip(&samples) {
            text.push_str(&format!("{x} {u}\n"));
        }
        write_atomic(&sub.join(format!("snapshot_{idx:05}.txt")), &text)?;
    }
    Ok(traj.len())
}

fn opcheck_report() -> String {
    let mut out = String::new();
    for entry in opcheck::run_suite() {
        let verdict = if entry.pass { "PASS" } else { "FAIL" };
        out.push_str(&format!("{verdict} {} ({})\n", entry.name, entry.detail));
    }
    out
}

/// Soliton data solves one specific model; running it under any other would
/// silently measure nothing, so the mismatch is a config error.
fn check_soliton_model(descriptor: &InitialData, params: &ModelParams) -> Result<()> {
    let InitialData::Soliton(data) = descriptor else {
        return Ok(());
    };
    let compatible =
        params.n == 1 && params.gamma == 0.0 && params.b.len() == 1 && params.b[0] == data.b;
    if compatible {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "soliton data needs the KdV model: N = 1, gamma = 0, b = [{}]",
            data.b
        )))
    }
}

pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome> {
    config.validate()?;
    let grid = make_grid(config.grid.length, config.grid.n)?;
    let descriptor = config.initial_data.reseeded(config.seed);
    check_soliton_model(&descriptor, &config.model)?;
    let u0 = generate_initial_data(&descriptor, &grid)?;
    let dt = config.evolve.dt.resolve(&u0, &config.model, config.evolve.t_end)?;
    let evolve_config = EvolveConfig {
        dt,
        t_end: config.evolve.t_end,
        dealias: config.evolve.dealias,
        output_every: config.evolve.output_every,
        boundary_mass_threshold: config.evolve.boundary_mass_threshold,
    };

    fs::create_dir_all(out_dir)?;
    let (status, trajectory) = match evolve(&u0, &evolve_config, &config.model) {
        Ok(traj) => (RunStatus::Completed, Some(traj)),
        Err(Error::Instability { t }) => (RunStatus::Unstable { t }, None),
        Err(Error::BoundaryContamination { t, fraction }) => {
            (RunStatus::Contaminated { t, fraction }, None)
        }
        Err(other) => return Err(other),
    };

    let mut series_path = None;
    let mut snapshot_count = 0;
    if let Some(traj) = &trajectory {
        let series = diag::collect(traj, &config.diagnostics)?;
        let path = out_dir.join("series.csv");
        write_atomic(&path, &series_csv(&series))?;
        series_path = Some(path);
        snapshot_count = write_snapshots(out_dir, traj)?;
    }
    if config.opcheck {
        write_atomic(&out_dir.join("opcheck.txt"), &opcheck_report())?;
    }

    write_atomic(&out_dir.join("config.json"), &config.to_json())?;
    let manifest = serde_json::json!({
        "crate_version": env!("CARGO_PKG_VERSION"),
        "config_hash": format!("{:016x}", config_hash(config)),
        "grid": { "length": config.grid.length, "n": config.grid.n },
        "model": config.model,
        "seed": config.seed,
        "dt": dt,
        "t_end": config.evolve.t_end,
        "status": status.label(),
        "series": series_path.as_ref().map(|_| "series.csv"),
        "snapshots": snapshot_count,
    });
    let mut manifest_text =
        serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    manifest_text.push('\n');
    write_atomic(&out_dir.join("manifest.json"), &manifest_text)?;

    Ok(RunOutcome { dir: out_dir.to_path_buf(), status, series: series_path })
}

/// One sweep entry: a name for the aggregate table and either a parsed
/// config or the message explaining why parsing failed.
#[derive(Debug, Clone)]
pub struct SweepJob {
    pub name: String,
    pub config: std::result::Result<ExperimentConfig, String>,
}

fn sanitize_cell(text: &str) -> String {
    text.replace(',', ";").replace('\n', " ")
}

fn sweep_row(job: &SweepJob, out_dir: &Path) -> String {
    let config = match &job.config {
        Err(message) => {
            return format!("{},-,config-error,{}", job.name, sanitize_cell(message));
        }
        Ok(config) => config,
    };
    let hash = config_hash(config);
    let run_dir = out_dir.join(format!("{}-{hash:016x}", job.name));
    match run_experiment(config, &run_dir) {
        Ok(outcome) => format!(
            "{},{hash:016x},{},{}",
            job.name,
            sanitize_cell(&outcome.status.label()),
            if outcome.series.is_some() { "series.csv" } else { "-" }
        ),
        Err(err) => {
            let kind = if matches!(err, Error::Io(_)) { "io-error" } else { "config-error" };
            format!("{},{hash:016x},{kind},{}", job.name, sanitize_cell(&err.to_string()))
        }
    }
}

/// Run every job on a pool of `workers` threads and write `aggregate.csv`.
/// Individual failures become table rows; only an empty batch or an
/// unwritable output directory aborts the sweep.
pub fn sweep(jobs: &[SweepJob], workers: usize, out_dir: &Path) -> Result<PathBuf> {
    if jobs.is_empty() {
        return Err(Error::Config("sweep needs at least one config".into()));
    }
    if workers == 0 {
        return Err(Error::Config("sweep needs at least one worker".into()));
    }
    fs::create_dir_all(out_dir)?;
    let mut rows =
        exec::with_workers(workers, || exec::map_indexed(jobs.len(), |i| sweep_row(&jobs[i], out_dir)));
    rows.sort();
    let mut text = String::from("config,hash,status,detail\n");
    for row in &rows {
        text.push_str(row);
        text.push('\n');
    }
    let path = out_dir.join("aggregate.csv");
    write_atomic(&path, &text)?;
    Ok(path)
}

pub const PRESET_NAMES: &[&str] = &[
    "benjamin",
    "kawahara",
    "kdv7",
    "kdv-soliton",
    "benjamin-smoothing",
    "kawahara-smoothing",
    "kdv-comparison",
    "split-propagation",
    "kdv-criticality-m1",
    "kdv-criticality-m2",
    "kdv-criticality-m3",
    "kdv-criticality-m4",
    "kdv-criticality-m5",
];

/// Catalog config by name; the list of valid names is [`PRESET_NAMES`].
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    if let Some(suffix) = name.strip_prefix("kdv-criticality-m") {
        let m: u32 = suffix.parse().ok()?;
        if (1..=5).contains(&m) {
            return Some(criticality_preset(m));
        }
        return None;
    }
    Some(match name {
        "benjamin" => single_model_preset(
            ModelParams::new(1, 1.0, vec![], vec![1.0], DispersionMode::Hilbert).unwrap(),
            1.0,
        ),
        "kawahara" => single_model_preset(
            ModelParams::new(2, 0.0, vec![1.0], vec![1.0], DispersionMode::Hilbert).unwrap(),
            0.1,
        ),
        "kdv7" => single_model_preset(
            ModelParams::new(3, 0.0, vec![1.0, 1.0], vec![1.0], DispersionMode::Hilbert).unwrap(),
            0.01,
        ),
        "kdv-soliton" => kdv_soliton_preset(),
        "benjamin-smoothing" => benjamin_smoothing_preset(),
        "kawahara-smoothing" => kawahara_smoothing_preset(),
        "kdv-comparison" => kdv_comparison_preset(),
        "split-propagation" => split_propagation_preset(),
        _ => return None,
    })
}

use crate::config::{DtSpec, EvolveSection};
use crate::evolve::Dealias;
use crate::diag::FunctionalSpec;
use crate::ops::OperatorKind;

fn single_model_preset(model: ModelParams, t_end: f64) -> ExperimentConfig {
    ExperimentConfig {
        model,
        grid: GridSpec { length: 100.0, n: 512 },
        evolve: EvolveSection {
            dt: DtSpec::Suggested { safety: 0.5 },
            t_end,
            dealias: Dealias::TwoThirds,
            output_every: 16,
            boundary_mass_threshold: 1.0,
        },
        initial_data: InitialData::Gaussian(GaussianData {
            amplitude: 0.5,
            width: 5.0,
            center: 0.0,
        }),
        diagnostics: vec![
            FunctionalSpec::Mass,
            FunctionalSpec::Energy,
            FunctionalSpec::Sobolev { s: 1.0 },
        ],
        seed: 2024,
        output_dir: None,
        opcheck: false,
    }
}

fn kdv_soliton_preset() -> ExperimentConfig {
    ExperimentConfig {
        model: ModelParams::kdv(6.0),
        grid: GridSpec { length: 40.0, n: 1024 },
        evolve: EvolveSection {
            dt: DtSpec::Suggested { safety: 0.5 },
            t_end: 1.0,
            dealias: Dealias::TwoThirds,
            output_every: 256,
            boundary_mass_threshold: 1.0,
        },
        initial_data: InitialData::Soliton(SolitonData { speed: 4.0, b: 6.0, center: 0.0 }),
        diagnostics: vec![
            FunctionalSpec::Mass,
            FunctionalSpec::Energy,
            FunctionalSpec::IntegralI,
            FunctionalSpec::Sobolev { s: 1.0 },
        ],
        seed: 2024,
        output_dir: None,
        opcheck: false,
    }
}

/// Rough H^s data under the Benjamin model, instrumented for the local
/// smoothing functionals at the three grades around the expected gain.
fn benjamin_smoothing_preset() -> ExperimentConfig {
    let s = 1.6;
    let mut diagnostics = vec![
        FunctionalSpec::Mass,
        FunctionalSpec::Energy,
        FunctionalSpec::Sobolev { s },
        FunctionalSpec::Sobolev { s: s + 1.0 },
    ];
    for r in [s, s + 0.5, s + 1.0] {
        for kind in OperatorKind::ALL {
            diagnostics.push(FunctionalSpec::Kato { r, big_r: 5.0, kind });
        }
    }
    ExperimentConfig {
        model: ModelParams::new(1, 1.0, vec![], vec![1.0], DispersionMode::Hilbert).unwrap(),
        grid: GridSpec { length: 300.0, n: 1024 },
        evolve: EvolveSection {
            dt: DtSpec::Fixed(0.5 / 512.0),
            t_end: 0.5,
            dealias: Dealias::TwoThirds,
            output_every: 1,
            boundary_mass_threshold: 1.0,
        },
        initial_data: InitialData::RandomHs(RandomHsData {
            s,
            delta: 0.05,
            seed: 2024,
            amplitude: 0.25,
            envelope: Some(Envelope { center: 0.0, width: 30.0 }),
        }),
        diagnostics,
        seed: 2024,
        output_dir: None,
        opcheck: false,
    }
}

fn kawahara_smoothing_preset() -> ExperimentConfig {
    let s = 1.6;
    let mut diagnostics = vec![
        FunctionalSpec::Mass,
        FunctionalSpec::Sobolev { s },
        FunctionalSpec::Sobolev { s: s + 2.0 },
        FunctionalSpec::Kato { r: s, big_r: 5.0, kind: OperatorKind::J },
        FunctionalSpec::Kato { r: s + 1.0, big_r: 5.0, kind: OperatorKind::J },
    ];
    for kind in OperatorKind::ALL {
        diagnostics.push(FunctionalSpec::Kato { r: s + 2.0, big_r: 5.0, kind });
    }
    ExperimentConfig {
        model: ModelParams::new(2, 0.0, vec![1.0], vec![1.0], DispersionMode::Hilbert).unwrap(),
        grid: GridSpec { length: 400.0, n: 1024 },
        evolve: EvolveSection {
            dt: DtSpec::Fixed(0.01 / 512.0),
            t_end: 0.01,
            dealias: Dealias::TwoThirds,
            output_every: 1,
            boundary_mass_threshold: 1.0,
        },
        initial_data: InitialData::RandomHs(RandomHsData {
            s,
            delta: 0.05,
            seed: 2024,
            amplitude: 0.25,
            envelope: Some(Envelope { center: 0.0, width: 40.0 }),
        }),
        diagnostics,
        seed: 2024,
        output_dir: None,
        opcheck: false,
    }
}

/// The kawahara-smoothing run with the third-order model swapped in, data
/// and horizon unchanged; the r = s + 2 column then probes one derivative
/// beyond the available gain.
fn kdv_comparison_preset() -> ExperimentConfig {
    let mut config = kawahara_smoothing_preset();
    config.model = ModelParams::new(1, 0.0, vec![], vec![1.0], DispersionMode::Hilbert).unwrap();
    config
}

fn split_propagation_preset() -> ExperimentConfig {
    let m = 2.6;
    ExperimentConfig {
        model: ModelParams::new(1, 0.0, vec![], vec![0.25], DispersionMode::Hilbert).unwrap(),
        grid: GridSpec { length: 600.0, n: 2048 },
        evolve: EvolveSection {
            dt: DtSpec::Fixed(0.6 / 768.0),
            t_end: 0.6,
            dealias: Dealias::TwoThirds,
            output_every: 4,
            boundary_mass_threshold: 1.0,
        },
        initial_data: InitialData::Split(SplitData {
            rough: RandomHsData {
                s: 1.6,
                delta: 0.05,
                seed: 12,
                amplitude: 0.5,
                envelope: Some(Envelope { center: -60.0, width: 35.0 }),
            },
            smooth_right: GaussianData { amplitude: 0.15, width: 3.0, center: 20.0 },
            x0: 0.0,
        }),
        diagnostics: vec![
            FunctionalSpec::Mass,
            FunctionalSpec::Sobolev { s: 1.6 },
            FunctionalSpec::Propagation { r: m, x0: 0.0, eps: 0.5, v: 1.0 },
            FunctionalSpec::MirrorPropagation { r: m, x0: 0.0, eps: 0.5, v: 1.0 },
            FunctionalSpec::WindowSmoothing { m, x0: 0.0, eps: 0.5, big_r: 5.0, v: 1.0 },
            FunctionalSpec::DecayWeighted { r: m, s: 1.6, delta: 0.5 },
        ],
        seed: 2024,
        output_dir: None,
        opcheck: false,
    }
}

/// Gaussian data large enough that the degree-(m+1) nonlinearity decides
/// the outcome: low m disperses, high m blows up and exits with the
/// instability status.
fn criticality_preset(m: u32) -> ExperimentConfig {
    let mut b = vec![0.0; m as usize];
    b[m as usize - 1] = 1.0;
    ExperimentConfig {
        model: ModelParams::new(1, 0.0, vec![], b, DispersionMode::Hilbert).unwrap(),
        grid: GridSpec { length: 40.0, n: 256 },
        evolve: EvolveSection {
            dt: DtSpec::Suggested { safety: 0.5 },
            t_end: 0.5,
            dealias: Dealias::TwoThirds,
            output_every: 64,
            boundary_mass_threshold: 1.0,
        },
        initial_data: InitialData::Gaussian(GaussianData {
            amplitude: 3.0,
            width: 1.5,
            center: 0.0,
        }),
        diagnostics: vec![
            FunctionalSpec::Mass,
            FunctionalSpec::Energy,
            FunctionalSpec::Sobolev { s: 1.0 },
        ],
        seed: 2024,
        output_dir: None,
        opcheck: false,
    }
}
