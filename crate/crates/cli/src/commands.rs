//! One function per subcommand. Each writes its artifacts and returns what
//! it would print.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use repcnot_core::analysis::{
    attach_aggregates, correlation_matrix, detection_probabilities, detection_probabilities_csv,
    lograte_csv, CorrelationMatrix, DetectionProbability, LogRateRow,
};
use repcnot_core::detfile::{read_detections, to_csv, write_detections};
use repcnot_core::noise::ConnectivityReport;
use repcnot_core::pipeline::{prepare, run_prepared};
use repcnot_core::{
    build_layout, validate_connectivity, Basis, CodeSpec, DetectionMatrix, DetectorOrdering,
    Layout, LogicalState,
};

use crate::config::{
    derive_seed, hex, load_physical_map, state_slug, CalibrationSource, RunConfig,
};
use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub const DETECTIONS_FILE: &str = "detections.rcd";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESULT_FILE: &str = "result.json";

fn write(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value).map_err(repcnot_core::Error::from)? + "\n")
}

/// Layout JSON for distance `d`, optionally placed with a physical map.
pub fn layout(distance: usize, map: Option<&Path>) -> Result<Layout> {
    let spec = CodeSpec::new(distance, 1, LogicalState::new(Basis::Z, false, false))?;
    Ok(build_layout(&spec, load_physical_map(map)?.as_ref())?)
}

/// Loads a calibration and checks it against the layout. Fails with a
/// validation error when a broken edge is used.
pub fn validate(
    distance: usize,
    calibration: &CalibrationSource,
    map: Option<&Path>,
) -> Result<ConnectivityReport> {
    let calib = calibration.load()?;
    let report = validate_connectivity(&calib, &layout(distance, map)?);
    if !report.usable {
        let edges: Vec<String> = report
            .broken
            .iter()
            .filter(|b| b.in_layout)
            .map(|b| format!("{}-{}", b.a, b.b))
            .collect();
        return Err(CliError::Validation(format!(
            "layout uses broken edges: {}",
            edges.join(", ")
        )));
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub config_hash: String,
    pub calibration_sha256: String,
    pub version: String,
    /// Seconds spent in each pipeline stage.
    pub wall_times: BTreeMap<String, f64>,
    /// SHA-256 of every artifact, by file name.
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }
}

struct Timer {
    times: BTreeMap<String, f64>,
    last: Instant,
}

impl Timer {
    fn new() -> Self {
        Self {
            times: BTreeMap::new(),
            last: Instant::now(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.times
            .insert(stage.to_owned(), (now - self.last).as_secs_f64());
        self.last = now;
    }
}

pub fn correlation_json(m: &CorrelationMatrix) -> Result<String> {
    #[derive(Serialize)]
    struct Json<'a> {
        ordering: DetectorOrdering,
        labels: &'a [repcnot_core::DetectorLabel],
        values: Vec<&'a [f64]>,
        clamped: usize,
    }
    let n = m.size();
    to_json(&Json {
        ordering: m.ordering,
        labels: &m.labels,
        values: (0..n).map(|i| &m.values[i * n..(i + 1) * n]).collect(),
        clamped: m.clamped,
    })
}

fn correlation_file(basis: Basis, ordering: DetectorOrdering) -> String {
    format!("corr_{basis}_{ordering}.csv")
}

fn decoded_csv(det: &DetectionMatrix, flips: &[[bool; 2]]) -> String {
    let mut out = String::from("shot,raw_c,raw_t,flip_c,flip_t,out_c,out_t\n");
    let b = |v: bool| v as u8;
    for (s, f) in flips.iter().enumerate() {
        let raw = det.raw_logical(s);
        out.push_str(&format!(
            "{s},{},{},{},{},{},{}\n",
            b(raw[0]),
            b(raw[1]),
            b(f[0]),
            b(f[1]),
            b(raw[0] ^ f[0]),
            b(raw[1] ^ f[1])
        ));
    }
    out
}

/// Runs the full pipeline and writes every artifact into `out`.
pub fn run(config: &RunConfig, out: &Path) -> Result<Manifest> {
    let spec = config.validate()?;
    let calib_text = config.calibration.text()?;
    let calib = repcnot_core::load_calibration(&calib_text)?;
    let map = load_physical_map(config.physical_map.as_deref())?;
    let layout = build_layout(&spec, map.as_ref())?;
    let report = validate_connectivity(&calib, &layout);
    if !report.usable {
        return Err(CliError::Validation(format!(
            "layout uses broken edges: {:?}",
            report.broken
        )));
    }
    create_dir(out)?;

    let mut timer = Timer::new();
    let (noisy, graph) = prepare(&spec, map.as_ref(), &calib)?;
    timer.lap("build");
    let result = run_prepared(noisy, graph, config.shots, config.seed).map_err(|e| match e {
        repcnot_core::Error::DisconnectedDefect(_) | repcnot_core::Error::TooManyDefects(..) => {
            CliError::Decode(e.to_string())
        }
        e => e.into(),
    })?;
    timer.lap("sample_and_decode");

    let mut files: Vec<(String, Vec<u8>)> = vec![
        (
            "circuit.txt".into(),
            result.noisy.base.to_text().into_bytes(),
        ),
        (
            "circuit.json".into(),
            result.noisy.base.sidecar_json()?.into_bytes(),
        ),
        ("graph.json".into(), result.graph.to_json()?.into_bytes()),
        (
            "decoded.csv".into(),
            decoded_csv(&result.detections, &result.flips).into_bytes(),
        ),
    ];
    if config.detections_csv {
        files.push((
            "detections.csv".into(),
            to_csv(&result.detections).into_bytes(),
        ));
    }
    for &ordering in &config.orderings {
        if result.detections.shots() >= 2 {
            let m = correlation_matrix(&result.detections, ordering)?;
            files.push((
                correlation_file(spec.basis, ordering),
                m.to_csv().into_bytes(),
            ));
        }
    }
    let probs = detection_probabilities(&result.detections)?;
    files.push((
        "detprob.csv".into(),
        detection_probabilities_csv(&probs).into_bytes(),
    ));
    let row = LogRateRow {
        distance: spec.distance,
        rounds: spec.rounds,
        result: result.result,
        aggregate: None,
    };
    files.push(("lograte.csv".into(), lograte_csv(&[row]).into_bytes()));
    files.push((RESULT_FILE.into(), to_json(&row)?.into_bytes()));
    timer.lap("analysis");

    let det_path = out.join(DETECTIONS_FILE);
    write_detections(&det_path, &result.detections, Some(config.seed))?;
    let mut outputs = BTreeMap::new();
    for name in [
        DETECTIONS_FILE.to_owned(),
        format!("{DETECTIONS_FILE}.meta.json"),
    ] {
        let path = out.join(&name);
        let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        outputs.insert(name, hex(&Sha256::digest(&bytes)));
    }
    for (name, bytes) in &files {
        write(&out.join(name), bytes)?;
        outputs.insert(name.clone(), hex(&Sha256::digest(bytes)));
    }
    timer.lap("write");

    let manifest = Manifest {
        config: config.clone(),
        config_hash: config.hash(),
        calibration_sha256: hex(&Sha256::digest(calib_text.as_bytes())),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        wall_times: timer.times,
        outputs,
    };
    write(&out.join(MANIFEST_FILE), to_json(&manifest)?.as_bytes())?;
    Ok(manifest)
}

/// The run matrix of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub distances: Vec<usize>,
    pub rounds: Vec<usize>,
    pub bases: Vec<Basis>,
    pub calibration: CalibrationSource,
    pub physical_map: Option<PathBuf>,
    pub shots: usize,
    pub seed: u64,
    pub orderings: Vec<DetectorOrdering>,
    pub detections_csv: bool,
}

impl SweepConfig {
    /// One config per `(d, rounds, basis, state)`, with derived seeds.
    pub fn runs(&self) -> Vec<RunConfig> {
        let mut runs = Vec::new();
        for &d in &self.distances {
            for &rounds in &self.rounds {
                for &basis in &self.bases {
                    for state in LogicalState::all(basis) {
                        runs.push(RunConfig {
                            distance: d,
                            rounds,
                            state,
                            calibration: self.calibration.clone(),
                            physical_map: self.physical_map.clone(),
                            shots: self.shots,
                            seed: derive_seed(self.seed, d, rounds, state),
                            orderings: self.orderings.clone(),
                            detections_csv: self.detections_csv,
                        });
                    }
                }
            }
        }
        runs
    }
}

pub fn run_dir_name(config: &RunConfig) -> String {
    format!(
        "d{}_r{}_{}",
        config.distance,
        config.rounds,
        state_slug(config.state)
    )
}

/// Runs every entry of the sweep on up to `jobs` threads, then writes the
/// combined `lograte.csv`.
pub fn sweep(config: &SweepConfig, out: &Path, jobs: usize) -> Result<Vec<LogRateRow>> {
    let runs = config.runs();
    for r in &runs {
        r.validate()?;
    }
    create_dir(out)?;
    write(&out.join("sweep.json"), to_json(config)?.as_bytes())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    pool.install(|| {
        runs.par_iter()
            .map(|r| run(r, &out.join(run_dir_name(r))))
            .collect::<Result<Vec<_>>>()
    })?;
    let rows = lograte(&[out.to_path_buf()])?;
    write(&out.join("lograte.csv"), lograte_csv(&rows).as_bytes())?;
    Ok(rows)
}

/// Collects `result.json` files from run directories (or their immediate
/// subdirectories) into sorted rows with four-state aggregates.
pub fn lograte(dirs: &[PathBuf]) -> Result<Vec<LogRateRow>> {
    let mut paths = Vec::new();
    for dir in dirs {
        let own = dir.join(RESULT_FILE);
        if own.is_file() {
            paths.push(own);
            continue;
        }
        let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
        for entry in entries {
            let p = entry
                .map_err(|e| CliError::io(dir, e))?
                .path()
                .join(RESULT_FILE);
            if p.is_file() {
                paths.push(p);
            }
        }
    }
    if paths.is_empty() {
        return Err(CliError::Validation("no run results found".into()));
    }
    let mut rows = Vec::with_capacity(paths.len());
    for p in paths {
        let text = fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
        let row: LogRateRow = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?;
        rows.push(row);
    }
    let key = |r: &LogRateRow| {
        let s = r.result.state;
        (
            r.distance,
            r.rounds,
            s.basis == Basis::X,
            s.control,
            s.target,
        )
    };
    rows.sort_by_key(key);
    attach_aggregates(&mut rows);
    Ok(rows)
}

pub fn lograte_output(rows: &[LogRateRow], format: Format) -> Result<String> {
    match format {
        Format::Csv => Ok(lograte_csv(rows)),
        Format::Json => to_json(&rows),
    }
}

pub fn load_detections(path: &Path) -> Result<DetectionMatrix> {
    read_detections(path).map_err(|e| match e {
        repcnot_core::Error::Io(source) => CliError::io(path, source),
        e => e.into(),
    })
}

pub fn corr(input: &Path, ordering: DetectorOrdering, format: Format) -> Result<String> {
    let m = correlation_matrix(&load_detections(input)?, ordering)?;
    match format {
        Format::Csv => Ok(m.to_csv()),
        Format::Json => correlation_json(&m),
    }
}

pub fn detprob(input: &Path, format: Format) -> Result<String> {
    let probs: Vec<DetectionProbability> = detection_probabilities(&load_detections(input)?)?;
    match format {
        Format::Csv => Ok(detection_probabilities_csv(&probs)),
        Format::Json => to_json(&probs),
    }
}

/// The decoding graph as JSON, or as an edge-list CSV.
pub fn graph(
    spec: &CodeSpec,
    calibration: &CalibrationSource,
    map: Option<&Path>,
    format: Format,
) -> Result<String> {
    let calib = calibration.load()?;
    let (_, graph) = prepare(spec, load_physical_map(map)?.as_ref(), &calib)?;
    match format {
        Format::Json => Ok(graph.to_json()?),
        Format::Csv => {
            let mut out = String::from("u,v,p,w,type,obs_c,obs_t\n");
            for e in &graph.edges {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    e.u, e.v, e.p, e.w, e.kind, e.obs[0] as u8, e.obs[1] as u8
                ));
            }
            Ok(out)
        }
    }
}
