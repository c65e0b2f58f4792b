//! Serializable run configurations and argument parsing helpers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use repcnot_core::noise::bundled_median;
use repcnot_core::{
    load_calibration, Basis, CalibrationTable, CodeSpec, DetectorOrdering, LogicalState,
    PhysicalMap,
};

use crate::error::{CliError, Result};

/// Where calibration data comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationSource {
    /// A bundled median-value table by device name.
    Device(String),
    File(PathBuf),
}

impl CalibrationSource {
    pub fn text(&self) -> Result<String> {
        match self {
            CalibrationSource::Device(name) => bundled_median(name)
                .map(str::to_owned)
                .ok_or_else(|| CliError::Validation(format!("unknown device `{name}`"))),
            CalibrationSource::File(path) => {
                fs::read_to_string(path).map_err(|e| CliError::io(path, e))
            }
        }
    }

    pub fn load(&self) -> Result<CalibrationTable> {
        Ok(load_calibration(&self.text()?)?)
    }
}

pub fn load_physical_map(path: Option<&Path>) -> Result<Option<PhysicalMap>> {
    path.map(|p| {
        let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))
    })
    .transpose()
}

/// Everything needed to reproduce one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub distance: usize,
    pub rounds: usize,
    pub state: LogicalState,
    pub calibration: CalibrationSource,
    pub physical_map: Option<PathBuf>,
    pub shots: usize,
    pub seed: u64,
    pub orderings: Vec<DetectorOrdering>,
    /// Also export detections as CSV.
    pub detections_csv: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<CodeSpec> {
        if self.shots == 0 {
            return Err(CliError::Validation("shots must be at least 1".into()));
        }
        if self.orderings.is_empty() {
            return Err(CliError::Validation(
                "at least one ordering is required".into(),
            ));
        }
        Ok(CodeSpec::new(self.distance, self.rounds, self.state)?)
    }

    /// SHA-256 of the canonical JSON form, as lowercase hex.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(
            serde_json::to_vec(self).expect("config serializes"),
        ))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Per-run seed of a sweep entry, from the first eight bytes of a SHA-256
/// over the sweep seed and the run coordinates.
pub fn derive_seed(seed: u64, distance: usize, rounds: usize, state: LogicalState) -> u64 {
    let key = format!("{seed}:{distance}:{rounds}:{}:{state}", state.basis);
    let digest = Sha256::digest(key.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Parses `3`, `1,3,5` or the inclusive range `1..5`.
pub fn parse_list(s: &str) -> Result<Vec<usize>> {
    let bad = || CliError::Validation(format!("bad list `{s}`; use `1,3,5` or `1..5`"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let values: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        s.split(',').map(num).collect::<Result<_>>()?
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

pub fn parse_bases(s: &str) -> Result<Vec<Basis>> {
    s.split(',')
        .map(|b| Ok(b.trim().parse::<Basis>()?))
        .collect()
}

pub fn parse_orderings(s: &str) -> Result<Vec<DetectorOrdering>> {
    s.split(',')
        .map(|o| Ok(o.trim().parse::<DetectorOrdering>()?))
        .collect()
}

/// Parses a state and checks it against an explicit basis, if given.
pub fn parse_state(state: &str, basis: Option<Basis>) -> Result<LogicalState> {
    let s: LogicalState = state.parse()?;
    match basis {
        Some(b) if b != s.basis => Err(CliError::Validation(format!(
            "state {s} is not in the {b} basis"
        ))),
        _ => Ok(s),
    }
}

/// File-name friendly state label: `+` and `-` become `p` and `m`.
pub fn state_slug(state: LogicalState) -> String {
    state.to_string().replace('+', "p").replace('-', "m")
}
