//! On-disk detection matrices.
//!
//! The binary layout is a 25-byte little-endian header (`RCD1`, `d: u32`,
//! `R: u32`, `basis: u8` with 0 = Z and 1 = X, `shots: u64`,
//! `detector_count: u32`), then one row per shot of `ceil(n / 8)` bytes with
//! detector `i` at bit `i % 8` of byte `i / 8`, then per shot
//! `ceil(2d / 8)` bytes of final data in the same bit order. The header
//! carries no input state, so it is kept in a `.meta.json` sidecar.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::detectors::{DetectionMatrix, DetectorOrdering};
use crate::error::{Error, Result};
use crate::layout::{Basis, CodeSpec, LogicalState};

pub const MAGIC: &[u8; 4] = b"RCD1";
const HEADER_LEN: usize = 25;

/// Contents of the `.meta.json` sidecar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionMeta {
    pub distance: usize,
    pub rounds: usize,
    pub basis: Basis,
    pub initial_state: LogicalState,
    pub shots: usize,
    pub detector_count: usize,
    pub seed: Option<u64>,
    pub ordering: DetectorOrdering,
}

impl DetectionMeta {
    pub fn new(det: &DetectionMatrix, seed: Option<u64>) -> Self {
        Self {
            distance: det.spec.distance,
            rounds: det.spec.rounds,
            basis: det.spec.basis,
            initial_state: det.spec.initial_state,
            shots: det.shots(),
            detector_count: det.detector_count(),
            seed,
            ordering: DetectorOrdering::SpaceMajor,
        }
    }
}

/// `<path>.meta.json`, next to the binary file.
pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn data_bytes(d: usize) -> usize {
    (2 * d).div_ceil(8)
}

pub fn encode(det: &DetectionMatrix) -> Vec<u8> {
    let spec = det.spec;
    let n = det.detector_count();
    let row_bytes = n.div_ceil(8);
    let db = data_bytes(spec.distance);
    let mut out = Vec::with_capacity(HEADER_LEN + det.shots() * (row_bytes + db));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(spec.distance as u32).to_le_bytes());
    out.extend_from_slice(&(spec.rounds as u32).to_le_bytes());
    out.push(match spec.basis {
        Basis::Z => 0,
        Basis::X => 1,
    });
    out.extend_from_slice(&(det.shots() as u64).to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for s in 0..det.shots() {
        out.extend_from_slice(&det.row(s).to_bytes());
    }
    for s in 0..det.shots() {
        out.extend_from_slice(&det.final_data(s).to_le_bytes()[..db]);
    }
    out
}

/// Parses a binary detection file. The header has no input state, so
/// `state` supplies it; it must agree with the header basis.
pub fn decode(bytes: &[u8], state: Option<LogicalState>) -> Result<DetectionMatrix> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing RCD1 header".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let d = u32_at(4);
    let rounds = u32_at(8);
    let basis = match bytes[12] {
        0 => Basis::Z,
        1 => Basis::X,
        b => return Err(Error::Format(format!("unknown basis byte {b}"))),
    };
    let shots = u64::from_le_bytes(bytes[13..21].try_into().unwrap()) as usize;
    let n = u32_at(21);
    let state = state.unwrap_or_else(|| LogicalState::new(basis, false, false));
    if state.basis != basis {
        return Err(Error::Format(format!(
            "state {state} does not match basis {basis}"
        )));
    }
    let spec =
        CodeSpec::new(d, rounds, state).map_err(|e| Error::Format(format!("bad header: {e}")))?;
    if spec.detector_count() != n {
        return Err(Error::Format(format!(
            "header declares {n} detectors, d={d} R={rounds} has {}",
            spec.detector_count()
        )));
    }
    let row_bytes = n.div_ceil(8);
    let db = data_bytes(d);
    let expected = shots
        .checked_mul(row_bytes + db)
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::Format("shot count overflows".into()))?;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "expected {expected} bytes, found {}",
            bytes.len()
        )));
    }
    let mut det = DetectionMatrix::new(spec, shots);
    let body = &bytes[HEADER_LEN..];
    for s in 0..shots {
        det.set_row(
            s,
            &BitVec::from_bytes(&body[s * row_bytes..(s + 1) * row_bytes], n),
        );
    }
    let tail = &body[shots * row_bytes..];
    for s in 0..shots {
        let mut buf = [0u8; 8];
        buf[..db].copy_from_slice(&tail[s * db..(s + 1) * db]);
        det.set_final_data(s, u64::from_le_bytes(buf));
    }
    Ok(det)
}

/// Writes the binary file and its `.meta.json` sidecar.
pub fn write_detections(path: &Path, det: &DetectionMatrix, seed: Option<u64>) -> Result<()> {
    fs::File::create(path)?.write_all(&encode(det))?;
    let meta = serde_json::to_string_pretty(&DetectionMeta::new(det, seed))?;
    fs::write(meta_path(path), meta + "\n")?;
    Ok(())
}

/// Reads a binary file, taking the input state from the sidecar if present.
pub fn read_detections(path: &Path) -> Result<DetectionMatrix> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let meta = meta_path(path);
    let state = if meta.exists() {
        let m: DetectionMeta = serde_json::from_str(&fs::read_to_string(meta)?)?;
        Some(m.initial_state)
    } else {
        None
    };
    decode(&bytes, state)
}

/// One row per shot: the detector bits in canonical order as `0`/`1`
/// columns `D0..`, then the final data bits `C0..` and `T0..`.
pub fn to_csv(det: &DetectionMatrix) -> String {
    let d = det.spec.distance;
    let n = det.detector_count();
    let mut header: Vec<String> = (0..n).map(|i| format!("D{i}")).collect();
    header.extend((0..d).map(|k| format!("C{k}")));
    header.extend((0..d).map(|k| format!("T{k}")));
    let mut out = header.join(",");
    out.push('\n');
    for s in 0..det.shots() {
        let f = det.final_data(s);
        let cells = (0..n)
            .map(|i| det.get(s, i))
            .chain((0..2 * d).map(|k| (f >> k) & 1 == 1))
            .map(|b| if b { "1" } else { "0" });
        out.push_str(&cells.collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}
