//! Detector definitions over measurement records and the shots-by-detectors
//! detection matrix.
//!
//! A check's round syndrome is the XOR of its syndrome record and both flag
//! records. Detector `(b, k, 1)` is the first round syndrome, `(b, k, sr)`
//! for `2 <= sr <= 2R` compares consecutive rounds, and `(b, k, 2R+1)`
//! compares the last round with the final readout of data `k` and `k+1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{words_for, BitVec};
use crate::circuit::{Circuit, RecordRole};
use crate::error::{Error, Result};
use crate::layout::{Block, CodeSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DetectorLabel {
    pub block: Block,
    /// Check index `k` in `0..d-1`.
    pub check: usize,
    /// Syndrome round in `1..=2R+1`.
    pub round: usize,
}

impl fmt::Display for DetectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.block, self.check, self.round)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorOrdering {
    /// Block, then syndrome round, then check. This is the canonical index order.
    SpaceMajor,
    /// Block, then check, then syndrome round.
    TimeMajor,
}

impl fmt::Display for DetectorOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectorOrdering::SpaceMajor => "space",
            DetectorOrdering::TimeMajor => "time",
        })
    }
}

impl std::str::FromStr for DetectorOrdering {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "space" | "space_major" | "space-major" => Ok(DetectorOrdering::SpaceMajor),
            "time" | "time_major" | "time-major" => Ok(DetectorOrdering::TimeMajor),
            _ => Err(Error::InvalidSpec(format!("unknown ordering `{s}`"))),
        }
    }
}

/// Index of detector `(block, k, sr)` in canonical (space-major) order.
pub fn detector_index(spec: &CodeSpec, block: Block, check: usize, round: usize) -> usize {
    let checks = spec.checks_per_block();
    block.index() * checks * spec.syndrome_rounds() + (round - 1) * checks + check
}

pub fn detector_label(spec: &CodeSpec, index: usize) -> DetectorLabel {
    let checks = spec.checks_per_block();
    let per_block = checks * spec.syndrome_rounds();
    let block = if index < per_block {
        Block::Control
    } else {
        Block::Target
    };
    let rem = index % per_block;
    DetectorLabel {
        block,
        check: rem % checks,
        round: rem / checks + 1,
    }
}

/// Canonical detector indices listed in `ordering`.
pub fn ordered_indices(spec: &CodeSpec, ordering: DetectorOrdering) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..spec.detector_count()).collect();
    if ordering == DetectorOrdering::TimeMajor {
        idx.sort_by_key(|&i| {
            let l = detector_label(spec, i);
            (l.block, l.check, l.round)
        });
    }
    idx
}

/// Record slots combined into each detector and logical observable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetectorMap {
    pub spec: CodeSpec,
    /// Per canonical detector, the record slots XORed together.
    pub detectors: Vec<Vec<usize>>,
    /// Per block, the final data record slots whose parity is the observable.
    pub observables: [Vec<usize>; 2],
    /// All final data record slots: Control positions, then Target.
    pub data_slots: Vec<usize>,
}

impl DetectorMap {
    pub fn new(circuit: &Circuit) -> Result<Self> {
        let spec = circuit.spec;
        let d = spec.distance;
        let checks = spec.checks_per_block();
        let last = 2 * spec.rounds;
        let find = |block: Block, role: RecordRole, round: usize, index: usize| -> Result<usize> {
            circuit
                .records
                .iter()
                .position(|r| {
                    r.block == block && r.role == role && r.round == round && r.index == index
                })
                .ok_or_else(|| {
                    Error::Shape(format!(
                        "no {role:?} record for {block} index {index} in round {round}"
                    ))
                })
        };
        let round_syndrome = |b: Block, k: usize, r: usize| -> Result<Vec<usize>> {
            Ok(vec![
                find(b, RecordRole::Syndrome, r, k)?,
                find(b, RecordRole::Flag, r, 2 * k)?,
                find(b, RecordRole::Flag, r, 2 * k + 1)?,
            ])
        };
        let mut detectors = vec![Vec::new(); spec.detector_count()];
        for b in Block::code_blocks() {
            for k in 0..checks {
                for sr in 1..=spec.syndrome_rounds() {
                    let mut slots = Vec::new();
                    if sr <= last {
                        slots.extend(round_syndrome(b, k, sr)?);
                    }
                    if sr >= 2 {
                        slots.extend(round_syndrome(b, k, sr - 1)?);
                    }
                    if sr == last + 1 {
                        slots.push(find(b, RecordRole::Data, last + 1, k)?);
                        slots.push(find(b, RecordRole::Data, last + 1, k + 1)?);
                    }
                    slots.sort_unstable();
                    detectors[detector_index(&spec, b, k, sr)] = slots;
                }
            }
        }
        let mut observables: [Vec<usize>; 2] = Default::default();
        let mut data_slots = Vec::with_capacity(2 * d);
        for b in Block::code_blocks() {
            for k in 0..d {
                let s = find(b, RecordRole::Data, last + 1, k)?;
                observables[b.index()].push(s);
                data_slots.push(s);
            }
        }
        Ok(Self {
            spec,
            detectors,
            observables,
            data_slots,
        })
    }

    pub fn detector_count(&self) -> usize {
        self.detectors.len()
    }

    /// Detector values of one record vector.
    pub fn detect(&self, records: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.detectors.len());
        for (i, slots) in self.detectors.iter().enumerate() {
            if slots.iter().fold(false, |acc, &s| acc ^ records.get(s)) {
                out.set(i, true);
            }
        }
        out
    }

    /// Word-parallel version of [`detect`](Self::detect): `records[s]` holds
    /// 64 lanes of record `s`.
    pub fn detect_words(&self, records: &[u64]) -> Vec<u64> {
        self.detectors
            .iter()
            .map(|slots| slots.iter().fold(0u64, |acc, &s| acc ^ records[s]))
            .collect()
    }

    /// Observable flips of one record vector.
    pub fn observable_flips(&self, records: &BitVec) -> [bool; 2] {
        let parity = |slots: &[usize]| slots.iter().fold(false, |acc, &s| acc ^ records.get(s));
        [parity(&self.observables[0]), parity(&self.observables[1])]
    }
}

/// Detection events of many shots plus each shot's final data readout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetectionMatrix {
    pub spec: CodeSpec,
    shots: usize,
    detector_count: usize,
    words_per_row: usize,
    bits: Vec<u64>,
    /// Per shot, measured data values: bit `k` is Control data `k`, bit
    /// `d + k` is Target data `k`.
    final_data: Vec<u64>,
}

impl DetectionMatrix {
    pub fn new(spec: CodeSpec, shots: usize) -> Self {
        let n = spec.detector_count();
        let w = words_for(n);
        Self {
            spec,
            shots,
            detector_count: n,
            words_per_row: w,
            bits: vec![0; w * shots],
            final_data: vec![0; shots],
        }
    }

    pub fn shots(&self) -> usize {
        self.shots
    }

    pub fn detector_count(&self) -> usize {
        self.detector_count
    }

    #[inline]
    pub fn get(&self, shot: usize, det: usize) -> bool {
        (self.bits[shot * self.words_per_row + det / 64] >> (det % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, shot: usize, det: usize, v: bool) {
        let w = &mut self.bits[shot * self.words_per_row + det / 64];
        if v {
            *w |= 1 << (det % 64);
        } else {
            *w &= !(1 << (det % 64));
        }
    }

    pub fn row_words(&self, shot: usize) -> &[u64] {
        &self.bits[shot * self.words_per_row..(shot + 1) * self.words_per_row]
    }

    pub fn row(&self, shot: usize) -> BitVec {
        BitVec::from_words(self.row_words(shot).to_vec(), self.detector_count)
    }

    pub fn set_row(&mut self, shot: usize, row: &BitVec) {
        assert_eq!(row.len(), self.detector_count);
        let w = self.words_per_row;
        self.bits[shot * w..(shot + 1) * w].copy_from_slice(row.words());
    }

    pub fn final_data(&self, shot: usize) -> u64 {
        self.final_data[shot]
    }

    pub fn set_final_data(&mut self, shot: usize, bits: u64) {
        self.final_data[shot] = bits;
    }

    /// Raw (undecoded) logical values `[control, target]` of a shot.
    pub fn raw_logical(&self, shot: usize) -> [bool; 2] {
        let d = self.spec.distance;
        let mask = (1u64 << d) - 1;
        let f = self.final_data[shot];
        [
            (f & mask).count_ones() % 2 == 1,
            ((f >> d) & mask).count_ones() % 2 == 1,
        ]
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Number of shots in which each detector fired.
    pub fn column_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.detector_count];
        for s in 0..self.shots {
            for (wi, &w) in self.row_words(s).iter().enumerate() {
                let mut rest = w;
                while rest != 0 {
                    counts[wi * 64 + rest.trailing_zeros() as usize] += 1;
                    rest &= rest - 1;
                }
            }
        }
        counts
    }

    /// Appends the shots of `other`, which must share the spec.
    pub fn extend(&mut self, other: &DetectionMatrix) {
        assert_eq!(self.spec, other.spec);
        self.bits.extend_from_slice(&other.bits);
        self.final_data.extend_from_slice(&other.final_data);
        self.shots += other.shots;
    }

    pub fn label(&self, det: usize) -> DetectorLabel {
        detector_label(&self.spec, det)
    }
}

/// Per-shot measurement flips relative to the noiseless reference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotRecord {
    pub raw_bits: BitVec,
    pub shot_index: u64,
    pub seed: u64,
}

/// Converts record flips into detection events; `reference` gives the
/// noiseless outcomes used to recover measured data values.
pub fn extract_detectors(
    records: &[ShotRecord],
    circuit: &Circuit,
    reference: &BitVec,
) -> Result<DetectionMatrix> {
    let map = DetectorMap::new(circuit)?;
    if reference.len() != circuit.record_count() {
        return Err(Error::Shape(format!(
            "reference has {} bits, circuit has {} records",
            reference.len(),
            circuit.record_count()
        )));
    }
    let mut out = DetectionMatrix::new(circuit.spec, records.len());
    for (s, rec) in records.iter().enumerate() {
        if rec.raw_bits.len() != circuit.record_count() {
            return Err(Error::Shape(format!(
                "shot {} has {} record bits, expected {}",
                rec.shot_index,
                rec.raw_bits.len(),
                circuit.record_count()
            )));
        }
        out.set_row(s, &map.detect(&rec.raw_bits));
        let mut data = 0u64;
        for (i, &slot) in map.data_slots.iter().enumerate() {
            if rec.raw_bits.get(slot) ^ reference.get(slot) {
                data |= 1 << i;
            }
        }
        out.set_final_data(s, data);
    }
    Ok(out)
}
