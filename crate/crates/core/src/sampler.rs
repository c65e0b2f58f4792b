//! Noiseless reference outcomes and Pauli-frame Monte-Carlo sampling.
//!
//! Shots run 64 at a time in bit-sliced frames. Every shot owns a ChaCha8
//! stream selected by its index, and each nonzero channel consumes exactly
//! one `u64` from it, so results do not depend on batching or threads.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bits::BitVec;
use crate::circuit::{Circuit, Gate};
use crate::detectors::{DetectionMatrix, DetectorMap, ShotRecord};
use crate::error::{Error, Result};
use crate::layout::QubitId;
use crate::noise::{ChannelKind, NoisyCircuit, Step};
use crate::pauli::{FrameBatch, Pauli};
use crate::tableau::{Measurement, Tableau};

/// Noiseless outcome of every record slot.
///
/// Fails if any measurement is not deterministic.
pub fn reference_outcomes(circuit: &Circuit) -> Result<BitVec> {
    let mut t = Tableau::new(circuit.layout.width());
    let mut out = BitVec::zeros(circuit.record_count());
    for instr in &circuit.instructions {
        match instr.gate {
            Gate::ResetZ(q) => t.reset(q),
            Gate::H(q) => t.h(q),
            Gate::X(q) => t.x(q),
            Gate::Cnot(c, tq) => t.cnot(c, tq),
            Gate::Cz(a, b) => t.cz(a, b),
            Gate::MeasureZ { qubit, slot } => match t.measure(qubit, false) {
                Measurement::Deterministic(v) => out.set(slot, v),
                Measurement::Random(_) => return Err(Error::NondeterministicRecord(slot)),
            },
            Gate::Idle { .. } => {}
        }
    }
    Ok(out)
}

/// A Pauli applied to every shot just before an instruction (test hook).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Injection {
    pub instruction: usize,
    pub paulis: Vec<(QubitId, Pauli)>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Op {
    H(u32),
    Cnot(u32, u32),
    Cz(u32, u32),
    Reset(u32),
    Measure(u32, u32),
    Noise(u32),
    Inject(u32),
}

/// A noisy circuit flattened into frame-simulator operations.
#[derive(Clone, Debug)]
pub(crate) struct Program {
    pub width: usize,
    pub record_count: usize,
    pub ops: Vec<Op>,
    /// Paulis applied by each `Op::Inject`.
    pub injections: Vec<Vec<(usize, Pauli)>>,
}

impl Program {
    pub fn new(noisy: &NoisyCircuit, injections: &[Injection]) -> Self {
        let base = &noisy.base;
        let mut ops = Vec::with_capacity(noisy.schedule.len());
        let mut seen = vec![false; base.instructions.len()];
        for step in &noisy.schedule {
            let instr_idx = match *step {
                Step::Gate(i) => i,
                Step::Noise(c) => noisy.channels[c].instruction,
            };
            if !seen[instr_idx] {
                seen[instr_idx] = true;
                for (j, inj) in injections.iter().enumerate() {
                    if inj.instruction == instr_idx {
                        ops.push(Op::Inject(j as u32));
                    }
                }
            }
            match *step {
                Step::Noise(c) => ops.push(Op::Noise(c as u32)),
                Step::Gate(i) => match base.instructions[i].gate {
                    Gate::H(q) => ops.push(Op::H(q as u32)),
                    Gate::Cnot(c, t) => ops.push(Op::Cnot(c as u32, t as u32)),
                    Gate::Cz(a, b) => ops.push(Op::Cz(a as u32, b as u32)),
                    Gate::ResetZ(q) => ops.push(Op::Reset(q as u32)),
                    Gate::MeasureZ { qubit, slot } => {
                        ops.push(Op::Measure(qubit as u32, slot as u32))
                    }
                    Gate::X(_) | Gate::Idle { .. } => {}
                },
            }
        }
        Self {
            width: base.layout.width(),
            record_count: base.record_count(),
            ops,
            injections: injections.iter().map(|i| i.paulis.clone()).collect(),
        }
    }

    /// Runs `ops[from..]`, writing measured X-lanes into `records` and
    /// calling `noise(op_index, channel, frames)` at each channel.
    #[inline]
    pub fn run<F>(&self, frames: &mut FrameBatch, records: &mut [u64], from: usize, mut noise: F)
    where
        F: FnMut(usize, usize, &mut FrameBatch),
    {
        for (i, op) in self.ops.iter().enumerate().skip(from) {
            match *op {
                Op::H(q) => frames.h(q as usize),
                Op::Cnot(c, t) => frames.cnot(c as usize, t as usize),
                Op::Cz(a, b) => frames.cz(a as usize, b as usize),
                Op::Reset(q) => frames.reset(q as usize),
                Op::Measure(q, s) => records[s as usize] = frames.x[q as usize],
                Op::Noise(c) => noise(i, c as usize, frames),
                Op::Inject(j) => {
                    for &(q, p) in &self.injections[j as usize] {
                        frames.apply(q, p, u64::MAX);
                    }
                }
            }
        }
    }
}

/// Per-channel sampling data: one `u64` draw below `threshold` fires the
/// channel and selects its term uniformly.
#[derive(Clone, Copy, Debug)]
struct ChannelDraw {
    threshold: u64,
    kind: ChannelKind,
    q0: usize,
    q1: usize,
}

pub(crate) fn threshold(p: f64) -> u64 {
    if p >= 1.0 {
        u64::MAX
    } else if p <= 0.0 {
        0
    } else {
        (p * 18_446_744_073_709_551_616.0) as u64
    }
}

/// Term index selected by draw `u`, if the channel fires.
#[inline]
pub(crate) fn pick_term(u: u64, threshold: u64, terms: u64) -> Option<usize> {
    (u < threshold).then(|| ((u as u128 * terms as u128) / threshold as u128) as usize)
}

fn term_paulis(kind: ChannelKind, idx: usize) -> (Pauli, Pauli) {
    match kind {
        ChannelKind::Depol1 => (Pauli::NON_IDENTITY[idx], Pauli::I),
        ChannelKind::FlipX => (Pauli::X, Pauli::I),
        ChannelKind::Depol2 => (Pauli::ALL[(idx + 1) / 4], Pauli::ALL[(idx + 1) % 4]),
    }
}

fn term_count(kind: ChannelKind) -> u64 {
    match kind {
        ChannelKind::Depol1 => 3,
        ChannelKind::Depol2 => 15,
        ChannelKind::FlipX => 1,
    }
}

fn shot_rng(base: &ChaCha8Rng, shot: u64) -> ChaCha8Rng {
    let mut r = base.clone();
    r.set_stream(shot);
    r.set_word_pos(0);
    r
}

struct Sampler<'a> {
    program: Program,
    draws: Vec<ChannelDraw>,
    base_rng: ChaCha8Rng,
    noisy: &'a NoisyCircuit,
}

impl<'a> Sampler<'a> {
    fn new(noisy: &'a NoisyCircuit, seed: u64, injections: &[Injection]) -> Self {
        let draws = noisy
            .channels
            .iter()
            .map(|c| ChannelDraw {
                threshold: threshold(c.p),
                kind: c.kind,
                q0: c.qubits[0],
                q1: *c.qubits.get(1).unwrap_or(&c.qubits[0]),
            })
            .collect();
        Self {
            program: Program::new(noisy, injections),
            draws,
            base_rng: ChaCha8Rng::seed_from_u64(seed),
            noisy,
        }
    }

    /// Record flips of shots `first..first + lanes`, one word per record.
    fn batch(&self, first: u64, lanes: usize) -> Vec<u64> {
        let mut rngs: Vec<ChaCha8Rng> = (0..lanes as u64)
            .map(|l| shot_rng(&self.base_rng, first + l))
            .collect();
        let mut frames = FrameBatch::new(self.program.width);
        let mut records = vec![0u64; self.program.record_count];
        self.program
            .run(&mut frames, &mut records, 0, |_, c, frames| {
                let draw = self.draws[c];
                if draw.threshold == 0 {
                    return;
                }
                let terms = term_count(draw.kind);
                for (lane, rng) in rngs.iter_mut().enumerate() {
                    if let Some(t) = pick_term(rng.next_u64(), draw.threshold, terms) {
                        let (p0, p1) = term_paulis(draw.kind, t);
                        frames.apply(draw.q0, p0, 1 << lane);
                        if draw.kind == ChannelKind::Depol2 {
                            frames.apply(draw.q1, p1, 1 << lane);
                        }
                    }
                }
            });
        let mask = if lanes == 64 {
            u64::MAX
        } else {
            (1u64 << lanes) - 1
        };
        for r in &mut records {
            *r &= mask;
        }
        records
    }

    fn batches(&self, shots: usize) -> Vec<(u64, usize)> {
        (0..shots.div_ceil(64))
            .map(|b| {
                let first = b * 64;
                (first as u64, (shots - first).min(64))
            })
            .collect()
    }
}

/// Samples `shots` noisy shots; each record bit is the flip relative to the
/// noiseless reference.
pub fn sample(noisy: &NoisyCircuit, shots: usize, seed: u64) -> Vec<ShotRecord> {
    sample_with_injection(noisy, shots, seed, &[])
}

/// Like [`sample`], additionally applying fixed Paulis in every shot.
pub fn sample_with_injection(
    noisy: &NoisyCircuit,
    shots: usize,
    seed: u64,
    injections: &[Injection],
) -> Vec<ShotRecord> {
    let sampler = Sampler::new(noisy, seed, injections);
    let n = sampler.program.record_count;
    sampler
        .batches(shots)
        .into_par_iter()
        .flat_map_iter(|(first, lanes)| {
            let words = sampler.batch(first, lanes);
            (0..lanes).map(move |lane| {
                let mut bits = BitVec::zeros(n);
                for (s, w) in words.iter().enumerate() {
                    if (w >> lane) & 1 == 1 {
                        bits.set(s, true);
                    }
                }
                ShotRecord {
                    raw_bits: bits,
                    shot_index: first + lane as u64,
                    seed,
                }
            })
        })
        .collect()
}

/// Samples shots straight into a detection matrix.
///
/// Equivalent to [`sample`] followed by
/// [`extract_detectors`](crate::detectors::extract_detectors).
pub fn sample_detections(noisy: &NoisyCircuit, shots: usize, seed: u64) -> Result<DetectionMatrix> {
    sample_detections_with_injection(noisy, shots, seed, &[])
}

pub fn sample_detections_with_injection(
    noisy: &NoisyCircuit,
    shots: usize,
    seed: u64,
    injections: &[Injection],
) -> Result<DetectionMatrix> {
    let circuit = &noisy.base;
    let reference = reference_outcomes(circuit)?;
    let map = DetectorMap::new(circuit)?;
    let sampler = Sampler::new(noisy, seed, injections);
    let ref_data: u64 = map
        .data_slots
        .iter()
        .enumerate()
        .map(|(i, &s)| (reference.get(s) as u64) << i)
        .fold(0, |a, b| a | b);
    let parts: Vec<(usize, Vec<u64>, Vec<u64>)> = sampler
        .batches(shots)
        .into_par_iter()
        .map(|(first, lanes)| {
            let words = sampler.batch(first, lanes);
            let det = map.detect_words(&words);
            let data: Vec<u64> = map.data_slots.iter().map(|&s| words[s]).collect();
            (lanes, det, data)
        })
        .collect();
    let mut out = DetectionMatrix::new(sampler.noisy.base.spec, shots);
    let mut shot = 0;
    for (lanes, det, data) in parts {
        for lane in 0..lanes {
            let mut row = BitVec::zeros(det.len());
            for (i, w) in det.iter().enumerate() {
                if (w >> lane) & 1 == 1 {
                    row.set(i, true);
                }
            }
            out.set_row(shot, &row);
            let mut bits = ref_data;
            for (i, w) in data.iter().enumerate() {
                bits ^= ((w >> lane) & 1) << i;
            }
            out.set_final_data(shot, bits);
            shot += 1;
        }
    }
    Ok(out)
}
