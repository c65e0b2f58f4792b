//! Exhaustive single-fault enumeration by deterministic frame propagation.

use rayon::prelude::*;

use crate::detectors::DetectorMap;
use crate::error::Result;
use crate::layout::{CodeSpec, QubitId};
use crate::noise::NoisyCircuit;
use crate::pauli::{FrameBatch, Pauli};
use crate::sampler::{Op, Program};

#[derive(Clone, Debug, PartialEq)]
pub struct Fault {
    pub id: usize,
    pub channel: usize,
    /// Term index within the channel.
    pub term: usize,
    pub paulis: Vec<(QubitId, Pauli)>,
    pub p: f64,
    /// Canonical indices of the detectors the fault fires, ascending.
    pub detectors: Vec<usize>,
    /// Whether the fault flips the `[control, target]` logical observable.
    pub observables: [bool; 2],
    pub location: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaultCatalog {
    pub spec: CodeSpec,
    pub detector_count: usize,
    pub faults: Vec<Fault>,
}

/// Propagates every Pauli term of every channel through the rest of the
/// circuit and records which detectors and observables it flips.
pub fn enumerate_faults(noisy: &NoisyCircuit) -> Result<FaultCatalog> {
    let map = DetectorMap::new(&noisy.base)?;
    let program = Program::new(noisy, &[]);
    let mut op_of_channel = vec![0usize; noisy.channels.len()];
    for (i, op) in program.ops.iter().enumerate() {
        if let Op::Noise(c) = *op {
            op_of_channel[c as usize] = i;
        }
    }

    let mut faults = Vec::new();
    for (c, ch) in noisy.channels.iter().enumerate() {
        for (t, term) in ch.terms().into_iter().enumerate() {
            let paulis: Vec<(QubitId, Pauli)> = term
                .paulis
                .into_iter()
                .filter(|&(_, p)| p != Pauli::I)
                .collect();
            let names: String = ch
                .term_paulis(t)
                .iter()
                .map(|(_, p)| p.to_string())
                .collect();
            faults.push(Fault {
                id: faults.len(),
                channel: c,
                term: t,
                paulis,
                p: term.p,
                detectors: Vec::new(),
                observables: [false; 2],
                location: format!("{ch} term {names}"),
            });
        }
    }

    #[allow(clippy::type_complexity)]
    let results: Vec<(Vec<Vec<usize>>, Vec<[bool; 2]>)> = faults
        .par_chunks(64)
        .map(|chunk| {
            let mut frames = FrameBatch::new(program.width);
            let mut records = vec![0u64; program.record_count];
            let start = op_of_channel[chunk[0].channel];
            let mut cursor = 0;
            program.run(&mut frames, &mut records, start, |_, c, frames| {
                while cursor < chunk.len() && chunk[cursor].channel == c {
                    for &(q, p) in &chunk[cursor].paulis {
                        frames.apply(q, p, 1 << cursor);
                    }
                    cursor += 1;
                }
            });
            let det = map.detect_words(&records);
            let obs: Vec<u64> = map
                .observables
                .iter()
                .map(|slots| slots.iter().fold(0u64, |a, &s| a ^ records[s]))
                .collect();
            let dets = (0..chunk.len())
                .map(|lane| {
                    (0..det.len())
                        .filter(|&i| (det[i] >> lane) & 1 == 1)
                        .collect()
                })
                .collect();
            let flips = (0..chunk.len())
                .map(|lane| [(obs[0] >> lane) & 1 == 1, (obs[1] >> lane) & 1 == 1])
                .collect();
            (dets, flips)
        })
        .collect();

    for (chunk, (dets, flips)) in faults.chunks_mut(64).zip(results) {
        for ((f, d), o) in chunk.iter_mut().zip(dets).zip(flips) {
            f.detectors = d;
            f.observables = o;
        }
    }
    Ok(FaultCatalog {
        spec: noisy.base.spec,
        detector_count: map.detector_count(),
        faults,
    })
}
