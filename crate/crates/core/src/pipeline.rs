//! One experiment end to end: build, attach noise, sample, decode, score.

use crate::analysis::{corrected_outcomes, logical_fidelity, LogicalResult};
use crate::builder::build_memory_experiment;
use crate::decoder::{build_syndrome_graph, enumerate_faults, Decoder, SyndromeGraph};
use crate::detectors::DetectionMatrix;
use crate::error::Result;
use crate::layout::{build_layout, CodeSpec, PhysicalMap};
use crate::noise::{attach_noise, CalibrationTable, NoisyCircuit};
use crate::sampler::sample_detections;

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub noisy: NoisyCircuit,
    pub graph: SyndromeGraph,
    pub detections: DetectionMatrix,
    /// Decoded `[control, target]` observable flips per shot.
    pub flips: Vec<[bool; 2]>,
    pub result: LogicalResult,
}

/// Builds the noisy circuit and its decoding graph.
pub fn prepare(
    spec: &CodeSpec,
    map: Option<&PhysicalMap>,
    calib: &CalibrationTable,
) -> Result<(NoisyCircuit, SyndromeGraph)> {
    let layout = build_layout(spec, map)?;
    let circuit = build_memory_experiment(spec, &layout)?;
    let noisy = attach_noise(&circuit, calib)?;
    let graph = build_syndrome_graph(&enumerate_faults(&noisy)?)?;
    Ok((noisy, graph))
}

/// Samples and decodes `shots` shots of a prepared experiment.
pub fn run_prepared(
    noisy: NoisyCircuit,
    graph: SyndromeGraph,
    shots: usize,
    seed: u64,
) -> Result<ExperimentOutput> {
    let detections = sample_detections(&noisy, shots, seed)?;
    let flips = Decoder::new(&graph).decode_all(&detections)?;
    let outcomes = corrected_outcomes(&detections, &flips)?;
    let result = logical_fidelity(&outcomes, noisy.base.spec.initial_state)?;
    Ok(ExperimentOutput {
        noisy,
        graph,
        detections,
        flips,
        result,
    })
}

pub fn run_experiment(
    spec: &CodeSpec,
    map: Option<&PhysicalMap>,
    calib: &CalibrationTable,
    shots: usize,
    seed: u64,
) -> Result<ExperimentOutput> {
    let (noisy, graph) = prepare(spec, map, calib)?;
    run_prepared(noisy, graph, shots, seed)
}
