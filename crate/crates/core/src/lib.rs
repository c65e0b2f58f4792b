//! Simulation, decoding, and analysis of a transversal CNOT between two
//! flagged repetition-code logical qubits.

pub mod analysis;
pub mod bits;
pub mod builder;
pub mod circuit;
pub mod decoder;
pub mod detectors;
pub mod detfile;
pub mod error;
pub mod layout;
pub mod noise;
pub mod pauli;
pub mod pipeline;
pub mod sampler;
pub mod tableau;

pub use bits::BitVec;
pub use builder::{
    build_extraction_round, build_memory_experiment, build_transversal_cnot, ideal_output_state,
};
pub use circuit::{Circuit, Gate, Instruction, RecordInfo, RecordRole};
pub use detectors::{
    extract_detectors, DetectionMatrix, DetectorLabel, DetectorMap, DetectorOrdering, ShotRecord,
};
pub use error::{Error, Result};
pub use layout::{
    build_layout, Basis, Block, CodeSpec, Layout, LogicalState, PhysicalMap, QubitId, Role,
};
pub use noise::{
    attach_noise, load_calibration, validate_connectivity, CalibrationTable, NoisyCircuit,
};
pub use pauli::{propagate_frame, Pauli, PauliFrame};
pub use pipeline::{run_experiment, ExperimentOutput};
pub use sampler::{reference_outcomes, sample, sample_detections, Injection};
