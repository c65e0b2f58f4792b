#![allow(dead_code)]

use repcnot_core::noise::{CalibrationDefaults, GateTimes, TqGateType};
use repcnot_core::{
    attach_noise, build_layout, build_memory_experiment, CalibrationTable, Circuit, CodeSpec,
    NoisyCircuit,
};

pub fn spec(d: usize, rounds: usize, state: &str) -> CodeSpec {
    CodeSpec::new(d, rounds, state.parse().unwrap()).unwrap()
}

pub fn circuit(d: usize, rounds: usize, state: &str) -> Circuit {
    let s = spec(d, rounds, state);
    build_memory_experiment(&s, &build_layout(&s, None).unwrap()).unwrap()
}

/// Every channel at the same rate `p`, with ECR-style extra single-qubit
/// noise around two-qubit gates.
pub fn uniform(p: f64) -> CalibrationTable {
    CalibrationTable::uniform(
        TqGateType::Ecr,
        GateTimes {
            sq: 60.0,
            tq: 660.0,
            meas: 1244.44,
        },
        CalibrationDefaults {
            t1_us: 250.0,
            t2_us: 150.0,
            readout_err: p,
            sq_err: p,
            idle_err: Some(p),
            tq_err: p,
        },
    )
}

pub fn noisy(d: usize, rounds: usize, state: &str, calib: &CalibrationTable) -> NoisyCircuit {
    attach_noise(&circuit(d, rounds, state), calib).unwrap()
}

pub const Z_STATES: [&str; 4] = ["00", "01", "10", "11"];
pub const X_STATES: [&str; 4] = ["++", "+-", "-+", "--"];
