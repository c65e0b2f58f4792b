mod common;

use common::*;
use repcnot_core::analysis::{
    correlation_matrix, detection_probabilities, detection_probabilities_csv,
};
use repcnot_core::detfile::{read_detections, write_detections};
use repcnot_core::sampler::sample_detections_with_injection;
use repcnot_core::{
    attach_noise, sample_detections, Block, CalibrationTable, DetectorOrdering, Gate, Injection,
    Pauli, RecordRole,
};

#[test]
fn injected_time_fault_fires_its_two_rounds() {
    let (d, rounds, r) = (3, 2, 2);
    let noisy = attach_noise(&circuit(d, rounds, "01"), &CalibrationTable::zero()).unwrap();
    let c = &noisy.base;
    let at = c
        .instructions
        .iter()
        .position(|i| match i.gate {
            Gate::MeasureZ { slot, .. } => {
                let rec = c.records[slot];
                rec.role == RecordRole::Syndrome
                    && rec.block == Block::Target
                    && rec.index == 1
                    && rec.round == r
            }
            _ => false,
        })
        .unwrap();
    let inj = Injection {
        instruction: at,
        paulis: vec![(c.layout.syndrome(Block::Target, 1), Pauli::X)],
    };
    let det = sample_detections_with_injection(&noisy, 50, 1, &[inj]).unwrap();
    for p in detection_probabilities(&det).unwrap() {
        let hit = p.block == Block::Target && p.check == 1 && (p.round == r || p.round == r + 1);
        assert_eq!(p.p, if hit { 1.0 } else { 0.0 }, "{p:?}");
    }
    let csv = detection_probabilities_csv(&detection_probabilities(&det).unwrap());
    assert_eq!(csv.lines().next(), Some("block,k,sr,p"));
    assert_eq!(csv.lines().count(), 1 + det.detector_count());
}

#[test]
fn sampled_runs_survive_the_detection_file() {
    let noisy = noisy(5, 2, "-+", &uniform(4e-3));
    let det = sample_detections(&noisy, 777, 12).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("shots.rcd");
    write_detections(&path, &det, Some(12)).unwrap();
    let back = read_detections(&path).unwrap();
    assert_eq!(back, det);
    assert_eq!(
        correlation_matrix(&back, DetectorOrdering::TimeMajor).unwrap(),
        correlation_matrix(&det, DetectorOrdering::TimeMajor).unwrap()
    );
}
