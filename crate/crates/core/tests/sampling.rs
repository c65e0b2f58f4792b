mod common;

use common::*;
use repcnot_core::circuit::{Circuit, Gate, Instruction, RecordInfo};
use repcnot_core::decoder::enumerate_faults;
use repcnot_core::detectors::{detector_index, DetectionMatrix};
use repcnot_core::noise::{CalibrationDefaults, GateTimes, TqGateType};
use repcnot_core::sampler::{sample_detections_with_injection, sample_with_injection};
use repcnot_core::{
    attach_noise, build_layout, extract_detectors, reference_outcomes, sample, sample_detections,
    Block, CalibrationTable, Injection, Pauli, RecordRole,
};

fn fired(det: &DetectionMatrix, shot: usize) -> Vec<usize> {
    det.row(shot).iter_ones().collect()
}

#[test]
fn injected_data_x_spreads_to_the_target() {
    let (d, rounds) = (3, 2);
    let noisy = attach_noise(&circuit(d, rounds, "00"), &CalibrationTable::zero()).unwrap();
    let c = &noisy.base;
    let first_round = c
        .instructions
        .iter()
        .position(|i| i.gate == Gate::ResetZ(c.layout.syndrome(Block::Control, 0)))
        .unwrap();
    let inj = Injection {
        instruction: first_round,
        paulis: vec![(c.layout.data(Block::Control, 1), Pauli::X)],
    };
    let shots = sample_with_injection(&noisy, 3, 5, std::slice::from_ref(&inj));
    let flipped: Vec<_> = shots[0]
        .raw_bits
        .iter_ones()
        .map(|s| c.records[s])
        .collect();
    let syndromes: Vec<_> = flipped
        .iter()
        .filter(|r| r.role == RecordRole::Syndrome)
        .collect();
    // both checks next to data 1 flip in every control round, and in every
    // target round once the CNOT has copied the flip
    let count = |b: Block, lo: usize| {
        syndromes
            .iter()
            .filter(|r| r.block == b && r.round >= lo && (r.index == 0 || r.index == 1))
            .count()
    };
    assert_eq!(syndromes.len(), 2 * 2 * rounds + 2 * rounds);
    assert_eq!(count(Block::Control, 1), 2 * 2 * rounds);
    assert_eq!(count(Block::Target, rounds + 1), 2 * rounds);
    assert!(flipped.iter().all(|r| r.role != RecordRole::Flag));
    let data: Vec<_> = flipped
        .iter()
        .filter(|r| r.role == RecordRole::Data)
        .map(|r| (r.block, r.index))
        .collect();
    assert_eq!(data, vec![(Block::Control, 1), (Block::Target, 1)]);

    let det = sample_detections_with_injection(&noisy, 3, 5, &[inj]).unwrap();
    let spec = c.spec;
    let mut expected = vec![
        detector_index(&spec, Block::Control, 0, 1),
        detector_index(&spec, Block::Control, 1, 1),
        detector_index(&spec, Block::Target, 0, rounds + 1),
        detector_index(&spec, Block::Target, 1, rounds + 1),
    ];
    expected.sort();
    for s in 0..3 {
        assert_eq!(fired(&det, s), expected);
        assert_eq!(det.raw_logical(s), [true, true]);
    }
}

#[test]
fn readout_flip_rate_is_binomial() {
    let s = spec(3, 1, "00");
    let layout = build_layout(&s, None).unwrap();
    let q = layout.data(Block::Control, 0);
    let circuit = Circuit {
        spec: s,
        layout,
        instructions: vec![Instruction {
            layer: 0,
            gate: Gate::MeasureZ { qubit: q, slot: 0 },
        }],
        records: vec![RecordInfo {
            qubit: q,
            round: 1,
            role: RecordRole::Data,
            block: Block::Control,
            index: 0,
        }],
    };
    let calib = CalibrationTable::uniform(
        TqGateType::Cz,
        GateTimes {
            sq: 1.0,
            tq: 1.0,
            meas: 1.0,
        },
        CalibrationDefaults {
            t1_us: 1.0,
            t2_us: 1.0,
            readout_err: 0.01,
            sq_err: 0.0,
            idle_err: Some(0.0),
            tq_err: 0.0,
        },
    );
    let noisy = attach_noise(&circuit, &calib).unwrap();
    let n = 1_000_000;
    let flips = sample(&noisy, n, 2024)
        .iter()
        .filter(|r| r.raw_bits.get(0))
        .count();
    let rate = flips as f64 / n as f64;
    let se = (0.01f64 * 0.99 / n as f64).sqrt();
    assert!((rate - 0.01).abs() < 4.0 * se, "rate {rate}");
}

#[test]
fn direct_detection_sampling_matches_extraction() {
    for state in ["01", "-+"] {
        let noisy = noisy(3, 2, state, &uniform(5e-3));
        let shots = sample(&noisy, 300, 99);
        let reference = reference_outcomes(&noisy.base).unwrap();
        let extracted = extract_detectors(&shots, &noisy.base, &reference).unwrap();
        let direct = sample_detections(&noisy, 300, 99).unwrap();
        assert_eq!(extracted, direct);
        assert!(!direct.is_zero());
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let noisy = noisy(5, 2, "10", &uniform(3e-3));
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_detections(&noisy, 1000, 7).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_ne!(one, sample_detections(&noisy, 1000, 8).unwrap());
}

#[test]
fn shot_prefixes_are_stable() {
    let noisy = noisy(3, 1, "00", &uniform(1e-2));
    let long = sample(&noisy, 200, 3);
    let short = sample(&noisy, 70, 3);
    assert_eq!(&long[..70], &short[..]);
}

#[test]
fn single_faults_fire_few_detectors() {
    for (d, state) in [(3, "00"), (3, "++"), (5, "01"), (5, "+-")] {
        let noisy = noisy(d, 2, state, &uniform(1e-3));
        let last_cnot = noisy
            .base
            .instructions
            .iter()
            .rposition(|i| {
                matches!(i.gate, Gate::Cnot(a, b) if noisy.base.layout.info(a).unwrap().block == Block::Shared
                    || noisy.base.layout.info(b).unwrap().block == Block::Shared)
            })
            .unwrap();
        for f in enumerate_faults(&noisy).unwrap().faults {
            assert!(f.detectors.len() <= 4, "{}: {:?}", f.location, f.detectors);
            if noisy.channels[f.channel].instruction > last_cnot {
                assert!(f.detectors.len() <= 2, "{}: {:?}", f.location, f.detectors);
            }
        }
    }
}
