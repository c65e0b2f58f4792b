//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the report is printed without `--nocapture`.

mod common;

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repcnot_core::analysis::{
    aggregate_error_rates, correlation_matrix, detection_probabilities, mean_detection_probability,
    pair_probability,
};
use repcnot_core::decoder::{build_syndrome_graph, enumerate_faults, Decoder};
use repcnot_core::noise::bundled_median;
use repcnot_core::{
    load_calibration, run_experiment, sample_detections, Basis, BitVec, Block, CalibrationTable,
    DetectionMatrix, DetectorOrdering, LogicalState, Role,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn sherbrooke() -> CalibrationTable {
    load_calibration(bundled_median("sherbrooke").unwrap()).unwrap()
}

fn noiseless_truth_table() -> Outcome {
    let start = Instant::now();
    let zero = CalibrationTable::zero();
    let mut runs = 0;
    for d in [3, 5, 7] {
        for rounds in [1, 3, 5] {
            for basis in [Basis::Z, Basis::X] {
                for state in LogicalState::all(basis) {
                    let s = repcnot_core::CodeSpec::new(d, rounds, state).unwrap();
                    let out = run_experiment(&s, None, &zero, 64, 1).unwrap();
                    if out.result.p_err != 0.0 || !out.detections.is_zero() {
                        return outcome(
                            false,
                            format!("d={d} R={rounds} {state}: p_err={}", out.result.p_err),
                        );
                    }
                    runs += 1;
                }
            }
        }
    }
    let t = start.elapsed();
    outcome(
        t < Duration::from_secs(10),
        format!(
            "{runs} runs, p_err=0, zero detectors, {:.2}s",
            t.as_secs_f64()
        ),
    )
}

fn single_fault_coverage() -> Outcome {
    let start = Instant::now();
    let mut total = 0;
    for d in [3, 5] {
        for state in ["00", "01", "10", "11", "++", "+-", "-+", "--"] {
            let noisy = noisy(d, 2, state, &sherbrooke());
            let catalog = enumerate_faults(&noisy).unwrap();
            let graph = match build_syndrome_graph(&catalog) {
                Ok(g) => g,
                Err(e) => return outcome(false, format!("d={d} {state}: {e}")),
            };
            let decoder = Decoder::new(&graph);
            for f in &catalog.faults {
                let mut row = BitVec::zeros(catalog.detector_count);
                f.detectors.iter().for_each(|&i| row.set(i, true));
                if decoder.decode(&row).unwrap().observables != f.observables {
                    return outcome(
                        false,
                        format!("d={d} {state}: {} not corrected", f.location),
                    );
                }
                total += 1;
            }
        }
    }
    let t = start.elapsed();
    outcome(
        t < Duration::from_secs(120),
        format!("{total} faults corrected, {:.1}s", t.as_secs_f64()),
    )
}

fn matching_oracle() -> Outcome {
    let noisy = noisy(3, 1, "00", &sherbrooke());
    let graph = build_syndrome_graph(&enumerate_faults(&noisy).unwrap()).unwrap();
    let decoder = Decoder::new(&graph);
    let n = graph.detector_count;
    let mut rng = ChaCha8Rng::seed_from_u64(2718);
    let rows = 1000;
    for r in 0..rows {
        let k = rng.gen_range(0..=10);
        let mut row = BitVec::zeros(n);
        while row.count_ones() < k {
            row.set(rng.gen_range(0..n), true);
        }
        let fast = decoder.decode(&row).unwrap();
        let slow = decoder.decode_brute_force(&row).unwrap();
        if fast.weight != slow.weight {
            return outcome(
                false,
                format!(
                    "row {r}: blossom {} vs brute force {}",
                    fast.weight, slow.weight
                ),
            );
        }
    }
    outcome(true, format!("{rows}/{rows} rows agree in weight"))
}

/// Delta-method standard error of the pair estimator from empirical moments.
fn estimator_stderr(mi: f64, mj: f64, mij: f64, shots: f64) -> f64 {
    let f = |v: [f64; 3]| pair_probability(v[0], v[1], v[2]).unwrap_or(0.0);
    let m = [mi, mj, mij];
    let h = 1e-6;
    let grad: Vec<f64> = (0..3)
        .map(|k| {
            let (mut up, mut down) = (m, m);
            up[k] += h;
            down[k] -= h;
            (f(up) - f(down)) / (2.0 * h)
        })
        .collect();
    let cov = [
        [mi * (1.0 - mi), mij - mi * mj, mij * (1.0 - mi)],
        [mij - mi * mj, mj * (1.0 - mj), mij * (1.0 - mj)],
        [mij * (1.0 - mi), mij * (1.0 - mj), mij * (1.0 - mij)],
    ];
    let mut var = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            var += grad[a] * cov[a][b] * grad[b];
        }
    }
    (var / shots).sqrt()
}

fn eq1_estimator() -> Outcome {
    let spec = spec(3, 1, "00");
    let shots = 100_000;
    let (i, j) = (2, 7);
    let mut details = Vec::new();
    let mut pass = true;
    for (seed, p) in [0.01, 0.05, 0.1].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed as u64 + 100);
        let mut det = DetectionMatrix::new(spec, shots);
        for s in 0..shots {
            let cause = rng.gen_bool(p);
            for k in 0..det.detector_count() {
                let mut v = rng.gen_bool(0.03);
                if k == i || k == j {
                    v ^= cause;
                }
                det.set(s, k, v);
            }
        }
        let m = correlation_matrix(&det, DetectorOrdering::SpaceMajor).unwrap();
        let cols = det.column_counts();
        let both = (0..shots)
            .filter(|&s| det.get(s, i) && det.get(s, j))
            .count();
        let n = shots as f64;
        let se = estimator_stderr(cols[i] as f64 / n, cols[j] as f64 / n, both as f64 / n, n);
        let est = m.get(i, j);
        let z = (est - p).abs() / se;
        pass &= z <= 3.0;
        details.push(format!("p={p}: {est:.4} ({z:.1} SE)"));
    }
    outcome(pass, details.join(", "))
}

fn error_suppression() -> Outcome {
    let start = Instant::now();
    let calib = sherbrooke();
    let rounds = 5;
    let shots = 10_000;
    let mut pass = true;
    let mut details = Vec::new();
    for basis in [Basis::Z, Basis::X] {
        let mut agg = Vec::new();
        for d in [3, 5, 7] {
            let results: Vec<_> = LogicalState::all(basis)
                .into_iter()
                .enumerate()
                .map(|(i, state)| {
                    let s = repcnot_core::CodeSpec::new(d, rounds, state).unwrap();
                    run_experiment(&s, None, &calib, shots, 1000 + 10 * d as u64 + i as u64)
                        .unwrap()
                        .result
                })
                .collect();
            agg.push(aggregate_error_rates(&results).unwrap());
        }
        for w in agg.windows(2) {
            let gap = w[0].mean - w[1].mean;
            let se = (w[0].stderr_of_mean.powi(2) + w[1].stderr_of_mean.powi(2)).sqrt();
            pass &= gap > 2.0 * se;
        }
        details.push(format!(
            "{basis}: {}",
            agg.iter()
                .map(|a| format!("{:.4}±{:.4}", a.mean, a.stderr_of_mean))
                .collect::<Vec<_>>()
                .join(" > ")
        ));
    }
    let t = start.elapsed();
    pass &= t < Duration::from_secs(600);
    outcome(
        pass,
        format!("{}, {:.0}s", details.join("; "), t.as_secs_f64()),
    )
}

fn gate_flow_signature(det: &DetectionMatrix) -> Outcome {
    let rounds = det.spec.rounds;
    let m = correlation_matrix(det, DetectorOrdering::SpaceMajor).unwrap();
    let (mut flow, mut rest) = (Vec::new(), Vec::new());
    for a in 0..m.size() {
        for b in 0..m.size() {
            let (c, t) = (m.labels[a], m.labels[b]);
            if c.block != Block::Control || t.block != Block::Target {
                continue;
            }
            if c.check == t.check && t.round == rounds + 1 && c.round <= rounds + 1 {
                flow.push(m.get(a, b));
            } else {
                rest.push(m.get(a, b));
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (f, r) = (mean(&flow), mean(&rest));
    let ratio = f / r;
    outcome(
        ratio >= 2.0,
        format!("gate-flow mean {f:.2e} vs background {r:.2e}, ratio {ratio:.1}"),
    )
}

fn detection_jump(z: &DetectionMatrix, x: &DetectionMatrix) -> Outcome {
    let r = z.spec.rounds;
    let pz = detection_probabilities(z).unwrap();
    let px = detection_probabilities(x).unwrap();
    let (z0, z1) = (
        mean_detection_probability(&pz, Block::Target, r),
        mean_detection_probability(&pz, Block::Target, r + 1),
    );
    let (x0, x1) = (
        mean_detection_probability(&px, Block::Control, r),
        mean_detection_probability(&px, Block::Control, r + 1),
    );
    outcome(
        z1 > z0 && x1 > x0,
        format!("Z target {z0:.4} -> {z1:.4}, X control {x0:.4} -> {x1:.4}"),
    )
}

/// Smallest number of single-qubit data faults whose combined effect fires
/// no detector but flips an observable, searched up to weight 3.
fn min_undetected_logical(d: usize, rounds: usize, state: &str) -> Option<usize> {
    let noisy = noisy(d, rounds, state, &sherbrooke());
    let layout = &noisy.base.layout;
    let catalog = enumerate_faults(&noisy).unwrap();
    assert!(catalog.detector_count <= 128);
    let mut effects: HashMap<u128, Vec<u8>> = HashMap::new();
    for f in &catalog.faults {
        let on_data = f
            .paulis
            .iter()
            .all(|&(q, _)| layout.info(q).unwrap().role == Role::Data);
        if !on_data || f.paulis.is_empty() {
            continue;
        }
        let key = f.detectors.iter().fold(0u128, |a, &i| a | 1 << i);
        let obs = f.observables[0] as u8 | (f.observables[1] as u8) << 1;
        let list = effects.entry(key).or_default();
        if !list.contains(&obs) {
            list.push(obs);
        }
    }
    let flat: Vec<(u128, u8)> = effects
        .iter()
        .flat_map(|(&k, v)| v.iter().map(move |&o| (k, o)))
        .collect();
    if flat.iter().any(|&(k, o)| k == 0 && o != 0) {
        return Some(1);
    }
    let has = |k: u128, o: u8| effects.get(&k).is_some_and(|v| v.contains(&o));
    // weight 2: two faults with equal detectors and different observables
    if effects.values().any(|v| v.len() > 1) {
        return Some(2);
    }
    for (a, &(ka, oa)) in flat.iter().enumerate() {
        for &(kb, ob) in &flat[a + 1..] {
            // a third fault must cancel the detectors and leave a flip
            let k = ka ^ kb;
            if (0..4u8).any(|oc| oa ^ ob ^ oc != 0 && has(k, oc)) {
                return Some(3);
            }
        }
    }
    None
}

fn distance_property() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for state in ["00", "10", "++", "-+"] {
        let w = min_undetected_logical(3, 2, state);
        pass &= w == Some(3);
        details.push(format!(
            "{state}: {}",
            w.map_or("none".into(), |w| w.to_string())
        ));
    }
    outcome(
        pass,
        format!("minimum undetected logical weight {}", details.join(", ")),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |name: &str, run: &dyn Fn() -> Outcome| {
        let o = run();
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += !o.pass as usize;
    };
    report("noiseless truth table", &noiseless_truth_table);
    report("single-fault coverage", &single_fault_coverage);
    report("matching oracle", &matching_oracle);
    report("pair estimator", &eq1_estimator);
    report("error suppression", &error_suppression);
    let calib = sherbrooke();
    let z = sample_detections(&noisy(5, 5, "00", &calib), 100_000, 31).unwrap();
    let x = sample_detections(&noisy(5, 5, "++", &calib), 20_000, 32).unwrap();
    report("gate-flow signature", &|| gate_flow_signature(&z));
    report("detection-probability jump", &|| detection_jump(&z, &x));
    report("distance property", &distance_property);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
