//! Detector correlations, detection probabilities, and logical error rates.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::builder::ideal_output_state;
use crate::detectors::{
    detector_label, ordered_indices, DetectionMatrix, DetectorLabel, DetectorOrdering,
};
use crate::error::{Error, Result};
use crate::layout::{Basis, Block, LogicalState};

/// Pairwise error probability from the first and second moments of two
/// detectors, or `None` when the square root argument is negative or NaN.
///
/// `p = 1/2 - 1/2 sqrt(1 - 4 (<xi xj> - <xi><xj>) / (1 - 2<xi> - 2<xj> + 4<xi xj>))`
pub fn pair_probability(xi: f64, xj: f64, xixj: f64) -> Option<f64> {
    let num = xixj - xi * xj;
    let den = 1.0 - 2.0 * xi - 2.0 * xj + 4.0 * xixj;
    let disc = 1.0 - 4.0 * num / den;
    if disc.is_nan() || disc < 0.0 {
        return None;
    }
    Some(0.5 - 0.5 * disc.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix {
    pub ordering: DetectorOrdering,
    pub labels: Vec<DetectorLabel>,
    /// Row-major `n x n`.
    pub values: Vec<f64>,
    /// Off-diagonal entries set to 0 because the estimate was negative or undefined.
    pub clamped: usize,
}

impl CorrelationMatrix {
    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size() + j]
    }

    pub fn to_csv(&self) -> String {
        let n = self.size();
        let mut out = String::with_capacity(n * n * 8);
        for i in 0..n {
            for j in 0..n {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{}", self.get(i, j)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Counts of single and pairwise detector firings.
fn moment_counts(det: &DetectionMatrix) -> (Vec<u64>, Vec<u64>) {
    let n = det.detector_count();
    let chunk = 4096;
    let zero = || (vec![0u64; n], vec![0u64; n * n]);
    (0..det.shots())
        .into_par_iter()
        .chunks(chunk)
        .map(|shots| {
            let (mut single, mut pair) = zero();
            let mut fired = Vec::new();
            for s in shots {
                fired.clear();
                fired.extend(det.row(s).iter_ones());
                for (a, &i) in fired.iter().enumerate() {
                    single[i] += 1;
                    for &j in &fired[a + 1..] {
                        pair[i * n + j] += 1;
                    }
                }
            }
            (single, pair)
        })
        .reduce(zero, |(mut s1, mut p1), (s2, p2)| {
            s1.iter_mut().zip(s2).for_each(|(a, b)| *a += b);
            p1.iter_mut().zip(p2).for_each(|(a, b)| *a += b);
            (s1, p1)
        })
}

/// Symmetric matrix of pairwise error probabilities between detectors,
/// listed in `ordering`. The diagonal is 0; negative or undefined
/// estimates are set to 0 and counted.
pub fn correlation_matrix(
    det: &DetectionMatrix,
    ordering: DetectorOrdering,
) -> Result<CorrelationMatrix> {
    let shots = det.shots();
    if shots < 2 {
        return Err(Error::Analysis(format!(
            "correlation needs at least 2 shots, got {shots}"
        )));
    }
    let n = det.detector_count();
    let (single, pair) = moment_counts(det);
    let order = ordered_indices(&det.spec, ordering);
    let inv = shots as f64;
    let mut values = vec![0.0; n * n];
    let mut clamped = 0;
    for a in 0..n {
        for b in a + 1..n {
            let (i, j) = (order[a].min(order[b]), order[a].max(order[b]));
            let xi = single[i] as f64 / inv;
            let xj = single[j] as f64 / inv;
            let xixj = pair[i * n + j] as f64 / inv;
            let p = match pair_probability(xi, xj, xixj) {
                Some(p) if p >= 0.0 => p,
                _ => {
                    clamped += 2;
                    0.0
                }
            };
            values[a * n + b] = p;
            values[b * n + a] = p;
        }
    }
    Ok(CorrelationMatrix {
        ordering,
        labels: order
            .iter()
            .map(|&i| detector_label(&det.spec, i))
            .collect(),
        values,
        clamped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionProbability {
    pub block: Block,
    pub check: usize,
    pub round: usize,
    pub p: f64,
}

/// Fraction of shots in which each detector fired, in canonical order.
pub fn detection_probabilities(det: &DetectionMatrix) -> Result<Vec<DetectionProbability>> {
    if det.shots() == 0 {
        return Err(Error::Analysis("no shots".into()));
    }
    let counts = det.column_counts();
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let l = detector_label(&det.spec, i);
            DetectionProbability {
                block: l.block,
                check: l.check,
                round: l.round,
                p: c as f64 / det.shots() as f64,
            }
        })
        .collect())
}

pub fn detection_probabilities_csv(probs: &[DetectionProbability]) -> String {
    let mut out = String::from("block,k,sr,p\n");
    for d in probs {
        writeln!(out, "{},{},{},{}", d.block, d.check, d.round, d.p).unwrap();
    }
    out
}

/// Mean detection probability of `block` at syndrome round `round`.
pub fn mean_detection_probability(
    probs: &[DetectionProbability],
    block: Block,
    round: usize,
) -> f64 {
    let sel: Vec<f64> = probs
        .iter()
        .filter(|d| d.block == block && d.round == round)
        .map(|d| d.p)
        .collect();
    sel.iter().sum::<f64>() / sel.len() as f64
}

/// Corrected logical values: raw final parities XOR decoded flips.
pub fn corrected_outcomes(det: &DetectionMatrix, flips: &[[bool; 2]]) -> Result<Vec<[bool; 2]>> {
    if flips.len() != det.shots() {
        return Err(Error::Shape(format!(
            "{} decoded shots for {} detection rows",
            flips.len(),
            det.shots()
        )));
    }
    Ok(flips
        .iter()
        .enumerate()
        .map(|(s, f)| {
            let raw = det.raw_logical(s);
            [raw[0] ^ f[0], raw[1] ^ f[1]]
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalResult {
    pub state: LogicalState,
    pub shots: usize,
    /// `<P_C>`, `<P_T>`, `<P_C P_T>` for the measured-basis logical Pauli `P`.
    pub expectations: [f64; 3],
    pub fidelity: f64,
    pub p_err: f64,
    pub stderr: f64,
}

/// Fidelity of corrected outcomes with the ideal CNOT output of
/// `initial_state`.
///
/// `F = (1 + s_C <P_C> + s_T <P_T> + s_C s_T <P_C P_T>) / 4` with signs
/// `s = -1` where the ideal logical bit is 1. The standard error
/// propagates the three estimators with their covariances, which reduces
/// to `sqrt(F (1 - F) / N)`.
pub fn logical_fidelity(
    outcomes: &[[bool; 2]],
    initial_state: LogicalState,
) -> Result<LogicalResult> {
    let n = outcomes.len();
    if n == 0 {
        return Err(Error::Analysis("no outcomes".into()));
    }
    let sign = |b: bool| if b { -1.0 } else { 1.0 };
    let mut e = [0.0f64; 3];
    for o in outcomes {
        e[0] += sign(o[0]);
        e[1] += sign(o[1]);
        e[2] += sign(o[0] ^ o[1]);
    }
    for v in &mut e {
        *v /= n as f64;
    }
    let ideal = ideal_output_state(initial_state);
    let (sc, st) = (sign(ideal.control), sign(ideal.target));
    let fidelity = ((1.0 + sc * e[0] + st * e[1] + sc * st * e[2]) / 4.0).clamp(0.0, 1.0);
    Ok(LogicalResult {
        state: initial_state,
        shots: n,
        expectations: e,
        fidelity,
        p_err: 1.0 - fidelity,
        stderr: (fidelity * (1.0 - fidelity) / n as f64).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateErrorRate {
    pub basis: Basis,
    pub mean: f64,
    /// Population standard deviation over the four states.
    pub std: f64,
    /// Standard error of the mean from the per-state standard errors.
    pub stderr_of_mean: f64,
}

pub fn aggregate_error_rates(results: &[LogicalResult]) -> Result<AggregateErrorRate> {
    if results.len() != 4 {
        return Err(Error::Analysis(format!(
            "need 4 states, got {}",
            results.len()
        )));
    }
    let basis = results[0].state.basis;
    if results.iter().any(|r| r.state.basis != basis) {
        return Err(Error::Analysis("states from mixed bases".into()));
    }
    let mean = results.iter().map(|r| r.p_err).sum::<f64>() / 4.0;
    let var = results
        .iter()
        .map(|r| (r.p_err - mean).powi(2))
        .sum::<f64>()
        / 4.0;
    let se = results
        .iter()
        .map(|r| r.stderr * r.stderr)
        .sum::<f64>()
        .sqrt()
        / 4.0;
    Ok(AggregateErrorRate {
        basis,
        mean,
        std: var.sqrt(),
        stderr_of_mean: se,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRateRow {
    pub distance: usize,
    pub rounds: usize,
    pub result: LogicalResult,
    pub aggregate: Option<AggregateErrorRate>,
}

pub const LOGRATE_HEADER: &str = "d,rounds,basis,state,p_err,stderr,mean,std";

pub fn lograte_csv(rows: &[LogRateRow]) -> String {
    let mut out = String::from(LOGRATE_HEADER);
    out.push('\n');
    for r in rows {
        let (mean, std) = match r.aggregate {
            Some(a) => (a.mean.to_string(), a.std.to_string()),
            None => (String::new(), String::new()),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.distance,
            r.rounds,
            r.result.state.basis,
            r.result.state,
            r.result.p_err,
            r.result.stderr,
            mean,
            std
        )
        .unwrap();
    }
    out
}

/// Fills `aggregate` on every row that belongs to a complete group of four
/// states sharing `(d, rounds, basis)`.
pub fn attach_aggregates(rows: &mut [LogRateRow]) {
    let keys: Vec<(usize, usize, Basis)> = rows
        .iter()
        .map(|r| (r.distance, r.rounds, r.result.state.basis))
        .collect();
    for key in &keys {
        let members: Vec<usize> = (0..rows.len()).filter(|&i| keys[i] == *key).collect();
        if members.len() != 4 {
            continue;
        }
        let results: Vec<LogicalResult> = members.iter().map(|&i| rows[i].result).collect();
        if let Ok(agg) = aggregate_error_rates(&results) {
            for &i in &members {
                rows[i].aggregate = Some(agg);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::CodeSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pair_probability_cases() {
        // independent columns
        assert_eq!(
            pair_probability(0.2, 0.3, 0.06),
            Some(0.5 - 0.5 * 1.0f64.sqrt())
        );
        assert!(pair_probability(0.2, 0.3, 0.06).unwrap().abs() < 1e-15);
        // shared cause only: both moments equal p
        let p = 0.1;
        assert!((pair_probability(p, p, p).unwrap() - p).abs() < 1e-12);
        // negative square root argument
        assert_eq!(pair_probability(0.3, 0.3, 0.0), None);
    }

    #[test]
    fn pair_probability_recovers_shared_cause_with_background() {
        // x_i = c ^ a_i, x_j = c ^ a_j with independent Bernoulli c, a_i, a_j
        let (c, ai, aj) = (0.07, 0.02, 0.04);
        let f = |a: f64, b: f64| a + b - 2.0 * a * b;
        let xi = f(c, ai);
        let xj = f(c, aj);
        let xixj = c * (1.0 - ai) * (1.0 - aj) + (1.0 - c) * ai * aj;
        assert!((pair_probability(xi, xj, xixj).unwrap() - c).abs() < 1e-12);
    }

    fn synthetic(
        spec: CodeSpec,
        shots: usize,
        seed: u64,
        rate: impl Fn(usize) -> f64,
    ) -> DetectionMatrix {
        let mut m = DetectionMatrix::new(spec, shots);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for s in 0..shots {
            for d in 0..m.detector_count() {
                if rng.gen_bool(rate(d)) {
                    m.set(s, d, true);
                }
            }
        }
        m
    }

    #[test]
    fn matrix_symmetry_and_range() {
        let spec = CodeSpec::new(3, 1, "00".parse().unwrap()).unwrap();
        let m = synthetic(spec, 2000, 5, |d| 0.05 + 0.01 * d as f64);
        for ord in [DetectorOrdering::SpaceMajor, DetectorOrdering::TimeMajor] {
            let c = correlation_matrix(&m, ord).unwrap();
            let n = c.size();
            assert_eq!(n, 12);
            for i in 0..n {
                assert_eq!(c.get(i, i), 0.0);
                for j in 0..n {
                    assert_eq!(c.get(i, j), c.get(j, i));
                    assert!((0.0..=0.5).contains(&c.get(i, j)));
                }
            }
            assert_eq!(c.to_csv().lines().count(), n);
        }
        assert!(correlation_matrix(
            &synthetic(spec, 1, 1, |_| 0.1),
            DetectorOrdering::SpaceMajor
        )
        .is_err());
    }

    #[test]
    fn detection_probability_zero() {
        let spec = CodeSpec::new(3, 2, "00".parse().unwrap()).unwrap();
        let m = DetectionMatrix::new(spec, 10);
        let p = detection_probabilities(&m).unwrap();
        assert_eq!(p.len(), spec.detector_count());
        assert!(p.iter().all(|d| d.p == 0.0));
        let csv = detection_probabilities_csv(&p);
        assert!(csv.starts_with("block,k,sr,p\ncontrol,0,1,0\n"));
    }

    #[test]
    fn fidelity_cases() {
        let s00: LogicalState = "00".parse().unwrap();
        let r = logical_fidelity(&[[false, false]; 100], s00).unwrap();
        assert_eq!((r.fidelity, r.p_err, r.stderr), (1.0, 0.0, 0.0));
        let uniform: Vec<[bool; 2]> = (0..400).map(|i| [i % 2 == 1, (i / 2) % 2 == 1]).collect();
        assert!((logical_fidelity(&uniform, s00).unwrap().fidelity - 0.25).abs() < 1e-12);
        // |+-> becomes |-->: both logical X values are -1
        let r = logical_fidelity(&[[true, true]; 50], "+-".parse().unwrap()).unwrap();
        assert_eq!(r.fidelity, 1.0);
        // |10> becomes |11>
        let r = logical_fidelity(&[[true, false]; 50], "10".parse().unwrap()).unwrap();
        assert_eq!(r.fidelity, 0.0);
        assert!(logical_fidelity(&[], s00).is_err());
    }

    #[test]
    fn fidelity_is_the_success_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let outcomes: Vec<[bool; 2]> = (0..1000)
            .map(|_| [rng.gen_bool(0.1), rng.gen_bool(0.2)])
            .collect();
        let state: LogicalState = "-+".parse().unwrap();
        let ideal = ideal_output_state(state);
        let hits = outcomes.iter().filter(|o| **o == ideal.bits()).count();
        let r = logical_fidelity(&outcomes, state).unwrap();
        assert!((r.fidelity - hits as f64 / 1000.0).abs() < 1e-12);
    }

    fn result(state: &str, p_err: f64) -> LogicalResult {
        LogicalResult {
            state: state.parse().unwrap(),
            shots: 100,
            expectations: [0.0; 3],
            fidelity: 1.0 - p_err,
            p_err,
            stderr: 0.01,
        }
    }

    #[test]
    fn aggregates() {
        let same: Vec<_> = ["00", "01", "10", "11"]
            .iter()
            .map(|s| result(s, 0.1))
            .collect();
        let a = aggregate_error_rates(&same).unwrap();
        assert!((a.mean - 0.1).abs() < 1e-15 && a.std.abs() < 1e-15);
        let spread: Vec<_> = ["00", "01", "10", "11"]
            .iter()
            .zip([0.1, 0.2, 0.3, 0.4])
            .map(|(s, p)| result(s, p))
            .collect();
        let a = aggregate_error_rates(&spread).unwrap();
        assert!((a.mean - 0.25).abs() < 1e-12);
        assert!((a.std - 0.0125f64.sqrt()).abs() < 1e-12);
        assert!(aggregate_error_rates(&spread[..3]).is_err());
        let mut mixed = spread.clone();
        mixed[0] = result("++", 0.1);
        assert!(aggregate_error_rates(&mixed).is_err());
    }

    #[test]
    fn lograte_rows() {
        let mut rows: Vec<LogRateRow> = ["00", "01", "10", "11", "++"]
            .iter()
            .map(|s| LogRateRow {
                distance: 3,
                rounds: 2,
                result: result(s, 0.2),
                aggregate: None,
            })
            .collect();
        attach_aggregates(&mut rows);
        let csv = lograte_csv(&rows);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], LOGRATE_HEADER);
        assert_eq!(lines[1], "3,2,z,00,0.2,0.01,0.2,0");
        assert_eq!(lines[5], "3,2,x,++,0.2,0.01,,");
    }
}
