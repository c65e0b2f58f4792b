//! Calibration tables and the circuit-level depolarizing noise model.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::layout::{Layout, QubitId};
use crate::pauli::Pauli;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TqGateType {
    #[serde(rename = "ECR")]
    Ecr,
    #[serde(rename = "CZ")]
    Cz,
    #[serde(rename = "CX")]
    Cx,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateTimes {
    pub sq: f64,
    pub tq: f64,
    pub meas: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitCalibration {
    pub id: QubitId,
    pub t1_us: f64,
    pub t2_us: f64,
    pub readout_err: f64,
    pub sq_err: f64,
    pub idle_err: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeCalibration {
    pub a: QubitId,
    pub b: QubitId,
    pub tq_err: f64,
}

/// Values used for any qubit or edge without its own entry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationDefaults {
    pub t1_us: f64,
    pub t2_us: f64,
    pub readout_err: f64,
    pub sq_err: f64,
    pub idle_err: Option<f64>,
    pub tq_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub tq_gate_type: TqGateType,
    pub gate_times_ns: GateTimes,
    #[serde(default)]
    pub qubits: Vec<QubitCalibration>,
    #[serde(default)]
    pub edges: Vec<EdgeCalibration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defaults: Option<CalibrationDefaults>,
}

fn key(a: QubitId, b: QubitId) -> (QubitId, QubitId) {
    (a.min(b), a.max(b))
}

fn check_prob(field: &'static str, entity: String, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            field,
            entity,
            value,
            range: "[0, 1]",
        })
    }
}

fn check_duration(field: &'static str, entity: String, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            field,
            entity,
            value,
            range: "(0, inf)",
        })
    }
}

/// Parses and validates a calibration JSON document.
pub fn load_calibration(source: &str) -> Result<CalibrationTable> {
    let table: CalibrationTable =
        serde_json::from_str(source).map_err(|e| Error::Schema(e.to_string()))?;
    table.validate()?;
    Ok(table)
}

/// Bundled median-value tables: `sherbrooke`, `brisbane`, `torino`, `fakewashington`.
pub fn bundled_median(device: &str) -> Option<&'static str> {
    Some(match device {
        "sherbrooke" => include_str!("../fixtures/sherbrooke_median.json"),
        "brisbane" => include_str!("../fixtures/brisbane_median.json"),
        "torino" => include_str!("../fixtures/torino_median.json"),
        "fakewashington" => include_str!("../fixtures/fakewashington_median.json"),
        _ => return None,
    })
}

/// Bundled per-qubit tables for the distance-3 layout on each device.
pub fn bundled_d3(device: &str) -> Option<&'static str> {
    Some(match device {
        "sherbrooke" => include_str!("../fixtures/sherbrooke_d3.json"),
        "brisbane" => include_str!("../fixtures/brisbane_d3.json"),
        "torino" => include_str!("../fixtures/torino_d3.json"),
        "fakewashington" => include_str!("../fixtures/fakewashington_d3.json"),
        _ => return None,
    })
}

impl CalibrationTable {
    /// A table applying the same rates to every qubit and edge.
    pub fn uniform(
        tq_gate_type: TqGateType,
        gate_times_ns: GateTimes,
        defaults: CalibrationDefaults,
    ) -> Self {
        Self {
            tq_gate_type,
            gate_times_ns,
            qubits: Vec::new(),
            edges: Vec::new(),
            defaults: Some(defaults),
        }
    }

    /// A noiseless table.
    pub fn zero() -> Self {
        Self::uniform(
            TqGateType::Cz,
            GateTimes {
                sq: 1.0,
                tq: 1.0,
                meas: 1.0,
            },
            CalibrationDefaults {
                t1_us: 1.0,
                t2_us: 1.0,
                readout_err: 0.0,
                sq_err: 0.0,
                idle_err: Some(0.0),
                tq_err: 0.0,
            },
        )
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.gate_times_ns;
        check_duration("gate_times_ns.sq", "table".into(), g.sq)?;
        check_duration("gate_times_ns.tq", "table".into(), g.tq)?;
        check_duration("gate_times_ns.meas", "table".into(), g.meas)?;
        let mut ids = HashSet::new();
        for q in &self.qubits {
            let e = || format!("qubit {}", q.id);
            if !ids.insert(q.id) {
                return Err(Error::Schema(format!("duplicate entry for qubit {}", q.id)));
            }
            check_duration("t1_us", e(), q.t1_us)?;
            check_duration("t2_us", e(), q.t2_us)?;
            check_prob("readout_err", e(), q.readout_err)?;
            check_prob("sq_err", e(), q.sq_err)?;
            if let Some(p) = q.idle_err {
                check_prob("idle_err", e(), p)?;
            }
        }
        let mut edges = HashSet::new();
        for e in &self.edges {
            let name = || format!("edge {}-{}", e.a, e.b);
            if e.a == e.b || !edges.insert(key(e.a, e.b)) {
                return Err(Error::Schema(format!("bad or duplicate {}", name())));
            }
            check_prob("tq_err", name(), e.tq_err)?;
            if self.defaults.is_none() {
                for q in [e.a, e.b] {
                    if !ids.contains(&q) {
                        return Err(Error::MissingQubit(q));
                    }
                }
            }
        }
        if let Some(d) = &self.defaults {
            let e = || "defaults".to_string();
            check_duration("t1_us", e(), d.t1_us)?;
            check_duration("t2_us", e(), d.t2_us)?;
            check_prob("readout_err", e(), d.readout_err)?;
            check_prob("sq_err", e(), d.sq_err)?;
            check_prob("tq_err", e(), d.tq_err)?;
            if let Some(p) = d.idle_err {
                check_prob("idle_err", e(), p)?;
            }
        }
        Ok(())
    }

    pub fn qubit(&self, id: QubitId) -> Result<QubitCalibration> {
        if let Some(q) = self.qubits.iter().find(|q| q.id == id) {
            return Ok(*q);
        }
        let d = self.defaults.as_ref().ok_or(Error::MissingQubit(id))?;
        Ok(QubitCalibration {
            id,
            t1_us: d.t1_us,
            t2_us: d.t2_us,
            readout_err: d.readout_err,
            sq_err: d.sq_err,
            idle_err: d.idle_err,
        })
    }

    pub fn tq_err(&self, a: QubitId, b: QubitId) -> Result<f64> {
        if let Some(e) = self.edges.iter().find(|e| key(e.a, e.b) == key(a, b)) {
            return Ok(e.tq_err);
        }
        self.defaults
            .as_ref()
            .map(|d| d.tq_err)
            .ok_or(Error::MissingEdge(a.min(b), a.max(b)))
    }

    /// Depolarizing probability for a data qubit idling through one readout.
    ///
    /// Uses the explicit `idle_err` when present, else `1 - exp(-t_meas / T2)`.
    pub fn idle_err(&self, id: QubitId) -> Result<f64> {
        let q = self.qubit(id)?;
        Ok(match q.idle_err {
            Some(p) => p,
            None => 1.0 - (-self.gate_times_ns.meas / (q.t2_us * 1000.0)).exp(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrokenEdge {
    pub a: QubitId,
    pub b: QubitId,
    pub in_layout: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub broken: Vec<BrokenEdge>,
    pub usable: bool,
    pub warnings: Vec<String>,
}

/// Lists edges whose two-qubit error rate is 1 and flags the layout unusable
/// when any of them is a layout adjacency.
pub fn validate_connectivity(calib: &CalibrationTable, layout: &Layout) -> ConnectivityReport {
    let mut broken = Vec::new();
    let mut warnings = Vec::new();
    for e in &calib.edges {
        if (e.tq_err - 1.0).abs() <= 1e-12 {
            let in_layout = layout.is_adjacent(e.a, e.b);
            if !in_layout {
                warnings.push(format!(
                    "edge {}-{} is broken but unused by the layout",
                    e.a, e.b
                ));
            }
            broken.push(BrokenEdge {
                a: e.a,
                b: e.b,
                in_layout,
            });
        }
    }
    let usable = broken.iter().all(|b| !b.in_layout);
    ConnectivityReport {
        broken,
        usable,
        warnings,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    /// X, Y, Z each with probability p/3.
    Depol1,
    /// The 15 non-identity two-qubit Paulis each with probability p/15.
    Depol2,
    /// X with probability p.
    FlipX,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    Before,
    After,
}

/// Calibration entry a channel probability was read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateSource {
    Sq(QubitId),
    Tq(QubitId, QubitId),
    Readout(QubitId),
    Idle(QubitId),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub layer: usize,
    /// Index into the base circuit's instructions.
    pub instruction: usize,
    pub placement: Placement,
    pub kind: ChannelKind,
    pub qubits: Vec<QubitId>,
    pub p: f64,
    pub source: RateSource,
}

/// One Pauli term of a channel: the operator and its probability.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub paulis: Vec<(QubitId, Pauli)>,
    pub p: f64,
}

impl Channel {
    pub fn term_count(&self) -> usize {
        match self.kind {
            ChannelKind::Depol1 => 3,
            ChannelKind::Depol2 => 15,
            ChannelKind::FlipX => 1,
        }
    }

    /// Pauli of term `i` on each channel qubit (identity included).
    pub fn term_paulis(&self, i: usize) -> Vec<(QubitId, Pauli)> {
        match self.kind {
            ChannelKind::Depol1 => vec![(self.qubits[0], Pauli::NON_IDENTITY[i])],
            ChannelKind::FlipX => vec![(self.qubits[0], Pauli::X)],
            ChannelKind::Depol2 => {
                let j = i + 1;
                vec![
                    (self.qubits[0], Pauli::ALL[j / 4]),
                    (self.qubits[1], Pauli::ALL[j % 4]),
                ]
            }
        }
    }

    pub fn terms(&self) -> Vec<PauliTerm> {
        let n = self.term_count();
        (0..n)
            .map(|i| PauliTerm {
                paulis: self.term_paulis(i),
                p: self.p / n as f64,
            })
            .collect()
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q: Vec<String> = self.qubits.iter().map(|q| format!("q{q}")).collect();
        write!(
            f,
            "{:?}({}) {:?} instruction {} in layer {}",
            self.kind,
            q.join(","),
            self.placement,
            self.instruction,
            self.layer
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    Gate(usize),
    Noise(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoisyCircuit {
    pub base: Circuit,
    pub channels: Vec<Channel>,
    /// Execution order of gates and channels.
    pub schedule: Vec<Step>,
}

impl NoisyCircuit {
    /// Sum of all channel probabilities.
    pub fn total_probability(&self) -> f64 {
        self.channels.iter().map(|c| c.p).sum()
    }

    /// Checks that every channel probability equals its calibration source.
    pub fn audit(&self, calib: &CalibrationTable) -> Result<()> {
        for c in &self.channels {
            let expected = rate(calib, c.source)?;
            if expected.to_bits() != c.p.to_bits() {
                return Err(Error::InvalidSpec(format!(
                    "channel {c} has p={} but calibration gives {expected}",
                    c.p
                )));
            }
        }
        Ok(())
    }

    pub fn channels_of(&self, instruction: usize) -> impl Iterator<Item = &Channel> {
        self.channels
            .iter()
            .filter(move |c| c.instruction == instruction)
    }
}

fn rate(calib: &CalibrationTable, source: RateSource) -> Result<f64> {
    match source {
        RateSource::Sq(q) => Ok(calib.qubit(q)?.sq_err),
        RateSource::Tq(a, b) => calib.tq_err(a, b),
        RateSource::Readout(q) => Ok(calib.qubit(q)?.readout_err),
        RateSource::Idle(q) => calib.idle_err(q),
    }
}

/// Attaches calibration-driven noise channels to every instruction.
pub fn attach_noise(circuit: &Circuit, calib: &CalibrationTable) -> Result<NoisyCircuit> {
    calib.validate()?;
    let mut channels = Vec::new();
    let mut schedule = Vec::new();
    let mut rate_cache: BTreeMap<(u8, QubitId, QubitId), f64> = BTreeMap::new();
    let mut lookup = |source: RateSource| -> Result<f64> {
        let k = match source {
            RateSource::Sq(q) => (0, q, 0),
            RateSource::Tq(a, b) => (1, a.min(b), a.max(b)),
            RateSource::Readout(q) => (2, q, 0),
            RateSource::Idle(q) => (3, q, 0),
        };
        if let Some(&p) = rate_cache.get(&k) {
            return Ok(p);
        }
        let p = rate(calib, source)?;
        rate_cache.insert(k, p);
        Ok(p)
    };
    let per_operand_sq = matches!(calib.tq_gate_type, TqGateType::Ecr | TqGateType::Cx);

    for (idx, instr) in circuit.instructions.iter().enumerate() {
        let mut before = Vec::new();
        let mut after = Vec::new();
        let mut push = |list: &mut Vec<Channel>,
                        placement,
                        kind,
                        qubits: Vec<QubitId>,
                        source|
         -> Result<()> {
            list.push(Channel {
                layer: instr.layer,
                instruction: idx,
                placement,
                kind,
                qubits,
                p: lookup(source)?,
                source,
            });
            Ok(())
        };
        use ChannelKind::*;
        use Placement::*;
        match instr.gate {
            Gate::H(q) | Gate::X(q) => push(&mut after, After, Depol1, vec![q], RateSource::Sq(q))?,
            Gate::ResetZ(q) => push(&mut after, After, FlipX, vec![q], RateSource::Readout(q))?,
            Gate::MeasureZ { qubit, .. } => push(
                &mut before,
                Before,
                FlipX,
                vec![qubit],
                RateSource::Readout(qubit),
            )?,
            Gate::Idle { qubit, .. } => push(
                &mut after,
                After,
                Depol1,
                vec![qubit],
                RateSource::Idle(qubit),
            )?,
            Gate::Cnot(a, b) | Gate::Cz(a, b) => {
                if per_operand_sq {
                    push(&mut before, Before, Depol1, vec![a], RateSource::Sq(a))?;
                    push(&mut before, Before, Depol1, vec![b], RateSource::Sq(b))?;
                }
                push(&mut after, After, Depol2, vec![a, b], RateSource::Tq(a, b))?;
                if per_operand_sq {
                    push(&mut after, After, Depol1, vec![a], RateSource::Sq(a))?;
                    push(&mut after, After, Depol1, vec![b], RateSource::Sq(b))?;
                }
            }
        }
        for c in before {
            schedule.push(Step::Noise(channels.len()));
            channels.push(c);
        }
        schedule.push(Step::Gate(idx));
        for c in after {
            schedule.push(Step::Noise(channels.len()));
            channels.push(c);
        }
    }
    Ok(NoisyCircuit {
        base: circuit.clone(),
        channels,
        schedule,
    })
}
