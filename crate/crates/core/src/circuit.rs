//! Layered Clifford circuits with measurement-record metadata, plus a
//! line-oriented text form (`L<t>: H q3; CNOT q4 q5; ...`) and JSON sidecar.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{Block, CodeSpec, Layout, QubitId};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    ResetZ(QubitId),
    H(QubitId),
    X(QubitId),
    Cnot(QubitId, QubitId),
    Cz(QubitId, QubitId),
    MeasureZ { qubit: QubitId, slot: usize },
    Idle { qubit: QubitId, duration_ns: f64 },
}

impl Gate {
    pub fn qubits(&self) -> Vec<QubitId> {
        match *self {
            Gate::ResetZ(q) | Gate::H(q) | Gate::X(q) => vec![q],
            Gate::MeasureZ { qubit, .. } | Gate::Idle { qubit, .. } => vec![qubit],
            Gate::Cnot(a, b) | Gate::Cz(a, b) => vec![a, b],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot(..) | Gate::Cz(..))
    }

    fn mnemonic(&self) -> &'static str {
        match self {
            Gate::ResetZ(_) => "RZ",
            Gate::H(_) => "H",
            Gate::X(_) => "X",
            Gate::Cnot(..) => "CNOT",
            Gate::Cz(..) => "CZ",
            Gate::MeasureZ { .. } => "M",
            Gate::Idle { .. } => "IDLE",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instruction {
    pub layer: usize,
    pub gate: Gate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordRole {
    Syndrome,
    Flag,
    Data,
}

/// Metadata of one measurement record slot.
///
/// `round` is the extraction round (1..=2R) for syndrome and flag records
/// and `2R + 1` for the final data readout. `index` is the check index for
/// syndrome records, the flag index for flags, and the data position for data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RecordInfo {
    pub qubit: QubitId,
    pub round: usize,
    pub role: RecordRole,
    pub block: Block,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub spec: CodeSpec,
    pub layout: Layout,
    /// Sorted by layer.
    pub instructions: Vec<Instruction>,
    /// Indexed by record slot.
    pub records: Vec<RecordInfo>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    spec: CodeSpec,
    layout: Layout,
    records: Vec<RecordInfo>,
}

impl Circuit {
    pub fn layer_count(&self) -> usize {
        self.instructions.last().map_or(0, |i| i.layer + 1)
    }

    pub fn record_count(&self) -> usize {
        self.records.len()
    }

    /// Instructions grouped by layer, including empty layers.
    pub fn layers(&self) -> Vec<&[Instruction]> {
        let mut out = Vec::with_capacity(self.layer_count());
        let mut start = 0;
        for layer in 0..self.layer_count() {
            let mut end = start;
            while end < self.instructions.len() && self.instructions[end].layer == layer {
                end += 1;
            }
            out.push(&self.instructions[start..end]);
            start = end;
        }
        out
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| i.gate.is_two_qubit())
            .count()
    }

    /// Record slots whose metadata satisfies `pred`, in slot order.
    pub fn record_slots(&self, pred: impl Fn(&RecordInfo) -> bool) -> Vec<usize> {
        (0..self.records.len())
            .filter(|&s| pred(&self.records[s]))
            .collect()
    }

    /// Checks structural invariants: layer order, operand adjacency, no qubit
    /// reused within a layer, and measurement slots in execution order.
    pub fn validate(&self) -> Result<()> {
        let width = self.layout.width();
        let known: HashSet<QubitId> = self.layout.qubits.iter().map(|q| q.id).collect();
        let mut next_slot = 0;
        for layer in self.layers() {
            let mut used = HashSet::new();
            for instr in layer {
                for q in instr.gate.qubits() {
                    if q >= width || !known.contains(&q) {
                        return Err(Error::InvalidSpec(format!(
                            "layer {} uses unknown qubit {q}",
                            instr.layer
                        )));
                    }
                    if !used.insert(q) {
                        return Err(Error::InvalidSpec(format!(
                            "qubit {q} used twice in layer {}",
                            instr.layer
                        )));
                    }
                }
                if let Gate::Cnot(a, b) | Gate::Cz(a, b) = instr.gate {
                    if !self.layout.is_adjacent(a, b) {
                        return Err(Error::MissingAdjacency(a.min(b), a.max(b)));
                    }
                }
                if let Gate::MeasureZ { qubit, slot } = instr.gate {
                    if slot != next_slot {
                        return Err(Error::InvalidSpec(format!(
                            "record slot {slot} out of order (expected {next_slot})"
                        )));
                    }
                    if self.records.get(slot).map(|r| r.qubit) != Some(qubit) {
                        return Err(Error::InvalidSpec(format!(
                            "record slot {slot} does not describe qubit {qubit}"
                        )));
                    }
                    next_slot += 1;
                }
            }
        }
        if next_slot != self.records.len() {
            return Err(Error::InvalidSpec(format!(
                "{} records declared but {next_slot} measured",
                self.records.len()
            )));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (t, layer) in self.layers().into_iter().enumerate() {
            write!(out, "L{t}:").unwrap();
            for (i, instr) in layer.iter().enumerate() {
                out.push_str(if i == 0 { " " } else { "; " });
                out.push_str(instr.gate.mnemonic());
                for q in instr.gate.qubits() {
                    write!(out, " q{q}").unwrap();
                }
                match instr.gate {
                    Gate::MeasureZ { slot, .. } => write!(out, " r{slot}").unwrap(),
                    Gate::Idle { duration_ns, .. } => write!(out, " {duration_ns:?}").unwrap(),
                    _ => {}
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn sidecar_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Sidecar {
            spec: self.spec,
            layout: self.layout.clone(),
            records: self.records.clone(),
        })?)
    }

    pub fn from_text(text: &str, sidecar: &str) -> Result<Self> {
        let side: Sidecar = serde_json::from_str(sidecar)?;
        let mut instructions = Vec::new();
        let mut next_layer = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (head, body) = line
                .split_once(':')
                .ok_or_else(|| err("missing `:`".into()))?;
            let layer: usize = head
                .strip_prefix('L')
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err(format!("bad layer label `{head}`")))?;
            if layer != next_layer {
                return Err(err(format!("expected layer L{next_layer}, found `{head}`")));
            }
            next_layer += 1;
            for item in body.split(';') {
                let toks: Vec<&str> = item.split_whitespace().collect();
                if toks.is_empty() {
                    continue;
                }
                let qubit = |i: usize| -> Result<QubitId> {
                    toks.get(i)
                        .and_then(|t| t.strip_prefix('q'))
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(format!("bad operand in `{}`", item.trim())))
                };
                let gate = match (toks[0], toks.len()) {
                    ("RZ", 2) => Gate::ResetZ(qubit(1)?),
                    ("H", 2) => Gate::H(qubit(1)?),
                    ("X", 2) => Gate::X(qubit(1)?),
                    ("CNOT", 3) => Gate::Cnot(qubit(1)?, qubit(2)?),
                    ("CZ", 3) => Gate::Cz(qubit(1)?, qubit(2)?),
                    ("M", 3) => Gate::MeasureZ {
                        qubit: qubit(1)?,
                        slot: toks[2]
                            .strip_prefix('r')
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| err(format!("bad record slot `{}`", toks[2])))?,
                    },
                    ("IDLE", 3) => Gate::Idle {
                        qubit: qubit(1)?,
                        duration_ns: toks[2]
                            .parse()
                            .map_err(|_| err(format!("bad duration `{}`", toks[2])))?,
                    },
                    _ => return Err(err(format!("unknown instruction `{}`", item.trim()))),
                };
                instructions.push(Instruction { layer, gate });
            }
        }
        let circuit = Circuit {
            spec: side.spec,
            layout: side.layout,
            instructions,
            records: side.records,
        };
        circuit.validate()?;
        Ok(circuit)
    }
}

/// Incremental construction of a layered circuit.
#[derive(Default)]
pub(crate) struct CircuitWriter {
    instructions: Vec<Instruction>,
    records: Vec<RecordInfo>,
    layer: usize,
    open: bool,
}

impl CircuitWriter {
    pub fn gate(&mut self, gate: Gate) {
        self.open = true;
        self.instructions.push(Instruction {
            layer: self.layer,
            gate,
        });
    }

    pub fn measure(&mut self, info: RecordInfo) {
        let slot = self.records.len();
        self.records.push(info);
        self.gate(Gate::MeasureZ {
            qubit: info.qubit,
            slot,
        });
    }

    /// Closes the current layer; empty layers are skipped.
    pub fn end_layer(&mut self) {
        if self.open {
            self.layer += 1;
            self.open = false;
        }
    }

    pub fn finish(mut self, spec: CodeSpec, layout: Layout) -> Circuit {
        self.end_layer();
        Circuit {
            spec,
            layout,
            instructions: self.instructions,
            records: self.records,
        }
    }
}
