//! Code parameters and the physical-qubit layout of two flagged repetition
//! code blocks joined by a row of ancillas.
//!
//! Each block is a chain `d0 f0 s0 f1 d1 f2 s1 f3 d2 ...`: check `k` reads
//! `data_k - flag_{2k} - syndrome_k - flag_{2k+1} - data_{k+1}`. Ancilla `k`
//! links control `data_k` with target `data_k`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type QubitId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub fn other(self) -> Basis {
        match self {
            Basis::Z => Basis::X,
            Basis::X => Basis::Z,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Z => "z",
            Basis::X => "x",
        })
    }
}

impl FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "z" => Ok(Basis::Z),
            "x" => Ok(Basis::X),
            _ => Err(Error::InvalidSpec(format!("unknown basis `{s}`"))),
        }
    }
}

/// A product state of the two logical qubits in one basis.
///
/// `control`/`target` are the logical bit values: `true` means `|1>` in the
/// Z basis and `|->` in the X basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LogicalState {
    pub basis: Basis,
    pub control: bool,
    pub target: bool,
}

impl LogicalState {
    pub const fn new(basis: Basis, control: bool, target: bool) -> Self {
        Self {
            basis,
            control,
            target,
        }
    }

    /// The four states of a basis in the order `00, 01, 10, 11` (or `++, +-, -+, --`).
    pub fn all(basis: Basis) -> [LogicalState; 4] {
        [
            Self::new(basis, false, false),
            Self::new(basis, false, true),
            Self::new(basis, true, false),
            Self::new(basis, true, true),
        ]
    }

    pub fn bits(self) -> [bool; 2] {
        [self.control, self.target]
    }

    fn symbol(basis: Basis, bit: bool) -> char {
        match (basis, bit) {
            (Basis::Z, false) => '0',
            (Basis::Z, true) => '1',
            (Basis::X, false) => '+',
            (Basis::X, true) => '-',
        }
    }
}

impl fmt::Display for LogicalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}",
            Self::symbol(self.basis, self.control),
            Self::symbol(self.basis, self.target)
        )
    }
}

impl FromStr for LogicalState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.len() != 2 {
            return Err(Error::InvalidSpec(format!("bad logical state `{s}`")));
        }
        let parse = |c: char| match c {
            '0' => Some((Basis::Z, false)),
            '1' => Some((Basis::Z, true)),
            '+' | 'p' => Some((Basis::X, false)),
            '-' | 'm' => Some((Basis::X, true)),
            _ => None,
        };
        match (parse(chars[0]), parse(chars[1])) {
            (Some((b0, c)), Some((b1, t))) if b0 == b1 => Ok(Self::new(b0, c, t)),
            _ => Err(Error::InvalidSpec(format!("bad logical state `{s}`"))),
        }
    }
}

impl Serialize for LogicalState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for LogicalState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeSpec {
    pub distance: usize,
    /// Extraction rounds on each side of the transversal CNOT.
    pub rounds: usize,
    pub basis: Basis,
    pub initial_state: LogicalState,
}

impl CodeSpec {
    pub fn new(distance: usize, rounds: usize, initial_state: LogicalState) -> Result<Self> {
        let spec = Self {
            distance,
            rounds,
            basis: initial_state.basis,
            initial_state,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.distance < 3 || self.distance.is_multiple_of(2) {
            return Err(Error::InvalidSpec(format!(
                "distance must be odd and >= 3, got {}",
                self.distance
            )));
        }
        if self.rounds == 0 {
            return Err(Error::InvalidSpec("rounds must be >= 1".into()));
        }
        if self.initial_state.basis != self.basis {
            return Err(Error::InvalidSpec(format!(
                "state {} does not belong to basis {}",
                self.initial_state, self.basis
            )));
        }
        Ok(())
    }

    pub fn physical_qubits(&self) -> usize {
        3 * self.distance + 6 * (self.distance - 1)
    }

    pub fn checks_per_block(&self) -> usize {
        self.distance - 1
    }

    /// Syndrome rounds including both temporal boundaries: `2R + 1`.
    pub fn syndrome_rounds(&self) -> usize {
        2 * self.rounds + 1
    }

    pub fn detector_count(&self) -> usize {
        2 * self.checks_per_block() * self.syndrome_rounds()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Data,
    Flag,
    Syndrome,
    Ancilla,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Control,
    Target,
    Shared,
}

impl Block {
    pub fn index(self) -> usize {
        match self {
            Block::Control => 0,
            Block::Target => 1,
            Block::Shared => 2,
        }
    }

    pub fn code_blocks() -> [Block; 2] {
        [Block::Control, Block::Target]
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Block::Control => "control",
            Block::Target => "target",
            Block::Shared => "shared",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitInfo {
    pub id: QubitId,
    pub role: Role,
    pub block: Block,
    pub position: usize,
}

/// Placement of the canonical qubits onto device indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalMap {
    /// `assignment[canonical_index]` is the device qubit used for it.
    pub assignment: Vec<usize>,
    /// Device coupling graph.
    pub coupling: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub distance: usize,
    pub qubits: Vec<QubitInfo>,
    pub adjacency: Vec<[QubitId; 2]>,
}

fn ordered(a: usize, b: usize) -> [usize; 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

impl Layout {
    fn block_len(&self) -> usize {
        4 * self.distance - 3
    }

    fn canonical_block_base(&self, block: Block) -> usize {
        match block {
            Block::Control => 0,
            Block::Target => self.block_len(),
            Block::Shared => 2 * self.block_len(),
        }
    }

    pub fn data(&self, block: Block, k: usize) -> QubitId {
        debug_assert!(k < self.distance);
        self.qubits[self.canonical_block_base(block) + 4 * k].id
    }

    pub fn flag(&self, block: Block, j: usize) -> QubitId {
        debug_assert!(j < 2 * (self.distance - 1));
        let k = j / 2;
        self.qubits[self.canonical_block_base(block) + 4 * k + 1 + 2 * (j % 2)].id
    }

    pub fn syndrome(&self, block: Block, k: usize) -> QubitId {
        debug_assert!(k < self.distance - 1);
        self.qubits[self.canonical_block_base(block) + 4 * k + 2].id
    }

    pub fn ancilla(&self, k: usize) -> QubitId {
        debug_assert!(k < self.distance);
        self.qubits[self.canonical_block_base(Block::Shared) + k].id
    }

    pub fn data_qubits(&self, block: Block) -> Vec<QubitId> {
        (0..self.distance).map(|k| self.data(block, k)).collect()
    }

    /// Frame width needed to index every qubit id.
    pub fn width(&self) -> usize {
        self.qubits.iter().map(|q| q.id + 1).max().unwrap_or(0)
    }

    pub fn info(&self, id: QubitId) -> Option<&QubitInfo> {
        self.qubits.iter().find(|q| q.id == id)
    }

    pub fn is_adjacent(&self, a: QubitId, b: QubitId) -> bool {
        self.adjacency.binary_search(&ordered(a, b)).is_ok()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let layout: Layout = serde_json::from_str(s)?;
        let mut expected = canonical_layout(layout.distance);
        let ids: Vec<usize> = layout.qubits.iter().map(|q| q.id).collect();
        relabel(&mut expected, &ids);
        if expected != layout {
            return Err(Error::Schema(
                "layout JSON does not describe the canonical chain structure".into(),
            ));
        }
        Ok(layout)
    }
}

fn canonical_layout(distance: usize) -> Layout {
    let mut qubits = Vec::with_capacity(3 * distance + 6 * (distance - 1));
    for block in Block::code_blocks() {
        for k in 0..distance {
            let mut push = |role, position| {
                qubits.push(QubitInfo {
                    id: qubits.len(),
                    role,
                    block,
                    position,
                })
            };
            push(Role::Data, k);
            if k + 1 < distance {
                push(Role::Flag, 2 * k);
                push(Role::Syndrome, k);
                push(Role::Flag, 2 * k + 1);
            }
        }
    }
    for k in 0..distance {
        qubits.push(QubitInfo {
            id: qubits.len(),
            role: Role::Ancilla,
            block: Block::Shared,
            position: k,
        });
    }
    let block_len = 4 * distance - 3;
    let mut adjacency = Vec::new();
    for b in 0..2 {
        for i in 0..block_len - 1 {
            adjacency.push([b * block_len + i, b * block_len + i + 1]);
        }
    }
    for k in 0..distance {
        let anc = 2 * block_len + k;
        adjacency.push(ordered(4 * k, anc));
        adjacency.push(ordered(block_len + 4 * k, anc));
    }
    adjacency.sort_unstable();
    Layout {
        distance,
        qubits,
        adjacency,
    }
}

fn relabel(layout: &mut Layout, ids: &[usize]) {
    for q in &mut layout.qubits {
        q.id = ids[q.id];
    }
    for e in &mut layout.adjacency {
        *e = ordered(ids[e[0]], ids[e[1]]);
    }
    layout.adjacency.sort_unstable();
}

/// Builds the layout for `spec`, optionally placed onto device qubits.
///
/// Without a map, qubits get sequential ids in canonical order: control
/// chain, target chain, then ancillas.
pub fn build_layout(spec: &CodeSpec, physical_map: Option<&PhysicalMap>) -> Result<Layout> {
    spec.validate()?;
    let mut layout = canonical_layout(spec.distance);
    let Some(map) = physical_map else {
        return Ok(layout);
    };
    let n = layout.qubits.len();
    if map.assignment.len() != n {
        return Err(Error::MapSizeMismatch {
            expected: n,
            got: map.assignment.len(),
        });
    }
    let mut seen = HashSet::new();
    for &p in &map.assignment {
        if !seen.insert(p) {
            return Err(Error::DuplicatePhysicalQubit(p));
        }
    }
    let coupling: BTreeSet<[usize; 2]> = map.coupling.iter().map(|e| ordered(e[0], e[1])).collect();
    for e in &layout.adjacency {
        let pe = ordered(map.assignment[e[0]], map.assignment[e[1]]);
        if !coupling.contains(&pe) {
            return Err(Error::MissingAdjacency(pe[0], pe[1]));
        }
    }
    relabel(&mut layout, &map.assignment);
    Ok(layout)
}
