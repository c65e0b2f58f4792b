//! Pauli operators, Pauli frames, and their conjugation by Clifford gates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::circuit::{Gate, Instruction};
use crate::layout::QubitId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    #[inline]
    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    #[inline]
    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// A Pauli operator up to phase, stored as X and Z bit masks.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PauliFrame {
    pub x_mask: BitVec,
    pub z_mask: BitVec,
}

impl PauliFrame {
    pub fn identity(width: usize) -> Self {
        Self {
            x_mask: BitVec::zeros(width),
            z_mask: BitVec::zeros(width),
        }
    }

    pub fn width(&self) -> usize {
        self.x_mask.len()
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask.is_zero() && self.z_mask.is_zero()
    }

    pub fn get(&self, q: QubitId) -> Pauli {
        Pauli::from_bits(self.x_mask.get(q), self.z_mask.get(q))
    }

    /// Multiplies `p` onto qubit `q` (phases ignored).
    pub fn apply(&mut self, q: QubitId, p: Pauli) {
        if p.has_x() {
            self.x_mask.toggle(q);
        }
        if p.has_z() {
            self.z_mask.toggle(q);
        }
    }

    pub fn compose(&mut self, other: &PauliFrame) {
        self.x_mask.xor_assign(&other.x_mask);
        self.z_mask.xor_assign(&other.z_mask);
    }

    /// Conjugates the frame in place by the ideal gate of `instr`.
    pub fn propagate(&mut self, instr: &Instruction) {
        match instr.gate {
            Gate::H(q) => {
                let (x, z) = (self.x_mask.get(q), self.z_mask.get(q));
                self.x_mask.set(q, z);
                self.z_mask.set(q, x);
            }
            Gate::Cnot(c, t) => {
                if self.x_mask.get(c) {
                    self.x_mask.toggle(t);
                }
                if self.z_mask.get(t) {
                    self.z_mask.toggle(c);
                }
            }
            Gate::Cz(a, b) => {
                let (xa, xb) = (self.x_mask.get(a), self.x_mask.get(b));
                if xa {
                    self.z_mask.toggle(b);
                }
                if xb {
                    self.z_mask.toggle(a);
                }
            }
            Gate::ResetZ(q) => {
                self.x_mask.set(q, false);
                self.z_mask.set(q, false);
            }
            Gate::X(_) | Gate::MeasureZ { .. } | Gate::Idle { .. } => {}
        }
    }
}

/// Returns `frame` conjugated by the ideal gate of `instr`.
pub fn propagate_frame(frame: &PauliFrame, instr: &Instruction) -> PauliFrame {
    let mut out = frame.clone();
    out.propagate(instr);
    out
}

/// 64 Pauli frames processed in parallel, one per bit lane.
///
/// `x[q]` and `z[q]` hold lane bits for qubit `q`.
#[derive(Clone, Debug)]
pub struct FrameBatch {
    pub x: Vec<u64>,
    pub z: Vec<u64>,
}

impl FrameBatch {
    pub fn new(width: usize) -> Self {
        Self {
            x: vec![0; width],
            z: vec![0; width],
        }
    }

    pub fn clear(&mut self) {
        self.x.fill(0);
        self.z.fill(0);
    }

    #[inline]
    pub fn h(&mut self, q: usize) {
        std::mem::swap(&mut self.x[q], &mut self.z[q]);
    }

    #[inline]
    pub fn cnot(&mut self, c: usize, t: usize) {
        self.x[t] ^= self.x[c];
        self.z[c] ^= self.z[t];
    }

    #[inline]
    pub fn cz(&mut self, a: usize, b: usize) {
        self.z[b] ^= self.x[a];
        self.z[a] ^= self.x[b];
    }

    #[inline]
    pub fn reset(&mut self, q: usize) {
        self.x[q] = 0;
        self.z[q] = 0;
    }

    /// Applies `p` to qubit `q` on the lanes selected by `lanes`.
    #[inline]
    pub fn apply(&mut self, q: usize, p: Pauli, lanes: u64) {
        if p.has_x() {
            self.x[q] ^= lanes;
        }
        if p.has_z() {
            self.z[q] ^= lanes;
        }
    }

    pub fn gate(&mut self, gate: &Gate) {
        match *gate {
            Gate::H(q) => self.h(q),
            Gate::Cnot(c, t) => self.cnot(c, t),
            Gate::Cz(a, b) => self.cz(a, b),
            Gate::ResetZ(q) => self.reset(q),
            Gate::X(_) | Gate::MeasureZ { .. } | Gate::Idle { .. } => {}
        }
    }
}
