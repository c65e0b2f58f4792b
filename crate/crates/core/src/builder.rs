//! Construction of the memory experiment: data preparation, `R` extraction
//! rounds, the ancilla-mediated transversal CNOT, `R` more rounds, readout.

use crate::circuit::{Circuit, CircuitWriter, Gate, RecordInfo, RecordRole};
use crate::error::Result;
use crate::layout::{Basis, Block, CodeSpec, Layout, LogicalState};

/// Nominal duration attached to data-qubit idles during a measurement layer.
pub const MEASURE_IDLE_NS: f64 = 1244.44;

fn bridge(basis: Basis, flag: usize, data: usize) -> Gate {
    match basis {
        Basis::Z => Gate::Cz(flag, data),
        Basis::X => Gate::Cnot(flag, data),
    }
}

/// Emits one extraction round on `blocks` in shared layers.
fn emit_round(
    w: &mut CircuitWriter,
    spec: &CodeSpec,
    layout: &Layout,
    blocks: &[Block],
    round: usize,
) {
    let d = spec.distance;
    let checks = d - 1;
    let basis = spec.basis;
    for &b in blocks {
        for k in 0..checks {
            w.gate(Gate::ResetZ(layout.syndrome(b, k)));
            w.gate(Gate::ResetZ(layout.flag(b, 2 * k)));
            w.gate(Gate::ResetZ(layout.flag(b, 2 * k + 1)));
        }
    }
    w.end_layer();
    for &b in blocks {
        for k in 0..checks {
            w.gate(Gate::H(layout.syndrome(b, k)));
        }
    }
    w.end_layer();
    for &b in blocks {
        for k in 0..checks {
            w.gate(Gate::Cnot(layout.syndrome(b, k), layout.flag(b, 2 * k)));
        }
    }
    w.end_layer();
    for &b in blocks {
        for k in 0..checks {
            w.gate(bridge(basis, layout.flag(b, 2 * k), layout.data(b, k)));
            w.gate(Gate::Cnot(layout.syndrome(b, k), layout.flag(b, 2 * k + 1)));
        }
    }
    w.end_layer();
    for &b in blocks {
        for k in 0..checks {
            w.gate(bridge(
                basis,
                layout.flag(b, 2 * k + 1),
                layout.data(b, k + 1),
            ));
            w.gate(Gate::Cnot(layout.syndrome(b, k), layout.flag(b, 2 * k)));
        }
    }
    w.end_layer();
    for &b in blocks {
        for k in 0..checks {
            w.gate(Gate::Cnot(layout.syndrome(b, k), layout.flag(b, 2 * k + 1)));
        }
    }
    w.end_layer();
    for &b in blocks {
        for k in 0..checks {
            w.gate(Gate::H(layout.syndrome(b, k)));
        }
    }
    w.end_layer();
    for &b in blocks {
        for k in 0..checks {
            let rec = |qubit, role, index| RecordInfo {
                qubit,
                round,
                role,
                block: b,
                index,
            };
            w.measure(rec(layout.syndrome(b, k), RecordRole::Syndrome, k));
            w.measure(rec(layout.flag(b, 2 * k), RecordRole::Flag, 2 * k));
            w.measure(rec(layout.flag(b, 2 * k + 1), RecordRole::Flag, 2 * k + 1));
        }
    }
    for &b in blocks {
        for k in 0..d {
            w.gate(Gate::Idle {
                qubit: layout.data(b, k),
                duration_ns: MEASURE_IDLE_NS,
            });
        }
    }
    w.end_layer();
}

fn emit_transversal_cnot(w: &mut CircuitWriter, layout: &Layout) {
    let d = layout.distance;
    for k in 0..d {
        w.gate(Gate::ResetZ(layout.ancilla(k)));
    }
    w.end_layer();
    for k in 0..d {
        w.gate(Gate::Cnot(
            layout.data(Block::Control, k),
            layout.ancilla(k),
        ));
    }
    w.end_layer();
    for k in 0..d {
        w.gate(Gate::Cnot(layout.ancilla(k), layout.data(Block::Target, k)));
    }
    w.end_layer();
    for k in 0..d {
        w.gate(Gate::Cnot(
            layout.data(Block::Control, k),
            layout.ancilla(k),
        ));
    }
    w.end_layer();
}

/// One eight-layer extraction round on a single block, records tagged round 1.
pub fn build_extraction_round(spec: &CodeSpec, layout: &Layout, block: Block) -> Result<Circuit> {
    spec.validate()?;
    let mut w = CircuitWriter::default();
    emit_round(&mut w, spec, layout, &[block], 1);
    Ok(w.finish(*spec, layout.clone()))
}

/// The four-layer ancilla-mediated transversal CNOT.
pub fn build_transversal_cnot(spec: &CodeSpec, layout: &Layout) -> Result<Circuit> {
    spec.validate()?;
    let mut w = CircuitWriter::default();
    emit_transversal_cnot(&mut w, layout);
    Ok(w.finish(*spec, layout.clone()))
}

pub fn build_memory_experiment(spec: &CodeSpec, layout: &Layout) -> Result<Circuit> {
    spec.validate()?;
    let d = spec.distance;
    let blocks = Block::code_blocks();
    let bits = spec.initial_state.bits();
    let mut w = CircuitWriter::default();

    for b in blocks {
        for q in layout.data_qubits(b) {
            w.gate(Gate::ResetZ(q));
        }
    }
    w.end_layer();
    for b in blocks {
        if bits[b.index()] {
            for q in layout.data_qubits(b) {
                w.gate(Gate::X(q));
            }
        }
    }
    w.end_layer();
    if spec.basis == Basis::X {
        for b in blocks {
            for q in layout.data_qubits(b) {
                w.gate(Gate::H(q));
            }
        }
        w.end_layer();
    }

    for r in 1..=spec.rounds {
        emit_round(&mut w, spec, layout, &blocks, r);
    }
    emit_transversal_cnot(&mut w, layout);
    for r in spec.rounds + 1..=2 * spec.rounds {
        emit_round(&mut w, spec, layout, &blocks, r);
    }

    if spec.basis == Basis::X {
        for b in blocks {
            for q in layout.data_qubits(b) {
                w.gate(Gate::H(q));
            }
        }
        w.end_layer();
    }
    for b in blocks {
        for k in 0..d {
            w.measure(RecordInfo {
                qubit: layout.data(b, k),
                round: 2 * spec.rounds + 1,
                role: RecordRole::Data,
                block: b,
                index: k,
            });
        }
    }
    w.end_layer();
    Ok(w.finish(*spec, layout.clone()))
}

/// Logical output of an ideal CNOT applied to `input`.
pub fn ideal_output_state(input: LogicalState) -> LogicalState {
    let (c, t) = (input.control, input.target);
    match input.basis {
        Basis::Z => LogicalState::new(Basis::Z, c, c ^ t),
        Basis::X => LogicalState::new(Basis::X, c ^ t, t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{build_layout, Role};
    use crate::pauli::{Pauli, PauliFrame};

    fn spec(d: usize, r: usize, state: &str) -> CodeSpec {
        CodeSpec::new(d, r, state.parse().unwrap()).unwrap()
    }

    fn experiment(d: usize, r: usize, state: &str) -> Circuit {
        let s = spec(d, r, state);
        build_memory_experiment(&s, &build_layout(&s, None).unwrap()).unwrap()
    }

    #[test]
    fn extraction_round_counts() {
        let s = spec(3, 1, "00");
        let l = build_layout(&s, None).unwrap();
        let c = build_extraction_round(&s, &l, Block::Control).unwrap();
        assert_eq!(c.layer_count(), 8);
        assert_eq!(c.record_count(), 6);
        // four CNOTs on the flag chain plus two bridges per check
        assert_eq!(c.two_qubit_gate_count(), 12);
        c.validate().unwrap();
    }

    #[test]
    fn bases_differ_only_in_bridge_kind() {
        let z = spec(5, 1, "00");
        let x = spec(5, 1, "++");
        let l = build_layout(&z, None).unwrap();
        let cz = build_extraction_round(&z, &l, Block::Target).unwrap();
        let cx = build_extraction_round(&x, &l, Block::Target).unwrap();
        assert_eq!(cz.instructions.len(), cx.instructions.len());
        let mut diffs = 0;
        for (a, b) in cz.instructions.iter().zip(&cx.instructions) {
            if a != b {
                diffs += 1;
                match (a.gate, b.gate) {
                    (Gate::Cz(f, d1), Gate::Cnot(f2, d2)) => {
                        assert_eq!((f, d1), (f2, d2));
                        assert_eq!(l.info(f).unwrap().role, Role::Flag);
                        assert_eq!(l.info(d1).unwrap().role, Role::Data);
                    }
                    other => panic!("unexpected difference {other:?}"),
                }
            }
        }
        assert_eq!(diffs, 2 * 4);
    }

    #[test]
    fn experiment_record_layout() {
        for (d, r) in [(3, 1), (5, 2), (7, 5)] {
            let c = experiment(d, r, "01");
            c.validate().unwrap();
            for round in 1..=2 * r {
                for b in Block::code_blocks() {
                    let n = c
                        .records
                        .iter()
                        .filter(|x| x.round == round && x.block == b && x.role != RecordRole::Data)
                        .count();
                    assert_eq!(n, 3 * (d - 1));
                }
            }
            let data = c.record_slots(|x| x.role == RecordRole::Data);
            assert_eq!(data.len(), 2 * d);
            assert_eq!(
                data,
                ((c.record_count() - 2 * d)..c.record_count()).collect::<Vec<_>>()
            );
            assert!(c.records.windows(2).all(|w| w[0].round <= w[1].round));
        }
    }

    #[test]
    fn d3_r1_counts() {
        let c = experiment(3, 1, "00");
        let syn_flag = c
            .records
            .iter()
            .filter(|x| x.role != RecordRole::Data)
            .count();
        // two rounds, two blocks, three records per check
        assert_eq!(syn_flag, 24);
        assert_eq!(c.record_count() - syn_flag, 6);
    }

    #[test]
    fn r5_has_ten_rounds_and_cnot_in_the_middle() {
        let c = experiment(3, 5, "10");
        let rounds: std::collections::BTreeSet<_> = c
            .records
            .iter()
            .filter(|x| x.role != RecordRole::Data)
            .map(|x| x.round)
            .collect();
        assert_eq!(rounds.len(), 10);
        let l = &c.layout;
        let cnot_layer = c
            .instructions
            .iter()
            .find(|i| i.gate == Gate::Cnot(l.ancilla(0), l.data(Block::Target, 0)))
            .unwrap()
            .layer;
        let last_r5 = c
            .instructions
            .iter()
            .filter(|i| matches!(i.gate, Gate::MeasureZ { slot, .. } if c.records[slot].round == 5))
            .map(|i| i.layer)
            .max()
            .unwrap();
        let first_r6 = c
            .instructions
            .iter()
            .filter(|i| matches!(i.gate, Gate::MeasureZ { slot, .. } if c.records[slot].round == 6))
            .map(|i| i.layer)
            .min()
            .unwrap();
        assert!(last_r5 < cnot_layer && cnot_layer < first_r6);
    }

    #[test]
    fn x_basis_minus_minus_structure() {
        let c = experiment(3, 1, "--");
        let l = &c.layout;
        let first_layers: Vec<_> = c.layers().into_iter().take(3).collect();
        assert!(first_layers[0]
            .iter()
            .all(|i| matches!(i.gate, Gate::ResetZ(_))));
        assert!(first_layers[1].iter().all(|i| matches!(i.gate, Gate::X(_))));
        assert_eq!(first_layers[1].len(), 6);
        assert!(first_layers[2].iter().all(|i| matches!(i.gate, Gate::H(_))));
        assert!(c
            .instructions
            .iter()
            .any(|i| i.gate == Gate::Cnot(l.flag(Block::Control, 0), l.data(Block::Control, 0))));
        assert!(!c
            .instructions
            .iter()
            .any(|i| matches!(i.gate, Gate::Cz(..))));
        let layers = c.layers();
        let before_final = layers[layers.len() - 2];
        assert!(before_final.iter().all(|i| matches!(i.gate, Gate::H(_))));
        assert_eq!(before_final.len(), 6);
    }

    /// Propagates through `c`, then drops Z on ancillas: they end in |0>,
    /// where Z acts trivially.
    fn propagate_all(c: &Circuit, frame: &mut PauliFrame) {
        for i in &c.instructions {
            frame.propagate(i);
        }
        for k in 0..c.layout.distance {
            frame.z_mask.set(c.layout.ancilla(k), false);
        }
    }

    #[test]
    fn transversal_cnot_spreads_x_forward_and_z_backward() {
        let s = spec(5, 1, "00");
        let l = build_layout(&s, None).unwrap();
        let c = build_transversal_cnot(&s, &l).unwrap();
        assert_eq!(c.layer_count(), 4);
        for k in 0..5 {
            let mut f = PauliFrame::identity(l.width());
            f.apply(l.data(Block::Control, k), Pauli::X);
            propagate_all(&c, &mut f);
            let mut want = PauliFrame::identity(l.width());
            want.apply(l.data(Block::Control, k), Pauli::X);
            want.apply(l.data(Block::Target, k), Pauli::X);
            assert_eq!(f, want);
            assert!(!f.x_mask.get(l.ancilla(k)));

            let mut f = PauliFrame::identity(l.width());
            f.apply(l.data(Block::Target, k), Pauli::Z);
            propagate_all(&c, &mut f);
            let mut want = PauliFrame::identity(l.width());
            want.apply(l.data(Block::Control, k), Pauli::Z);
            want.apply(l.data(Block::Target, k), Pauli::Z);
            assert_eq!(f, want);
        }
        let mut f = PauliFrame::identity(l.width());
        propagate_all(&c, &mut f);
        assert!(f.is_identity());
    }

    #[test]
    fn transversal_cnot_maps_logical_operators() {
        let s = spec(7, 1, "00");
        let l = build_layout(&s, None).unwrap();
        let c = build_transversal_cnot(&s, &l).unwrap();
        let logical = |blocks: &[Block], p: Pauli| {
            let mut f = PauliFrame::identity(l.width());
            for &b in blocks {
                for q in l.data_qubits(b) {
                    f.apply(q, p);
                }
            }
            f
        };
        let mut f = logical(&[Block::Control], Pauli::X);
        propagate_all(&c, &mut f);
        assert_eq!(f, logical(&[Block::Control, Block::Target], Pauli::X));
        let mut f = logical(&[Block::Target], Pauli::Z);
        propagate_all(&c, &mut f);
        assert_eq!(f, logical(&[Block::Control, Block::Target], Pauli::Z));
        let mut f = logical(&[Block::Target], Pauli::X);
        propagate_all(&c, &mut f);
        assert_eq!(f, logical(&[Block::Target], Pauli::X));
    }

    #[test]
    fn ideal_truth_tables() {
        let cases = [
            ("00", "00"),
            ("01", "01"),
            ("10", "11"),
            ("11", "10"),
            ("++", "++"),
            ("+-", "--"),
            ("-+", "-+"),
            ("--", "+-"),
        ];
        for (i, o) in cases {
            assert_eq!(
                ideal_output_state(i.parse().unwrap()),
                o.parse().unwrap(),
                "{i}"
            );
        }
    }
}
