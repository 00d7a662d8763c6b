//! Text rendering of circuits: one fixed-width row per wire, two-qubit gates
//! drawn with a vertical connector through intermediate wires.

use crate::quantum::{Circuit, Gate};

fn gate_text(gate: &Gate) -> String {
    match &gate.label {
        Some(label) => format!("{}({})", gate.kind.name(), label),
        None => gate.kind.name().to_string(),
    }
}

/// Renders the circuit as `n_qubits` rows. Each gate occupies one column;
/// controls are drawn as `●`, plain targets of CX as `X`, and the span of a
/// two-qubit gate is bridged with `│` on the wires in between.
pub fn draw_text(circuit: &Circuit) -> String {
    let n = circuit.n_qubits;
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); n];
    let push_column = |cells: &mut Vec<Vec<String>>, texts: Vec<(usize, String)>| {
        let width = texts.iter().map(|(_, t)| t.chars().count()).max().unwrap_or(1);
        let mut filled = vec![None; n];
        for (wire, text) in texts {
            filled[wire] = Some(text);
        }
        for (wire, slot) in filled.into_iter().enumerate() {
            let text = slot.unwrap_or_else(|| "─".repeat(width));
            let pad = width - text.chars().count();
            let left = pad / 2;
            let right = pad - left;
            cells[wire].push(format!(
                "─{}{}{}─",
                "─".repeat(left),
                text,
                "─".repeat(right)
            ));
        }
    };

    for gate in &circuit.gates {
        match gate.wires.len() {
            1 => push_column(&mut cells, vec![(gate.wires[0], gate_text(gate))]),
            2 => {
                let (ctrl, tgt) = (gate.wires[0], gate.wires[1]);
                let target_text = match gate.kind {
                    crate::quantum::GateKind::CX => "X".to_string(),
                    crate::quantum::GateKind::CZ => "●".to_string(),
                    _ => gate_text(gate),
                };
                let mut texts = vec![(ctrl, "●".to_string()), (tgt, target_text)];
                let (lo, hi) = (ctrl.min(tgt), ctrl.max(tgt));
                for wire in (lo + 1)..hi {
                    texts.push((wire, "│".to_string()));
                }
                push_column(&mut cells, texts);
            }
            _ => push_column(
                &mut cells,
                gate.wires.iter().map(|&w| (w, gate_text(gate))).collect(),
            ),
        }
    }

    let mut out = String::new();
    for (wire, row) in cells.iter().enumerate() {
        out.push_str(&format!("q{wire}: ─{}─\n", row.join("")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::ansatz_by_name;
    use crate::quantum::{Gate, GateKind};

    #[test]
    fn single_rx_row() {
        let mut c = Circuit::new(1);
        c.push(Gate::with_angle(GateKind::RX, vec![0], 0.5).labeled("x0"));
        let text = draw_text(&c);
        assert_eq!(text.lines().count(), 1);
        assert!(text.contains("RX(x0)"));
    }

    #[test]
    fn empty_circuit_two_rows() {
        let text = draw_text(&Circuit::new(2));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("q0:"));
        assert!(lines[1].starts_with("q1:"));
    }

    #[test]
    fn sea_layer_has_connector() {
        let a = ansatz_by_name("SEA", 2).unwrap();
        let mut c = Circuit::new(2);
        for g in a.instantiate(&vec![0.1; 6], "t0").unwrap() {
            c.push(g);
        }
        let text = draw_text(&c);
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains('●'));
        assert!(text.contains('X'));
    }

    #[test]
    fn drawing_is_stable() {
        let mut c = Circuit::new(3);
        c.push(Gate::new(GateKind::H, vec![0]));
        c.push(Gate::new(GateKind::CX, vec![0, 2]));
        let a = draw_text(&c);
        let b = draw_text(&c);
        assert_eq!(a, b);
        assert!(a.contains('│')); // wire 1 bridged
    }
}
