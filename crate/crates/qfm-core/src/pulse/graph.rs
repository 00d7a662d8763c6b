//! Composed-gate structure over the pulse-native basis {RX, RY, RZ, CZ}:
//! decomposition into basis sequences, leaf enumeration, and pulse-parameter
//! accounting under shared vs expanded binding.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::f64::consts::PI;

use crate::error::{QfmError, Result};
use crate::quantum::{Gate, GateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Binding {
    /// Repeated basis leaves of one composed gate share a parameter block.
    Shared,
    /// Every leaf instance owns its own block, including redundant copies.
    Expanded,
}

/// Free pulse parameters of one basis gate: rotations expose amplitude
/// scale, width and duration; free-evolution gates expose duration only.
pub fn basis_param_count(kind: GateKind) -> Result<usize> {
    match kind {
        GateKind::RX | GateKind::RY => Ok(3),
        GateKind::RZ | GateKind::CZ => Ok(1),
        other => Err(QfmError::InvalidParameter(format!(
            "{} is not a basis gate",
            other.name()
        ))),
    }
}

/// Rewrites a gate into the equivalent basis-gate sequence, in application
/// order, together with the accumulated global phase: the product of the
/// returned gates equals e^{-i phase} * original (i.e. original = e^{i phase}
/// times the product).
pub fn decompose_to_basis(gate: &Gate) -> Result<(Vec<Gate>, f64)> {
    let angle = || {
        gate.angle.ok_or_else(|| {
            QfmError::InvalidParameter(format!("gate {} requires an angle", gate.kind.name()))
        })
    };
    let q = |i: usize| gate.wires[i];
    match gate.kind {
        GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::CZ => Ok((vec![gate.clone()], 0.0)),
        GateKind::X => Ok((
            vec![Gate::with_angle(GateKind::RX, vec![q(0)], PI)],
            PI / 2.0,
        )),
        GateKind::H => Ok((
            vec![
                Gate::with_angle(GateKind::RZ, vec![q(0)], PI / 2.0),
                Gate::with_angle(GateKind::RX, vec![q(0)], PI / 2.0),
                Gate::with_angle(GateKind::RZ, vec![q(0)], PI / 2.0),
            ],
            PI / 2.0,
        )),
        GateKind::CX => {
            let (ctrl, tgt) = (q(0), q(1));
            let (h1, p1) = decompose_to_basis(&Gate::new(GateKind::H, vec![tgt]))?;
            let (h2, p2) = decompose_to_basis(&Gate::new(GateKind::H, vec![tgt]))?;
            let mut seq = h1;
            seq.push(Gate::new(GateKind::CZ, vec![ctrl, tgt]));
            seq.extend(h2);
            Ok((seq, p1 + p2))
        }
        GateKind::CRY | GateKind::CRZ => {
            let theta = angle()?;
            let (ctrl, tgt) = (q(0), q(1));
            let rot = if gate.kind == GateKind::CRY {
                GateKind::RY
            } else {
                GateKind::RZ
            };
            let mut seq = Vec::new();
            let mut phase = 0.0;
            let (cx1, pa) = decompose_to_basis(&Gate::new(GateKind::CX, vec![ctrl, tgt]))?;
            seq.extend(cx1);
            phase += pa;
            seq.push(Gate::with_angle(rot, vec![tgt], -theta / 2.0));
            let (cx2, pb) = decompose_to_basis(&Gate::new(GateKind::CX, vec![ctrl, tgt]))?;
            seq.extend(cx2);
            phase += pb;
            seq.push(Gate::with_angle(rot, vec![tgt], theta / 2.0));
            Ok((seq, phase))
        }
        GateKind::CRX => {
            let theta = angle()?;
            let (ctrl, tgt) = (q(0), q(1));
            let mut seq = Vec::new();
            let mut phase = 0.0;
            let (h1, p1) = decompose_to_basis(&Gate::new(GateKind::H, vec![tgt]))?;
            seq.extend(h1);
            phase += p1;
            let (mid, p2) =
                decompose_to_basis(&Gate::with_angle(GateKind::CRZ, vec![ctrl, tgt], theta))?;
            seq.extend(mid);
            phase += p2;
            let (h2, p3) = decompose_to_basis(&Gate::new(GateKind::H, vec![tgt]))?;
            seq.extend(h2);
            phase += p3;
            Ok((seq, phase))
        }
    }
}

/// The direct children of a node in the composition graph, with multiplicity
/// encoded by repetition. Basis gates have no children.
pub fn children(kind: GateKind) -> Vec<GateKind> {
    use GateKind::*;
    match kind {
        RX | RY | RZ | CZ => vec![],
        X => vec![RX],
        H => vec![RZ, RX, RZ],
        CX => vec![H, CZ, H],
        CRY => vec![RY, CX, RY, CX],
        CRZ => vec![RZ, CX, RZ, CX],
        CRX => vec![H, CRZ, H],
    }
}

/// Basis-leaf sequence of a composed gate in execution order (abstract, with
/// wires and angles unresolved).
pub fn expand_composed(kind: GateKind) -> Vec<GateKind> {
    if children(kind).is_empty() {
        return vec![kind];
    }
    // Use the angle-level decomposition for the concrete order.
    let gate = if kind.is_parameterized() {
        Gate::with_angle(kind, probe_wires(kind), 0.5)
    } else {
        Gate::new(kind, probe_wires(kind))
    };
    decompose_to_basis(&gate)
        .expect("static decomposition")
        .0
        .iter()
        .map(|g| g.kind)
        .collect()
}

fn probe_wires(kind: GateKind) -> Vec<usize> {
    if kind.arity() == 1 {
        vec![0]
    } else {
        vec![0, 1]
    }
}

fn leaf_kinds(kind: GateKind, out: &mut Vec<GateKind>) {
    let ch = children(kind);
    if ch.is_empty() {
        out.push(kind);
    } else {
        for c in ch {
            leaf_kinds(c, out);
        }
    }
}

/// Number of free pulse parameters a gate exposes: under expanded binding
/// every leaf instance counts; under shared binding each distinct basis kind
/// counts once.
pub fn pulse_param_count(kind: GateKind, binding: Binding) -> Result<usize> {
    let mut leaves = Vec::new();
    leaf_kinds(kind, &mut leaves);
    match binding {
        Binding::Expanded => leaves.iter().map(|&k| basis_param_count(k)).sum(),
        Binding::Shared => {
            let mut total = 0;
            let mut seen = BTreeSet::new();
            for &k in &leaves {
                if seen.insert(k.name()) {
                    total += basis_param_count(k)?;
                }
            }
            Ok(total)
        }
    }
}

/// Total pulse-parameter count of a circuit under the given binding: shared
/// binding pools parameters per basis kind globally; expanded counts every
/// leaf instance of every gate.
pub fn circuit_param_count(circuit: &crate::quantum::Circuit, binding: Binding) -> Result<usize> {
    match binding {
        Binding::Expanded => {
            let mut total = 0;
            for g in &circuit.gates {
                total += pulse_param_count(g.kind, Binding::Expanded)?;
            }
            Ok(total)
        }
        Binding::Shared => {
            let mut seen = BTreeSet::new();
            let mut total = 0;
            for g in &circuit.gates {
                let mut leaves = Vec::new();
                leaf_kinds(g.kind, &mut leaves);
                for k in leaves {
                    if seen.insert(k.name()) {
                        total += basis_param_count(k)?;
                    }
                }
            }
            Ok(total)
        }
    }
}
