//! Gate definitions and matrix constructors.
//!
//! Convention: a rotation about axis A is `RA(phi) = exp(-i phi A / 2)`.
//! Qubit 0 is the most significant bit of the basis index, and within a
//! multi-wire gate the first listed wire is the most significant.

use ndarray::{array, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{QfmError, Result};
use crate::linalg::{c, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    RX,
    RY,
    RZ,
    H,
    X,
    CZ,
    CX,
    CRX,
    CRY,
    CRZ,
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::CZ => "CZ",
            GateKind::CX => "CX",
            GateKind::CRX => "CRX",
            GateKind::CRY => "CRY",
            GateKind::CRZ => "CRZ",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "RX" => Ok(GateKind::RX),
            "RY" => Ok(GateKind::RY),
            "RZ" => Ok(GateKind::RZ),
            "H" => Ok(GateKind::H),
            "X" => Ok(GateKind::X),
            "CZ" => Ok(GateKind::CZ),
            "CX" => Ok(GateKind::CX),
            "CRX" => Ok(GateKind::CRX),
            "CRY" => Ok(GateKind::CRY),
            "CRZ" => Ok(GateKind::CRZ),
            other => Err(QfmError::UnknownGate(other.to_string())),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::H | GateKind::X => 1,
            _ => 2,
        }
    }

    pub fn is_parameterized(&self) -> bool {
        matches!(
            self,
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::CRX | GateKind::CRY | GateKind::CRZ
        )
    }

    /// Gates realizable directly as a single pulse or free evolution.
    pub fn is_basis(&self) -> bool {
        matches!(self, GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::CZ)
    }
}

pub fn rx(phi: f64) -> Array2<C64> {
    let (s, co) = (phi / 2.0).sin_cos();
    array![[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
}

pub fn ry(phi: f64) -> Array2<C64> {
    let (s, co) = (phi / 2.0).sin_cos();
    array![[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
}

pub fn rz(phi: f64) -> Array2<C64> {
    array![
        [c(0.0, -phi / 2.0).exp(), c(0.0, 0.0)],
        [c(0.0, 0.0), c(0.0, phi / 2.0).exp()]
    ]
}

pub fn hadamard() -> Array2<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    array![[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]]
}

pub fn pauli_x() -> Array2<C64> {
    array![[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]
}

pub fn pauli_y() -> Array2<C64> {
    array![[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]
}

pub fn pauli_z() -> Array2<C64> {
    array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]
}

/// Two-qubit controlled-U with the first wire as control.
pub fn controlled(u: &Array2<C64>) -> Array2<C64> {
    let mut m = Array2::zeros((4, 4));
    m[[0, 0]] = c(1.0, 0.0);
    m[[1, 1]] = c(1.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            m[[2 + i, 2 + j]] = u[[i, j]];
        }
    }
    m
}

pub fn cz() -> Array2<C64> {
    controlled(&pauli_z())
}

pub fn cx() -> Array2<C64> {
    controlled(&pauli_x())
}

/// A gate instance in a circuit: kind, wires, and the bound angle for
/// parameterized kinds. `label` carries the parameter provenance used by the
/// text drawer (e.g. `t0:3` for layer 0, slot 3, or `x0` for feature 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub wires: Vec<usize>,
    pub angle: Option<f64>,
    pub label: Option<String>,
}

impl Gate {
    pub fn new(kind: GateKind, wires: Vec<usize>) -> Self {
        Self {
            kind,
            wires,
            angle: None,
            label: None,
        }
    }

    pub fn with_angle(kind: GateKind, wires: Vec<usize>, angle: f64) -> Self {
        Self {
            kind,
            wires,
            angle: Some(angle),
            label: None,
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn matrix(&self) -> Result<Array2<C64>> {
        let angle = || {
            self.angle.ok_or_else(|| {
                QfmError::InvalidParameter(format!("gate {} requires an angle", self.kind.name()))
            })
        };
        Ok(match self.kind {
            GateKind::RX => rx(angle()?),
            GateKind::RY => ry(angle()?),
            GateKind::RZ => rz(angle()?),
            GateKind::H => hadamard(),
            GateKind::X => pauli_x(),
            GateKind::CZ => cz(),
            GateKind::CX => cx(),
            GateKind::CRX => controlled(&rx(angle()?)),
            GateKind::CRY => controlled(&ry(angle()?)),
            GateKind::CRZ => controlled(&rz(angle()?)),
        })
    }

    pub fn to_gate_matrix(&self) -> Result<GateMatrix> {
        GateMatrix::new(self.wires.clone(), self.matrix()?)
    }
}

/// A unitary bound to an ordered set of wires.
#[derive(Debug, Clone)]
pub struct GateMatrix {
    pub wires: Vec<usize>,
    pub matrix: Array2<C64>,
}

impl GateMatrix {
    pub fn new(wires: Vec<usize>, matrix: Array2<C64>) -> Result<Self> {
        let dim = 1usize << wires.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(QfmError::DimensionMismatch {
                expected: dim,
                got: matrix.nrows(),
            });
        }
        let mut sorted = wires.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != wires.len() {
            return Err(QfmError::InvalidParameter(
                "gate wires must be distinct".to_string(),
            ));
        }
        Ok(Self { wires, matrix })
    }
}

/// An ordered gate sequence over a fixed register.
#[derive(Debug, Clone, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    /// Gates that are not in the pulse-native set {RX, RY, RZ, CZ}.
    pub fn non_basis_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| !g.kind.is_basis()).count()
    }
}

/// Embed a k-wire gate into the full 2^n-dimensional unitary, used by the
/// brute-force oracle. Built by direct index arithmetic, independent of the
/// statevector kernel it cross-checks.
pub fn embed_gate(gate: &GateMatrix, n_qubits: usize) -> Result<Array2<C64>> {
    let k = gate.wires.len();
    let dim = 1usize << n_qubits;
    for &w in &gate.wires {
        if w >= n_qubits {
            return Err(QfmError::WireOutOfRange {
                wire: w,
                n_qubits,
            });
        }
    }
    let wire_masks: Vec<usize> = gate.wires.iter().map(|&w| 1 << (n_qubits - 1 - w)).collect();
    let rest_mask: usize = (dim - 1) & !wire_masks.iter().fold(0, |acc, m| acc | m);
    let sub_index = |i: usize| -> usize {
        let mut s = 0;
        for (j, &m) in wire_masks.iter().enumerate() {
            if i & m != 0 {
                s |= 1 << (k - 1 - j);
            }
        }
        s
    };
    let mut out = Array2::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            if i & rest_mask == j & rest_mask {
                out[[i, j]] = gate.matrix[[sub_index(i), sub_index(j)]];
            }
        }
    }
    Ok(out)
}
