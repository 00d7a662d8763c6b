//! Variational layer construction: blocks (single-qubit gate template plus an
//! optional entangler over a topology), a registry of named ansätze, and
//! parameter-shape accounting.

use serde::{Deserialize, Serialize};

use crate::error::{QfmError, Result};
use crate::quantum::{Gate, GateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    Linear,
    Ring,
    AllToAll,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub kind: TopologyKind,
    /// Ordered (control, target) pairs; only consulted for `Custom`.
    #[serde(default)]
    pub pairs: Vec<(usize, usize)>,
}

impl Topology {
    pub fn linear() -> Self {
        Self {
            kind: TopologyKind::Linear,
            pairs: Vec::new(),
        }
    }

    pub fn ring() -> Self {
        Self {
            kind: TopologyKind::Ring,
            pairs: Vec::new(),
        }
    }

    pub fn all_to_all() -> Self {
        Self {
            kind: TopologyKind::AllToAll,
            pairs: Vec::new(),
        }
    }

    pub fn custom(pairs: Vec<(usize, usize)>) -> Self {
        Self {
            kind: TopologyKind::Custom,
            pairs,
        }
    }

    /// Concrete (control, target) pairs for a register of `n_qubits`.
    pub fn resolve(&self, n_qubits: usize) -> Result<Vec<(usize, usize)>> {
        if n_qubits < 2 {
            return Err(QfmError::InvalidParameter(format!(
                "two-qubit topology requires n >= 2, got {n_qubits}"
            )));
        }
        let pairs = match self.kind {
            TopologyKind::Linear => (0..n_qubits - 1).map(|i| (i, i + 1)).collect(),
            TopologyKind::Ring => {
                let mut p: Vec<_> = (0..n_qubits - 1).map(|i| (i, i + 1)).collect();
                p.push((n_qubits - 1, 0));
                p
            }
            TopologyKind::AllToAll => {
                let mut p = Vec::new();
                for i in 0..n_qubits {
                    for j in (i + 1)..n_qubits {
                        p.push((i, j));
                    }
                }
                p
            }
            TopologyKind::Custom => self.pairs.clone(),
        };
        for &(a, b) in &pairs {
            if a == b {
                return Err(QfmError::InvalidParameter(format!(
                    "topology contains self-pair ({a}, {b})"
                )));
            }
            if a >= n_qubits || b >= n_qubits {
                return Err(QfmError::WireOutOfRange {
                    wire: a.max(b),
                    n_qubits,
                });
            }
        }
        Ok(pairs)
    }
}

/// Standalone form of [`Topology::resolve`] keyed by kind name.
pub fn resolve_topology(kind: TopologyKind, n_qubits: usize) -> Result<Vec<(usize, usize)>> {
    Topology {
        kind,
        pairs: Vec::new(),
    }
    .resolve(n_qubits)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entangler {
    pub gate: GateKind,
    pub topology: Topology,
}

/// One sub-column of a variational layer: a single-qubit gate template applied
/// to every qubit, optionally followed by entanglers over a topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub single_qubit_gates: Vec<GateKind>,
    pub entangler: Option<Entangler>,
}

impl Block {
    pub fn new(single_qubit_gates: Vec<GateKind>, entangler: Option<Entangler>) -> Result<Self> {
        for g in &single_qubit_gates {
            if g.arity() != 1 {
                return Err(QfmError::InvalidParameter(format!(
                    "{} is not a single-qubit gate",
                    g.name()
                )));
            }
        }
        if let Some(e) = &entangler {
            if e.gate.arity() != 2 {
                return Err(QfmError::InvalidParameter(format!(
                    "{} is not a two-qubit entangler",
                    e.gate.name()
                )));
            }
        }
        Ok(Self {
            single_qubit_gates,
            entangler,
        })
    }

    fn rotations_per_qubit(&self) -> usize {
        self.single_qubit_gates
            .iter()
            .filter(|g| g.is_parameterized())
            .count()
    }

    fn params(&self, n_qubits: usize) -> Result<usize> {
        let mut k = n_qubits * self.rotations_per_qubit();
        if let Some(e) = &self.entangler {
            if e.gate.is_parameterized() {
                k += e.topology.resolve(n_qubits)?.len();
            }
        }
        Ok(k)
    }
}

/// One variational layer template, instantiated per register size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ansatz {
    pub name: String,
    pub n_qubits: usize,
    pub blocks: Vec<Block>,
    pub params_per_layer: usize,
}

impl Ansatz {
    pub fn new(name: impl Into<String>, n_qubits: usize, blocks: Vec<Block>) -> Result<Self> {
        let mut k = 0;
        for b in &blocks {
            k += b.params(n_qubits)?;
        }
        Ok(Self {
            name: name.into(),
            n_qubits,
            blocks,
            params_per_layer: k,
        })
    }

    /// Gate sequence of one layer, consuming exactly `params_per_layer`
    /// values. Single-qubit gates are emitted qubit-major (all gates of
    /// qubit 0, then qubit 1, ...), then entanglers in topology order; that
    /// order defines the parameter slot indices. `label_prefix` tags the gate
    /// labels for drawing (e.g. "t0" for trainable layer 0).
    pub fn instantiate(&self, layer_params: &[f64], label_prefix: &str) -> Result<Vec<Gate>> {
        if layer_params.len() != self.params_per_layer {
            return Err(QfmError::WrongParamCount {
                name: self.name.clone(),
                expected: self.params_per_layer,
                got: layer_params.len(),
            });
        }
        let mut gates = Vec::new();
        let mut slot = 0usize;
        let take = |slot: &mut usize| {
            let v = layer_params[*slot];
            let s = *slot;
            *slot += 1;
            (v, s)
        };
        for block in &self.blocks {
            for q in 0..self.n_qubits {
                for kind in &block.single_qubit_gates {
                    if kind.is_parameterized() {
                        let (v, s) = take(&mut slot);
                        gates.push(
                            Gate::with_angle(*kind, vec![q], v)
                                .labeled(format!("{label_prefix}:{s}")),
                        );
                    } else {
                        gates.push(Gate::new(*kind, vec![q]));
                    }
                }
            }
            if let Some(e) = &block.entangler {
                for (ctrl, tgt) in e.topology.resolve(self.n_qubits)? {
                    if e.gate.is_parameterized() {
                        let (v, s) = take(&mut slot);
                        gates.push(
                            Gate::with_angle(e.gate, vec![ctrl, tgt], v)
                                .labeled(format!("{label_prefix}:{s}")),
                        );
                    } else {
                        gates.push(Gate::new(e.gate, vec![ctrl, tgt]));
                    }
                }
            }
        }
        debug_assert_eq!(slot, self.params_per_layer);
        Ok(gates)
    }
}

/// Names the registry resolves. "C20" is listed but intentionally undefined.
pub const REGISTRY_NAMES: &[&str] = &[
    "Idle", "NEA", "SEA", "HEA", "C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9", "C10",
    "C11", "C12", "C13", "C14", "C15", "C16", "C17", "C18", "C19",
];

fn block(gates: &[GateKind], entangler: Option<Entangler>) -> Block {
    Block::new(gates.to_vec(), entangler).expect("static block definition")
}

fn ent(gate: GateKind, topology: Topology) -> Option<Entangler> {
    Some(Entangler { gate, topology })
}

/// Block layout per registered name. The Sim-et-al. family C1..C19 is kept as
/// data so the registry can be extended without code changes.
fn registry_blocks(name: &str) -> Option<Vec<Block>> {
    use GateKind::*;
    let blocks = match name {
        // No-op layer: useful as a zero-expressibility anchor.
        "Idle" => vec![block(&[], None)],
        "NEA" => vec![block(&[RX, RY, RZ], None)],
        "SEA" => vec![block(&[RZ, RY, RZ], ent(CX, Topology::ring()))],
        "HEA" => vec![block(&[RY, RZ], ent(CX, Topology::linear()))],
        "C1" => vec![block(&[RX, RZ], None)],
        "C2" => vec![block(&[RX, RZ], ent(CX, Topology::linear()))],
        "C3" => vec![block(&[RX, RZ], ent(CRZ, Topology::linear()))],
        "C4" => vec![block(&[RX, RZ], ent(CRX, Topology::linear()))],
        "C5" => vec![
            block(&[RX, RZ], ent(CRZ, Topology::all_to_all())),
            block(&[RX, RZ], None),
        ],
        "C6" => vec![
            block(&[RX, RZ], ent(CRX, Topology::all_to_all())),
            block(&[RX, RZ], None),
        ],
        "C7" => vec![
            block(&[RX, RZ], ent(CRZ, Topology::linear())),
            block(&[RX, RZ], None),
        ],
        "C8" => vec![
            block(&[RX, RZ], ent(CRX, Topology::linear())),
            block(&[RX, RZ], None),
        ],
        "C9" => vec![block(&[H], ent(CZ, Topology::linear())), block(&[RX], None)],
        "C10" => vec![block(&[RY], ent(CZ, Topology::ring()))],
        "C11" => vec![
            block(&[RY, RZ], ent(CX, Topology::linear())),
            block(&[RY, RZ], None),
        ],
        "C12" => vec![
            block(&[RY, RZ], ent(CZ, Topology::linear())),
            block(&[RY, RZ], None),
        ],
        "C13" => vec![
            block(&[RY], ent(CRZ, Topology::ring())),
            block(&[RY], ent(CRZ, Topology::ring())),
        ],
        "C14" => vec![
            block(&[RY], ent(CRX, Topology::ring())),
            block(&[RY], ent(CRX, Topology::ring())),
        ],
        "C15" => vec![
            block(&[RY], ent(CX, Topology::ring())),
            block(&[RY], ent(CX, Topology::ring())),
        ],
        "C16" => vec![block(&[RX, RZ], ent(CRZ, Topology::linear()))],
        "C17" => vec![block(&[RX, RZ], ent(CRX, Topology::linear()))],
        "C18" => vec![block(&[RX, RZ], ent(CRZ, Topology::ring()))],
        "C19" => vec![block(&[RX, RZ], ent(CRX, Topology::ring()))],
        _ => return None,
    };
    Some(blocks)
}

/// Looks up a named ansatz for a register size.
pub fn ansatz_by_name(name: &str, n_qubits: usize) -> Result<Ansatz> {
    match registry_blocks(name) {
        Some(blocks) => Ansatz::new(name, n_qubits, blocks),
        None => Err(QfmError::UnknownAnsatz(if name == "C20" {
            // Reserved identifier without a published definition.
            "C20 is reserved but has no definition".to_string()
        } else {
            name.to_string()
        })),
    }
}

/// (rows, cols) of the trainable parameter array: L variational layers plus
/// one final trainable layer, each consuming K values.
pub fn param_shape(name: &str, n_qubits: usize, n_layers: usize) -> Result<(usize, usize)> {
    if n_qubits < 1 || n_layers < 1 {
        return Err(QfmError::InvalidParameter(format!(
            "param_shape requires n >= 1 and L >= 1, got n={n_qubits}, L={n_layers}"
        )));
    }
    let ansatz = ansatz_by_name(name, n_qubits)?;
    Ok((n_layers + 1, ansatz.params_per_layer))
}

/// JSON block description for user-defined ansätze: an array of
/// `{gates, entangler, topology, pairs?}` objects.
#[derive(Debug, Clone, Deserialize)]
pub struct CustomBlockSpec {
    pub gates: Vec<String>,
    #[serde(default)]
    pub entangler: Option<String>,
    #[serde(default)]
    pub topology: Option<String>,
    #[serde(default)]
    pub pairs: Option<Vec<(usize, usize)>>,
}

pub fn ansatz_from_blocks_json(name: &str, json: &str, n_qubits: usize) -> Result<Ansatz> {
    let specs: Vec<CustomBlockSpec> = serde_json::from_str(json)
        .map_err(|e| QfmError::InvalidConfig(format!("ansatz block description: {e}")))?;
    let mut blocks = Vec::new();
    for spec in specs {
        let gates: Result<Vec<GateKind>> =
            spec.gates.iter().map(|g| GateKind::parse(g)).collect();
        let entangler = match spec.entangler {
            None => None,
            Some(gname) => {
                let gate = GateKind::parse(&gname)?;
                let topology = match spec.topology.as_deref() {
                    None | Some("linear") => Topology::linear(),
                    Some("ring") => Topology::ring(),
                    Some("all_to_all") => Topology::all_to_all(),
                    Some("custom") => Topology::custom(spec.pairs.clone().unwrap_or_default()),
                    Some(other) => {
                        return Err(QfmError::InvalidConfig(format!(
                            "unknown topology '{other}'"
                        )))
                    }
                };
                Some(Entangler { gate, topology })
            }
        };
        blocks.push(Block::new(gates?, entangler)?);
    }
    Ansatz::new(name, n_qubits, blocks)
}
