//! Calibration records and circuit-to-schedule compilation.
//!
//! A calibration maps each basis gate to an envelope shape and a small set of
//! named pulse parameters. Rotations (RX, RY) are driven pulses whose
//! amplitude scales linearly with the angle; RZ and CZ are free evolution
//! plus frame-tracked virtual phases.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{QfmError, Result};
use crate::quantum::{Circuit, Gate, GateKind};

use super::envelope::{Carrier, Envelope, EnvelopeKind};
use super::graph::decompose_to_basis;
use super::hamiltonian::HamiltonianSpec;
use super::schedule::{Channel, PhaseEvent, Schedule, Segment};

pub const CALIBRATION_SCHEMA_VERSION: u32 = 1;

/// Per-gate residuals over the validation angle sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateMetrics {
    pub d_abs_mean: f64,
    pub d_abs_std: f64,
    pub d_phase_mean: f64,
    pub d_phase_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateCalibration {
    pub envelope_kind: EnvelopeKind,
    /// Named pulse parameters; rotations use A_scale / sigma / duration,
    /// free-evolution gates use duration_scale.
    pub params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metrics: Option<GateMetrics>,
}

impl GateCalibration {
    pub fn param(&self, name: &str) -> Result<f64> {
        self.params.get(name).copied().ok_or_else(|| {
            QfmError::InvalidConfig(format!("calibration is missing parameter '{name}'"))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub schema_version: u32,
    pub hamiltonian: HamiltonianSpec,
    pub gates: BTreeMap<String, GateCalibration>,
    pub seed: u64,
}

impl Calibration {
    pub fn gate(&self, kind: GateKind) -> Result<&GateCalibration> {
        self.gates
            .get(kind.name())
            .ok_or_else(|| QfmError::UncalibratedGate(kind.name().to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration serialization")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let cal: Calibration = serde_json::from_str(json)
            .map_err(|e| QfmError::InvalidConfig(format!("calibration JSON: {e}")))?;
        if cal.schema_version != CALIBRATION_SCHEMA_VERSION {
            return Err(QfmError::InvalidConfig(format!(
                "unsupported calibration schema version {}",
                cal.schema_version
            )));
        }
        Ok(cal)
    }
}

/// Closed-form calibration, exact in the rotating frame: resonant rectangle
/// pulses whose area equals the rotation angle (A_scale * theta * sigma with
/// A_scale = 2, sigma = 1/2), and unit-scale free evolution for RZ and CZ.
pub fn analytic_calibration(h: HamiltonianSpec, seed: u64) -> Calibration {
    let rot = GateCalibration {
        envelope_kind: EnvelopeKind::Rectangle,
        params: BTreeMap::from([
            ("A_scale".to_string(), 2.0),
            ("sigma".to_string(), 0.5),
            ("duration".to_string(), 0.5),
        ]),
        metrics: None,
    };
    let free = GateCalibration {
        envelope_kind: EnvelopeKind::Rectangle,
        params: BTreeMap::from([("duration_scale".to_string(), 1.0)]),
        metrics: None,
    };
    let mut gates = BTreeMap::new();
    gates.insert("RX".to_string(), rot.clone());
    gates.insert("RY".to_string(), rot);
    gates.insert("RZ".to_string(), free.clone());
    gates.insert("CZ".to_string(), free);
    Calibration {
        schema_version: CALIBRATION_SCHEMA_VERSION,
        hamiltonian: h,
        gates,
        seed,
    }
}

/// Appends one basis gate at the earliest slot its wires allow, advancing the
/// per-qubit cursors. Returns the end time of the gate.
fn append_basis_gate(
    schedule: &mut Schedule,
    cursors: &mut [f64],
    gate: &Gate,
    cal: &Calibration,
) -> Result<f64> {
    let h = &cal.hamiltonian;
    let angle = || {
        gate.angle.ok_or_else(|| {
            QfmError::InvalidParameter(format!("gate {} requires an angle", gate.kind.name()))
        })
    };
    match gate.kind {
        GateKind::RX | GateKind::RY => {
            let g = cal.gate(gate.kind)?;
            let theta = angle()?;
            let duration = g.param("duration")?;
            if duration <= 0.0 {
                return Err(QfmError::InvalidConfig(format!(
                    "non-positive pulse duration {duration}"
                )));
            }
            let q = gate.wires[0];
            let t0 = cursors[q];
            let t1 = t0 + duration;
            let mut env = Envelope::new(
                g.envelope_kind,
                g.param("A_scale")? * theta,
                g.param("sigma")?,
                t0 + duration / 2.0,
            )?;
            if let Some(&beta) = g.params.get("beta") {
                env = env.with_beta(beta);
            }
            let phi = if gate.kind == GateKind::RX {
                0.0
            } else {
                -PI / 2.0
            };
            schedule.segments.push(Segment {
                channel: Channel::Drive { qubit: q },
                envelope: Some(env),
                carrier: Some(Carrier {
                    omega: h.omega_q,
                    phi,
                }),
                t_start: t0,
                t_end: t1,
            });
            cursors[q] = t1;
            Ok(t1)
        }
        GateKind::RZ => {
            let g = cal.gate(gate.kind)?;
            let theta = angle()?;
            let q = gate.wires[0];
            // The physical slot lasts as long as the drift would take to wind
            // the wrapped angle; the phase itself is applied virtually, exact.
            let duration = g.param("duration_scale")? * theta.rem_euclid(2.0 * PI) / h.omega_q;
            let t1 = cursors[q] + duration;
            schedule.virtual_phases.push(PhaseEvent {
                time: t1,
                qubit: q,
                phase: theta,
            });
            cursors[q] = t1;
            Ok(t1)
        }
        GateKind::CZ => {
            let g = cal.gate(gate.kind)?;
            if h.j <= 0.0 {
                return Err(QfmError::InvalidConfig(format!(
                    "CZ needs a positive ZZ coupling, got J = {}",
                    h.j
                )));
            }
            let (a, b) = (gate.wires[0], gate.wires[1]);
            let duration = g.param("duration_scale")? * PI / (2.0 * h.j);
            let t0 = cursors[a].max(cursors[b]);
            let t1 = t0 + duration;
            schedule.segments.push(Segment {
                channel: Channel::Coupling {
                    qubits: (a, b),
                    j: h.j,
                },
                envelope: None,
                carrier: None,
                t_start: t0,
                t_end: t1,
            });
            // exp(-i (pi/4) ZZ) plus RZ(-pi/2) on both wires and a global
            // -pi/4 is exactly diag(1, 1, 1, -1).
            for q in [a, b] {
                schedule.virtual_phases.push(PhaseEvent {
                    time: t1,
                    qubit: q,
                    phase: -PI / 2.0,
                });
            }
            schedule.global_phase -= PI / 4.0;
            cursors[a] = t1;
            cursors[b] = t1;
            Ok(t1)
        }
        other => Err(QfmError::InvalidParameter(format!(
            "{} is not a basis gate",
            other.name()
        ))),
    }
}

/// Compiles a circuit into a pulse schedule: composed gates are rewritten to
/// the basis, then every basis gate is placed as soon as its wires are free.
pub fn schedule_circuit(circuit: &Circuit, cal: &Calibration) -> Result<Schedule> {
    cal.hamiltonian.validate()?;
    let mut schedule = Schedule::empty(circuit.n_qubits);
    let mut cursors = vec![0.0; circuit.n_qubits];
    for gate in &circuit.gates {
        for &w in &gate.wires {
            if w >= circuit.n_qubits {
                return Err(QfmError::WireOutOfRange {
                    wire: w,
                    n_qubits: circuit.n_qubits,
                });
            }
        }
        let (seq, phase) = decompose_to_basis(gate)?;
        schedule.global_phase += phase;
        for basis in &seq {
            append_basis_gate(&mut schedule, &mut cursors, basis, cal)?;
        }
    }
    schedule.duration = cursors.iter().cloned().fold(0.0, f64::max);
    schedule.validate()?;
    Ok(schedule)
}

/// Infidelity 1 - |<exact|pulse>|^2 between the gate-level statevector and
/// the compiled-schedule evolution, both from |0...0>.
pub fn circuit_state_infidelity(
    circuit: &Circuit,
    cal: &Calibration,
    rtol: f64,
    atol: f64,
) -> Result<f64> {
    let exact = crate::quantum::run_statevector(circuit)?;
    let schedule = schedule_circuit(circuit, cal)?;
    let pulsed = super::evolve::evolve_schedule(
        &schedule,
        &crate::quantum::StateVector::zero_state(circuit.n_qubits),
        &cal.hamiltonian,
        rtol,
        atol,
    )?;
    // Normalize away the integrator's norm drift (first order in rtol) so the
    // result reflects the physical overlap, not the solver's energy error.
    Ok((1.0 - exact.fidelity(&pulsed) / pulsed.norm_squared()).max(0.0))
}
