//! Pulse-level layer: envelopes, schedules, Schrödinger-equation evolution,
//! basis-gate decomposition, and circuit compilation against a calibration.

pub mod compile;
pub mod envelope;
pub mod evolve;
pub mod graph;
pub mod hamiltonian;
pub mod schedule;

pub use compile::{
    analytic_calibration, circuit_state_infidelity, schedule_circuit, Calibration,
    GateCalibration, GateMetrics, CALIBRATION_SCHEMA_VERSION,
};
pub use envelope::{Carrier, Envelope, EnvelopeKind};
pub use evolve::{evolve_schedule, schedule_unitary};
pub use graph::{
    basis_param_count, circuit_param_count, decompose_to_basis, expand_composed,
    pulse_param_count, Binding,
};
pub use hamiltonian::{Frame, HamiltonianSpec};
pub use schedule::{Channel, PhaseEvent, Schedule, Segment};
