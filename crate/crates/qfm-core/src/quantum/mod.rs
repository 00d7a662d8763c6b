//! Statevector / density-matrix simulation primitives.

pub mod gates;
pub mod ops;
pub mod state;

pub use gates::{embed_gate, Circuit, Gate, GateKind, GateMatrix};
pub use ops::{
    apply_unitary_density, apply_unitary_state, depolarize, eigendecompose, expectation_density,
    expectation_state, full_circuit_unitary, partial_trace, reduced_from_state, run_density,
    run_statevector, sample_outcomes,
};
pub use state::{DensityMatrix, Observable, Pauli, QuantumState, StateVector};
