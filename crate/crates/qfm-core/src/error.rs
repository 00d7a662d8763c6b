use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum QfmError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("wire {wire} out of range for {n_qubits} qubits")]
    WireOutOfRange { wire: usize, n_qubits: usize },
    #[error("state is not normalized: |norm - 1| = {deviation:.3e}")]
    NotNormalized { deviation: f64 },
    #[error("matrix is not Hermitian within tolerance (max deviation {deviation:.3e})")]
    NonHermitian { deviation: f64 },
    #[error("density matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("probability {value} outside [0, 1]")]
    InvalidProbability { value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown ansatz '{0}'")]
    UnknownAnsatz(String),
    #[error("ansatz '{name}' expects {expected} parameters per layer, got {got}")]
    WrongParamCount {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("unknown gate '{0}'")]
    UnknownGate(String),
    #[error("gate '{0}' has no pulse calibration")]
    UncalibratedGate(String),
    #[error("frequency grid is not commensurate: prefactor {0} is not an integer")]
    NonCommensurateSpectrum(f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, QfmError>;
