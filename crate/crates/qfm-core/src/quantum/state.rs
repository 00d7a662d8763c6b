//! Pure and mixed quantum state representations.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{QfmError, Result};
use crate::linalg::{c, hermitian_eig, hermiticity_deviation, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub n_qubits: usize,
    pub amplitudes: Array1<C64>,
}

impl StateVector {
    /// |0...0> on `n_qubits`.
    pub fn zero_state(n_qubits: usize) -> Self {
        let mut amplitudes = Array1::zeros(1 << n_qubits);
        amplitudes[0] = c(1.0, 0.0);
        Self {
            n_qubits,
            amplitudes,
        }
    }

    pub fn new(n_qubits: usize, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != 1 << n_qubits {
            return Err(QfmError::DimensionMismatch {
                expected: 1 << n_qubits,
                got: amplitudes.len(),
            });
        }
        let state = Self {
            n_qubits,
            amplitudes,
        };
        state.check_normalized(1e-10)?;
        Ok(state)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let deviation = (self.norm_squared() - 1.0).abs();
        if deviation > tol {
            return Err(QfmError::NotNormalized { deviation });
        }
        Ok(())
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// |psi><psi| as a density matrix.
    pub fn to_density(&self) -> DensityMatrix {
        let dim = self.dim();
        let mut matrix = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                matrix[[i, j]] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityMatrix {
            n_qubits: self.n_qubits,
            matrix,
        }
    }

    /// Tensor product self (x) other (self holds the more significant qubits).
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amplitudes = Array1::zeros(self.dim() * other.dim());
        for i in 0..self.dim() {
            for j in 0..other.dim() {
                amplitudes[i * other.dim() + j] = self.amplitudes[i] * other.amplitudes[j];
            }
        }
        StateVector {
            n_qubits: self.n_qubits + other.n_qubits,
            amplitudes,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub n_qubits: usize,
    pub matrix: Array2<C64>,
}

impl DensityMatrix {
    pub fn new(n_qubits: usize, matrix: Array2<C64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(QfmError::DimensionMismatch {
                expected: dim,
                got: matrix.nrows(),
            });
        }
        let rho = Self { n_qubits, matrix };
        rho.validate()?;
        Ok(rho)
    }

    /// Maximally mixed state I / 2^n.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut matrix = Array2::zeros((dim, dim));
        for i in 0..dim {
            matrix[[i, i]] = c(1.0 / dim as f64, 0.0);
        }
        Self { n_qubits, matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.matrix[[i, i]]).sum()
    }

    /// Checks Hermiticity, unit trace and positive semidefiniteness (up to
    /// tolerance).
    pub fn validate(&self) -> Result<()> {
        let dev = hermiticity_deviation(&self.matrix);
        if dev > 1e-10 {
            return Err(QfmError::NonHermitian { deviation: dev });
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(QfmError::NotNormalized {
                deviation: (tr - c(1.0, 0.0)).norm(),
            });
        }
        let (vals, _) = hermitian_eig(&self.matrix)?;
        if let Some(&min) = vals.last() {
            if min < -1e-10 {
                return Err(QfmError::NotPositive {
                    min_eigenvalue: min,
                });
            }
        }
        Ok(())
    }

    /// Tr[rho^2].
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn diagonal_probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[[i, i]].re).collect()
    }

    /// Tensor product self (x) other.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits + other.n_qubits,
            matrix: crate::linalg::kron(&self.matrix, &other.matrix),
        }
    }
}

/// Either representation, for operations that accept both.
#[derive(Debug, Clone)]
pub enum QuantumState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn n_qubits(&self) -> usize {
        match self {
            QuantumState::Pure(s) => s.n_qubits,
            QuantumState::Mixed(r) => r.n_qubits,
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            QuantumState::Pure(s) => s.to_density(),
            QuantumState::Mixed(r) => r.clone(),
        }
    }
}

/// Per-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn parse(ch: char) -> Result<Self> {
        match ch {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(QfmError::InvalidParameter(format!(
                "unknown Pauli label '{other}'"
            ))),
        }
    }
}

/// A tensor product of single-qubit Paulis on selected qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub pauli_string: Vec<Pauli>,
    pub target_qubits: Vec<usize>,
}

impl Observable {
    pub fn new(pauli_string: Vec<Pauli>, target_qubits: Vec<usize>) -> Result<Self> {
        if pauli_string.len() != target_qubits.len() {
            return Err(QfmError::DimensionMismatch {
                expected: pauli_string.len(),
                got: target_qubits.len(),
            });
        }
        Ok(Self {
            pauli_string,
            target_qubits,
        })
    }

    /// Z on a single qubit, the default measurement.
    pub fn z(qubit: usize) -> Self {
        Self {
            pauli_string: vec![Pauli::Z],
            target_qubits: vec![qubit],
        }
    }

    /// Parse e.g. "ZZ" on qubits [0, 1].
    pub fn parse(labels: &str, qubits: Vec<usize>) -> Result<Self> {
        let paulis: Result<Vec<Pauli>> = labels.chars().map(Pauli::parse).collect();
        Self::new(paulis?, qubits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_state_normalized() {
        let s = StateVector::zero_state(3);
        assert_abs_diff_eq!(s.norm_squared(), 1.0, epsilon = 1e-15);
        assert_eq!(s.dim(), 8);
    }

    #[test]
    fn purity_of_maximally_mixed() {
        assert_abs_diff_eq!(
            DensityMatrix::maximally_mixed(1).purity(),
            0.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            DensityMatrix::maximally_mixed(2).purity(),
            0.25,
            epsilon = 1e-12
        );
    }

    #[test]
    fn pure_projector_purity_one() {
        let s = StateVector::zero_state(2);
        assert_abs_diff_eq!(s.to_density().purity(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn density_validation_rejects_bad_trace() {
        let m = Array2::eye(2);
        assert!(DensityMatrix::new(1, m).is_err());
    }
}
