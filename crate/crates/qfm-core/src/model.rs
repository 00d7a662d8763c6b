//! The data-re-uploading model: encoding layers interleaved with variational
//! layers, forward evaluation in several output modes, batching, and the
//! frequency spectrum of the resulting Fourier series.

use std::collections::BTreeMap;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::Ansatz;
use crate::error::{QfmError, Result};
use crate::quantum::{
    expectation_density, expectation_state, run_density, run_statevector, sample_outcomes,
    Circuit, Gate, GateKind, Observable, Pauli,
};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingScheme {
    Hamming,
    Binary,
    Ternary,
    Custom,
}

/// How inputs enter the circuit: one rotation gate per qubit, with a
/// per-qubit prefactor multiplying the assigned feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingStrategy {
    pub scheme: EncodingScheme,
    pub gate: GateKind,
    /// Per-qubit multipliers; only consulted for `Custom`.
    #[serde(default)]
    pub prefactors: Vec<f64>,
    /// Map qubit -> feature index; round-robin over D features when empty.
    #[serde(default)]
    pub feature_assignment: Vec<usize>,
}

impl EncodingStrategy {
    /// Default per the model definition: RX angle encoding, linear spectrum.
    pub fn hamming_rx() -> Self {
        Self {
            scheme: EncodingScheme::Hamming,
            gate: GateKind::RX,
            prefactors: Vec::new(),
            feature_assignment: Vec::new(),
        }
    }

    pub fn new(scheme: EncodingScheme, gate: GateKind) -> Result<Self> {
        if !matches!(gate, GateKind::RX | GateKind::RY | GateKind::RZ) {
            return Err(QfmError::InvalidParameter(format!(
                "encoding gate must be a rotation, got {}",
                gate.name()
            )));
        }
        Ok(Self {
            scheme,
            gate,
            prefactors: Vec::new(),
            feature_assignment: Vec::new(),
        })
    }

    pub fn prefactor(&self, qubit: usize) -> f64 {
        match self.scheme {
            EncodingScheme::Hamming => 1.0,
            EncodingScheme::Binary => (1u64 << qubit) as f64,
            EncodingScheme::Ternary => 3f64.powi(qubit as i32),
            EncodingScheme::Custom => self.prefactors.get(qubit).copied().unwrap_or(1.0),
        }
    }

    pub fn feature_for(&self, qubit: usize, n_features: usize) -> Result<usize> {
        let f = match self.feature_assignment.get(qubit) {
            Some(&f) => f,
            None => qubit % n_features,
        };
        if f >= n_features {
            return Err(QfmError::InvalidParameter(format!(
                "feature index {f} out of range for {n_features} features"
            )));
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputMode {
    Expval,
    Density,
    State,
    Probs,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub ansatz: Ansatz,
    pub encoding: EncodingStrategy,
    /// `reuploading_mask[l]` = encoding layer present before variational
    /// layer l. Length L, at least one true entry.
    pub reuploading_mask: Vec<bool>,
    pub observable: Observable,
    pub output_mode: OutputMode,
}

impl Model {
    pub fn new(
        n_qubits: usize,
        n_layers: usize,
        ansatz: Ansatz,
        encoding: EncodingStrategy,
        reuploading_mask: Vec<bool>,
        observable: Observable,
    ) -> Result<Self> {
        if ansatz.n_qubits != n_qubits {
            return Err(QfmError::DimensionMismatch {
                expected: n_qubits,
                got: ansatz.n_qubits,
            });
        }
        if reuploading_mask.len() != n_layers {
            return Err(QfmError::DimensionMismatch {
                expected: n_layers,
                got: reuploading_mask.len(),
            });
        }
        if !reuploading_mask.iter().any(|&m| m) {
            return Err(QfmError::InvalidParameter(
                "at least one layer must encode the input".to_string(),
            ));
        }
        Ok(Self {
            n_qubits,
            n_layers,
            ansatz,
            encoding,
            reuploading_mask,
            observable,
            output_mode: OutputMode::Expval,
        })
    }

    /// Model with encoding before every layer and a Z(0) readout.
    pub fn standard(
        n_qubits: usize,
        n_layers: usize,
        ansatz: Ansatz,
        encoding: EncodingStrategy,
    ) -> Result<Self> {
        Self::new(
            n_qubits,
            n_layers,
            ansatz,
            encoding,
            vec![true; n_layers],
            Observable::z(0),
        )
    }

    /// (L+1, K) trainable parameter shape.
    pub fn param_shape(&self) -> (usize, usize) {
        (self.n_layers + 1, self.ansatz.params_per_layer)
    }

    fn check_params(&self, params: &Array2<f64>) -> Result<()> {
        let (rows, cols) = self.param_shape();
        if params.nrows() != rows || params.ncols() != cols {
            return Err(QfmError::WrongParamCount {
                name: self.ansatz.name.clone(),
                expected: rows * cols,
                got: params.len(),
            });
        }
        Ok(())
    }

    /// The full gate sequence W(L+1) S(L) W(L) ... S(1) W(1) applied to
    /// |0...0>, in application order.
    pub fn build_circuit(&self, x: &[f64], params: &Array2<f64>) -> Result<Circuit> {
        self.check_params(params)?;
        if x.is_empty() {
            return Err(QfmError::InvalidParameter(
                "input must have at least one feature".to_string(),
            ));
        }
        let mut circuit = Circuit::new(self.n_qubits);
        for layer in 0..self.n_layers {
            if self.reuploading_mask[layer] {
                for q in 0..self.n_qubits {
                    let f = self.encoding.feature_for(q, x.len())?;
                    let angle = self.encoding.prefactor(q) * x[f];
                    circuit.push(
                        Gate::with_angle(self.encoding.gate, vec![q], angle)
                            .labeled(format!("x{f}")),
                    );
                }
            }
            let row: Vec<f64> = params.row(layer).to_vec();
            for g in self.ansatz.instantiate(&row, &format!("t{layer}"))? {
                circuit.push(g);
            }
        }
        let last: Vec<f64> = params.row(self.n_layers).to_vec();
        for g in self
            .ansatz
            .instantiate(&last, &format!("t{}", self.n_layers))?
        {
            circuit.push(g);
        }
        Ok(circuit)
    }

    /// Number of encoding gates carrying each feature, per layer application.
    pub fn spectrum(&self, n_features: usize) -> Result<Vec<Spectrum>> {
        let n_encoding_layers = self.reuploading_mask.iter().filter(|&&m| m).count();
        let mut per_feature: Vec<Vec<f64>> = vec![Vec::new(); n_features];
        for q in 0..self.n_qubits {
            let f = self.encoding.feature_for(q, n_features)?;
            for _ in 0..n_encoding_layers {
                per_feature[f].push(self.encoding.prefactor(q));
            }
        }
        per_feature.into_iter().map(|p| minkowski_spectrum(&p)).collect()
    }
}

/// Accessible frequencies of one feature: the Minkowski sum, over all
/// encoding gates carrying that feature, of the difference sets {-a, 0, +a}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub degeneracies: Vec<u64>,
}

impl Spectrum {
    pub fn max_frequency(&self) -> f64 {
        self.frequencies.last().copied().unwrap_or(0.0)
    }

    /// Largest frequency as an integer, when the spectrum is integral.
    pub fn max_frequency_int(&self) -> Result<i64> {
        let max = self.max_frequency();
        if (max - max.round()).abs() > 1e-9 {
            return Err(QfmError::NonCommensurateSpectrum(max));
        }
        Ok(max.round() as i64)
    }
}

fn minkowski_spectrum(prefactors: &[f64]) -> Result<Spectrum> {
    let integral = prefactors
        .iter()
        .all(|a| (a - a.round()).abs() < 1e-9);
    if integral {
        let mut acc: BTreeMap<i64, u64> = BTreeMap::new();
        acc.insert(0, 1);
        for &a in prefactors {
            let a = a.round() as i64;
            let mut next: BTreeMap<i64, u64> = BTreeMap::new();
            for (&w, &count) in &acc {
                for d in [-a, 0, a] {
                    *next.entry(w + d).or_insert(0) += count;
                }
            }
            acc = next;
        }
        let (frequencies, degeneracies) =
            acc.into_iter().map(|(w, c)| (w as f64, c)).unzip();
        Ok(Spectrum {
            frequencies,
            degeneracies,
        })
    } else {
        // Non-integer prefactors: accumulate as floats with tolerance dedup.
        let mut acc: Vec<(f64, u64)> = vec![(0.0, 1)];
        for &a in prefactors {
            let mut next: Vec<(f64, u64)> = Vec::new();
            for &(w, count) in &acc {
                for d in [-a, 0.0, a] {
                    let v = w + d;
                    match next
                        .iter_mut()
                        .find(|(existing, _)| (*existing - v).abs() < 1e-9)
                    {
                        Some(slot) => slot.1 += count,
                        None => next.push((v, count)),
                    }
                }
            }
            next.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            acc = next;
        }
        let (frequencies, degeneracies) = acc.into_iter().unzip();
        Ok(Spectrum {
            frequencies,
            degeneracies,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitStrategy {
    Zeros,
    Pi,
    Uniform { lo: f64, hi: f64 },
}

/// Draws a trainable parameter array of the given shape.
pub fn init_params(
    strategy: InitStrategy,
    shape: (usize, usize),
    rng: &mut RngStream,
) -> Result<Array2<f64>> {
    match strategy {
        InitStrategy::Zeros => Ok(Array2::zeros(shape)),
        InitStrategy::Pi => Ok(Array2::from_elem(shape, std::f64::consts::PI)),
        InitStrategy::Uniform { lo, hi } => {
            if lo >= hi {
                return Err(QfmError::InvalidParameter(format!(
                    "uniform init requires lo < hi, got [{lo}, {hi})"
                )));
            }
            Ok(Array2::from_shape_simple_fn(shape, || rng.uniform(lo, hi)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecutionRequest {
    pub mode: OutputMode,
    /// Sampled readout when set; analytic otherwise.
    pub shots: Option<u64>,
    /// Per-gate single-qubit depolarizing probability; > 0 forces the
    /// density-matrix path.
    pub noise_p: f64,
}

impl ExecutionRequest {
    pub fn expval() -> Self {
        Self {
            mode: OutputMode::Expval,
            shots: None,
            noise_p: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Output {
    Expval(f64),
    State(crate::quantum::StateVector),
    Density(crate::quantum::DensityMatrix),
    Probs(Vec<f64>),
    Counts(Vec<u64>),
}

impl Output {
    pub fn expval(&self) -> Result<f64> {
        match self {
            Output::Expval(v) => Ok(*v),
            _ => Err(QfmError::InvalidParameter(
                "output is not an expectation value".to_string(),
            )),
        }
    }
}

fn diagonal_observable_eigenvalue(obs: &Observable, n_qubits: usize, index: usize) -> Result<f64> {
    let mut sign = 1.0;
    for (&p, &q) in obs.pauli_string.iter().zip(obs.target_qubits.iter()) {
        match p {
            Pauli::I => {}
            Pauli::Z => {
                if index & (1 << (n_qubits - 1 - q)) != 0 {
                    sign = -sign;
                }
            }
            _ => {
                return Err(QfmError::InvalidParameter(
                    "sampled expectation requires a Z/I observable".to_string(),
                ))
            }
        }
    }
    Ok(sign)
}

pub fn forward(
    model: &Model,
    x: &[f64],
    params: &Array2<f64>,
    request: &ExecutionRequest,
    rng: &mut RngStream,
) -> Result<Output> {
    let circuit = model.build_circuit(x, params)?;
    let use_density = request.noise_p > 0.0 || request.mode == OutputMode::Density;

    let probs: Vec<f64>;
    let analytic_expval: f64;
    let mut density = None;
    let mut state = None;
    if use_density {
        let rho = run_density(&circuit, request.noise_p)?;
        probs = rho.diagonal_probabilities();
        analytic_expval = expectation_density(&rho, &model.observable)?;
        density = Some(rho);
    } else {
        let psi = run_statevector(&circuit)?;
        probs = psi.probabilities();
        analytic_expval = expectation_state(&psi, &model.observable)?;
        state = Some(psi);
    }

    match request.mode {
        OutputMode::Density => Ok(Output::Density(density.unwrap())),
        OutputMode::State => {
            if request.noise_p > 0.0 {
                return Err(QfmError::InvalidParameter(
                    "state mode is unavailable with noise; use density".to_string(),
                ));
            }
            Ok(Output::State(state.unwrap()))
        }
        OutputMode::Probs => match request.shots {
            None => Ok(Output::Probs(probs)),
            Some(shots) => Ok(Output::Counts(sample_outcomes(&probs, shots, rng)?)),
        },
        OutputMode::Expval => match request.shots {
            None => Ok(Output::Expval(analytic_expval)),
            Some(shots) => {
                let counts = sample_outcomes(&probs, shots, rng)?;
                let mut acc = 0.0;
                for (idx, &cnt) in counts.iter().enumerate() {
                    acc += diagonal_observable_eigenvalue(&model.observable, model.n_qubits, idx)?
                        * cnt as f64;
                }
                Ok(Output::Expval(acc / shots as f64))
            }
        },
    }
}

/// Cartesian batch: entry (i, j) = forward(x_i, theta_j). Shot noise uses an
/// independent per-slot stream so the result is order-independent.
pub fn batch_forward(
    model: &Model,
    inputs: &[Vec<f64>],
    param_sets: &[Array2<f64>],
    request: &ExecutionRequest,
    root: &RngStream,
) -> Result<Array2<f64>> {
    if inputs.is_empty() || param_sets.is_empty() {
        return Err(QfmError::InvalidParameter(
            "batch_forward requires non-empty batches".to_string(),
        ));
    }
    let dim = inputs[0].len();
    if inputs.iter().any(|x| x.len() != dim) {
        return Err(QfmError::InvalidParameter(
            "all batch inputs must share the same dimensionality".to_string(),
        ));
    }
    let m = inputs.len();
    let p = param_sets.len();
    let entries: Result<Vec<f64>> = (0..m * p)
        .into_par_iter()
        .map(|flat| {
            let (i, j) = (flat / p, flat % p);
            let mut rng = root.split_index(flat as u64);
            forward(model, &inputs[i], &param_sets[j], request, &mut rng)?.expval()
        })
        .collect();
    Array2::from_shape_vec((m, p), entries?).map_err(|e| QfmError::Numerical(e.to_string()))
}
