//! Expressibility (KL divergence to the Haar fidelity distribution) and
//! entangling-capability measures: Meyer-Wallach, Bell-measurement,
//! entanglement of formation, and concentratable entanglement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QfmError, Result};
use crate::model::{forward, ExecutionRequest, InitStrategy, Model, Output, OutputMode};
use crate::quantum::{
    eigendecompose, partial_trace, reduced_from_state, run_density, sample_outcomes, Circuit,
    DensityMatrix, Gate, GateKind, QuantumState, StateVector,
};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExpressibilityConfig {
    pub n_pairs: usize,
    pub n_bins: usize,
    pub seed: u64,
}

impl Default for ExpressibilityConfig {
    fn default() -> Self {
        Self {
            n_pairs: 10_000,
            n_bins: 75,
            seed: 0,
        }
    }
}

/// Probability mass the Haar fidelity distribution P(F) = (N-1)(1-F)^(N-2)
/// assigns to each of `n_bins` uniform bins on [0, 1].
pub fn haar_bin_probabilities(n_qubits: usize, n_bins: usize) -> Result<Vec<f64>> {
    if n_qubits < 1 || n_bins < 2 {
        return Err(QfmError::InvalidParameter(format!(
            "need n >= 1 and n_bins >= 2, got n={n_qubits}, n_bins={n_bins}"
        )));
    }
    let big_n = (1u64 << n_qubits) as f64;
    let mut probs = Vec::with_capacity(n_bins);
    for b in 0..n_bins {
        let lo = b as f64 / n_bins as f64;
        let hi = (b + 1) as f64 / n_bins as f64;
        // Integral of P over [lo, hi]: telescoping in (1-F)^(N-1).
        probs.push((1.0 - lo).powf(big_n - 1.0) - (1.0 - hi).powf(big_n - 1.0));
    }
    Ok(probs)
}

fn histogram_bin(fidelity: f64, n_bins: usize) -> usize {
    // Uniform bins on [0, 1]; F = 1 lands in the last bin.
    let idx = (fidelity * n_bins as f64).floor() as usize;
    idx.min(n_bins - 1)
}

/// KL divergence between the model's state-pair fidelity histogram and the
/// Haar distribution. Parameters are drawn uniformly in [0, 2pi); the input
/// is fixed to x = 0 so only the variational structure is probed.
pub fn expressibility_kl(model: &Model, cfg: &ExpressibilityConfig) -> Result<f64> {
    if cfg.n_pairs < 1 {
        return Err(QfmError::InvalidParameter(
            "n_pairs must be >= 1".to_string(),
        ));
    }
    let root = RngStream::from_seed(cfg.seed);
    let shape = model.param_shape();
    let request = ExecutionRequest {
        mode: OutputMode::State,
        shots: None,
        noise_p: 0.0,
    };
    let x = vec![0.0; 1];
    let fidelities: Result<Vec<f64>> = (0..cfg.n_pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = root.split_index(i as u64);
            let sample = |rng: &mut RngStream| -> Result<StateVector> {
                let theta = crate::model::init_params(
                    InitStrategy::Uniform {
                        lo: 0.0,
                        hi: 2.0 * std::f64::consts::PI,
                    },
                    shape,
                    rng,
                )?;
                match forward(model, &x, &theta, &request, rng)? {
                    Output::State(s) => Ok(s),
                    _ => unreachable!(),
                }
            };
            let a = sample(&mut rng)?;
            let b = sample(&mut rng)?;
            Ok(a.fidelity(&b))
        })
        .collect();
    let fidelities = fidelities?;

    let mut counts = vec![0u64; cfg.n_bins];
    for f in fidelities {
        counts[histogram_bin(f, cfg.n_bins)] += 1;
    }
    let haar = haar_bin_probabilities(model.n_qubits, cfg.n_bins)?;
    let mut kl = 0.0;
    for (b, &cnt) in counts.iter().enumerate() {
        if cnt == 0 {
            continue;
        }
        let p = cnt as f64 / cfg.n_pairs as f64;
        if haar[b] <= 0.0 {
            return Err(QfmError::Numerical(format!(
                "Haar bin {b} has zero probability"
            )));
        }
        kl += p * (p / haar[b]).ln();
    }
    Ok(kl)
}

/// Meyer-Wallach measure E = 2 (1 - (1/n) sum_k Tr[rho_k^2]) of a pure state.
pub fn meyer_wallach(state: &StateVector) -> Result<f64> {
    let n = state.n_qubits;
    if n < 2 {
        return Err(QfmError::InvalidParameter(
            "Meyer-Wallach requires at least 2 qubits".to_string(),
        ));
    }
    state.check_normalized(1e-8)?;
    let mut purity_sum = 0.0;
    for k in 0..n {
        purity_sum += reduced_from_state(state, &[k])?.purity();
    }
    Ok(2.0 * (1.0 - purity_sum / n as f64))
}

/// Builds the doubled-register circuit of the Bell-measurement protocol:
/// CX from copy-A qubit k to copy-B qubit n+k, then H on copy-A qubit k.
fn bell_transform(n: usize) -> Circuit {
    let mut circuit = Circuit::new(2 * n);
    for k in 0..n {
        circuit.push(Gate::new(GateKind::CX, vec![k, n + k]));
    }
    for k in 0..n {
        circuit.push(Gate::new(GateKind::H, vec![k]));
    }
    circuit
}

fn bell_probabilities(state: &QuantumState) -> Result<(usize, Vec<f64>)> {
    let n = state.n_qubits();
    let transform = bell_transform(n);
    match state {
        QuantumState::Pure(psi) => {
            let mut doubled = psi.tensor(psi);
            for gate in &transform.gates {
                doubled = crate::quantum::apply_unitary_state(&doubled, &gate.to_gate_matrix()?)?;
            }
            Ok((n, doubled.probabilities()))
        }
        QuantumState::Mixed(rho) => {
            let mut doubled = rho.tensor(rho);
            for gate in &transform.gates {
                doubled = crate::quantum::apply_unitary_density(&doubled, &gate.to_gate_matrix()?)?;
            }
            Ok((n, doubled.diagonal_probabilities()))
        }
    }
}

/// Per-qubit purity estimate Tr[rho_k^2] = 1 - 2 P_odd,k where P_odd,k is the
/// probability that the Bell measurement of pair k returns 11.
fn purities_from_bell_probs(n: usize, probs: &[f64]) -> Vec<f64> {
    let mut purities = Vec::with_capacity(n);
    for k in 0..n {
        let mask_a = 1usize << (2 * n - 1 - k);
        let mask_b = 1usize << (2 * n - 1 - (n + k));
        let p_odd: f64 = probs
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx & mask_a != 0 && idx & mask_b != 0)
            .map(|(_, &p)| p)
            .sum();
        purities.push(1.0 - 2.0 * p_odd);
    }
    purities
}

/// Entanglement via the two-copy Bell measurement protocol. With `shots` the
/// doubled register is sampled; otherwise probabilities are used exactly.
pub fn bell_measurement_entanglement(
    state: &QuantumState,
    shots: Option<u64>,
    rng: &mut RngStream,
) -> Result<f64> {
    let (n, probs) = bell_probabilities(state)?;
    if n < 2 {
        return Err(QfmError::InvalidParameter(
            "entanglement measures require at least 2 qubits".to_string(),
        ));
    }
    let purities = match shots {
        None => purities_from_bell_probs(n, &probs),
        Some(shots) => {
            let counts = sample_outcomes(&probs, shots, rng)?;
            let empirical: Vec<f64> = counts
                .iter()
                .map(|&cnt| cnt as f64 / shots as f64)
                .collect();
            purities_from_bell_probs(n, &empirical)
        }
    };
    let mean_purity: f64 = purities.iter().sum::<f64>() / n as f64;
    Ok(2.0 * (1.0 - mean_purity))
}

/// Upper bound on the entanglement of formation: eigendecompose rho and
/// average Meyer-Wallach over the eigenstates. The true value is the infimum
/// over all decompositions; the eigen-decomposition is just one of them.
pub fn entanglement_of_formation(rho: &DensityMatrix) -> Result<f64> {
    let (vals, states) = eigendecompose(rho)?;
    let mut acc = 0.0;
    for (lambda, state) in vals.iter().zip(states.iter()) {
        if *lambda > 1e-12 {
            acc += lambda * meyer_wallach(state)?;
        }
    }
    Ok(acc)
}

/// Concentratable entanglement C(s) = 1 - 2^{-|s|} sum_{alpha in 2^s}
/// Tr[rho_alpha^2], with Tr[rho_empty^2] = 1. For mixed inputs the same
/// functional is evaluated on rho directly (an approximation valid at low
/// noise).
pub fn concentratable(state: &QuantumState, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(QfmError::InvalidParameter(
            "concentratable entanglement needs a non-empty subset".to_string(),
        ));
    }
    if subset.len() > 12 {
        return Err(QfmError::InvalidParameter(
            "subset too large for power-set enumeration (max 12)".to_string(),
        ));
    }
    let n = state.n_qubits();
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != subset.len() {
        return Err(QfmError::InvalidParameter(
            "subset contains duplicate qubits".to_string(),
        ));
    }
    for &q in &sorted {
        if q >= n {
            return Err(QfmError::WireOutOfRange { wire: q, n_qubits: n });
        }
    }
    let s = sorted.len();
    let mut purity_sum = 1.0; // empty subset
    for mask in 1u32..(1 << s) {
        let alpha: Vec<usize> = (0..s)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| sorted[i])
            .collect();
        let purity = match state {
            QuantumState::Pure(psi) => reduced_from_state(psi, &alpha)?.purity(),
            QuantumState::Mixed(rho) => partial_trace(rho, &alpha)?.purity(),
        };
        purity_sum += purity;
    }
    Ok(1.0 - purity_sum / (1u64 << s) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntanglementMeasure {
    Mw,
    Bm,
    Ef,
    Ce,
}

impl EntanglementMeasure {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "mw" => Ok(Self::Mw),
            "bm" => Ok(Self::Bm),
            "ef" => Ok(Self::Ef),
            "ce" => Ok(Self::Ce),
            other => Err(QfmError::InvalidParameter(format!(
                "unknown entanglement measure '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntanglementConfig {
    pub measure: EntanglementMeasure,
    pub n_samples: usize,
    pub noise_p: f64,
    pub shots: Option<u64>,
    /// Subset for CE; all qubits when empty.
    pub ce_subset: Vec<usize>,
}

impl EntanglementConfig {
    pub fn new(measure: EntanglementMeasure) -> Self {
        Self {
            measure,
            n_samples: 1000,
            noise_p: 0.0,
            shots: None,
            ce_subset: Vec::new(),
        }
    }
}

/// One entanglement sample at uniformly random parameters and x = 0.
fn capability_sample(
    model: &Model,
    cfg: &EntanglementConfig,
    rng: &mut RngStream,
) -> Result<f64> {
    let theta = crate::model::init_params(
        InitStrategy::Uniform {
            lo: 0.0,
            hi: 2.0 * std::f64::consts::PI,
        },
        model.param_shape(),
        rng,
    )?;
    let x = [0.0];
    let state: QuantumState = if cfg.noise_p > 0.0 || cfg.measure == EntanglementMeasure::Ef {
        let circuit = model.build_circuit(&x, &theta)?;
        QuantumState::Mixed(run_density(&circuit, cfg.noise_p)?)
    } else {
        let request = ExecutionRequest {
            mode: OutputMode::State,
            shots: None,
            noise_p: 0.0,
        };
        match forward(model, &x, &theta, &request, rng)? {
            Output::State(s) => QuantumState::Pure(s),
            _ => unreachable!(),
        }
    };
    match cfg.measure {
        EntanglementMeasure::Mw => match &state {
            QuantumState::Pure(psi) => meyer_wallach(psi),
            QuantumState::Mixed(_) => Err(QfmError::InvalidParameter(
                "Meyer-Wallach requires pure states; disable noise".to_string(),
            )),
        },
        EntanglementMeasure::Bm => bell_measurement_entanglement(&state, cfg.shots, rng),
        EntanglementMeasure::Ef => entanglement_of_formation(&state.to_density()),
        EntanglementMeasure::Ce => {
            let subset: Vec<usize> = if cfg.ce_subset.is_empty() {
                (0..model.n_qubits).collect()
            } else {
                cfg.ce_subset.clone()
            };
            concentratable(&state, &subset)
        }
    }
}

/// Mean and standard deviation of the chosen measure over `n_samples`
/// uniformly random parameter draws.
pub fn entangling_capability(
    model: &Model,
    cfg: &EntanglementConfig,
    root: &RngStream,
) -> Result<(f64, f64)> {
    if cfg.n_samples == 0 {
        return Err(QfmError::InvalidParameter(
            "n_samples must be >= 1".to_string(),
        ));
    }
    if cfg.measure == EntanglementMeasure::Mw && cfg.noise_p > 0.0 {
        return Err(QfmError::InvalidParameter(
            "Meyer-Wallach requires pure states; disable noise".to_string(),
        ));
    }
    let samples: Result<Vec<f64>> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = root.split_index(i as u64);
            capability_sample(model, cfg, &mut rng)
        })
        .collect();
    let samples = samples?;
    // Compensated sums keep the reduction deterministic across runs.
    let mean = kahan_sum(samples.iter().copied()) / cfg.n_samples as f64;
    let var = kahan_sum(samples.iter().map(|v| (v - mean) * (v - mean)))
        / cfg.n_samples as f64;
    Ok((mean, var.sqrt()))
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::ansatz_by_name;
    use crate::linalg::c;
    use crate::model::EncodingStrategy;
    use crate::quantum::run_statevector;
    use approx::assert_abs_diff_eq;
    use ndarray::Array1;

    fn pure(state: StateVector) -> QuantumState {
        QuantumState::Pure(state)
    }

    fn bell_state() -> StateVector {
        let mut circuit = Circuit::new(2);
        circuit.push(Gate::new(GateKind::H, vec![0]));
        circuit.push(Gate::new(GateKind::CX, vec![0, 1]));
        run_statevector(&circuit).unwrap()
    }

    fn ghz(n: usize) -> StateVector {
        let mut circuit = Circuit::new(n);
        circuit.push(Gate::new(GateKind::H, vec![0]));
        for k in 1..n {
            circuit.push(Gate::new(GateKind::CX, vec![0, k]));
        }
        run_statevector(&circuit).unwrap()
    }

    fn w3() -> StateVector {
        let a = 1.0 / 3f64.sqrt();
        let mut amps = Array1::zeros(8);
        amps[0b100] = c(a, 0.0);
        amps[0b010] = c(a, 0.0);
        amps[0b001] = c(a, 0.0);
        StateVector::new(3, amps).unwrap()
    }

    #[test]
    fn haar_bins_n1_uniform() {
        let probs = haar_bin_probabilities(1, 75).unwrap();
        for &p in &probs {
            assert_abs_diff_eq!(p, 1.0 / 75.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn haar_bins_sum_to_one() {
        for n in 1..=4 {
            let probs = haar_bin_probabilities(n, 75).unwrap();
            assert_abs_diff_eq!(probs.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn haar_first_bin_n2() {
        let probs = haar_bin_probabilities(2, 75).unwrap();
        let expect = 1.0 - (74.0f64 / 75.0).powi(3);
        assert_abs_diff_eq!(probs[0], expect, epsilon = 1e-12);
        assert_abs_diff_eq!(probs[0], 0.03947, epsilon = 1e-5);
    }

    #[test]
    fn idle_expressibility_is_ln_bins() {
        let model = Model::standard(
            1,
            1,
            ansatz_by_name("Idle", 1).unwrap(),
            EncodingStrategy::hamming_rx(),
        )
        .unwrap();
        let cfg = ExpressibilityConfig {
            n_pairs: 500,
            n_bins: 75,
            seed: 0,
        };
        let kl = expressibility_kl(&model, &cfg).unwrap();
        assert_abs_diff_eq!(kl, 75.0f64.ln(), epsilon = 1e-6);
        assert_abs_diff_eq!(kl, 4.31749, epsilon = 1e-5);
    }

    #[test]
    fn expressibility_deterministic_and_ordered() {
        let sea = Model::standard(
            4,
            1,
            ansatz_by_name("SEA", 4).unwrap(),
            EncodingStrategy::hamming_rx(),
        )
        .unwrap();
        let cfg = ExpressibilityConfig {
            n_pairs: 2000,
            n_bins: 75,
            seed: 1,
        };
        let kl_a = expressibility_kl(&sea, &cfg).unwrap();
        let kl_b = expressibility_kl(&sea, &cfg).unwrap();
        assert_eq!(kl_a, kl_b);
        let idle = Model::standard(
            4,
            1,
            ansatz_by_name("Idle", 4).unwrap(),
            EncodingStrategy::hamming_rx(),
        )
        .unwrap();
        let kl_idle = expressibility_kl(&idle, &cfg).unwrap();
        assert!(kl_a < kl_idle);
    }

    #[test]
    fn mw_product_state_zero() {
        let mut circuit = Circuit::new(2);
        circuit.push(Gate::new(GateKind::X, vec![1])); // |01>
        let state = run_statevector(&circuit).unwrap();
        assert_abs_diff_eq!(meyer_wallach(&state).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mw_bell_is_one() {
        assert_abs_diff_eq!(meyer_wallach(&bell_state()).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mw_w_state() {
        assert_abs_diff_eq!(meyer_wallach(&w3()).unwrap(), 8.0 / 9.0, epsilon = 1e-12);
    }

    #[test]
    fn mw_rejects_single_qubit() {
        assert!(meyer_wallach(&StateVector::zero_state(1)).is_err());
    }

    #[test]
    fn bm_matches_mw_exact() {
        let mut rng = RngStream::from_seed(0);
        for state in [bell_state(), ghz(3), w3()] {
            let bm = bell_measurement_entanglement(&pure(state.clone()), None, &mut rng).unwrap();
            let mw = meyer_wallach(&state).unwrap();
            assert_abs_diff_eq!(bm, mw, epsilon = 1e-10);
        }
    }

    #[test]
    fn bm_product_state_zero() {
        let mut rng = RngStream::from_seed(1);
        let bm =
            bell_measurement_entanglement(&pure(StateVector::zero_state(2)), None, &mut rng)
                .unwrap();
        assert_abs_diff_eq!(bm, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bm_with_shots_close() {
        let mut rng = RngStream::from_seed(2);
        let bm =
            bell_measurement_entanglement(&pure(bell_state()), Some(100_000), &mut rng).unwrap();
        assert!((bm - 1.0).abs() < 0.02);
    }

    #[test]
    fn bm_mixed_state_runs() {
        let mut rng = RngStream::from_seed(3);
        let rho = DensityMatrix::maximally_mixed(2);
        // Two copies of I/4 give per-qubit purity 1/2: E = 1.
        let bm = bell_measurement_entanglement(&QuantumState::Mixed(rho), None, &mut rng).unwrap();
        assert_abs_diff_eq!(bm, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn ef_bell_projector() {
        assert_abs_diff_eq!(
            entanglement_of_formation(&bell_state().to_density()).unwrap(),
            1.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn ef_maximally_mixed_zero() {
        assert_abs_diff_eq!(
            entanglement_of_formation(&DensityMatrix::maximally_mixed(2)).unwrap(),
            0.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn ef_product_projector_zero() {
        assert_abs_diff_eq!(
            entanglement_of_formation(&StateVector::zero_state(2).to_density()).unwrap(),
            0.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn ce_values() {
        assert_abs_diff_eq!(
            concentratable(&pure(StateVector::zero_state(3)), &[0, 1, 2]).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            concentratable(&pure(bell_state()), &[0, 1]).unwrap(),
            0.25,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            concentratable(&pure(ghz(3)), &[0, 1, 2]).unwrap(),
            0.375,
            epsilon = 1e-12
        );
    }

    #[test]
    fn ce_local_unitary_invariant() {
        let base = concentratable(&pure(ghz(3)), &[0, 1, 2]).unwrap();
        let mut rng = RngStream::from_seed(5);
        for _ in 0..20 {
            let mut circuit = Circuit::new(3);
            circuit.push(Gate::new(GateKind::H, vec![0]));
            circuit.push(Gate::new(GateKind::CX, vec![0, 1]));
            circuit.push(Gate::new(GateKind::CX, vec![0, 2]));
            for q in 0..3 {
                circuit.push(Gate::with_angle(
                    GateKind::RX,
                    vec![q],
                    rng.uniform(0.0, 2.0 * std::f64::consts::PI),
                ));
                circuit.push(Gate::with_angle(
                    GateKind::RZ,
                    vec![q],
                    rng.uniform(0.0, 2.0 * std::f64::consts::PI),
                ));
            }
            let rotated = run_statevector(&circuit).unwrap();
            let ce = concentratable(&pure(rotated), &[0, 1, 2]).unwrap();
            assert_abs_diff_eq!(ce, base, epsilon = 1e-9);
        }
    }

    #[test]
    fn ce_rejects_bad_subsets() {
        assert!(concentratable(&pure(bell_state()), &[]).is_err());
        assert!(concentratable(&pure(bell_state()), &[0, 0]).is_err());
        assert!(concentratable(&pure(bell_state()), &[5]).is_err());
    }

    fn test_model(name: &str, n: usize) -> Model {
        Model::standard(
            n,
            1,
            ansatz_by_name(name, n).unwrap(),
            EncodingStrategy::hamming_rx(),
        )
        .unwrap()
    }

    #[test]
    fn nea_capability_zero() {
        let model = test_model("NEA", 3);
        let root = RngStream::from_seed(1);
        for measure in [
            EntanglementMeasure::Mw,
            EntanglementMeasure::Bm,
            EntanglementMeasure::Ef,
            EntanglementMeasure::Ce,
        ] {
            let mut cfg = EntanglementConfig::new(measure);
            cfg.n_samples = 20;
            let (mean, _) = entangling_capability(&model, &cfg, &root).unwrap();
            assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn sea_capability_positive_and_deterministic() {
        let model = test_model("SEA", 4);
        let root = RngStream::from_seed(2);
        let mut cfg = EntanglementConfig::new(EntanglementMeasure::Mw);
        cfg.n_samples = 50;
        let (mean_a, std_a) = entangling_capability(&model, &cfg, &root).unwrap();
        let (mean_b, std_b) = entangling_capability(&model, &cfg, &root).unwrap();
        assert!(mean_a > 0.1);
        assert_eq!(mean_a, mean_b);
        assert_eq!(std_a, std_b);
    }

    #[test]
    fn mw_with_noise_rejected() {
        let model = test_model("SEA", 2);
        let mut cfg = EntanglementConfig::new(EntanglementMeasure::Mw);
        cfg.noise_p = 0.01;
        assert!(entangling_capability(&model, &cfg, &RngStream::from_seed(0)).is_err());
    }

    #[test]
    fn capability_rank_order_consistent() {
        let root = RngStream::from_seed(7);
        let mut order_per_measure = Vec::new();
        for measure in [
            EntanglementMeasure::Mw,
            EntanglementMeasure::Bm,
            EntanglementMeasure::Ef,
            EntanglementMeasure::Ce,
        ] {
            let mut means = Vec::new();
            for name in ["NEA", "HEA", "SEA"] {
                let model = test_model(name, 4);
                let mut cfg = EntanglementConfig::new(measure);
                cfg.n_samples = 40;
                let (mean, _) = entangling_capability(&model, &cfg, &root).unwrap();
                means.push((name, mean));
            }
            let mut order: Vec<&str> = {
                let mut sorted = means.clone();
                sorted.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
                sorted.iter().map(|(n, _)| *n).collect()
            };
            order_per_measure.push(std::mem::take(&mut order));
        }
        for pair in order_per_measure.windows(2) {
            assert_eq!(pair[0], pair[1]);
        }
    }

    #[test]
    fn noise_raises_bm_and_ce() {
        let root = RngStream::from_seed(9);
        for measure in [EntanglementMeasure::Bm, EntanglementMeasure::Ce] {
            for name in ["HEA", "SEA"] {
                let model = test_model(name, 3);
                let mut clean_cfg = EntanglementConfig::new(measure);
                clean_cfg.n_samples = 30;
                let mut noisy_cfg = clean_cfg.clone();
                noisy_cfg.noise_p = 0.01;
                let (clean, _) = entangling_capability(&model, &clean_cfg, &root).unwrap();
                let (noisy, _) = entangling_capability(&model, &noisy_cfg, &root).unwrap();
                assert!(
                    noisy >= clean - 1e-3,
                    "{name}/{measure:?}: noisy {noisy} vs clean {clean}"
                );
            }
        }
    }
}
