//! Core state operations: gate application, expectation values, partial
//! traces, the depolarizing channel, sampling, and circuit execution.

use ndarray::{Array1, Array2};

use crate::error::{QfmError, Result};
use crate::linalg::{c, C64};
use crate::rng::RngStream;

use super::gates::{embed_gate, Circuit, Gate, GateMatrix};
use super::state::{DensityMatrix, Observable, Pauli, StateVector};

fn check_wires(wires: &[usize], n_qubits: usize) -> Result<()> {
    for &w in wires {
        if w >= n_qubits {
            return Err(QfmError::WireOutOfRange { wire: w, n_qubits });
        }
    }
    let mut sorted = wires.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != wires.len() {
        return Err(QfmError::InvalidParameter(
            "gate wires must be distinct".to_string(),
        ));
    }
    Ok(())
}

/// Applies a k-wire gate in place on a raw amplitude vector of length 2^n.
/// Qubit 0 is the most significant bit of the basis index.
fn apply_gate_to_amplitudes(
    amps: &mut Array1<C64>,
    gate: &GateMatrix,
    n_qubits: usize,
) -> Result<()> {
    check_wires(&gate.wires, n_qubits)?;
    let k = gate.wires.len();
    let sub_dim = 1usize << k;
    if gate.matrix.nrows() != sub_dim {
        return Err(QfmError::DimensionMismatch {
            expected: sub_dim,
            got: gate.matrix.nrows(),
        });
    }
    let wire_masks: Vec<usize> = gate
        .wires
        .iter()
        .map(|&w| 1 << (n_qubits - 1 - w))
        .collect();
    let all_wires_mask: usize = wire_masks.iter().fold(0, |a, m| a | m);

    // Bit positions (from LSB) not covered by gate wires.
    let rest_positions: Vec<usize> = (0..n_qubits)
        .map(|b| 1usize << b)
        .filter(|m| m & all_wires_mask == 0)
        .collect();

    let mut gathered = vec![c(0.0, 0.0); sub_dim];
    for r in 0..(1usize << rest_positions.len()) {
        let mut base = 0usize;
        for (bit, &mask) in rest_positions.iter().enumerate() {
            if r & (1 << bit) != 0 {
                base |= mask;
            }
        }
        for (s, slot) in gathered.iter_mut().enumerate() {
            let mut idx = base;
            for (j, &m) in wire_masks.iter().enumerate() {
                if s & (1 << (k - 1 - j)) != 0 {
                    idx |= m;
                }
            }
            *slot = amps[idx];
        }
        for s_out in 0..sub_dim {
            let mut acc = c(0.0, 0.0);
            for (s_in, amp) in gathered.iter().enumerate() {
                acc += gate.matrix[[s_out, s_in]] * amp;
            }
            let mut idx = base;
            for (j, &m) in wire_masks.iter().enumerate() {
                if s_out & (1 << (k - 1 - j)) != 0 {
                    idx |= m;
                }
            }
            amps[idx] = acc;
        }
    }
    Ok(())
}

/// U |psi>.
pub fn apply_unitary_state(state: &StateVector, gate: &GateMatrix) -> Result<StateVector> {
    let mut amps = state.amplitudes.clone();
    apply_gate_to_amplitudes(&mut amps, gate, state.n_qubits)?;
    Ok(StateVector {
        n_qubits: state.n_qubits,
        amplitudes: amps,
    })
}

/// U rho U^dagger.
pub fn apply_unitary_density(rho: &DensityMatrix, gate: &GateMatrix) -> Result<DensityMatrix> {
    check_wires(&gate.wires, rho.n_qubits)?;
    let dim = rho.dim();
    let mut out = rho.matrix.clone();
    // U rho: apply the gate to every column.
    for col in 0..dim {
        let mut column = out.column(col).to_owned();
        apply_gate_to_amplitudes(&mut column, gate, rho.n_qubits)?;
        out.column_mut(col).assign(&column);
    }
    // (U rho) U^dagger = conj(U applied to conj of every row).
    let conj_gate = GateMatrix {
        wires: gate.wires.clone(),
        matrix: gate.matrix.mapv(|z| z.conj()),
    };
    for row in 0..dim {
        let mut r = out.row(row).to_owned();
        apply_gate_to_amplitudes(&mut r, &conj_gate, rho.n_qubits)?;
        out.row_mut(row).assign(&r);
    }
    Ok(DensityMatrix {
        n_qubits: rho.n_qubits,
        matrix: out,
    })
}

/// Action of a Pauli string on a basis index: returns the image index and the
/// accumulated phase.
fn pauli_action(obs: &Observable, n_qubits: usize, index: usize) -> (usize, C64) {
    let mut target = index;
    let mut phase = c(1.0, 0.0);
    for (&pauli, &qubit) in obs.pauli_string.iter().zip(obs.target_qubits.iter()) {
        let mask = 1usize << (n_qubits - 1 - qubit);
        let bit = index & mask != 0;
        match pauli {
            Pauli::I => {}
            Pauli::X => target ^= mask,
            Pauli::Y => {
                target ^= mask;
                // Y|0> = i|1>, Y|1> = -i|0>
                phase *= if bit { c(0.0, -1.0) } else { c(0.0, 1.0) };
            }
            Pauli::Z => {
                if bit {
                    phase = -phase;
                }
            }
        }
    }
    (target, phase)
}

/// <psi| M |psi> for a Pauli observable.
pub fn expectation_state(state: &StateVector, obs: &Observable) -> Result<f64> {
    check_wires(&obs.target_qubits, state.n_qubits)?;
    state.check_normalized(1e-8)?;
    let mut acc = c(0.0, 0.0);
    for i in 0..state.dim() {
        let (j, phase) = pauli_action(obs, state.n_qubits, i);
        acc += state.amplitudes[j].conj() * phase * state.amplitudes[i];
    }
    Ok(acc.re)
}

/// Tr[rho M] for a Pauli observable.
pub fn expectation_density(rho: &DensityMatrix, obs: &Observable) -> Result<f64> {
    check_wires(&obs.target_qubits, rho.n_qubits)?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(QfmError::NotNormalized {
            deviation: (tr - c(1.0, 0.0)).norm(),
        });
    }
    // M|i> = phase_i |pi(i)>  =>  Tr[rho M] = sum_i phase_i rho[pi(i), i]...
    // Tr[rho M] = sum_{i,j} rho_ij M_ji with M_ji = phase_i delta_{j,pi(i)}.
    let mut acc = c(0.0, 0.0);
    for i in 0..rho.dim() {
        let (j, phase) = pauli_action(obs, rho.n_qubits, i);
        acc += rho.matrix[[i, j]] * phase;
    }
    Ok(acc.re)
}

/// Reduced density matrix over `keep` (ascending qubit indices keep their
/// relative significance).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(QfmError::InvalidParameter(
            "partial_trace requires a non-empty keep set".to_string(),
        ));
    }
    check_wires(keep, rho.n_qubits)?;
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    let n = rho.n_qubits;
    let k = keep_sorted.len();
    let keep_masks: Vec<usize> = keep_sorted.iter().map(|&q| 1 << (n - 1 - q)).collect();
    let traced_masks: Vec<usize> = (0..n)
        .filter(|q| !keep_sorted.contains(q))
        .map(|q| 1 << (n - 1 - q))
        .collect();

    let full_index = |sub: usize, rest: usize| -> usize {
        let mut idx = 0usize;
        for (j, &m) in keep_masks.iter().enumerate() {
            if sub & (1 << (k - 1 - j)) != 0 {
                idx |= m;
            }
        }
        for (j, &m) in traced_masks.iter().enumerate() {
            if rest & (1 << j) != 0 {
                idx |= m;
            }
        }
        idx
    };

    let sub_dim = 1usize << k;
    let mut out = Array2::zeros((sub_dim, sub_dim));
    for a in 0..sub_dim {
        for b in 0..sub_dim {
            let mut acc = c(0.0, 0.0);
            for rest in 0..(1usize << traced_masks.len()) {
                acc += rho.matrix[[full_index(a, rest), full_index(b, rest)]];
            }
            out[[a, b]] = acc;
        }
    }
    Ok(DensityMatrix {
        n_qubits: k,
        matrix: out,
    })
}

/// Reduced density matrix of a pure state without forming |psi><psi| first.
pub fn reduced_from_state(state: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(QfmError::InvalidParameter(
            "reduced_from_state requires a non-empty keep set".to_string(),
        ));
    }
    check_wires(keep, state.n_qubits)?;
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    let n = state.n_qubits;
    let k = keep_sorted.len();
    let keep_masks: Vec<usize> = keep_sorted.iter().map(|&q| 1 << (n - 1 - q)).collect();
    let traced_masks: Vec<usize> = (0..n)
        .filter(|q| !keep_sorted.contains(q))
        .map(|q| 1 << (n - 1 - q))
        .collect();
    let full_index = |sub: usize, rest: usize| -> usize {
        let mut idx = 0usize;
        for (j, &m) in keep_masks.iter().enumerate() {
            if sub & (1 << (k - 1 - j)) != 0 {
                idx |= m;
            }
        }
        for (j, &m) in traced_masks.iter().enumerate() {
            if rest & (1 << j) != 0 {
                idx |= m;
            }
        }
        idx
    };
    let sub_dim = 1usize << k;
    let mut out = Array2::zeros((sub_dim, sub_dim));
    for rest in 0..(1usize << traced_masks.len()) {
        for a in 0..sub_dim {
            let amp_a = state.amplitudes[full_index(a, rest)];
            if amp_a == c(0.0, 0.0) {
                continue;
            }
            for b in 0..sub_dim {
                out[[a, b]] += amp_a * state.amplitudes[full_index(b, rest)].conj();
            }
        }
    }
    Ok(DensityMatrix {
        n_qubits: k,
        matrix: out,
    })
}

/// Single-qubit depolarizing channel applied to each listed qubit:
/// rho -> (1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z).
pub fn depolarize(rho: &DensityMatrix, p: f64, qubits: &[usize]) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QfmError::InvalidProbability { value: p });
    }
    check_wires(qubits, rho.n_qubits)?;
    let mut out = rho.clone();
    for &q in qubits {
        let paulis = [
            super::gates::pauli_x(),
            super::gates::pauli_y(),
            super::gates::pauli_z(),
        ];
        let mut mixed = out.matrix.mapv(|z| z * (1.0 - p));
        for pm in &paulis {
            let gate = GateMatrix {
                wires: vec![q],
                matrix: pm.clone(),
            };
            let conj = apply_unitary_density(&out, &gate)?;
            mixed += &conj.matrix.mapv(|z| z * (p / 3.0));
        }
        out = DensityMatrix {
            n_qubits: rho.n_qubits,
            matrix: mixed,
        };
    }
    Ok(out)
}

/// Eigendecomposition of a density matrix: descending eigenvalues and the
/// matching eigenstates, with deterministic phase normalization.
pub fn eigendecompose(rho: &DensityMatrix) -> Result<(Vec<f64>, Vec<StateVector>)> {
    let (vals, vecs) = crate::linalg::hermitian_eig(&rho.matrix)?;
    let sum: f64 = vals.iter().sum();
    if (sum - 1.0).abs() > 1e-8 {
        return Err(QfmError::NotNormalized {
            deviation: (sum - 1.0).abs(),
        });
    }
    if let Some(&min) = vals.last() {
        if min < -1e-10 {
            return Err(QfmError::NotPositive {
                min_eigenvalue: min,
            });
        }
    }
    let states = (0..vals.len())
        .map(|i| StateVector {
            n_qubits: rho.n_qubits,
            amplitudes: vecs.column(i).to_owned(),
        })
        .collect();
    Ok((vals, states))
}

/// Draws `shots` outcomes from a probability vector; deterministic per stream.
pub fn sample_outcomes(probs: &[f64], shots: u64, rng: &mut RngStream) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(QfmError::InvalidParameter("shots must be >= 1".to_string()));
    }
    let mut total = 0.0;
    for &p in probs {
        if p < -1e-8 {
            return Err(QfmError::InvalidProbability { value: p });
        }
        total += p.max(0.0);
    }
    if (total - 1.0).abs() > 1e-8 {
        return Err(QfmError::NotNormalized {
            deviation: (total - 1.0).abs(),
        });
    }
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p.max(0.0) / total;
        cdf.push(acc);
    }
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u = rng.uniform(0.0, 1.0);
        let idx = cdf.partition_point(|&x| x <= u).min(probs.len() - 1);
        counts[idx] += 1;
    }
    Ok(counts)
}

/// Brute-force product of embedded gate matrices, in application order.
/// Intentionally limited to small registers; used as the simulator oracle.
pub fn full_circuit_unitary(gates: &[Gate], n_qubits: usize) -> Result<GateMatrix> {
    if n_qubits > 10 {
        return Err(QfmError::InvalidParameter(format!(
            "full_circuit_unitary is limited to 10 qubits, got {n_qubits}"
        )));
    }
    let dim = 1usize << n_qubits;
    let mut total: Array2<C64> = Array2::eye(dim);
    for gate in gates {
        let gm = gate.to_gate_matrix()?;
        let embedded = embed_gate(&gm, n_qubits)?;
        total = embedded.dot(&total);
    }
    GateMatrix::new((0..n_qubits).collect(), total)
}

/// Runs a circuit on |0...0> through the statevector path.
pub fn run_statevector(circuit: &Circuit) -> Result<StateVector> {
    let mut state = StateVector::zero_state(circuit.n_qubits);
    for gate in &circuit.gates {
        state = apply_unitary_state(&state, &gate.to_gate_matrix()?)?;
    }
    Ok(state)
}

/// Runs a circuit through the density path, applying single-qubit
/// depolarizing noise with probability `noise_p` to every wire a gate touches
/// (after the gate) when `noise_p > 0`.
pub fn run_density(circuit: &Circuit, noise_p: f64) -> Result<DensityMatrix> {
    let mut rho = StateVector::zero_state(circuit.n_qubits).to_density();
    for gate in &circuit.gates {
        rho = apply_unitary_density(&rho, &gate.to_gate_matrix()?)?;
        if noise_p > 0.0 {
            rho = depolarize(&rho, noise_p, &gate.wires)?;
        }
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_hermitian, identity, max_abs_diff};
    use crate::quantum::gates::{cz, hadamard, pauli_x, rx, GateKind};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn bell_state() -> StateVector {
        let mut c2 = Circuit::new(2);
        c2.push(Gate::new(GateKind::H, vec![0]));
        c2.push(Gate::new(GateKind::CX, vec![0, 1]));
        run_statevector(&c2).unwrap()
    }

    #[test]
    fn identity_gate_is_noop() {
        let state = bell_state();
        let id = GateMatrix::new(vec![0], identity(2)).unwrap();
        let out = apply_unitary_state(&state, &id).unwrap();
        assert_eq!(out, state);
    }

    #[test]
    fn x_flips_zero() {
        let s = StateVector::zero_state(1);
        let g = GateMatrix::new(vec![0], pauli_x()).unwrap();
        let out = apply_unitary_state(&s, &g).unwrap();
        assert_abs_diff_eq!(out.amplitudes[1].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.amplitudes[0].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn rx_pi_matches_matrix_exponential_oracle() {
        // RX(pi) on |0> -> (0, -i), cross-checked against exp(-i pi X / 2).
        let s = StateVector::zero_state(1);
        let g = GateMatrix::new(vec![0], rx(PI)).unwrap();
        let out = apply_unitary_state(&s, &g).unwrap();
        assert_abs_diff_eq!(out.amplitudes[0].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.amplitudes[1].re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.amplitudes[1].im, -1.0, epsilon = 1e-12);

        let oracle = expm_hermitian(&pauli_x(), crate::linalg::c(0.0, -PI / 2.0)).unwrap();
        assert!(max_abs_diff(&oracle, &rx(PI)) < 1e-12);
    }

    #[test]
    fn z_expectation_on_zero() {
        let s = StateVector::zero_state(1);
        assert_abs_diff_eq!(
            expectation_state(&s, &Observable::z(0)).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn z_expectation_after_rx_is_cosine() {
        for x in [0.0, PI / 3.0, PI / 2.0, PI] {
            let s = StateVector::zero_state(1);
            let g = GateMatrix::new(vec![0], rx(x)).unwrap();
            let out = apply_unitary_state(&s, &g).unwrap();
            assert_abs_diff_eq!(
                expectation_state(&out, &Observable::z(0)).unwrap(),
                x.cos(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn z0_on_bell_is_zero() {
        let bell = bell_state();
        assert_abs_diff_eq!(
            expectation_state(&bell, &Observable::z(0)).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn expectation_density_matches_state() {
        let bell = bell_state();
        let rho = bell.to_density();
        let obs = Observable::parse("ZZ", vec![0, 1]).unwrap();
        assert_abs_diff_eq!(
            expectation_state(&bell, &obs).unwrap(),
            expectation_density(&rho, &obs).unwrap(),
            epsilon = 1e-12
        );
        // <Z0 Z1> on Bell = +1.
        assert_abs_diff_eq!(expectation_density(&rho, &obs).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn partial_trace_product_state() {
        let rho = StateVector::zero_state(2).to_density();
        let reduced = partial_trace(&rho, &[0]).unwrap();
        assert_abs_diff_eq!(reduced.matrix[[0, 0]].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(reduced.purity(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn partial_trace_bell_is_maximally_mixed() {
        let rho = bell_state().to_density();
        for q in 0..2 {
            let reduced = partial_trace(&rho, &[q]).unwrap();
            assert_abs_diff_eq!(reduced.purity(), 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn partial_trace_keep_all_is_identity_map() {
        let rho = bell_state().to_density();
        let same = partial_trace(&rho, &[0, 1]).unwrap();
        assert!(max_abs_diff(&same.matrix, &rho.matrix) < 1e-14);
    }

    #[test]
    fn partial_trace_empty_keep_rejected() {
        let rho = bell_state().to_density();
        assert!(partial_trace(&rho, &[]).is_err());
    }

    #[test]
    fn reduced_from_state_matches_partial_trace() {
        let bell = bell_state();
        let a = reduced_from_state(&bell, &[1]).unwrap();
        let b = partial_trace(&bell.to_density(), &[1]).unwrap();
        assert!(max_abs_diff(&a.matrix, &b.matrix) < 1e-12);
    }

    #[test]
    fn depolarize_identity_at_p_zero() {
        let rho = bell_state().to_density();
        let out = depolarize(&rho, 0.0, &[0, 1]).unwrap();
        assert!(max_abs_diff(&out.matrix, &rho.matrix) < 1e-14);
    }

    #[test]
    fn depolarize_fully_on_zero_projector() {
        // p = 1 on |0><0| gives diag(1/3, 2/3): only Z keeps |0><0|.
        let rho = StateVector::zero_state(1).to_density();
        let out = depolarize(&rho, 1.0, &[0]).unwrap();
        assert_abs_diff_eq!(out.matrix[[0, 0]].re, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.matrix[[1, 1]].re, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn depolarize_small_p() {
        let rho = StateVector::zero_state(1).to_density();
        let p = 0.01;
        let out = depolarize(&rho, p, &[0]).unwrap();
        assert_abs_diff_eq!(out.matrix[[0, 0]].re, 1.0 - 2.0 * p / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.matrix[[1, 1]].re, 2.0 * p / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.trace().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn depolarize_rejects_bad_probability() {
        let rho = StateVector::zero_state(1).to_density();
        assert!(depolarize(&rho, -0.1, &[0]).is_err());
        assert!(depolarize(&rho, 1.1, &[0]).is_err());
    }

    #[test]
    fn eigendecompose_pure_projector() {
        let rho = bell_state().to_density();
        let (vals, states) = eigendecompose(&rho).unwrap();
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-10);
        for &v in &vals[1..] {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(states[0].norm_squared(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn eigendecompose_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(1);
        let (vals, _) = eigendecompose(&rho).unwrap();
        assert_abs_diff_eq!(vals[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn eigendecompose_diagonal() {
        let mut m = Array2::zeros((2, 2));
        m[[0, 0]] = crate::linalg::c(0.7, 0.0);
        m[[1, 1]] = crate::linalg::c(0.3, 0.0);
        let rho = DensityMatrix { n_qubits: 1, matrix: m };
        let (vals, states) = eigendecompose(&rho).unwrap();
        assert_abs_diff_eq!(vals[0], 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(states[0].amplitudes[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(states[1].amplitudes[1].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sampling_deterministic_and_conserving() {
        let mut rng = RngStream::from_seed(3);
        let counts = sample_outcomes(&[1.0, 0.0], 1000, &mut rng).unwrap();
        assert_eq!(counts, vec![1000, 0]);

        let mut a = RngStream::from_seed(5);
        let mut b = RngStream::from_seed(5);
        let ca = sample_outcomes(&[0.5, 0.5], 10_000, &mut a).unwrap();
        let cb = sample_outcomes(&[0.5, 0.5], 10_000, &mut b).unwrap();
        assert_eq!(ca, cb);
        assert_eq!(ca.iter().sum::<u64>(), 10_000);
    }

    #[test]
    fn sampling_fair_coin_within_five_sigma() {
        let mut rng = RngStream::from_seed(11);
        let shots = 100_000u64;
        let counts = sample_outcomes(&[0.5, 0.5], shots, &mut rng).unwrap();
        let sigma = (shots as f64 * 0.25).sqrt(); // 158.1
        assert!((counts[0] as f64 - 50_000.0).abs() < 5.0 * sigma);
    }

    #[test]
    fn full_unitary_empty_is_identity() {
        let u = full_circuit_unitary(&[], 2).unwrap();
        assert!(max_abs_diff(&u.matrix, &identity(4)) < 1e-14);
    }

    #[test]
    fn full_unitary_single_x() {
        let u = full_circuit_unitary(&[Gate::new(GateKind::X, vec![0])], 2).unwrap();
        let expect = crate::linalg::kron(&pauli_x(), &identity(2));
        assert!(max_abs_diff(&u.matrix, &expect) < 1e-14);
    }

    #[test]
    fn h_cz_h_equals_cx() {
        let gates = vec![
            Gate::new(GateKind::H, vec![1]),
            Gate::new(GateKind::CZ, vec![0, 1]),
            Gate::new(GateKind::H, vec![1]),
        ];
        let u = full_circuit_unitary(&gates, 2).unwrap();
        let cx_emb = embed_gate(
            &GateMatrix::new(vec![0, 1], super::super::gates::cx()).unwrap(),
            2,
        )
        .unwrap();
        assert!(max_abs_diff(&u.matrix, &cx_emb) < 1e-12);
        // Sanity on the pieces used above.
        assert!(max_abs_diff(&hadamard().dot(&hadamard()), &identity(2)) < 1e-12);
        let _ = cz();
    }

    #[test]
    fn density_path_matches_state_path_noiseless() {
        let mut circ = Circuit::new(2);
        circ.push(Gate::new(GateKind::H, vec![0]));
        circ.push(Gate::with_angle(GateKind::CRY, vec![0, 1], 0.7));
        let psi = run_statevector(&circ).unwrap();
        let rho = run_density(&circ, 0.0).unwrap();
        assert!(max_abs_diff(&rho.matrix, &psi.to_density().matrix) < 1e-10);
    }
}
