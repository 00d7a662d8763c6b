//! Fourier diagnostics: exact coefficient extraction by DFT on the
//! band-limited spectrum, the coefficient-correlation fingerprint, the FCC
//! score, and a Fourier-series dataset generator.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{QfmError, Result};
use crate::linalg::{c, C64};
use crate::model::{forward, ExecutionRequest, Model, Spectrum};
use crate::rng::RngStream;

/// Complex coefficients on the cartesian product of per-feature spectra,
/// row-major over `spectra`.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub spectra: Vec<Spectrum>,
    pub coefficients: Vec<C64>,
}

impl CoefficientSet {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Multi-frequency label of a flattened index.
    pub fn label(&self, mut flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.spectra.len()];
        for d in (0..self.spectra.len()).rev() {
            let len = self.spectra[d].frequencies.len();
            out[d] = self.spectra[d].frequencies[flat % len];
            flat /= len;
        }
        out
    }

    /// Index of the mirrored frequency vector -omega. Relies on each spectrum
    /// being symmetric about 0 and sorted.
    fn mirror_index(&self, mut flat: usize) -> usize {
        let mut out = 0usize;
        let mut stride = 1usize;
        for d in (0..self.spectra.len()).rev() {
            let len = self.spectra[d].frequencies.len();
            let i = flat % len;
            flat /= len;
            out += (len - 1 - i) * stride;
            stride *= len;
        }
        out
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        for i in 0..self.len() {
            let j = self.mirror_index(i);
            let dev = (self.coefficients[i] - self.coefficients[j].conj()).norm();
            if dev > tol {
                return Err(QfmError::Numerical(format!(
                    "coefficients violate Hermitian symmetry by {dev:.3e}"
                )));
            }
        }
        Ok(())
    }
}

/// The truncated Fourier series sum Re[ sum_omega c_omega e^{i omega.x} ].
pub fn evaluate_series(coeffs: &CoefficientSet, x: &[f64]) -> Result<f64> {
    if x.len() != coeffs.spectra.len() {
        return Err(QfmError::DimensionMismatch {
            expected: coeffs.spectra.len(),
            got: x.len(),
        });
    }
    coeffs.check_hermitian(1e-9)?;
    let mut acc = c(0.0, 0.0);
    for flat in 0..coeffs.len() {
        let omega = coeffs.label(flat);
        let phase: f64 = omega.iter().zip(x.iter()).map(|(w, xi)| w * xi).sum();
        acc += coeffs.coefficients[flat] * c(0.0, phase).exp();
    }
    Ok(acc.re)
}

/// Exact coefficients of a model by DFT over the tensor sampling grid with
/// per-dimension size 2*omega_max + 1 on [0, 2pi).
pub fn fft_coefficients(model: &Model, params: &Array2<f64>, n_features: usize) -> Result<CoefficientSet> {
    let spectra = model.spectrum(n_features)?;
    let mut grid_sizes = Vec::with_capacity(spectra.len());
    for s in &spectra {
        let wmax = s.max_frequency_int()?; // rejects non-integer grids
        grid_sizes.push((2 * wmax + 1) as usize);
    }
    let total: usize = grid_sizes.iter().product();

    // Evaluate the model on the full grid.
    let request = ExecutionRequest::expval();
    let values: Result<Vec<f64>> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rem = flat;
            let mut x = vec![0.0; grid_sizes.len()];
            for d in (0..grid_sizes.len()).rev() {
                let n = grid_sizes[d];
                x[d] = 2.0 * std::f64::consts::PI * (rem % n) as f64 / n as f64;
                rem /= n;
            }
            let mut rng = RngStream::from_seed(0); // analytic path: unused
            forward(model, &x, params, &request, &mut rng)?.expval()
        })
        .collect();
    let values = values?;

    let n_coeffs: usize = spectra.iter().map(|s| s.frequencies.len()).product();
    let mut coefficients = vec![c(0.0, 0.0); n_coeffs];
    let labels: Vec<Vec<f64>> = {
        let probe = CoefficientSet {
            spectra: spectra.clone(),
            coefficients: vec![c(0.0, 0.0); n_coeffs],
        };
        (0..n_coeffs).map(|i| probe.label(i)).collect()
    };
    for (ci, coeff) in coefficients.iter_mut().enumerate() {
        let omega = &labels[ci];
        let mut acc = c(0.0, 0.0);
        for (flat, &f) in values.iter().enumerate() {
            let mut rem = flat;
            let mut phase = 0.0;
            for d in (0..grid_sizes.len()).rev() {
                let n = grid_sizes[d];
                let xk = 2.0 * std::f64::consts::PI * (rem % n) as f64 / n as f64;
                rem /= n;
                phase += omega[d] * xk;
            }
            acc += c(0.0, -phase).exp() * f;
        }
        *coeff = acc / total as f64;
    }
    Ok(CoefficientSet {
        spectra,
        coefficients,
    })
}

/// Pairwise complex Pearson correlations of the coefficients over a parameter
/// sample set.
#[derive(Debug, Clone)]
pub struct Fingerprint {
    /// Multi-frequency label per matrix row/column.
    pub labels: Vec<Vec<f64>>,
    pub r: Array2<C64>,
}

pub fn fingerprint(model: &Model, param_sets: &[Array2<f64>], n_features: usize) -> Result<Fingerprint> {
    if param_sets.len() < 2 {
        return Err(QfmError::InvalidParameter(
            "fingerprint requires at least 2 parameter samples".to_string(),
        ));
    }
    let sample_sets: Result<Vec<CoefficientSet>> = param_sets
        .par_iter()
        .map(|theta| fft_coefficients(model, theta, n_features))
        .collect();
    let sample_sets = sample_sets?;
    let labels: Vec<Vec<f64>> = (0..sample_sets[0].len())
        .map(|i| sample_sets[0].label(i))
        .collect();
    let streams: Vec<Vec<C64>> = (0..labels.len())
        .map(|i| sample_sets.iter().map(|s| s.coefficients[i]).collect())
        .collect();
    Ok(fingerprint_from_streams(labels, &streams))
}

/// Correlation matrix from one coefficient stream per frequency (each stream
/// indexed by parameter sample).
pub fn fingerprint_from_streams(labels: Vec<Vec<f64>>, streams: &[Vec<C64>]) -> Fingerprint {
    let k = streams.len();
    let n = streams.first().map_or(0, |s| s.len()) as f64;
    let means: Vec<C64> = streams
        .iter()
        .map(|s| s.iter().sum::<C64>() / n)
        .collect();
    let vars: Vec<f64> = streams
        .iter()
        .zip(&means)
        .map(|(s, m)| s.iter().map(|z| (z - m).norm_sqr()).sum())
        .collect();
    let mut r = Array2::zeros((k, k));
    for i in 0..k {
        for j in 0..k {
            if i == j {
                r[[i, j]] = c(1.0, 0.0);
                continue;
            }
            // Structurally frozen coefficients carry no information: r = 0.
            if vars[i] < 1e-24 || vars[j] < 1e-24 {
                r[[i, j]] = c(0.0, 0.0);
                continue;
            }
            let cov: C64 = streams[i]
                .iter()
                .zip(streams[j].iter())
                .map(|(a, b)| (a - means[i]) * (b - means[j]).conj())
                .sum();
            r[[i, j]] = cov / (vars[i] * vars[j]).sqrt();
        }
    }
    Fingerprint { labels, r }
}

/// FCC = (1/|Omega|) sum |r|; ranges over [1, |Omega|]. With `normalized`,
/// the sum is divided by |Omega|^2 instead, giving a value in (0, 1].
pub fn fcc(fp: &Fingerprint, normalized: bool) -> f64 {
    let k = fp.labels.len();
    let total: f64 = fp.r.iter().map(|z| z.norm()).sum();
    if normalized {
        total / (k * k) as f64
    } else {
        total / k as f64
    }
}

/// A synthetic regression dataset drawn from a random truncated Fourier
/// series over the given one-dimensional spectrum.
#[derive(Debug, Clone)]
pub struct FourierDataset {
    pub coefficients: CoefficientSet,
    pub points: Vec<(f64, f64)>,
}

pub fn generate_dataset(
    spectrum: &Spectrum,
    n_points: usize,
    domain: (f64, f64),
    rng: &mut RngStream,
) -> Result<FourierDataset> {
    if n_points == 0 {
        return Err(QfmError::InvalidParameter(
            "dataset requires at least one point".to_string(),
        ));
    }
    let k = spectrum.frequencies.len();
    let mut coefficients = vec![c(0.0, 0.0); k];
    // Sample the non-negative half uniformly on the unit disc, mirror the
    // rest so targets come out real.
    for i in 0..k {
        let w = spectrum.frequencies[i];
        if w < 0.0 {
            continue;
        }
        let radius = rng.uniform(0.0, 1.0).sqrt();
        let angle = rng.uniform(0.0, 2.0 * std::f64::consts::PI);
        let z = c(radius * angle.cos(), radius * angle.sin());
        if w == 0.0 {
            coefficients[i] = c(z.re, 0.0);
        } else {
            coefficients[i] = z;
            let j = spectrum
                .frequencies
                .iter()
                .position(|&f| (f + w).abs() < 1e-12)
                .ok_or_else(|| QfmError::Numerical("spectrum not symmetric".to_string()))?;
            coefficients[j] = z.conj();
        }
    }
    let coefficients = CoefficientSet {
        spectra: vec![spectrum.clone()],
        coefficients,
    };
    let mut points = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        let x = rng.uniform(domain.0, domain.1);
        let y = evaluate_series(&coefficients, &[x])?;
        points.push((x, y));
    }
    Ok(FourierDataset {
        coefficients,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::ansatz_by_name;
    use crate::model::{init_params, EncodingStrategy, InitStrategy};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn idle_model(n: usize, l: usize) -> Model {
        Model::standard(
            n,
            l,
            ansatz_by_name("Idle", n).unwrap(),
            EncodingStrategy::hamming_rx(),
        )
        .unwrap()
    }

    #[test]
    fn cosine_model_coefficients() {
        // <Z> = cos x: c_0 = 0, c_{+-1} = 1/2.
        let model = idle_model(1, 1);
        let params = Array2::zeros(model.param_shape());
        let coeffs = fft_coefficients(&model, &params, 1).unwrap();
        assert_eq!(coeffs.len(), 3);
        assert_abs_diff_eq!(coeffs.coefficients[1].norm(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(coeffs.coefficients[0].re, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(coeffs.coefficients[2].re, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(coeffs.coefficients[0].im, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn identity_observable_is_constant() {
        let mut model = idle_model(1, 1);
        model.observable = crate::quantum::Observable::parse("I", vec![0]).unwrap();
        let params = Array2::zeros(model.param_shape());
        let coeffs = fft_coefficients(&model, &params, 1).unwrap();
        assert_abs_diff_eq!(coeffs.coefficients[1].re, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(coeffs.coefficients[0].norm(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(coeffs.coefficients[2].norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn roundtrip_random_model() {
        let model = Model::standard(
            3,
            2,
            ansatz_by_name("HEA", 3).unwrap(),
            EncodingStrategy::hamming_rx(),
        )
        .unwrap();
        let mut rng = RngStream::from_seed(21);
        let params = init_params(
            InitStrategy::Uniform { lo: 0.0, hi: 2.0 * PI },
            model.param_shape(),
            &mut rng,
        )
        .unwrap();
        let coeffs = fft_coefficients(&model, &params, 1).unwrap();
        coeffs.check_hermitian(1e-9).unwrap();
        // Pauli observables bound every coefficient magnitude by 1.
        assert!(coeffs.coefficients.iter().all(|z| z.norm() <= 1.0 + 1e-9));
        let request = ExecutionRequest::expval();
        for _ in 0..50 {
            let x = rng.uniform(0.0, 2.0 * PI);
            let direct = forward(&model, &[x], &params, &request, &mut rng)
                .unwrap()
                .expval()
                .unwrap();
            let series = evaluate_series(&coeffs, &[x]).unwrap();
            assert_abs_diff_eq!(direct, series, epsilon = 1e-8);
        }
    }

    #[test]
    fn parseval() {
        let model = Model::standard(
            2,
            1,
            ansatz_by_name("SEA", 2).unwrap(),
            EncodingStrategy::hamming_rx(),
        )
        .unwrap();
        let mut rng = RngStream::from_seed(3);
        let params = init_params(
            InitStrategy::Uniform { lo: 0.0, hi: 2.0 * PI },
            model.param_shape(),
            &mut rng,
        )
        .unwrap();
        let coeffs = fft_coefficients(&model, &params, 1).unwrap();
        let power: f64 = coeffs.coefficients.iter().map(|z| z.norm_sqr()).sum();
        // Mean of f^2 over the sampling grid.
        let wmax = coeffs.spectra[0].max_frequency_int().unwrap();
        let n = (2 * wmax + 1) as usize;
        let request = ExecutionRequest::expval();
        let mean_sq: f64 = (0..n)
            .map(|k| {
                let x = 2.0 * PI * k as f64 / n as f64;
                let f = forward(&model, &[x], &params, &request, &mut rng)
                    .unwrap()
                    .expval()
                    .unwrap();
                f * f
            })
            .sum::<f64>()
            / n as f64;
        assert_abs_diff_eq!(power, mean_sq, epsilon = 1e-8);
    }

    #[test]
    fn fingerprint_bounds_and_diagonal() {
        let model = Model::standard(
            2,
            1,
            ansatz_by_name("HEA", 2).unwrap(),
            EncodingStrategy::hamming_rx(),
        )
        .unwrap();
        let mut rng = RngStream::from_seed(8);
        let thetas: Vec<Array2<f64>> = (0..20)
            .map(|_| {
                init_params(
                    InitStrategy::Uniform { lo: 0.0, hi: 2.0 * PI },
                    model.param_shape(),
                    &mut rng,
                )
                .unwrap()
            })
            .collect();
        let fp = fingerprint(&model, &thetas, 1).unwrap();
        let k = fp.labels.len();
        for i in 0..k {
            assert_abs_diff_eq!(fp.r[[i, i]].re, 1.0, epsilon = 1e-12);
            for j in 0..k {
                assert!(fp.r[[i, j]].norm() <= 1.0 + 1e-9);
                let conj_dev = (fp.r[[j, i]] - fp.r[[i, j]].conj()).norm();
                assert!(conj_dev < 1e-9);
            }
        }
        let score = fcc(&fp, false);
        assert!(score >= 1.0 - 1e-12);
        assert!(score <= k as f64 + 1e-9);
    }

    #[test]
    fn fingerprint_linear_relation() {
        // Two streams in exact linear relation: |r| = 1.
        let mut rng = RngStream::from_seed(4);
        let a: Vec<C64> = (0..50)
            .map(|_| c(rng.standard_normal(), rng.standard_normal()))
            .collect();
        let alpha = c(0.3, -0.8);
        let b: Vec<C64> = a.iter().map(|z| z * alpha).collect();
        let fp = fingerprint_from_streams(vec![vec![-1.0], vec![1.0]], &[a, b]);
        assert_abs_diff_eq!(fp.r[[0, 1]].norm(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn fcc_extremes() {
        // r = identity: FCC = 1.
        let k = 5;
        let streams: Vec<Vec<C64>> = (0..k)
            .map(|i| {
                let mut rng = RngStream::from_seed(100 + i as u64);
                (0..200)
                    .map(|_| c(rng.standard_normal(), rng.standard_normal()))
                    .collect()
            })
            .collect();
        let labels = (0..k).map(|i| vec![i as f64]).collect();
        let fp = fingerprint_from_streams(labels, &streams);
        let score = fcc(&fp, false);
        assert!(score < 1.5, "independent streams should give FCC near 1, got {score}");

        // Fully correlated: FCC = |Omega|.
        let base = streams[0].clone();
        let copies: Vec<Vec<C64>> = (0..k)
            .map(|i| base.iter().map(|z| z * (i + 1) as f64).collect())
            .collect();
        let labels = (0..k).map(|i| vec![i as f64]).collect();
        let fp = fingerprint_from_streams(labels, &copies);
        assert_abs_diff_eq!(fcc(&fp, false), k as f64, epsilon = 1e-9);
        assert_abs_diff_eq!(fcc(&fp, true), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn frozen_coefficient_r_zero() {
        let frozen = vec![c(0.25, 0.0); 30];
        let mut rng = RngStream::from_seed(2);
        let live: Vec<C64> = (0..30)
            .map(|_| c(rng.standard_normal(), rng.standard_normal()))
            .collect();
        let fp = fingerprint_from_streams(vec![vec![0.0], vec![1.0]], &[frozen, live]);
        assert_abs_diff_eq!(fp.r[[0, 1]].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fp.r[[0, 0]].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dataset_constant_spectrum() {
        let spectrum = Spectrum {
            frequencies: vec![0.0],
            degeneracies: vec![1],
        };
        let mut rng = RngStream::from_seed(6);
        let ds = generate_dataset(&spectrum, 10, (0.0, 2.0 * PI), &mut rng).unwrap();
        let first = ds.points[0].1;
        for &(_, y) in &ds.points {
            assert_abs_diff_eq!(y, first, epsilon = 1e-12);
        }
    }

    #[test]
    fn dataset_self_consistent_and_bounded() {
        let spectrum = Spectrum {
            frequencies: (-3..=3).map(|w| w as f64).collect(),
            degeneracies: vec![1; 7],
        };
        let mut rng = RngStream::from_seed(7);
        let ds = generate_dataset(&spectrum, 200, (0.0, 2.0 * PI), &mut rng).unwrap();
        let bound: f64 = ds.coefficients.coefficients.iter().map(|z| z.norm()).sum();
        for &(x, y) in &ds.points {
            assert_abs_diff_eq!(
                y,
                evaluate_series(&ds.coefficients, &[x]).unwrap(),
                epsilon = 1e-12
            );
            assert!(y.abs() <= bound + 1e-12);
        }
        // Determinism per seed.
        let mut rng2 = RngStream::from_seed(7);
        let ds2 = generate_dataset(&spectrum, 200, (0.0, 2.0 * PI), &mut rng2).unwrap();
        assert_eq!(ds.points, ds2.points);
    }

    #[test]
    fn series_evaluation_basics() {
        let spectrum = Spectrum {
            frequencies: vec![-1.0, 0.0, 1.0],
            degeneracies: vec![1, 1, 1],
        };
        let half_cos = CoefficientSet {
            spectra: vec![spectrum.clone()],
            coefficients: vec![c(0.5, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        };
        for x in [0.0, 0.7, 2.0] {
            assert_abs_diff_eq!(
                evaluate_series(&half_cos, &[x]).unwrap(),
                x.cos(),
                epsilon = 1e-12
            );
        }
        let constant = CoefficientSet {
            spectra: vec![spectrum],
            coefficients: vec![c(0.0, 0.0), c(0.3, 0.0), c(0.0, 0.0)],
        };
        assert_abs_diff_eq!(evaluate_series(&constant, &[1.3]).unwrap(), 0.3, epsilon = 1e-12);
    }

    #[test]
    fn asymmetric_coefficients_rejected() {
        let spectrum = Spectrum {
            frequencies: vec![-1.0, 0.0, 1.0],
            degeneracies: vec![1, 1, 1],
        };
        let bad = CoefficientSet {
            spectra: vec![spectrum],
            coefficients: vec![c(0.5, 0.2), c(0.0, 0.0), c(0.5, 0.2)],
        };
        assert!(evaluate_series(&bad, &[0.0]).is_err());
    }

    #[test]
    fn two_feature_coefficients_roundtrip() {
        let model = Model::standard(
            2,
            1,
            ansatz_by_name("HEA", 2).unwrap(),
            EncodingStrategy::hamming_rx(),
        )
        .unwrap();
        let mut rng = RngStream::from_seed(31);
        let params = init_params(
            InitStrategy::Uniform { lo: 0.0, hi: 2.0 * PI },
            model.param_shape(),
            &mut rng,
        )
        .unwrap();
        let coeffs = fft_coefficients(&model, &params, 2).unwrap();
        let request = ExecutionRequest::expval();
        for _ in 0..20 {
            let x = [rng.uniform(0.0, 2.0 * PI), rng.uniform(0.0, 2.0 * PI)];
            let direct = forward(&model, &x, &params, &request, &mut rng)
                .unwrap()
                .expval()
                .unwrap();
            assert_abs_diff_eq!(direct, evaluate_series(&coeffs, &x).unwrap(), epsilon = 1e-8);
        }
    }
}
