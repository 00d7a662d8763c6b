//! Dense complex linear algebra helpers: Kronecker products, Hermitian
//! eigendecomposition (cyclic Jacobi) and matrix exponentials of Hermitian
//! operators.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{QfmError, Result};

pub type C64 = Complex64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> Array2<C64> {
    Array2::eye(dim)
}

pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[[i, j]];
            for k in 0..rb {
                for l in 0..cb {
                    out[[i * rb + k, j * cb + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_deviation(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    dev
}

pub fn is_unitary(m: &Array2<C64>, tol: f64) -> bool {
    let n = m.nrows();
    if m.ncols() != n {
        return false;
    }
    let prod = m.dot(&dagger(m));
    max_abs_diff(&prod, &identity(n)) <= tol
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order with matching unit-norm
/// eigenvector columns. The phase of each eigenvector is fixed by making its
/// first non-negligible amplitude real and positive, so results are
/// reproducible even for degenerate spectra.
pub fn hermitian_eig(m: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(QfmError::DimensionMismatch {
            expected: n,
            got: m.ncols(),
        });
    }
    let dev = hermiticity_deviation(m);
    if dev > 1e-8 {
        return Err(QfmError::NonHermitian { deviation: dev });
    }

    let mut a = m.clone();
    // Symmetrize exactly so round-off in the input cannot accumulate.
    for i in 0..n {
        a[[i, i]] = c(a[[i, i]].re, 0.0);
        for j in (i + 1)..n {
            let avg = (a[[i, j]] + a[[j, i]].conj()) * 0.5;
            a[[i, j]] = avg;
            a[[j, i]] = avg.conj();
        }
    }
    let mut v = identity(n);

    let tol = 1e-14 * a.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for _sweep in 0..100 {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[[p, q]].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                let abs = apq.norm();
                if abs <= tol * 1e-2 {
                    continue;
                }
                let phase = apq / abs;
                let app = a[[p, p]].re;
                let aqq = a[[q, q]].re;
                let tau = (aqq - app) / (2.0 * abs);
                let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // Columns: col_p' = c*col_p - s*conj(phase)*col_q,
                //          col_q' = s*phase*col_p + c*col_q
                for i in 0..n {
                    let aip = a[[i, p]];
                    let aiq = a[[i, q]];
                    a[[i, p]] = aip * cs - aiq * sn * phase.conj();
                    a[[i, q]] = aip * sn * phase + aiq * cs;
                }
                for j in 0..n {
                    let apj = a[[p, j]];
                    let aqj = a[[q, j]];
                    a[[p, j]] = apj * cs - aqj * sn * phase;
                    a[[q, j]] = apj * sn * phase.conj() + aqj * cs;
                }
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = vip * cs - viq * sn * phase.conj();
                    v[[i, q]] = vip * sn * phase + viq * cs;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let eigs: Vec<f64> = (0..n).map(|i| a[[i, i]].re).collect();
    order.sort_by(|&i, &j| eigs[j].partial_cmp(&eigs[i]).unwrap());

    let mut values = Vec::with_capacity(n);
    let mut vectors = Array2::zeros((n, n));
    for (col, &idx) in order.iter().enumerate() {
        values.push(eigs[idx]);
        let mut column: Array1<C64> = v.column(idx).to_owned();
        if let Some(first) = column.iter().find(|z| z.norm() > 1e-12) {
            let ph = first / first.norm();
            column.mapv_inplace(|z| z * ph.conj());
        }
        for i in 0..n {
            vectors[[i, col]] = column[i];
        }
    }
    Ok((values, vectors))
}

/// exp(factor * H) for Hermitian H, via eigendecomposition.
pub fn expm_hermitian(h: &Array2<C64>, factor: C64) -> Result<Array2<C64>> {
    let n = h.nrows();
    let (vals, vecs) = hermitian_eig(h)?;
    let mut diag = Array2::zeros((n, n));
    for (i, &lambda) in vals.iter().enumerate() {
        diag[[i, i]] = (factor * lambda).exp();
    }
    Ok(vecs.dot(&diag).dot(&dagger(&vecs)))
}
