//! Small dense linear algebra in `f64`, backed by nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::projections::ProjectorPair;
use crate::scalar::{cis_2pi, Real};

pub type CMatrix = DMatrix<Complex<f64>>;
pub type CVector = DVector<Complex<f64>>;

/// `sum_{m in window} e^{2 pi i nu t_m} dt`, the transform of the discrete gate.
pub fn gate_kernel(nu: f64, first_time: f64, count: usize, dt: f64) -> Complex<f64> {
    if count == 0 {
        return Complex::new(0.0, 0.0);
    }
    let step = nu * dt;
    let frac = step - step.round();
    let lead = cis_2pi(nu * first_time);
    if frac.abs() < 1e-15 {
        return lead * (count as f64 * dt);
    }
    let num = Complex::new(1.0, 0.0) - cis_2pi(step * count as f64);
    let den = Complex::new(1.0, 0.0) - cis_2pi(step);
    lead * (num / den) * dt
}

/// Matrix of `P_W P_T P_W` in the in-band coefficient basis:
/// `B_jk = dw * sum_{m in T} e^{2 pi i (w_j - w_k) t_m} dt`.
pub fn in_band_gram<T: Real>(pair: &ProjectorPair<T>) -> CMatrix {
    let grid = pair.grid();
    let fg = grid.frequencies();
    let dw = fg.dw().as_f64();
    let dt = grid.dt().as_f64();
    let bins = pair.band_bins();
    let window = pair.window_samples();
    let m = bins.len();
    let first = grid.time(window.start).as_f64();
    let count = window.len();
    // B depends only on j - k
    let diag: Vec<Complex<f64>> = (0..(2 * m).max(1))
        .map(|d| {
            let offset = d as f64 - m as f64;
            gate_kernel(offset * dw, first, count, dt) * dw
        })
        .collect();
    DMatrix::from_fn(m, m, |j, k| diag[j + m - k])
}

/// Eigenvalues of a Hermitian matrix, largest first.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Eigenpairs of a Hermitian matrix, largest eigenvalue first.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, Vec<CVector>) {
    let eig = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    (values, vectors)
}

/// 2-norm condition number from the singular values.
pub fn condition_number(a: &CMatrix) -> f64 {
    let sv = a.clone().singular_values();
    condition_of(sv.iter().copied())
}

pub fn condition_number_real(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().singular_values();
    condition_of(sv.iter().copied())
}

fn condition_of(sv: impl Iterator<Item = f64>) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for s in sv {
        lo = lo.min(s);
        hi = hi.max(s);
    }
    if hi == 0.0 {
        return f64::INFINITY;
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Solves `a x = b` when `cond(a) <= limit`.
pub fn solve_checked(a: &CMatrix, b: &CVector, limit: f64) -> Result<(CVector, f64)> {
    let condition = condition_number(a);
    if !(condition <= limit) {
        return Err(Error::IllConditioned { condition, limit });
    }
    let x = a
        .clone()
        .lu()
        .solve(b)
        .ok_or(Error::IllConditioned { condition, limit })?;
    Ok((x, condition))
}

/// Real least squares by SVD; returns the solution and the residual norm.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let svd = a.clone().svd(true, true);
    let eps = 1e-14 * svd.singular_values.max();
    let x = svd.solve(b, eps).map_err(|e| Error::Degenerate(e.to_string()))?;
    let residual = (a * &x - b).norm();
    Ok((x, residual))
}
