//! Reference computations for the integration tests. Everything here is a
//! brute-force sum written independently of the library kernels.
#![allow(dead_code)]

use std::f64::consts::PI;

use gaprecover::{band_project, make_demo_signal, Complex, Grid, Interval, Signal};
use nalgebra::DMatrix;

pub type C = Complex<f64>;

pub fn desk() -> Grid {
    Grid::desk()
}

pub fn band(w: f64) -> Interval<f64> {
    Interval::centered(w).unwrap()
}

/// `P_W` of the demo signal at `W = 2`: the recovery ground truth.
pub fn s_w() -> Signal {
    band_project(&make_demo_signal(&desk()).unwrap(), &band(2.0)).unwrap()
}

pub fn expi(x: f64) -> C {
    C::new(x.cos(), x.sin())
}

pub fn sinc2(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        let s = (PI * t).sin() / (PI * t);
        s * s
    }
}

/// `sum_m s(t_m) e^{2 pi i w t_m} dt` by direct summation.
pub fn naive_forward(grid: &Grid, values: &[C], w: f64) -> C {
    (0..grid.len()).map(|m| values[m] * expi(2.0 * PI * w * grid.time(m))).sum::<C>() * grid.dt()
}

/// `sum_k s^_k e^{-2 pi i w_k t} dw` by direct summation.
pub fn naive_inverse(grid: &Grid, spectrum: &[C], t: f64) -> C {
    let fg = grid.frequencies();
    (0..grid.len()).map(|k| spectrum[k] * expi(-2.0 * PI * fg.frequency(k) * t)).sum::<C>() * fg.dw()
}

/// Midpoint rule for `int_{-32}^{32} sinc^2(t) e^{2 pi i w t} dt` at step `h`.
pub fn sinc2_quadrature(w: f64, h: f64) -> C {
    let n = (64.0 / h).round() as usize;
    (0..n)
        .map(|j| {
            let t = -32.0 + (j as f64 + 0.5) * h;
            expi(2.0 * PI * w * t) * sinc2(t)
        })
        .sum::<C>()
        * h
}

/// In-band matrix of `P_W P_T P_W` from its defining double sum.
pub fn brute_gram(grid: &Grid, band: &Interval<f64>, window: &Interval<f64>) -> DMatrix<C> {
    let fg = grid.frequencies();
    let freqs: Vec<f64> = (0..grid.len()).map(|k| fg.frequency(k)).filter(|w| band.contains(*w)).collect();
    let times: Vec<f64> = (0..grid.len()).map(|m| grid.time(m)).filter(|t| window.contains(*t)).collect();
    let (dt, dw) = (grid.dt(), fg.dw());
    DMatrix::from_fn(freqs.len(), freqs.len(), |j, k| {
        times.iter().map(|t| expi(2.0 * PI * (freqs[j] - freqs[k]) * t)).sum::<C>() * (dt * dw)
    })
}

/// Eigenvalues of a Hermitian matrix, largest first.
pub fn eigenvalues(m: &DMatrix<C>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn trace(m: &DMatrix<C>) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

pub fn max_abs(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn rel_l2(a: &[C], b: &[C]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Sup distance over the middle half of the grid.
pub fn interior_sup(a: &Signal, b: &Signal) -> f64 {
    let n = a.len();
    max_abs(&a.values()[n / 4..3 * n / 4], &b.values()[n / 4..3 * n / 4])
}
