//! Sampled signals, their spectra, and the Riemann-sum Fourier pair.
//!
//! The transform pair follows `<t|w> = e^{-2 pi i w t}`:
//!
//! ```text
//! s^(w_k) = sum_m s(t_m) e^{+2 pi i w_k t_m} dt
//! s(t_m)  = sum_k s^(w_k) e^{-2 pi i w_k t_m} dw
//! ```
//!
//! With `dt * dw * n = 1` the pair is an exact inverse on the grid, and the
//! weighted norms agree (discrete Parseval).

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{FrequencyGrid, TimeGrid};
use crate::scalar::{cis_2pi, Real};

/// Complex amplitudes on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal<T> {
    grid: TimeGrid<T>,
    values: Vec<Complex<T>>,
}

/// Complex amplitudes on the frequency grid dual to `grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    grid: TimeGrid<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> SampledSignal<T> {
    pub fn new(grid: TimeGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "signal has {} values for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TimeGrid<T>) -> Self {
        Self { grid, values: vec![Complex::new(T::zero(), T::zero()); grid.len()] }
    }

    pub fn from_fn(grid: TimeGrid<T>, f: impl Fn(T) -> Complex<T>) -> Self {
        let values = grid.times().map(f).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: TimeGrid<T>, f: impl Fn(T) -> T) -> Self {
        Self::from_fn(grid, |t| Complex::new(f(t), T::zero()))
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at the sample nearest to `t` (exact for grid times).
    pub fn at(&self, t: T) -> Complex<T> {
        let m = ((t - self.grid.t_start()) / self.grid.dt()).round();
        let m = m.to_usize().unwrap_or(0).min(self.len() - 1);
        self.values[m]
    }

    pub fn norm_sq(&self) -> T {
        norm_sq(&self.values) * self.grid.dt()
    }

    pub fn l2_norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// `<self, other> = sum conj(self) * other * dt`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.check_same_grid(other)?;
        Ok(inner(&self.values, &other.values) * self.grid.dt())
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::Shape("signals live on different grids".into()));
        }
        Ok(())
    }

    pub fn scaled(&self, factor: Complex<T>) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| *v * factor).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, values })
    }

    /// `||self - other|| / ||other||`.
    pub fn relative_error(&self, reference: &Self) -> Result<T> {
        Ok(self.sub(reference)?.l2_norm() / reference.l2_norm())
    }

    /// Maximum modulus over samples with `|t| <= half_width` around `center`.
    pub fn sup_distance_on(&self, other: &Self, center: T, half_width: T) -> Result<T> {
        self.check_same_grid(other)?;
        Ok(self
            .grid
            .times()
            .zip(self.values.iter().zip(&other.values))
            .filter(|(t, _)| (*t - center).abs() <= half_width)
            .map(|(_, (a, b))| (a - b).norm())
            .fold(T::zero(), T::max))
    }
}

impl<T: Real> Spectrum<T> {
    pub fn new(grid: TimeGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "spectrum has {} values for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TimeGrid<T>) -> Self {
        Self { grid, values: vec![Complex::new(T::zero(), T::zero()); grid.len()] }
    }

    pub fn from_fn(grid: TimeGrid<T>, f: impl Fn(T) -> Complex<T>) -> Self {
        let values = grid.frequencies().frequencies().map(f).collect();
        Self { grid, values }
    }

    /// Grid of the signal this spectrum belongs to.
    pub fn time_grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn frequency_grid(&self) -> FrequencyGrid<T> {
        self.grid.frequencies()
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm_sq(&self) -> T {
        norm_sq(&self.values) * self.grid.frequencies().dw()
    }

    pub fn l2_norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::Shape("spectra live on different grids".into()));
        }
        Ok(inner(&self.values, &other.values) * self.grid.frequencies().dw())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::Shape("spectra live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, values })
    }
}

pub(crate) fn norm_sq<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

pub(crate) fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

/// Planned transform pair for one grid. Reuse it inside iterative solvers.
#[derive(Clone)]
pub struct Fourier<T: Real> {
    grid: TimeGrid<T>,
    ascending: Arc<dyn Fft<T>>,
    descending: Arc<dyn Fft<T>>,
    // e^{2 pi i w_k t_start}, in spectrum storage order
    phase: Vec<Complex<T>>,
}

impl<T: Real> std::fmt::Debug for Fourier<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("grid", &self.grid).finish()
    }
}

impl<T: Real> Fourier<T> {
    pub fn new(grid: TimeGrid<T>) -> Self {
        let n = grid.len();
        let mut planner = FftPlanner::new();
        // rustfft's "inverse" kernel carries e^{+2 pi i k m / n}
        let ascending = planner.plan_fft_inverse(n);
        let descending = planner.plan_fft_forward(n);
        let fg = grid.frequencies();
        let shift = grid.t_start().as_f64() * fg.dw().as_f64();
        let phase = (0..n)
            .map(|i| {
                let c = cis_2pi(fg.bin(i) as f64 * shift);
                Complex::new(T::of(c.re), T::of(c.im))
            })
            .collect();
        Self { grid, ascending, descending, phase }
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    /// Time samples to spectrum bins (storage order).
    pub fn forward_values(&self, values: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.grid.len();
        let half = n / 2;
        let mut buf = values.to_vec();
        self.ascending.process(&mut buf);
        let dt = self.grid.dt();
        (0..n).map(|i| buf[(i + half) % n] * self.phase[i] * dt).collect()
    }

    /// Spectrum bins to time samples.
    pub fn inverse_values(&self, values: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.grid.len();
        let half = n / 2;
        let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
        for (i, v) in values.iter().enumerate() {
            buf[(i + half) % n] = *v * self.phase[i].conj();
        }
        self.descending.process(&mut buf);
        let dw = self.grid.frequencies().dw();
        buf.iter_mut().for_each(|v| *v = *v * dw);
        buf
    }

    pub fn forward(&self, s: &SampledSignal<T>) -> Result<Spectrum<T>> {
        self.check(s.grid())?;
        Ok(Spectrum { grid: self.grid, values: self.forward_values(s.values()) })
    }

    pub fn inverse(&self, spectrum: &Spectrum<T>) -> Result<SampledSignal<T>> {
        self.check(spectrum.time_grid())?;
        Ok(SampledSignal { grid: self.grid, values: self.inverse_values(spectrum.values()) })
    }

    fn check(&self, grid: &TimeGrid<T>) -> Result<()> {
        if !self.grid.same_as(grid) {
            return Err(Error::Shape("transform planned for a different grid".into()));
        }
        Ok(())
    }
}

/// `s^(w) = sum s(t) e^{2 pi i w t} dt` on the dual grid.
pub fn forward_spectrum<T: Real>(s: &SampledSignal<T>) -> Spectrum<T> {
    let f = Fourier::new(*s.grid());
    Spectrum { grid: *s.grid(), values: f.forward_values(s.values()) }
}

/// Exact inverse of [`forward_spectrum`].
pub fn inverse_signal<T: Real>(spectrum: &Spectrum<T>) -> SampledSignal<T> {
    let f = Fourier::new(*spectrum.time_grid());
    SampledSignal { grid: *spectrum.time_grid(), values: f.inverse_values(spectrum.values()) }
}

pub fn l2_norm<T: Real>(s: &SampledSignal<T>) -> T {
    s.l2_norm()
}

pub fn inner_product<T: Real>(a: &SampledSignal<T>, b: &SampledSignal<T>) -> Result<Complex<T>> {
    a.inner(b)
}

/// `s(t) = 2 (1 - cos 2 pi t) / (2 pi t)^2`, i.e. `sinc^2(t)`, whose spectrum is
/// the triangle `max(0, 1 - |w|)`.
pub fn demo_value<T: Real>(t: T) -> T {
    if t == T::zero() {
        return T::one();
    }
    let two_pi_t = T::TAU() * t;
    T::of(2.0) * (T::one() - two_pi_t.cos()) / (two_pi_t * two_pi_t)
}

/// The triangle test signal on `grid`; the grid must span at least `[-16, 16]`.
pub fn make_demo_signal<T: Real>(grid: &TimeGrid<T>) -> Result<SampledSignal<T>> {
    let reach = T::of(16.0);
    if grid.t_start() > -reach || grid.t_end() < reach {
        return Err(Error::OutOfRange(format!(
            "demo signal needs a grid spanning [-16, 16], got [{}, {})",
            grid.t_start(),
            grid.t_end()
        )));
    }
    Ok(SampledSignal::from_real_fn(*grid, demo_value))
}
