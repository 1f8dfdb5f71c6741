//! Band and time projectors, the smearing kernel, concentration ratios and
//! the top eigenvalue of the concentration operator `P_W P_T P_W`.

use std::ops::Range;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{Interval, TimeGrid};
use crate::scalar::{cis_2pi, sinc, Real};
use crate::signal::{norm_sq, Fourier, SampledSignal, Spectrum};

/// Ideal band-pass `P_W`: keeps spectrum bins whose centers lie in the band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandProjector<T> {
    pub band: Interval<T>,
}

/// Time gate `P_T`: keeps samples inside the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateProjector<T> {
    pub window: Interval<T>,
}

/// A band and a window bound to one grid, with the transform planned once.
///
/// Iterative solvers and the power iteration apply the projectors thousands
/// of times; this keeps the index ranges and FFT plans around.
#[derive(Debug, Clone)]
pub struct ProjectorPair<T: Real> {
    fourier: Fourier<T>,
    band: Interval<T>,
    window: Interval<T>,
    band_bins: Range<usize>,
    window_samples: Range<usize>,
}

impl<T: Real> ProjectorPair<T> {
    pub fn new(grid: TimeGrid<T>, band: Interval<T>, window: Interval<T>) -> Result<Self> {
        let fg = grid.frequencies();
        if !fg.covers(&band) {
            return Err(Error::OutOfRange(format!(
                "band [{}, {}) exceeds the Nyquist range [{}, {})",
                band.lower(),
                band.upper(),
                fg.lowest(),
                fg.nyquist()
            )));
        }
        if !grid.covers(&window) {
            return Err(Error::OutOfRange(format!(
                "window [{}, {}) exceeds the grid [{}, {})",
                window.lower(),
                window.upper(),
                grid.t_start(),
                grid.t_end()
            )));
        }
        Ok(Self {
            band_bins: fg.indices_in(&band),
            window_samples: grid.indices_in(&window),
            fourier: Fourier::new(grid),
            band,
            window,
        })
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        self.fourier.grid()
    }

    pub fn fourier(&self) -> &Fourier<T> {
        &self.fourier
    }

    pub fn band(&self) -> &Interval<T> {
        &self.band
    }

    pub fn window(&self) -> &Interval<T> {
        &self.window
    }

    pub fn band_bins(&self) -> Range<usize> {
        self.band_bins.clone()
    }

    pub fn window_samples(&self) -> Range<usize> {
        self.window_samples.clone()
    }

    /// Bandwidth as realized on the grid: in-band bin count times `dw`.
    pub fn discrete_bandwidth(&self) -> T {
        T::of_usize(self.band_bins.len()) * self.grid().frequencies().dw()
    }

    /// Window length as realized on the grid: gated sample count times `dt`.
    pub fn discrete_window(&self) -> T {
        T::of_usize(self.window_samples.len()) * self.grid().dt()
    }

    pub fn band_project_values(&self, values: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut spec = self.fourier.forward_values(values);
        zero_outside(&mut spec, &self.band_bins);
        self.fourier.inverse_values(&spec)
    }

    pub fn gate_values(&self, values: &mut [Complex<T>]) {
        zero_outside(values, &self.window_samples);
    }

    pub fn complement_values(&self, values: &mut [Complex<T>]) {
        let zero = Complex::new(T::zero(), T::zero());
        values[self.window_samples.clone()].iter_mut().for_each(|v| *v = zero);
    }

    pub fn band_project(&self, s: &SampledSignal<T>) -> Result<SampledSignal<T>> {
        self.check(s)?;
        SampledSignal::new(*s.grid(), self.band_project_values(s.values()))
    }

    pub fn gate(&self, s: &SampledSignal<T>) -> Result<SampledSignal<T>> {
        self.check(s)?;
        let mut v = s.values().to_vec();
        self.gate_values(&mut v);
        SampledSignal::new(*s.grid(), v)
    }

    pub fn complement(&self, s: &SampledSignal<T>) -> Result<SampledSignal<T>> {
        self.check(s)?;
        let mut v = s.values().to_vec();
        self.complement_values(&mut v);
        SampledSignal::new(*s.grid(), v)
    }

    /// In-band spectral coefficients of a signal.
    pub fn band_coefficients(&self, s: &SampledSignal<T>) -> Result<Vec<Complex<T>>> {
        self.check(s)?;
        Ok(self.fourier.forward_values(s.values())[self.band_bins.clone()].to_vec())
    }

    /// Full spectrum with the given in-band coefficients and zeros elsewhere.
    pub fn embed_coefficients(&self, coeffs: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut spec = vec![Complex::new(T::zero(), T::zero()); self.grid().len()];
        spec[self.band_bins.clone()].copy_from_slice(coeffs);
        spec
    }

    /// Time signal synthesized from in-band coefficients.
    pub fn synthesize(&self, coeffs: &[Complex<T>]) -> SampledSignal<T> {
        let values = self.fourier.inverse_values(&self.embed_coefficients(coeffs));
        SampledSignal::new(*self.grid(), values).expect("grid-sized")
    }

    /// `P_W P_T P_W` restricted to in-band coefficients.
    pub fn concentration_apply(&self, coeffs: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut t = self.fourier.inverse_values(&self.embed_coefficients(coeffs));
        self.gate_values(&mut t);
        self.fourier.forward_values(&t)[self.band_bins.clone()].to_vec()
    }

    /// `P_T P_W` on time samples.
    pub fn gate_after_band(&self, values: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut v = self.band_project_values(values);
        self.gate_values(&mut v);
        v
    }

    fn check(&self, s: &SampledSignal<T>) -> Result<()> {
        if !self.grid().same_as(s.grid()) {
            return Err(Error::Shape("signal grid differs from the projector grid".into()));
        }
        Ok(())
    }
}

fn zero_outside<T: Real>(values: &mut [Complex<T>], keep: &Range<usize>) {
    let zero = Complex::new(T::zero(), T::zero());
    let n = values.len();
    values[..keep.start.min(n)].iter_mut().for_each(|v| *v = zero);
    values[keep.end.min(n)..].iter_mut().for_each(|v| *v = zero);
}

impl<T: Real> BandProjector<T> {
    pub fn new(band: Interval<T>) -> Self {
        Self { band }
    }

    pub fn apply(&self, s: &SampledSignal<T>) -> Result<SampledSignal<T>> {
        band_project(s, &self.band)
    }

    pub fn apply_spectrum(&self, spectrum: &Spectrum<T>) -> Result<Spectrum<T>> {
        let fg = spectrum.frequency_grid();
        if !fg.covers(&self.band) {
            return Err(Error::OutOfRange("band exceeds the Nyquist range".into()));
        }
        let bins = fg.indices_in(&self.band);
        let mut v = spectrum.values().to_vec();
        zero_outside(&mut v, &bins);
        Spectrum::new(*spectrum.time_grid(), v)
    }
}

impl<T: Real> GateProjector<T> {
    pub fn new(window: Interval<T>) -> Self {
        Self { window }
    }

    pub fn apply(&self, s: &SampledSignal<T>) -> Result<SampledSignal<T>> {
        time_gate(s, &self.window)
    }

    pub fn apply_complement(&self, s: &SampledSignal<T>) -> Result<SampledSignal<T>> {
        complement_gate(s, &self.window)
    }
}

/// `P_W s`: zero the spectrum outside the band and transform back.
pub fn band_project<T: Real>(s: &SampledSignal<T>, band: &Interval<T>) -> Result<SampledSignal<T>> {
    let fg = s.grid().frequencies();
    if !fg.covers(band) {
        return Err(Error::OutOfRange(format!(
            "band [{}, {}) exceeds the Nyquist range",
            band.lower(),
            band.upper()
        )));
    }
    let f = Fourier::new(*s.grid());
    let mut spec = f.forward_values(s.values());
    zero_outside(&mut spec, &fg.indices_in(band));
    SampledSignal::new(*s.grid(), f.inverse_values(&spec))
}

/// `P_T s`: zero samples outside the window.
pub fn time_gate<T: Real>(s: &SampledSignal<T>, window: &Interval<T>) -> Result<SampledSignal<T>> {
    let range = checked_window(s.grid(), window)?;
    let mut v = s.values().to_vec();
    zero_outside(&mut v, &range);
    SampledSignal::new(*s.grid(), v)
}

/// `(1 - P_T) s`: zero samples inside the window.
pub fn complement_gate<T: Real>(s: &SampledSignal<T>, window: &Interval<T>) -> Result<SampledSignal<T>> {
    let range = checked_window(s.grid(), window)?;
    let mut v = s.values().to_vec();
    let zero = Complex::new(T::zero(), T::zero());
    v[range].iter_mut().for_each(|x| *x = zero);
    SampledSignal::new(*s.grid(), v)
}

fn checked_window<T: Real>(grid: &TimeGrid<T>, window: &Interval<T>) -> Result<Range<usize>> {
    if !grid.covers(window) {
        return Err(Error::OutOfRange(format!(
            "window [{}, {}) exceeds the grid [{}, {})",
            window.lower(),
            window.upper(),
            grid.t_start(),
            grid.t_end()
        )));
    }
    Ok(grid.indices_in(window))
}

/// `G(dt; W) = int_[W] e^{-2 pi i w dt} dw = W e^{-2 pi i w0 dt} sinc(W dt)`.
pub fn smear_response<T: Real>(band: &Interval<T>, delta_t: T) -> Complex<T> {
    let w = band.width();
    cis_2pi(-band.center() * delta_t) * (w * sinc(w * delta_t))
}

/// Discretization slack `10 dt (W + 1/T)` for continuum inequalities.
pub fn eps_grid<T: Real>(dt: T, bandwidth: T, window: T) -> T {
    if window <= T::zero() {
        return T::infinity();
    }
    T::of(10.0) * dt * (bandwidth + T::one() / window)
}

fn energy_floor<T: Real>(reference: T) -> T {
    let e = T::eps();
    e * e * reference
}

/// `<P_W s, P_T P_W s> / ||P_W s||^2`: the fraction of the band-limited part
/// that sits inside the window. Bounded by `WT`.
pub fn concentration_ratio<T: Real>(
    s: &SampledSignal<T>,
    band: &Interval<T>,
    window: &Interval<T>,
) -> Result<T> {
    let pair = ProjectorPair::new(*s.grid(), *band, *window)?;
    let banded = pair.band_project_values(s.values());
    let total = norm_sq(&banded);
    if !(total > energy_floor(norm_sq(s.values()))) || total == T::zero() {
        return Err(Error::Degenerate("signal has no in-band energy".into()));
    }
    let inside = norm_sq(&banded[pair.window_samples()]);
    Ok(inside / total)
}

/// `<r|P_T P_W P_T|r> / <r|P_T|r>`: how much of the gated segment is in band.
/// A value of one certifies the segment is consistent with the band, which
/// needs `|T| W >= 1`.
pub fn segment_compatibility<T: Real>(
    r: &SampledSignal<T>,
    window: &Interval<T>,
    band: &Interval<T>,
) -> Result<T> {
    let pair = ProjectorPair::new(*r.grid(), *band, *window)?;
    let mut gated = r.values().to_vec();
    pair.gate_values(&mut gated);
    let total = norm_sq(&gated);
    if !(total > energy_floor(norm_sq(r.values()))) || total == T::zero() {
        return Err(Error::Degenerate("segment has no energy inside the window".into()));
    }
    let spec = pair.fourier().forward_values(&gated);
    let dw = pair.grid().frequencies().dw();
    let in_band = norm_sq(&spec[pair.band_bins()]) * dw;
    Ok(in_band / (total * pair.grid().dt()))
}

/// `<s|P_T (1 - P_W) P_T|s> / <s|P_T|s>`: out-of-band share of the gated
/// segment of a band-limited signal, bounded below by `1 - WT`.
pub fn band_spill_ratio<T: Real>(
    s_band: &SampledSignal<T>,
    band: &Interval<T>,
    window: &Interval<T>,
) -> Result<T> {
    segment_compatibility(s_band, window, band).map(|inside| T::one() - inside)
}

/// Outcome of the power iteration on `P_W P_T P_W`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerIteration<T> {
    /// Largest eigenvalue, `||P_T P_W||^2`.
    pub lambda0: T,
    pub iterations: usize,
    /// `||A v - lambda0 v|| / ||v||` at the final iterate.
    pub residual: T,
    /// Top eigenvector as in-band coefficients, unit Euclidean norm.
    pub eigenvector: Vec<Complex<T>>,
}

pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITER: usize = 10_000;

/// Largest eigenvalue of `P_W P_T P_W` by power iteration on the in-band
/// coefficients, started from the uniform in-band spectrum.
pub fn operator_norm_sq<T: Real>(
    grid: &TimeGrid<T>,
    band: &Interval<T>,
    window: &Interval<T>,
) -> Result<PowerIteration<T>> {
    let pair = ProjectorPair::new(*grid, *band, *window)?;
    power_iteration(&pair, T::of(POWER_TOL), POWER_MAX_ITER)
}

pub fn power_iteration<T: Real>(
    pair: &ProjectorPair<T>,
    tol: T,
    max_iter: usize,
) -> Result<PowerIteration<T>> {
    let m = pair.band_bins().len();
    if m == 0 || pair.window_samples().is_empty() {
        return Ok(PowerIteration {
            lambda0: T::zero(),
            iterations: 0,
            residual: T::zero(),
            eigenvector: vec![Complex::new(T::zero(), T::zero()); m],
        });
    }
    let scale = T::one() / T::of_usize(m).sqrt();
    let mut v = vec![Complex::new(scale, T::zero()); m];
    let mut rayleigh = T::zero();
    let mut residual = T::infinity();
    for it in 1..=max_iter {
        let av = pair.concentration_apply(&v);
        // v has unit norm, so the Rayleigh quotient is <v, Av>
        let next = crate::signal::inner(&v, &av).re;
        residual = av
            .iter()
            .zip(&v)
            .fold(T::zero(), |acc, (a, x)| acc + (*a - *x * next).norm_sqr())
            .sqrt();
        let norm = norm_sq(&av).sqrt();
        if norm == T::zero() {
            return Ok(PowerIteration { lambda0: T::zero(), iterations: it, residual: T::zero(), eigenvector: v });
        }
        let converged = (next - rayleigh).abs() <= tol * next.abs();
        rayleigh = next;
        v = av.into_iter().map(|z| z / norm).collect();
        if converged {
            return Ok(PowerIteration { lambda0: rayleigh, iterations: it, residual, eigenvector: v });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        rayleigh: rayleigh.as_f64(),
        gap_estimate: residual.as_f64(),
    })
}
