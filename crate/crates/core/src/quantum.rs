//! Coordinate/momentum analogue of the erasure problem.
//!
//! Units have `2 pi hbar = 1` and `<x|p> = e^{2 pi i p x}`, so the momentum
//! amplitude at `p` is the signal spectrum at `w = -p`. A coordinate grid is a
//! [`TimeGrid`] read in length units.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dense::gate_kernel;
use crate::error::{Error, Result};
use crate::grid::{Interval, TimeGrid};
use crate::projections::{concentration_ratio, ProjectorPair};
use crate::recovery::{out_of_band_fraction, recover_band_neumann, RecoveryReport, SolverOptions, BANDLIMIT_TOL};
use crate::scalar::{from_c64, Real};
use crate::signal::{norm_sq, SampledSignal};

/// Tolerance on `||psi|| = 1` for normalized states.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction<T> {
    signal: SampledSignal<T>,
    normalized: bool,
}

impl<T: Real> WaveFunction<T> {
    pub fn new(grid: TimeGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        Ok(Self { signal: SampledSignal::new(grid, values)?, normalized: false })
    }

    pub fn from_signal(signal: SampledSignal<T>) -> Self {
        Self { signal, normalized: false }
    }

    /// State with momentum amplitude `f(p)` on the bins of `p_band`.
    pub fn from_momentum(grid: TimeGrid<T>, p_band: &Interval<T>, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let pair = ProjectorPair::new(grid, mirror(p_band), Interval::new(T::zero(), T::zero())?)?;
        let fg = grid.frequencies();
        let coeffs: Vec<Complex<T>> = pair.band_bins().map(|i| f(-fg.frequency(i))).collect();
        Ok(Self::from_signal(pair.synthesize(&coeffs)))
    }

    /// Scales to unit norm.
    pub fn normalize(self) -> Result<Self> {
        let norm = self.signal.l2_norm();
        if !(norm > T::zero()) {
            return Err(Error::Degenerate("cannot normalize a zero state".into()));
        }
        Ok(Self { signal: self.signal.scaled(Complex::new(T::one() / norm, T::zero())), normalized: true })
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        self.signal.grid()
    }

    pub fn values(&self) -> &[Complex<T>] {
        self.signal.values()
    }

    pub fn signal(&self) -> &SampledSignal<T> {
        &self.signal
    }

    pub fn into_signal(self) -> SampledSignal<T> {
        self.signal
    }

    pub fn norm(&self) -> T {
        self.signal.l2_norm()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn with_phase(&self, theta: T) -> Self {
        Self { signal: self.signal.scaled(Complex::from_polar(T::one(), theta)), normalized: self.normalized }
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &Self) -> Result<Complex<T>> {
        self.signal.inner(&other.signal)
    }

    /// `|<a|b>| / (||a|| ||b||)`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        let denom = self.norm() * other.norm();
        if !(denom > T::zero()) {
            return Err(Error::Degenerate("fidelity with a zero state".into()));
        }
        Ok(self.overlap(other)?.norm() / denom)
    }
}

/// Momentum band in signal-frequency coordinates.
fn mirror<T: Real>(p_band: &Interval<T>) -> Interval<T> {
    Interval::new(-p_band.center(), p_band.width()).expect("width already validated")
}

/// Coordinate window `[X]` and momentum band `[P]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceWindows<T> {
    pub x_window: Interval<T>,
    pub p_band: Interval<T>,
}

impl<T: Real> PhaseSpaceWindows<T> {
    pub fn new(x_window: Interval<T>, p_band: Interval<T>) -> Self {
        Self { x_window, p_band }
    }

    /// Both centered at the origin.
    pub fn centered(x: T, p: T) -> Result<Self> {
        Ok(Self { x_window: Interval::centered(x)?, p_band: Interval::centered(p)? })
    }

    pub fn px(&self) -> T {
        self.x_window.width() * self.p_band.width()
    }

    /// `[P]` expressed as a band of the underlying transform.
    pub fn frequency_band(&self) -> Interval<T> {
        mirror(&self.p_band)
    }

    pub fn projectors(&self, grid: &TimeGrid<T>) -> Result<ProjectorPair<T>> {
        ProjectorPair::new(*grid, self.frequency_band(), self.x_window)
    }
}

/// `<psi|P_P P_X P_P|psi> / <psi|P_P|psi>`, bounded by `min(1, PX)`.
pub fn landau_pollak_ratio<T: Real>(psi: &WaveFunction<T>, windows: &PhaseSpaceWindows<T>) -> Result<T> {
    concentration_ratio(psi.signal(), &windows.frequency_band(), &windows.x_window)
}

fn check_momentum_limited<T: Real>(psi: &WaveFunction<T>, windows: &PhaseSpaceWindows<T>) -> Result<()> {
    let residual = out_of_band_fraction(psi.signal(), &windows.frequency_band())?;
    if residual > T::of(BANDLIMIT_TOL) {
        return Err(Error::NotBandlimited { residual: residual.as_f64(), tolerance: BANDLIMIT_TOL });
    }
    Ok(())
}

/// `(1 - P_X) psi_P`, renormalized: the state after the coordinate measurement.
pub fn gate_state<T: Real>(psi_p: &WaveFunction<T>, windows: &PhaseSpaceWindows<T>) -> Result<WaveFunction<T>> {
    check_momentum_limited(psi_p, windows)?;
    let pair = windows.projectors(psi_p.grid())?;
    let gated = pair.complement(psi_p.signal())?;
    if gated.norm_sq() == T::zero() {
        return Err(Error::Degenerate("state vanishes outside the coordinate window".into()));
    }
    WaveFunction::from_signal(gated).normalize()
}

/// `||(1 - P_P)(1 - P_X) psi_P||^2 / ||P_X psi_P||^2`, bounded below by `1 - PX`.
pub fn gate_spill_ratio<T: Real>(psi_p: &WaveFunction<T>, windows: &PhaseSpaceWindows<T>) -> Result<T> {
    check_momentum_limited(psi_p, windows)?;
    let pair = windows.projectors(psi_p.grid())?;
    let inside = norm_sq(&psi_p.values()[pair.window_samples()]);
    if inside == T::zero() {
        return Err(Error::Degenerate("state has no weight inside the coordinate window".into()));
    }
    let gated = pair.complement(psi_p.signal())?;
    let in_band = pair.band_project_values(gated.values());
    let outside: T = gated.values().iter().zip(&in_band).fold(T::zero(), |acc, (g, b)| acc + (g - b).norm_sqr());
    Ok(outside / inside)
}

/// `P_P psi_M`, renormalized; closes the coordinate gap.
pub fn momentum_smooth<T: Real>(psi_m: &WaveFunction<T>, windows: &PhaseSpaceWindows<T>) -> Result<WaveFunction<T>> {
    let pair = windows.projectors(psi_m.grid())?;
    WaveFunction::from_signal(pair.band_project(psi_m.signal())?).normalize()
}

/// `psi_P(x) - int_X dy K_P(x - y) psi_P(y)` for `x` on the window samples,
/// with `K_P` the kernel of the discrete momentum band. Equals
/// `(1 - P_P P_X P_P) psi_P` there.
pub fn smoothed_gap_profile<T: Real>(psi_p: &WaveFunction<T>, windows: &PhaseSpaceWindows<T>) -> Result<Vec<Complex<T>>> {
    let grid = psi_p.grid();
    let pair = windows.projectors(grid)?;
    let fg = grid.frequencies();
    let bins = pair.band_bins();
    let samples = pair.window_samples();
    if bins.is_empty() {
        return Ok(psi_p.values()[samples].to_vec());
    }
    let (dt, dw) = (grid.dt().as_f64(), fg.dw().as_f64());
    let w_first = fg.frequency(bins.start).as_f64();
    let mut out = Vec::with_capacity(samples.len());
    for m in samples.clone() {
        let x = grid.time(m).as_f64();
        let mut acc = Complex::new(0.0, 0.0);
        for k in samples.clone() {
            let y = grid.time(k).as_f64();
            // sum over band bins of dw e^{-2 pi i w (x - y)}
            let kernel = gate_kernel(y - x, w_first, bins.len(), dw);
            let v = psi_p.values()[k];
            acc += kernel * Complex::new(v.re.as_f64(), v.im.as_f64()) * dt;
        }
        out.push(psi_p.values()[m] - from_c64::<T>(acc));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct StateRecovery<T> {
    pub state: WaveFunction<T>,
    pub report: RecoveryReport<T>,
}

/// `sum_k (P_P P_X P_P)^k P_P psi_M`, normalized. No global phase is fixed.
pub fn recover_state<T: Real>(
    psi_smoothed: &WaveFunction<T>,
    windows: &PhaseSpaceWindows<T>,
    tol: T,
) -> Result<StateRecovery<T>> {
    if windows.px() >= T::one() {
        return Err(Error::Refused(format!("PX = {} >= 1", windows.px())));
    }
    let report = recover_band_neumann(
        psi_smoothed.signal(),
        &windows.frequency_band(),
        &windows.x_window,
        &SolverOptions::with_tol(tol),
    )?;
    if let Some(reason) = &report.refusal {
        return Err(Error::Refused(reason.clone()));
    }
    let raw = report.recovered.clone().expect("present unless refused");
    Ok(StateRecovery { state: WaveFunction::from_signal(raw).normalize()?, report })
}

/// Normalized state with complex Gaussian momentum amplitudes on `[P]`.
pub fn random_momentum_state<T: Real>(grid: TimeGrid<T>, p_band: &Interval<T>, seed: u64) -> Result<WaveFunction<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pair = ProjectorPair::new(grid, mirror(p_band), Interval::new(T::zero(), T::zero())?)?;
    let coeffs: Vec<Complex<T>> = pair
        .band_bins()
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex::new(T::of(re), T::of(im))
        })
        .collect();
    WaveFunction::from_signal(pair.synthesize(&coeffs)).normalize()
}
