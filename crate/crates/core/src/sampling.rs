//! Comb sampling, band-limited interpolation, spectral periodization, and
//! recovery of an erased signal from shifted copies of its measured spectrum.
//!
//! Every operator here acts on the dense grid. A comb is held as a grid
//! signal that is `(T / dt) c_k` on the sample points and zero elsewhere, so
//! its transform is exactly `sum_k T e^{2 pi i w k T} c_k`.

use num_complex::Complex;

use crate::dense::gate_kernel;
use crate::error::{Error, Result};
use crate::grid::{Interval, TimeGrid};
use crate::projections::band_project;
use crate::scalar::{cis_2pi, from_c64, Real};
use crate::signal::{forward_spectrum, SampledSignal, Spectrum};

/// Default copy-truncation order for [`spectral_copy_recover`].
pub const DEFAULT_K_MAX: usize = 8;
/// `W * T_DS` above which the first-order model gets a warning.
pub const FIRST_ORDER_WARN: f64 = 0.25;

const ALIGN_TOL: f64 = 1e-9;

fn integer_ratio(x: f64) -> Option<i64> {
    let k = x.round();
    ((x - k).abs() <= ALIGN_TOL * x.abs().max(1.0)).then_some(k as i64)
}

/// Values read at `offset + k * period` for every such instant on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CombSamples<T> {
    grid: TimeGrid<T>,
    period: T,
    offset: T,
    stride: usize,
    first_k: i64,
    first_index: usize,
    values: Vec<Complex<T>>,
    pub source_label: String,
}

impl<T: Real> CombSamples<T> {
    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    /// Grid samples per period.
    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// Sample indices `k`, inclusive.
    pub fn k_range(&self) -> std::ops::RangeInclusive<i64> {
        self.first_k..=self.first_k + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at sample `k`, if on the grid.
    pub fn get(&self, k: i64) -> Option<Complex<T>> {
        let j = k - self.first_k;
        (j >= 0).then(|| self.values.get(j as usize).copied()).flatten()
    }

    pub fn time_of(&self, k: i64) -> T {
        self.offset + T::of(k as f64) * self.period
    }

    /// Grid index of the `j`-th stored sample.
    pub fn grid_index(&self, j: usize) -> usize {
        self.first_index + j * self.stride
    }

    /// The comb as a grid signal, weighted so that its transform is the
    /// periodized spectrum.
    pub fn comb_signal(&self) -> SampledSignal<T> {
        let mut s = SampledSignal::zeros(self.grid);
        let weight = T::of_usize(self.stride);
        for (j, c) in self.values.iter().enumerate() {
            s.values_mut()[self.grid_index(j)] = *c * weight;
        }
        s
    }

    /// Reads another signal at the same instants.
    pub fn resample(&self, s: &SampledSignal<T>) -> Result<Vec<Complex<T>>> {
        if !s.grid().same_as(&self.grid) {
            return Err(Error::Shape("signal grid differs from the comb grid".into()));
        }
        Ok((0..self.values.len()).map(|j| s.values()[self.grid_index(j)]).collect())
    }
}

/// Samples `s` at `k * period`.
pub fn comb_sample<T: Real>(s: &SampledSignal<T>, period: T) -> Result<CombSamples<T>> {
    comb_sample_offset(s, period, T::zero())
}

/// Samples `s` at `offset + k * period`. Both must sit on the grid.
pub fn comb_sample_offset<T: Real>(s: &SampledSignal<T>, period: T, offset: T) -> Result<CombSamples<T>> {
    let grid = *s.grid();
    if !(period > T::zero()) || !period.is_finite() {
        return Err(Error::InvalidGrid(format!("comb period must be positive, got {period}")));
    }
    let dt = grid.dt().as_f64();
    let stride = integer_ratio(period.as_f64() / dt)
        .filter(|&k| k >= 1)
        .ok_or_else(|| Error::InvalidGrid(format!("comb period {period} is not a multiple of dt = {dt}")))?
        as usize;
    if grid.len() % stride != 0 {
        return Err(Error::InvalidGrid(format!(
            "comb stride {stride} does not divide the grid length {}",
            grid.len()
        )));
    }
    let anchor = integer_ratio((offset - grid.t_start()).as_f64() / dt)
        .ok_or_else(|| Error::InvalidGrid(format!("comb offset {offset} is not on the grid")))?;
    let first_index = anchor.rem_euclid(stride as i64);
    let first_k = (first_index - anchor) / stride as i64;
    let first_index = first_index as usize;
    let values = s.values()[first_index..].iter().step_by(stride).copied().collect();
    Ok(CombSamples {
        grid,
        period: T::of(stride as f64 * dt),
        offset,
        stride,
        first_k,
        first_index,
        values,
        source_label: "s".into(),
    })
}

/// Band `[-1/(2T), 1/(2T))` matching a comb of period `T`.
pub fn nyquist_band<T: Real>(period: T) -> Interval<T> {
    Interval::centered(T::one() / period).expect("positive period")
}

/// `sum_k c_k h_T(t - kT)` with `h_T(t) = sinc(t / T)`, on the comb's grid.
pub fn sinc_reconstruct<T: Real>(c: &CombSamples<T>, at: &TimeGrid<T>) -> Result<SampledSignal<T>> {
    if !at.same_as(&c.grid) {
        return Err(Error::Shape("reconstruction grid differs from the sampled grid".into()));
    }
    band_project(&c.comb_signal(), &nyquist_band(c.period))
}

/// `T W sum_k sinc(W (t - kT)) c_k`, the band-`W` part of the comb.
pub fn band_interpolate<T: Real>(c: &CombSamples<T>, band: &Interval<T>) -> Result<SampledSignal<T>> {
    let limit = nyquist_band(c.period);
    let slack = T::of(ALIGN_TOL) * limit.width();
    if band.lower() < limit.lower() - slack || band.upper() > limit.upper() + slack {
        return Err(Error::OutOfRange(format!(
            "band [{}, {}) exceeds 1/period = {}",
            band.lower(),
            band.upper(),
            limit.width()
        )));
    }
    band_project(&c.comb_signal(), band)
}

/// `sum_k T e^{2 pi i w k T} c_k` on the dense frequency grid.
pub fn periodized_spectrum<T: Real>(c: &CombSamples<T>) -> Spectrum<T> {
    forward_spectrum(&c.comb_signal())
}

/// Circular shift of a spectrum by `bins` (positive moves content up).
pub fn shift_spectrum<T: Real>(spectrum: &Spectrum<T>, bins: i64) -> Spectrum<T> {
    let n = spectrum.len() as i64;
    let values =
        (0..n).map(|i| spectrum.values()[(i - bins).rem_euclid(n) as usize]).collect();
    Spectrum::new(*spectrum.time_grid(), values).expect("same length")
}

/// `sqrt(sum_{w in band} |a - b|^2 dw)`.
pub fn band_l2_distance<T: Real>(a: &Spectrum<T>, b: &Spectrum<T>, band: &Interval<T>) -> Result<T> {
    let bins = check_pair(a, b, band)?;
    let dw = a.frequency_grid().dw();
    let sum = bins.fold(T::zero(), |acc, i| acc + (a.values()[i] - b.values()[i]).norm_sqr());
    Ok((sum * dw).sqrt())
}

/// `max_{w in band} |a - b|`.
pub fn band_sup_distance<T: Real>(a: &Spectrum<T>, b: &Spectrum<T>, band: &Interval<T>) -> Result<T> {
    let bins = check_pair(a, b, band)?;
    Ok(bins.fold(T::zero(), |acc, i| acc.max((a.values()[i] - b.values()[i]).norm())))
}

/// `(1/W) sum_{w in band} s^(w) dw`.
pub fn band_mean<T: Real>(s: &Spectrum<T>, band: &Interval<T>) -> Complex<T> {
    let fg = s.frequency_grid();
    if band.width() == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let sum = s.values()[fg.indices_in(band)]
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |acc, v| acc + v);
    sum * (fg.dw() / band.width())
}

fn check_pair<T: Real>(a: &Spectrum<T>, b: &Spectrum<T>, band: &Interval<T>) -> Result<std::ops::Range<usize>> {
    if !a.time_grid().same_as(b.time_grid()) {
        return Err(Error::Shape("spectra live on different grids".into()));
    }
    Ok(a.frequency_grid().indices_in(band))
}

/// Settings for [`spectral_copy_recover`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCopyConfig<T> {
    /// Copies `|j| <= k_max` are summed.
    pub k_max: usize,
    pub band: Interval<T>,
    pub t_sn: T,
    pub t_ds: T,
    /// Instants where `r` is trusted: `comb_offset + k t_sn`.
    pub comb_offset: T,
    /// Permit `t_ds == t_sn` when both are below `1/W`.
    pub allow_equal: bool,
}

impl<T: Real> SpectralCopyConfig<T> {
    pub fn new(band: Interval<T>, t_sn: T, t_ds: T) -> Self {
        Self { k_max: DEFAULT_K_MAX, band, t_sn, t_ds, comb_offset: T::zero(), allow_equal: false }
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.band.width();
        if !(self.t_sn > T::zero()) {
            return Err(Error::OutOfRange(format!("t_sn must be positive, got {}", self.t_sn)));
        }
        if self.t_ds < T::zero() {
            return Err(Error::OutOfRange(format!("t_ds must be non-negative, got {}", self.t_ds)));
        }
        if w > T::zero() && self.t_sn * w > T::one() + T::of(ALIGN_TOL) {
            return Err(Error::OutOfRange(format!("t_sn = {} exceeds 1/W = {}", self.t_sn, T::one() / w)));
        }
        let ordered = self.t_ds < self.t_sn
            || (self.allow_equal && self.t_ds == self.t_sn && self.t_sn * w < T::one());
        if !ordered {
            return Err(Error::OutOfRange(format!("t_ds = {} must be below t_sn = {}", self.t_ds, self.t_sn)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SpectralCopyResult<T> {
    /// Copy sum on the band, zero elsewhere.
    pub spectrum: Spectrum<T>,
    /// Truncation order actually used.
    pub k_used: usize,
    /// True when `k_max` ran past the grid and was reduced.
    pub clipped: bool,
    /// L2 norm on the band of the last pair of copies added.
    pub tail_norm: T,
}

/// `s^(w) = sum_{|j| <= k} e^{2 pi i j tau / T_SN} P_W r^(w - j / T_SN)`,
/// exact once all copies are in, provided `r = s` at `tau + k T_SN`.
pub fn spectral_copy_recover<T: Real>(r: &SampledSignal<T>, cfg: &SpectralCopyConfig<T>) -> Result<SpectralCopyResult<T>> {
    cfg.validate()?;
    let grid = r.grid();
    let fg = grid.frequencies();
    if !fg.covers(&cfg.band) {
        return Err(Error::OutOfRange("band exceeds the Nyquist range".into()));
    }
    let step = integer_ratio((T::one() / (cfg.t_sn * fg.dw())).as_f64())
        .filter(|&b| b >= 1)
        .ok_or_else(|| Error::InvalidGrid(format!("1/t_sn = {} is not a multiple of dw", T::one() / cfg.t_sn)))?;
    let n = grid.len() as i64;
    let bins = fg.indices_in(&cfg.band);
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; grid.len()];
    if bins.is_empty() {
        let spectrum = Spectrum::new(*grid, out)?;
        return Ok(SpectralCopyResult { spectrum, k_used: 0, clipped: false, tail_norm: T::zero() });
    }
    let (a, b) = (bins.start as i64, bins.end as i64);
    let limit = ((b - 1).max(n - 1 - a) / step) as usize;
    let k_used = cfg.k_max.min(limit);
    let r_hat = forward_spectrum(r);
    let dw = fg.dw();
    let mut tail_norm = T::zero();
    for level in 0..=k_used as i64 {
        let js: &[i64] = if level == 0 { &[0] } else { &[level, -level] };
        let mut added = T::zero();
        for &j in js {
            let phase = cis_2pi(T::of(j as f64) * cfg.comb_offset / cfg.t_sn);
            for i in a..b {
                let src = i - j * step;
                if (0..n).contains(&src) {
                    let term = r_hat.values()[src as usize] * phase;
                    out[i as usize] = out[i as usize] + term;
                }
            }
        }
        // norm of this level's contribution, both signs together
        for i in a..b {
            let mut term = zero;
            for &j in js {
                let src = i - j * step;
                if (0..n).contains(&src) {
                    term = term + r_hat.values()[src as usize] * cis_2pi(T::of(j as f64) * cfg.comb_offset / cfg.t_sn);
                }
            }
            added = added + term.norm_sqr();
        }
        tail_norm = (added * dw).sqrt();
    }
    Ok(SpectralCopyResult {
        spectrum: Spectrum::new(*grid, out)?,
        k_used,
        clipped: k_used < cfg.k_max,
        tail_norm,
    })
}

/// `P_W r^` read as `s^ - W T_DS mean(s^)`.
#[derive(Debug, Clone)]
pub struct FirstTermApprox<T> {
    pub approx: Spectrum<T>,
    /// `W T_DS` times the band mean of `s^`, estimated from `r`.
    pub predicted_offset: T,
    pub wt: T,
    /// `W T_DS >= 1`: the first term no longer resembles `s^`.
    pub distorted: bool,
    pub warning: Option<String>,
}

pub fn band_approx_first_term<T: Real>(r: &SampledSignal<T>, band: &Interval<T>, t_ds: T) -> Result<FirstTermApprox<T>> {
    if t_ds < T::zero() {
        return Err(Error::OutOfRange(format!("t_ds must be non-negative, got {t_ds}")));
    }
    let approx = forward_spectrum(&band_project(r, band)?);
    let wt = band.width() * t_ds;
    let distorted = wt >= T::one();
    let mean_r = band_mean(&approx, band).re;
    // mean(P_W r^) = (1 - WT) mean(s^) to first order
    let mean_s = if distorted { mean_r } else { mean_r / (T::one() - wt) };
    let warning = if distorted {
        Some(format!("W T_DS = {wt} >= 1: first term is distorted"))
    } else if wt > T::of(FIRST_ORDER_WARN) {
        Some(format!("W T_DS = {wt} > {FIRST_ORDER_WARN}: first-order model is rough"))
    } else {
        None
    };
    Ok(FirstTermApprox { approx, predicted_offset: wt * mean_s, wt, distorted, warning })
}

/// How well the first term and its constant-offset model match the truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderCheck<T> {
    /// `sup |P_W r^ - s^|` on the band.
    pub sup_error: T,
    /// `W T_DS mean(s^)` from the true spectrum.
    pub offset: T,
    /// `sup |P_W r^ - s^ + offset|` on the band.
    pub residual_sup: T,
    /// `2 * offset`.
    pub bound: T,
}

impl<T: Real> FirstOrderCheck<T> {
    pub fn within_bound(&self) -> bool {
        self.sup_error <= self.bound
    }

    /// The constant offset explains at least half the error.
    pub fn explained(&self) -> bool {
        self.residual_sup <= self.offset
    }
}

pub fn check_first_order<T: Real>(approx: &FirstTermApprox<T>, s_hat: &Spectrum<T>, band: &Interval<T>) -> Result<FirstOrderCheck<T>> {
    let bins = check_pair(&approx.approx, s_hat, band)?;
    let offset = approx.wt * band_mean(s_hat, band).re;
    let mut sup_error = T::zero();
    let mut residual_sup = T::zero();
    for i in bins {
        let d = approx.approx.values()[i] - s_hat.values()[i];
        sup_error = sup_error.max(d.norm());
        residual_sup = residual_sup.max((d + Complex::new(offset, T::zero())).norm());
    }
    Ok(FirstOrderCheck { sup_error, offset, residual_sup, bound: offset + offset })
}

/// L2 norm on the band of `r^(w) - s^(w) + int_W K(w - w') s^(w') dw'`, where
/// `K` is the transform of the discrete gate over `window`.
pub fn integral_equation_residual<T: Real>(
    s_hat: &Spectrum<T>,
    r_hat: &Spectrum<T>,
    band: &Interval<T>,
    window: &Interval<T>,
) -> Result<T> {
    let bins = check_pair(s_hat, r_hat, band)?;
    let grid = s_hat.time_grid();
    let fg = grid.frequencies();
    let samples = grid.indices_in(window);
    let first = if samples.is_empty() { 0.0 } else { grid.time(samples.start).as_f64() };
    let (dt, dw) = (grid.dt().as_f64(), fg.dw().as_f64());
    let m = bins.len();
    let kernel: Vec<Complex<f64>> = (0..(2 * m).max(1))
        .map(|d| gate_kernel((d as f64 - m as f64) * dw, first, samples.len(), dt) * dw)
        .collect();
    let mut sum = 0.0;
    for (j, i) in bins.clone().enumerate() {
        let smeared = bins.clone().enumerate().fold(Complex::new(0.0, 0.0), |acc, (k, i2)| {
            let s = s_hat.values()[i2];
            acc + kernel[j + m - k] * Complex::new(s.re.as_f64(), s.im.as_f64())
        });
        let d = r_hat.values()[i] - s_hat.values()[i] + from_c64::<T>(smeared);
        sum += d.norm_sqr().as_f64();
    }
    Ok(T::of((sum * dw).sqrt()))
}
