//! Uniform time and frequency grids and the half-open intervals used to gate them.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform sampling grid `t_m = t_start + m * dt`, `m = 0..n`.
///
/// The dual frequency grid has spacing `1 / (n * dt)` and bins
/// `k / L` for `k = -n/2 .. n/2 - 1`, stored in that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    t_start: T,
    dt: T,
    n: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t_start: T, dt: T, n: usize) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::InvalidGrid(format!("dt must be positive and finite, got {dt}")));
        }
        if !t_start.is_finite() {
            return Err(Error::InvalidGrid("t_start must be finite".into()));
        }
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("n must be even and >= 2, got {n}")));
        }
        Ok(Self { t_start, dt, n })
    }

    /// Grid covering `[-span/2, span/2)` with `n` samples.
    pub fn centered(span: T, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("n must be positive".into()));
        }
        let dt = span / T::of_usize(n);
        Self::new(-span / T::of(2.0), dt, n)
    }

    /// `t in [-32, 32)`, `n = 4096`: `dt = dw = 1/64`.
    pub fn desk() -> Self {
        Self::centered(T::of(64.0), 4096).expect("valid default grid")
    }

    pub fn t_start(&self) -> T {
        self.t_start
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Total span `L = n * dt`.
    pub fn span(&self) -> T {
        T::of_usize(self.n) * self.dt
    }

    pub fn t_end(&self) -> T {
        self.t_start + self.span()
    }

    #[inline]
    pub fn time(&self, m: usize) -> T {
        self.t_start + T::of_usize(m) * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n).map(move |m| self.time(m))
    }

    pub fn frequencies(&self) -> FrequencyGrid<T> {
        FrequencyGrid { dw: T::one() / self.span(), n: self.n }
    }

    /// Sample indices whose times fall in the half-open interval.
    pub fn indices_in(&self, interval: &Interval<T>) -> Range<usize> {
        let lo = first_at_least(self.n, |m| self.time(m), interval.lower());
        let hi = first_at_least(self.n, |m| self.time(m), interval.upper());
        lo..hi.max(lo)
    }

    /// Whether the interval lies inside `[t_start, t_end]`.
    pub fn covers(&self, interval: &Interval<T>) -> bool {
        interval.width() == T::zero()
            || (interval.lower() >= self.t_start && interval.upper() <= self.t_end())
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.n == other.n && self.t_start == other.t_start && self.dt == other.dt
    }
}

/// Frequency grid dual to a [`TimeGrid`]; bin `i` sits at `(i - n/2) * dw`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid<T> {
    dw: T,
    n: usize,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn dw(&self) -> T {
        self.dw
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Signed bin number of storage index `i`.
    #[inline]
    pub fn bin(&self, i: usize) -> i64 {
        i as i64 - (self.n / 2) as i64
    }

    #[inline]
    pub fn frequency(&self, i: usize) -> T {
        T::of(self.bin(i) as f64) * self.dw
    }

    pub fn frequencies(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n).map(move |i| self.frequency(i))
    }

    /// Lowest representable frequency, `-n/2 * dw`.
    pub fn lowest(&self) -> T {
        self.frequency(0)
    }

    /// Upper edge of the Nyquist range, `n/2 * dw` (exclusive for bin centers).
    pub fn nyquist(&self) -> T {
        T::of_usize(self.n / 2) * self.dw
    }

    /// Storage indices of bins whose centers fall in the half-open interval.
    pub fn indices_in(&self, band: &Interval<T>) -> Range<usize> {
        let lo = first_at_least(self.n, |i| self.frequency(i), band.lower());
        let hi = first_at_least(self.n, |i| self.frequency(i), band.upper());
        lo..hi.max(lo)
    }

    /// Whether the band lies within the Nyquist range `[-n/2 dw, n/2 dw]`.
    pub fn covers(&self, band: &Interval<T>) -> bool {
        band.width() == T::zero() || (band.lower() >= self.lowest() && band.upper() <= self.nyquist())
    }

    /// Storage index of the bin at `frequency`, if it is a bin center.
    pub fn index_of(&self, frequency: T) -> Option<usize> {
        let k = (frequency / self.dw).round();
        if ((frequency / self.dw) - k).abs() > T::of(1e-9) {
            return None;
        }
        let i = k.to_i64()? + (self.n / 2) as i64;
        (0..self.n as i64).contains(&i).then_some(i as usize)
    }
}

fn first_at_least<T: Real>(n: usize, at: impl Fn(usize) -> T, bound: T) -> usize {
    let (mut lo, mut hi) = (0usize, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if at(mid) < bound {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Half-open interval `[center - width/2, center + width/2)`.
///
/// A zero width is accepted and denotes the empty set, which lets the
/// degenerate "nothing erased" cases run through the same code paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    center: T,
    width: T,
}

impl<T: Real> Interval<T> {
    pub fn new(center: T, width: T) -> Result<Self> {
        if !center.is_finite() || !width.is_finite() {
            return Err(Error::InvalidInterval("center and width must be finite".into()));
        }
        if width < T::zero() {
            return Err(Error::InvalidInterval(format!("width must be non-negative, got {width}")));
        }
        Ok(Self { center, width })
    }

    /// Interval `[-width/2, width/2)`.
    pub fn centered(width: T) -> Result<Self> {
        Self::new(T::zero(), width)
    }

    pub fn center(&self) -> T {
        self.center
    }

    pub fn width(&self) -> T {
        self.width
    }

    pub fn lower(&self) -> T {
        self.center - self.width / T::of(2.0)
    }

    pub fn upper(&self) -> T {
        self.center + self.width / T::of(2.0)
    }

    #[inline]
    pub fn contains(&self, x: T) -> bool {
        x >= self.lower() && x < self.upper()
    }

    pub fn is_empty(&self) -> bool {
        self.width == T::zero()
    }
}
