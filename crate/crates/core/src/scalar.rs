//! Scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating point scalar usable by the transforms and solvers: `f32` or `f64`.
///
/// Dense linear algebra (eigensolves, least squares) always runs in `f64`
/// and converts at the boundary through [`Real::to_f64`] / [`Real::of`].
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable")
    }

    #[inline]
    fn of_usize(x: usize) -> Self {
        <Self as FromPrimitive>::from_usize(x).expect("usize is representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("finite scalar")
    }

    /// Machine epsilon scaled for tolerance defaults.
    #[inline]
    fn eps() -> Self {
        <Self as Float>::epsilon()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `e^{i 2 pi x}` evaluated with argument reduction, so integer `x` lands exactly on 1.
#[inline]
pub fn cis_2pi<T: Real>(x: T) -> Complex<T> {
    let f = x - x.round();
    let angle = T::TAU() * f;
    Complex::new(angle.cos(), angle.sin())
}

/// `sin(pi x)` that vanishes exactly at integers.
#[inline]
pub fn sin_pi<T: Real>(x: T) -> T {
    let k = x.round();
    let f = x - k;
    let s = (T::PI() * f).sin();
    let odd = k.to_i64().map(|k| k.rem_euclid(2) == 1).unwrap_or(false);
    if odd {
        -s
    } else {
        s
    }
}

/// Normalized sinc, `sin(pi x) / (pi x)`, with the removable point filled.
#[inline]
pub fn sinc<T: Real>(x: T) -> T {
    if x == T::zero() {
        T::one()
    } else {
        sin_pi(x) / (T::PI() * x)
    }
}

pub(crate) fn to_c64<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(z.re.as_f64(), z.im.as_f64())
}

pub(crate) fn from_c64<T: Real>(z: Complex<f64>) -> Complex<T> {
    Complex::new(T::of(z.re), T::of(z.im))
}
