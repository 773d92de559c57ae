//! Scalar abstraction shared by every numerical module.
//!
//! All matrix arithmetic is over `Complex<T>` where `T` is an IEEE float.
//! The tolerances used throughout the crate are tuned for `f64`; `f32`
//! instantiations compile and run but will miss most of them.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use rustfft::FftNum;

/// Real scalar backing the complex matrices (`f32` or `f64`).
pub trait Real: RealField + Copy + FftNum {
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self;
    /// Lossy conversion back to `f64` for reporting.
    fn as_f64(self) -> f64;
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

pub type C<T> = Complex<T>;
pub type CMat<T> = DMatrix<Complex<T>>;
pub type CVec<T> = DVector<Complex<T>>;

#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn zero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn one<T: Real>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub fn imag_unit<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::one())
}

/// `|z|`.
#[inline]
pub fn modulus<T: Real>(z: C<T>) -> T {
    z.re.hypot(z.im)
}

/// Principal argument in `(-pi, pi]`.
#[inline]
pub fn arg<T: Real>(z: C<T>) -> T {
    z.im.atan2(z.re)
}

#[inline]
pub fn cexp<T: Real>(z: C<T>) -> C<T> {
    let r = z.re.exp();
    Complex::new(r * z.im.cos(), r * z.im.sin())
}

/// `exp(i * theta)`.
#[inline]
pub fn cis<T: Real>(theta: T) -> C<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Integer power, negative exponents allowed.
pub fn cpowi<T: Real>(z: C<T>, k: i64) -> C<T> {
    let mut base = if k < 0 { one::<T>() / z } else { z };
    let mut e = k.unsigned_abs();
    let mut acc = one::<T>();
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}

#[inline]
pub fn two_pi<T: Real>() -> T {
    T::two_pi()
}

/// Largest entry modulus of a complex matrix.
pub fn max_abs<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(modulus(*z)))
}

/// Frobenius norm of a complex matrix.
pub fn fro<T: Real>(m: &CMat<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im)
        .sqrt()
}

pub fn vec_norm<T: Real>(v: &CVec<T>) -> T {
    v.iter()
        .fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im)
        .sqrt()
}
