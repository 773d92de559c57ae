//! Seeded generators for test symbols: splitting types and polynomially
//! invertible factors.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;

use crate::birkhoff::SplittingType;
use crate::loop_algebra::MatrixLoop;
use crate::scalar::*;

fn coeff<T: Real, R: Rng>(rng: &mut R, scale: f64) -> C<T> {
    c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

/// Weakly decreasing sequence of length `n` with entries in `[lo, hi]`.
pub fn splitting_type<R: Rng>(rng: &mut R, n: usize, lo: i64, hi: i64) -> SplittingType {
    let v: Vec<i64> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
    SplittingType::from_unsorted(v)
}

/// Unit triangular matrix polynomial in `t^sign` of the given degree.
fn triangular<T: Real, R: Rng>(rng: &mut R, n: usize, degree: usize, upper: bool, sign: i64) -> MatrixLoop<T> {
    let mut coeffs: BTreeMap<i64, CMat<T>> = BTreeMap::new();
    coeffs.insert(0, DMatrix::identity(n, n));
    for d in 0..=degree as i64 {
        let a = coeffs.entry(sign * d).or_insert_with(|| DMatrix::zeros(n, n));
        for i in 0..n {
            for j in 0..n {
                if (upper && j > i) || (!upper && j < i) {
                    a[(i, j)] = coeff(rng, 0.5);
                }
            }
        }
    }
    MatrixLoop::from_coeffs(n, coeffs).unwrap()
}

fn constant_factor<T: Real, R: Rng>(rng: &mut R, n: usize) -> MatrixLoop<T> {
    let m = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { one::<T>() } else { zero() };
        d + coeff::<T, R>(rng, 0.3)
    });
    MatrixLoop::constant(m)
}

/// `C U(t) L(t)` with `C` near the identity and `U`, `L` unit triangular of
/// total degree `degree` in `t` (`sign = 1`) or `t^{-1}` (`sign = -1`).
/// The determinant is the constant `det C`, so the inverse is again a
/// polynomial of the same kind.
pub fn invertible_factor<T: Real, R: Rng>(rng: &mut R, n: usize, degree: usize, sign: i64) -> MatrixLoop<T> {
    let a = if degree == 0 { 0 } else { rng.gen_range(0..=degree) };
    let u = triangular(rng, n, a, true, sign);
    let l = triangular(rng, n, degree - a, false, sign);
    constant_factor(rng, n).mul(&u).mul(&l)
}

/// A symbol `f- d_K f+` together with its factors.
pub struct Symbol<T: Real> {
    pub minus: MatrixLoop<T>,
    pub k: SplittingType,
    pub plus: MatrixLoop<T>,
    pub symbol: MatrixLoop<T>,
}

pub fn symbol<T: Real, R: Rng>(rng: &mut R, n: usize, degree: usize, lo: i64, hi: i64) -> Symbol<T> {
    let k = splitting_type(rng, n, lo, hi);
    let minus = invertible_factor(rng, n, degree, -1);
    let plus = invertible_factor(rng, n, degree, 1);
    let symbol = minus
        .mul(&MatrixLoop::diagonal_monomial(k.as_slice()))
        .mul(&plus);
    Symbol { minus, k, plus, symbol }
}
