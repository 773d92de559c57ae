//! Matrix-valued loops on the unit circle.
//!
//! A [`MatrixLoop`] is a finite Laurent series `G(t) = sum_j A_j t^j`.
//! Loops that are only known through samples enter via
//! [`loop_from_samples`], which truncates the discrete Fourier series with an
//! explicit tail check. Piecewise loops with jump points live in
//! [`PiecewiseLoop`].

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{det, inverse};
use crate::scalar::*;

/// Floor on `|det G(t)|` used to certify invertibility on a grid.
pub const DET_FLOOR: f64 = 1e-12;

/// Uniform grid of `N`-th roots of unity with trapezoid weights `2 pi / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCircleGrid {
    size: usize,
}

impl UnitCircleGrid {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || !size.is_power_of_two() {
            return Err(Error::invalid(format!("grid size {size} is not a power of two")));
        }
        Ok(UnitCircleGrid { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn node<T: Real>(&self, k: usize) -> C<T> {
        cis(two_pi::<T>() * T::lit(k as f64) / T::lit(self.size as f64))
    }

    pub fn nodes<T: Real>(&self) -> Vec<C<T>> {
        (0..self.size).map(|k| self.node(k)).collect()
    }

    /// Weights in the angle variable; they sum to `2 pi`.
    pub fn weights<T: Real>(&self) -> Vec<T> {
        vec![two_pi::<T>() / T::lit(self.size as f64); self.size]
    }
}

/// Smallest power of two that is at least `x` and at least `min`.
pub fn grid_for(x: usize, min: usize) -> usize {
    x.max(min).next_power_of_two()
}

/// Invertible matrix function on the unit circle stored as Laurent
/// coefficients on a finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixLoop<T: Real> {
    n: usize,
    coeffs: BTreeMap<i64, CMat<T>>,
    grid_size: usize,
}

impl<T: Real> MatrixLoop<T> {
    /// Builds a loop from explicit coefficients. Zero coefficients are
    /// dropped; an empty map is the zero loop (not invertible, but a valid
    /// Laurent polynomial for intermediate arithmetic).
    pub fn from_coeffs(n: usize, coeffs: BTreeMap<i64, CMat<T>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("loop size must be positive"));
        }
        for (e, a) in &coeffs {
            if a.shape() != (n, n) {
                return Err(Error::invalid(format!(
                    "coefficient of t^{e} has shape {:?}, expected {n}x{n}",
                    a.shape()
                )));
            }
        }
        let coeffs: BTreeMap<_, _> = coeffs
            .into_iter()
            .filter(|(_, a)| a.iter().any(|z| *z != zero()))
            .collect();
        let mut lp = MatrixLoop { n, coeffs, grid_size: 1 };
        lp.grid_size = grid_for(8 * (lp.degree_span() as usize + 1), 64);
        Ok(lp)
    }

    pub fn constant(a: CMat<T>) -> Self {
        let n = a.nrows();
        Self::from_coeffs(n, BTreeMap::from([(0, a)])).expect("square constant")
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(DMatrix::identity(n, n))
    }

    /// `d_K(t) = diag(t^{k_1}, ..., t^{k_n})`.
    pub fn diagonal_monomial(exponents: &[i64]) -> Self {
        let n = exponents.len();
        let mut coeffs: BTreeMap<i64, CMat<T>> = BTreeMap::new();
        for (i, &k) in exponents.iter().enumerate() {
            coeffs.entry(k).or_insert_with(|| DMatrix::zeros(n, n))[(i, i)] = one();
        }
        Self::from_coeffs(n, coeffs).expect("diagonal monomial")
    }

    /// Scalar multiple of a single power: `a t^k` (n = 1).
    pub fn scalar_monomial(a: C<T>, k: i64) -> Self {
        Self::from_coeffs(1, BTreeMap::from([(k, DMatrix::from_element(1, 1, a))])).unwrap()
    }

    pub fn with_grid_size(mut self, grid_size: usize) -> Result<Self> {
        UnitCircleGrid::new(grid_size)?;
        self.grid_size = grid_size;
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn grid(&self) -> UnitCircleGrid {
        UnitCircleGrid { size: self.grid_size }
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, CMat<T>> {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> CMat<T> {
        self.coeffs
            .get(&k)
            .cloned()
            .unwrap_or_else(|| DMatrix::zeros(self.n, self.n))
    }

    /// `(min exponent, max exponent)`; `(0, 0)` for the zero loop.
    pub fn support(&self) -> (i64, i64) {
        match (self.coeffs.keys().next(), self.coeffs.keys().next_back()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => (0, 0),
        }
    }

    pub fn degree_span(&self) -> i64 {
        let (lo, hi) = self.support();
        hi - lo
    }

    pub fn evaluate(&self, z: C<T>) -> Result<CMat<T>> {
        if z == zero() && self.support().0 < 0 {
            return Err(Error::invalid("evaluation at z = 0 with negative powers present"));
        }
        let mut acc = DMatrix::zeros(self.n, self.n);
        for (&k, a) in &self.coeffs {
            acc += a * cpowi(z, k);
        }
        Ok(acc)
    }

    /// Values at the nodes of `grid`.
    pub fn sample(&self, grid: &UnitCircleGrid) -> Vec<CMat<T>> {
        grid.nodes::<T>()
            .into_iter()
            .map(|t| self.evaluate(t).expect("nonzero node"))
            .collect()
    }

    /// Checks `|det G(t_k)| >= DET_FLOOR` on the given grid.
    pub fn check_invertible(&self, grid: &UnitCircleGrid) -> Result<()> {
        for (k, t) in grid.nodes::<T>().into_iter().enumerate() {
            let d = det(&self.evaluate(t)?);
            if modulus(d) < T::lit(DET_FLOOR) {
                return Err(Error::Singular {
                    location: format!("grid node {k} of {}", grid.size()),
                    det: modulus(d).as_f64(),
                });
            }
        }
        Ok(())
    }

    /// Laurent product `self * other`.
    pub fn mul(&self, other: &MatrixLoop<T>) -> MatrixLoop<T> {
        assert_eq!(self.n, other.n, "loop sizes differ");
        let mut out: BTreeMap<i64, CMat<T>> = BTreeMap::new();
        for (&a, ma) in &self.coeffs {
            for (&b, mb) in &other.coeffs {
                let prod = ma * mb;
                out.entry(a + b)
                    .and_modify(|acc| *acc += &prod)
                    .or_insert(prod);
            }
        }
        let mut lp = MatrixLoop::from_coeffs(self.n, out).unwrap();
        lp.grid_size = lp.grid_size.max(self.grid_size).max(other.grid_size);
        lp
    }

    pub fn transpose(&self) -> MatrixLoop<T> {
        let coeffs = self.coeffs.iter().map(|(k, a)| (*k, a.transpose())).collect();
        let mut lp = MatrixLoop::from_coeffs(self.n, coeffs).unwrap();
        lp.grid_size = self.grid_size;
        lp
    }

    /// `t^k G(t)`.
    pub fn shift(&self, k: i64) -> MatrixLoop<T> {
        let coeffs = self.coeffs.iter().map(|(e, a)| (e + k, a.clone())).collect();
        let mut lp = MatrixLoop::from_coeffs(self.n, coeffs).unwrap();
        lp.grid_size = self.grid_size;
        lp
    }

    /// Entrywise product with `p(t)` where `p` is a scalar Laurent loop.
    pub fn left_mul_const(&self, c: &CMat<T>) -> MatrixLoop<T> {
        let coeffs = self.coeffs.iter().map(|(e, a)| (*e, c * a)).collect();
        let mut lp = MatrixLoop::from_coeffs(self.n, coeffs).unwrap();
        lp.grid_size = self.grid_size;
        lp
    }

    /// Pointwise inverse, resampled on a grid and re-expanded.
    pub fn inverse_sampled(&self, grid_size: usize, tail_tolerance: f64) -> Result<MatrixLoop<T>> {
        let grid = UnitCircleGrid::new(grid_size)?;
        let samples = self
            .sample(&grid)
            .iter()
            .map(inverse)
            .collect::<Result<Vec<_>>>()?;
        loop_from_samples(&samples, tail_tolerance)
    }

    /// Keeps only the coefficients with exponent in `[lo, hi]`.
    pub fn truncate(&self, lo: i64, hi: i64) -> MatrixLoop<T> {
        let coeffs = self.coeffs.range(lo..=hi).map(|(e, a)| (*e, a.clone())).collect();
        let mut lp = MatrixLoop::from_coeffs(self.n, coeffs).unwrap();
        lp.grid_size = self.grid_size;
        lp
    }
}

/// Laurent coefficients of sampled matrix values on the `N` roots of unity.
///
/// Coefficients are computed for `|j| < N/2`; trailing coefficients are
/// dropped from both ends while their accumulated norm stays below
/// `tail_tolerance * max sample norm`. A retained support reaching into the
/// outer eighth of the band means the grid is too coarse for the loop.
pub fn loop_from_samples<T: Real>(samples: &[CMat<T>], tail_tolerance: f64) -> Result<MatrixLoop<T>> {
    let big_n = samples.len();
    let grid = UnitCircleGrid::new(big_n)?;
    let n = samples[0].nrows();
    for (k, s) in samples.iter().enumerate() {
        if s.shape() != (n, n) {
            return Err(Error::invalid(format!("sample {k} has shape {:?}", s.shape())));
        }
        let d = det(s);
        if modulus(d) < T::lit(DET_FLOOR) {
            return Err(Error::Singular {
                location: format!("sample {k}"),
                det: modulus(d).as_f64(),
            });
        }
    }
    let spectra = dft_coefficients(samples);
    let half = (big_n / 2) as i64;
    let scale = samples.iter().map(|s| fro(s)).fold(T::zero(), |a, b| a.max(b));
    let budget = T::lit(tail_tolerance) * scale;
    let coeff = |j: i64| -> &CMat<T> { &spectra[j.rem_euclid(big_n as i64) as usize] };

    let lo_bound = if big_n == 1 { 0 } else { -half + 1 };
    let hi_bound = if big_n == 1 { 0 } else { half - 1 };
    let mut dropped = if big_n > 1 { fro(coeff(half)) } else { T::zero() };
    let (mut lo, mut hi) = (lo_bound, hi_bound);
    loop {
        if lo > hi {
            break;
        }
        let cl = fro(coeff(lo));
        let ch = fro(coeff(hi));
        let (next, at_lo) = if cl <= ch { (cl, true) } else { (ch, false) };
        if dropped + next > budget {
            break;
        }
        dropped += next;
        if at_lo {
            lo += 1;
        } else {
            hi -= 1;
        }
    }
    if big_n >= 8 {
        let limit = half - (big_n as i64) / 8;
        if lo <= -limit || hi >= limit || dropped > budget {
            return Err(Error::UnderResolved(format!(
                "retained Laurent support [{lo}, {hi}] reaches the band edge of an N = {big_n} grid; increase N"
            )));
        }
    }
    let mut coeffs = BTreeMap::new();
    for j in lo..=hi {
        coeffs.insert(j, coeff(j).clone());
    }
    let mut lp = MatrixLoop::from_coeffs(n, coeffs)?;
    lp.grid_size = grid.size();
    Ok(lp)
}

/// Raw DFT coefficients `A_j = (1/N) sum_k G(t_k) t_k^{-j}`, indexed by
/// `j mod N`.
pub fn dft_coefficients<T: Real>(samples: &[CMat<T>]) -> Vec<CMat<T>> {
    let big_n = samples.len();
    let (rows, cols) = samples[0].shape();
    let fft = FftPlanner::<T>::new().plan_fft_forward(big_n);
    let mut out = vec![DMatrix::zeros(rows, cols); big_n];
    let inv_n = cr(T::one() / T::lit(big_n as f64));
    let mut buf = vec![zero::<T>(); big_n];
    for i in 0..rows {
        for j in 0..cols {
            for (k, s) in samples.iter().enumerate() {
                buf[k] = s[(i, j)];
            }
            fft.process(&mut buf);
            for (k, v) in buf.iter().enumerate() {
                out[k][(i, j)] = *v * inv_n;
            }
        }
    }
    out
}

/// Winding number of `det G` around the origin: `(1/2 pi) Delta arg det G`.
pub fn global_index<T: Real>(lp: &MatrixLoop<T>) -> Result<i64> {
    let size = grid_for(lp.grid_size(), 16 * (lp.degree_span() as usize + 1));
    let grid = UnitCircleGrid::new(size)?;
    let dets: Vec<C<T>> = lp.sample(&grid).iter().map(det).collect();
    winding_of_samples(&dets, "det G")
}

/// Winding number of a closed sampled curve around 0. Fails when the curve
/// passes too close to 0 or when consecutive samples are too far apart in
/// argument to be resolved.
pub fn winding_of_samples<T: Real>(values: &[C<T>], what: &str) -> Result<i64> {
    let n = values.len();
    let scale = values.iter().map(|z| modulus(*z)).fold(T::zero(), |a, b| a.max(b));
    let mut total = T::zero();
    let limit = T::lit(std::f64::consts::FRAC_PI_2);
    for k in 0..n {
        let a = values[k];
        let b = values[(k + 1) % n];
        if modulus(a) < T::lit(DET_FLOOR) * scale.max(T::one()) {
            return Err(Error::Singular {
                location: format!("{what} at sample {k}"),
                det: modulus(a).as_f64(),
            });
        }
        let inc = arg(b / a);
        if inc.abs() > limit {
            return Err(Error::UnderResolved(format!(
                "argument increment {} of {what} between samples {k} and {}",
                inc.as_f64(),
                (k + 1) % n
            )));
        }
        total += inc;
    }
    let w = total.as_f64() / std::f64::consts::TAU;
    let r = w.round();
    if (w - r).abs() > 1e-6 {
        return Err(Error::UnderResolved(format!(
            "accumulated argument of {what} is {w} turns, not an integer"
        )));
    }
    Ok(r as i64)
}

/// Piecewise-continuous loop with jump points `s_1, ..., s_m` ordered by
/// increasing argument in `[0, 2 pi)`. Piece `j` is used on the arc from
/// `s_j` to `s_{j+1}` (cyclically), so `G(s_j + 0) = piece_j(s_j)` and
/// `G(s_j - 0) = piece_{j-1}(s_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLoop<T: Real> {
    jumps: Vec<C<T>>,
    pieces: Vec<MatrixLoop<T>>,
}

impl<T: Real> PiecewiseLoop<T> {
    pub fn new(jumps: Vec<C<T>>, pieces: Vec<MatrixLoop<T>>) -> Result<Self> {
        if jumps.len() != pieces.len() {
            return Err(Error::invalid(format!(
                "{} jump points but {} arc pieces",
                jumps.len(),
                pieces.len()
            )));
        }
        if pieces.is_empty() {
            return Err(Error::invalid("a piecewise loop needs at least one piece"));
        }
        let n = pieces[0].size();
        if pieces.iter().any(|p| p.size() != n) {
            return Err(Error::invalid("arc pieces have different sizes"));
        }
        let mut prev = -T::one();
        for (j, s) in jumps.iter().enumerate() {
            if (modulus(*s) - T::one()).abs() > T::lit(1e-12) {
                return Err(Error::invalid(format!("jump point {j} is not on the unit circle")));
            }
            let a = angle_in_turn(*s);
            if a <= prev {
                return Err(Error::invalid(
                    "jump points must have strictly increasing argument in [0, 2 pi)",
                ));
            }
            prev = a;
        }
        let lp = PiecewiseLoop { jumps, pieces };
        for j in 0..lp.jumps.len() {
            for m in [lp.limit_plus(j), lp.limit_minus(j)] {
                let d = det(&m);
                if modulus(d) < T::lit(DET_FLOOR) {
                    return Err(Error::Singular {
                        location: format!("one-sided limit at jump {j}"),
                        det: modulus(d).as_f64(),
                    });
                }
            }
        }
        Ok(lp)
    }

    /// Piecewise-constant loop taking value `values[j]` on arc `j`.
    pub fn piecewise_constant(jumps: Vec<C<T>>, values: Vec<CMat<T>>) -> Result<Self> {
        let pieces = values.into_iter().map(MatrixLoop::constant).collect();
        Self::new(jumps, pieces)
    }

    /// A continuous loop viewed as piecewise with no jumps.
    pub fn continuous(lp: MatrixLoop<T>) -> Self {
        PiecewiseLoop { jumps: vec![], pieces: vec![lp] }
    }

    pub fn size(&self) -> usize {
        self.pieces[0].size()
    }

    pub fn jumps(&self) -> &[C<T>] {
        &self.jumps
    }

    pub fn pieces(&self) -> &[MatrixLoop<T>] {
        &self.pieces
    }

    /// `G(s_j + 0)`.
    pub fn limit_plus(&self, j: usize) -> CMat<T> {
        self.pieces[j].evaluate(self.jumps[j]).unwrap()
    }

    /// `G(s_j - 0)`.
    pub fn limit_minus(&self, j: usize) -> CMat<T> {
        let m = self.jumps.len();
        self.pieces[(j + m - 1) % m].evaluate(self.jumps[j]).unwrap()
    }

    /// Index of the arc containing `t` (`t` not a jump point).
    pub fn arc_of(&self, t: C<T>) -> usize {
        let m = self.jumps.len();
        if m == 0 {
            return 0;
        }
        let a = angle_in_turn(t);
        let mut arc = m - 1;
        for (j, s) in self.jumps.iter().enumerate() {
            if angle_in_turn(*s) <= a {
                arc = j;
            }
        }
        arc
    }

    pub fn evaluate(&self, t: C<T>) -> CMat<T> {
        self.pieces[self.arc_of(t)].evaluate(t).unwrap()
    }
}

/// Argument in `[0, 2 pi)`.
pub fn angle_in_turn<T: Real>(z: C<T>) -> T {
    let a = arg(z);
    if a < T::zero() {
        a + two_pi::<T>()
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e12(v: f64) -> CMat<f64> {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = c(v, 0.0);
        m
    }

    #[test]
    fn grid_rejects_non_power_of_two() {
        assert!(UnitCircleGrid::new(12).is_err());
        let g = UnitCircleGrid::new(8).unwrap();
        let s: f64 = g.weights::<f64>().iter().sum();
        assert!((s - std::f64::consts::TAU).abs() < 1e-14);
        for t in g.nodes::<f64>() {
            assert!((cpowi(t, 8) - one::<f64>()).norm() < 1e-14);
        }
    }

    #[test]
    fn constant_samples_give_single_coefficient() {
        let s = vec![DMatrix::<C<f64>>::identity(2, 2); 16];
        let lp = loop_from_samples(&s, 1e-12).unwrap();
        assert_eq!(lp.support(), (0, 0));
        assert!((lp.coeff(0) - DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn monomial_samples() {
        let g = UnitCircleGrid::new(8).unwrap();
        let s = MatrixLoop::<f64>::diagonal_monomial(&[1, 0]).sample(&g);
        let lp = loop_from_samples(&s, 1e-12).unwrap();
        assert_eq!(lp.coeffs().len(), 2);
        let mut d0 = DMatrix::zeros(2, 2);
        d0[(1, 1)] = one();
        let mut d1 = DMatrix::zeros(2, 2);
        d1[(0, 0)] = one();
        assert!((lp.coeff(0) - d0).norm() < 1e-14);
        assert!((lp.coeff(1) - d1).norm() < 1e-14);
    }

    #[test]
    fn two_term_laurent_samples() {
        let g = UnitCircleGrid::new(16).unwrap();
        let samples: Vec<_> = g
            .nodes::<f64>()
            .into_iter()
            .map(|t| DMatrix::identity(2, 2) + e12(0.1) * (one::<f64>() / t))
            .collect();
        let lp = loop_from_samples(&samples, 1e-12).unwrap();
        assert_eq!(lp.support(), (-1, 0));
        assert!((lp.coeff(-1) - e12(0.1)).norm() < 1e-14);
    }

    #[test]
    fn under_resolution_and_singular_samples_are_reported() {
        let g = UnitCircleGrid::new(8).unwrap();
        let s = MatrixLoop::<f64>::diagonal_monomial(&[3, 0]).sample(&g);
        assert!(matches!(loop_from_samples(&s, 1e-12), Err(Error::UnderResolved(_))));
        let z = vec![DMatrix::<C<f64>>::zeros(1, 1); 8];
        assert!(matches!(loop_from_samples(&z, 1e-12), Err(Error::Singular { .. })));
    }

    #[test]
    fn evaluate_examples() {
        let i = MatrixLoop::<f64>::identity(2);
        assert_eq!(i.evaluate(c(0.3, 0.7)).unwrap(), DMatrix::identity(2, 2));
        let t = MatrixLoop::<f64>::diagonal_monomial(&[1, 1]);
        assert!((t.evaluate(c(0.0, 1.0)).unwrap() - DMatrix::identity(2, 2) * c(0.0, 1.0)).norm() < 1e-15);
        let lp = MatrixLoop::from_coeffs(2, BTreeMap::from([(-1, e12(1.0)), (0, DMatrix::identity(2, 2))])).unwrap();
        let v = lp.evaluate(c(2.0, 0.0)).unwrap();
        assert!((v - (DMatrix::identity(2, 2) + e12(0.5))).norm() < 1e-15);
        assert!(lp.evaluate(zero()).is_err());
    }

    #[test]
    fn global_index_examples() {
        assert_eq!(global_index(&MatrixLoop::<f64>::identity(3)).unwrap(), 0);
        assert_eq!(global_index(&MatrixLoop::<f64>::diagonal_monomial(&[2, -1])).unwrap(), 1);
        assert_eq!(global_index(&MatrixLoop::<f64>::diagonal_monomial(&[1, 1])).unwrap(), 2);
    }

    #[test]
    fn piecewise_arcs_and_limits() {
        let jumps = vec![c(1.0, 0.0), c(-1.0, 0.0)];
        let vals = vec![
            DMatrix::from_element(1, 1, c(2.0, 0.0)),
            DMatrix::from_element(1, 1, c(3.0, 0.0)),
        ];
        let p = PiecewiseLoop::<f64>::piecewise_constant(jumps, vals).unwrap();
        assert_eq!(p.arc_of(c(0.0, 1.0)), 0);
        assert_eq!(p.arc_of(c(0.0, -1.0)), 1);
        assert_eq!(p.limit_plus(0)[(0, 0)].re, 2.0);
        assert_eq!(p.limit_minus(0)[(0, 0)].re, 3.0);
        assert!(PiecewiseLoop::<f64>::piecewise_constant(
            vec![c(-1.0, 0.0), c(1.0, 0.0)],
            vec![DMatrix::identity(1, 1), DMatrix::identity(1, 1)]
        )
        .is_err());
    }

    #[test]
    fn f32_instantiation_compiles_and_runs() {
        let lp = MatrixLoop::<f32>::diagonal_monomial(&[1, 0]);
        assert_eq!(global_index(&lp).unwrap(), 1);
    }
}
