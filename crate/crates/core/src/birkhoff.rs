//! Birkhoff factorization `G = f- d_K f+` and partial indices.
//!
//! Indices are read off the row problem `Psi+ = Psi- G`: for each shift `m`
//! the space of rows `r`, bounded outside the disk, with `r t^{-m} G`
//! holomorphic inside has dimension `sum_i max(k_i - m + 1, 0)`. These
//! dimensions are finite-section Toeplitz nullities, so the multiset `K`
//! follows from their second differences. The scalar symbol `t` has index
//! `+1` under this convention.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, SVD};

use crate::error::{Error, Result};
use crate::linalg::{det, inverse, nullity, trailing_singular_vectors, RANK_CUTOFF};
use crate::loop_algebra::{dft_coefficients, global_index, grid_for, winding_of_samples, MatrixLoop, UnitCircleGrid};
use crate::scalar::*;

/// Weakly decreasing integer sequence `k_1 >= ... >= k_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SplittingType(Vec<i64>);

impl SplittingType {
    pub fn new(k: Vec<i64>) -> Result<Self> {
        if k.is_empty() {
            return Err(Error::invalid("splitting type must be nonempty"));
        }
        if k.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid(format!("{k:?} is not weakly decreasing")));
        }
        Ok(SplittingType(k))
    }

    pub fn from_unsorted(mut k: Vec<i64>) -> Self {
        k.sort_unstable_by(|a, b| b.cmp(a));
        SplittingType(k)
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> i64 {
        self.0[0]
    }

    pub fn last(&self) -> i64 {
        self.0[self.0.len() - 1]
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn negated(&self) -> SplittingType {
        SplittingType::from_unsorted(self.0.iter().map(|k| -k).collect())
    }
}

impl std::fmt::Display for SplittingType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// `G = minus * diag(t^{exponents}) * plus` on the circle.
///
/// `exponents` is a permutation of `k`. `minus(inf)` is unit upper
/// triangular with zero entries `(i, j)` whenever `exponents[j] >=
/// exponents[i]`; in particular it is the identity when `G = d_K` or when
/// all indices coincide.
#[derive(Debug, Clone)]
pub struct Factorization<T: Real> {
    pub minus: MatrixLoop<T>,
    pub k: SplittingType,
    pub exponents: Vec<i64>,
    pub plus: MatrixLoop<T>,
}

impl<T: Real> Factorization<T> {
    pub fn middle(&self) -> MatrixLoop<T> {
        MatrixLoop::diagonal_monomial(&self.exponents)
    }

    /// `sup_k |G - f- d f+|` and `sup_k |G|` (Frobenius) over `grid`.
    pub fn residual(&self, g: &MatrixLoop<T>, grid: &UnitCircleGrid) -> (T, T) {
        let mut res = T::zero();
        let mut scale = T::zero();
        for t in grid.nodes::<T>() {
            let gt = g.evaluate(t).unwrap();
            let d = DMatrix::from_diagonal(&CVec::from_iterator(
                self.exponents.len(),
                self.exponents.iter().map(|&e| cpowi(t, e)),
            ));
            let prod = self.minus.evaluate(t).unwrap() * d * self.plus.evaluate(t).unwrap();
            res = res.max(fro(&(&gt - prod)));
            scale = scale.max(fro(&gt));
        }
        (res, scale)
    }
}

/// Options for the Toeplitz engine.
#[derive(Debug, Clone, Copy)]
pub struct IndexOptions {
    /// Truncation order; `None` uses `4 * span + 16`.
    pub truncation: Option<usize>,
    /// Number of doublings attempted on an inconsistent or ambiguous profile.
    pub max_doublings: usize,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions { truncation: None, max_doublings: 3 }
    }
}

/// Finite-section matrix for the shift `m`: unknowns are the row
/// coefficients `r_j` of `t^{-j}`, `0 <= j <= L`; equations require every
/// negative power of `r t^{-m} G` to vanish.
fn shift_matrix<T: Real>(g: &MatrixLoop<T>, m: i64, l: usize) -> CMat<T> {
    let n = g.size();
    let (lo, hi) = g.support();
    let e_min = -(l as i64) - m + lo;
    let e_max = (-1i64).min(hi - m);
    let cols = n * (l + 1);
    if e_min > e_max {
        return DMatrix::zeros(0, cols);
    }
    let neq = (e_max - e_min + 1) as usize;
    let mut a = DMatrix::zeros(n * neq, cols);
    for (ge, coef) in g.coeffs() {
        for j in 0..=l {
            let e = ge - j as i64 - m;
            if e < e_min || e > e_max {
                continue;
            }
            let row0 = (e - e_min) as usize * n;
            for i in 0..n {
                for cc in 0..n {
                    a[(row0 + cc, j * n + i)] = coef[(i, cc)];
                }
            }
        }
    }
    a
}

struct Profile<'a, T: Real> {
    g: &'a MatrixLoop<T>,
    l: usize,
    cache: HashMap<i64, usize>,
}

impl<T: Real> Profile<'_, T> {
    fn dim(&mut self, m: i64) -> Result<usize> {
        if let Some(d) = self.cache.get(&m) {
            return Ok(*d);
        }
        let a = shift_matrix(self.g, m, self.l);
        let d = nullity(&a, RANK_CUTOFF, 1.0)?;
        self.cache.insert(m, d);
        Ok(d)
    }
}

/// `sum_i max(k_i - m + 1, 0)`.
pub fn profile_value(k: &[i64], m: i64) -> usize {
    k.iter().map(|&ki| (ki - m + 1).max(0) as usize).sum()
}

fn try_indices<T: Real>(g: &MatrixLoop<T>, l: usize, kappa: i64) -> Result<SplittingType> {
    let n = g.size() as i64;
    let (lo, hi) = g.support();
    let mut p = Profile { g, l, cache: HashMap::new() };
    let m0 = kappa.div_euclid(n);
    let mut top = m0;
    while p.dim(top)? > 0 {
        top += 1;
        if top > hi + 2 {
            return Err(Error::InconsistentProfile(format!(
                "solutions persist beyond shift {top} with truncation {l}"
            )));
        }
    }
    let mut bot = m0;
    loop {
        let c = p.dim(bot)? as i64 - p.dim(bot + 1)? as i64;
        if c == n {
            break;
        }
        if c > n || bot < lo - 2 {
            return Err(Error::InconsistentProfile(format!(
                "count {c} at shift {bot} with truncation {l}"
            )));
        }
        bot -= 1;
    }
    let mut c = BTreeMap::new();
    for v in bot..=top + 1 {
        c.insert(v, p.dim(v)? as i64 - p.dim(v + 1)? as i64);
    }
    let mut k = Vec::new();
    for v in (bot..=top).rev() {
        let mult = c[&v] - c[&(v + 1)];
        if mult < 0 {
            return Err(Error::InconsistentProfile(format!(
                "negative multiplicity at shift {v} with truncation {l}"
            )));
        }
        k.extend(std::iter::repeat_n(v, mult as usize));
    }
    if k.len() as i64 != n {
        return Err(Error::InconsistentProfile(format!(
            "recovered {} indices for a loop of size {n}",
            k.len()
        )));
    }
    for v in bot..=top + 1 {
        if p.dim(v)? != profile_value(&k, v) {
            return Err(Error::InconsistentProfile(format!(
                "dimension {} at shift {v} does not match indices {k:?}",
                p.dim(v)?
            )));
        }
    }
    if k.iter().sum::<i64>() != kappa {
        return Err(Error::InconsistentProfile(format!(
            "indices {k:?} do not sum to the global index {kappa}"
        )));
    }
    Ok(SplittingType(k))
}

fn with_doubling<T: Real, R>(
    g: &MatrixLoop<T>,
    opts: IndexOptions,
    mut f: impl FnMut(usize) -> Result<R>,
) -> Result<R> {
    let mut l = opts
        .truncation
        .unwrap_or(4 * g.degree_span() as usize + 16);
    let mut last = None;
    for _ in 0..=opts.max_doublings {
        match f(l) {
            Ok(r) => return Ok(r),
            Err(e @ (Error::InconsistentProfile(_) | Error::AmbiguousRank { .. })) => last = Some(e),
            Err(e) => return Err(e),
        }
        l *= 2;
    }
    Err(last.unwrap())
}

/// Partial indices of `G`, sorted decreasingly; they sum to the global
/// index.
pub fn partial_indices<T: Real>(g: &MatrixLoop<T>) -> Result<SplittingType> {
    partial_indices_with(g, IndexOptions::default())
}

pub fn partial_indices_with<T: Real>(g: &MatrixLoop<T>, opts: IndexOptions) -> Result<SplittingType> {
    g.check_invertible(&g.grid())?;
    let kappa = global_index(g)?;
    with_doubling(g, opts, |l| try_indices(g, l, kappa))
}

/// Row polynomial `sum_j r_j t^{-j}` stored as coefficient rows.
type RowPoly<T> = Vec<CVec<T>>;

fn row_polys<T: Real>(basis: &CMat<T>, n: usize) -> Vec<RowPoly<T>> {
    (0..basis.ncols())
        .map(|c| {
            let l = basis.nrows() / n;
            (0..l)
                .map(|j| CVec::from_fn(n, |i, _| basis[(j * n + i, c)]))
                .collect()
        })
        .collect()
}

fn combine<T: Real>(polys: &[RowPoly<T>], weights: &[C<T>]) -> RowPoly<T> {
    let mut out = polys[0].iter().map(|v| v * zero::<T>()).collect::<Vec<_>>();
    for (p, w) in polys.iter().zip(weights) {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v * *w;
        }
    }
    out
}

fn axpy<T: Real>(y: &mut RowPoly<T>, a: C<T>, x: &RowPoly<T>) {
    for (yj, xj) in y.iter_mut().zip(x) {
        *yj += xj * a;
    }
}

/// Rows `R_i` with `R_i t^{-k_i} G` holomorphic inside and `R(inf)`
/// invertible, in decreasing index order.
fn index_rows<T: Real>(g: &MatrixLoop<T>, k: &SplittingType, l: usize) -> Result<Vec<RowPoly<T>>> {
    let n = g.size();
    let mut values: Vec<i64> = k.as_slice().to_vec();
    values.dedup();
    let mut rows: Vec<RowPoly<T>> = Vec::new();
    for v in values {
        let mult = k.as_slice().iter().filter(|&&x| x == v).count();
        let d = profile_value(k.as_slice(), v);
        let a = shift_matrix(g, v, l);
        let basis = if a.nrows() == 0 {
            DMatrix::identity(a.ncols(), a.ncols())
        } else {
            let (ratio, b) = trailing_singular_vectors(&a, d);
            if ratio > T::lit(RANK_CUTOFF) {
                return Err(Error::InconsistentProfile(format!(
                    "solution space at shift {v} has only approximate dimension {d} (ratio {:e})",
                    ratio.as_f64()
                )));
            }
            b
        };
        let polys = row_polys(&basis, n);
        // values at infinity, projected off the span of earlier rows
        let mut vals = DMatrix::<C<T>>::zeros(polys.len(), n);
        for (a_i, p) in polys.iter().enumerate() {
            for c in 0..n {
                vals[(a_i, c)] = p[0][c];
            }
        }
        if !rows.is_empty() {
            let prev = DMatrix::from_fn(rows.len(), n, |i, c| rows[i][0][c]);
            let q = prev.transpose().qr().q();
            let proj = DMatrix::<C<T>>::identity(n, n) - &q * q.adjoint();
            vals = &vals * proj.transpose();
        }
        let svd = SVD::new(vals.clone(), true, false);
        let u = svd.u.expect("requested U");
        let sv = &svd.singular_values;
        if sv.len() < mult || sv[mult - 1] <= sv[0] * T::lit(1e-8) {
            return Err(Error::InconsistentProfile(format!(
                "values at infinity at shift {v} do not extend the earlier rows"
            )));
        }
        for kk in 0..mult {
            let w: Vec<C<T>> = (0..polys.len()).map(|a_i| u[(a_i, kk)].conj()).collect();
            rows.push(combine(&polys, &w));
        }
    }
    Ok(rows)
}

/// Birkhoff factorization `G = f- d f+` (see [`Factorization`]).
pub fn factorize<T: Real>(g: &MatrixLoop<T>) -> Result<Factorization<T>> {
    factorize_with(g, IndexOptions::default())
}

pub fn factorize_with<T: Real>(g: &MatrixLoop<T>, opts: IndexOptions) -> Result<Factorization<T>> {
    let k = partial_indices_with(g, opts)?;
    with_doubling(g, opts, |l| factorize_given(g, &k, l))
}

fn factorize_given<T: Real>(g: &MatrixLoop<T>, k: &SplittingType, l: usize) -> Result<Factorization<T>> {
    let n = g.size();
    let mut rows = index_rows(g, k, l)?;
    let mut expo: Vec<i64> = k.as_slice().to_vec();

    // Downward elimination: each row loses the leading columns of the rows
    // above it (all of which carry an index at least as large).
    let mut lead = vec![0usize; n];
    for i in 0..n {
        for j in 0..i {
            let a = rows[i][0][lead[j]];
            if a != zero() {
                let rj = rows[j].clone();
                axpy(&mut rows[i], -a, &rj);
            }
        }
        let r0 = &rows[i][0];
        let big = r0.iter().fold(T::zero(), |acc, z| acc.max(modulus(*z)));
        let q = (0..n)
            .find(|&c| modulus(r0[c]) > big * T::lit(1e-8))
            .expect("nonzero row");
        let s = one::<T>() / r0[q];
        for coef in rows[i].iter_mut() {
            *coef *= s;
        }
        lead[i] = q;
    }
    if {
        let mut l2 = lead.clone();
        l2.sort_unstable();
        l2.dedup();
        l2.len() != n
    } {
        return Err(Error::InconsistentProfile("leading columns of the index rows collide".into()));
    }
    // Order rows by leading column: R(inf) becomes unit upper triangular.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| lead[i]);
    rows = order.iter().map(|&i| rows[i].clone()).collect();
    expo = order.iter().map(|&i| expo[i]).collect();
    // Upward elimination where the lower row has an index at least as large.
    for i in (0..n).rev() {
        for j in i + 1..n {
            if expo[j] >= expo[i] {
                let a = rows[i][0][j];
                if a != zero() {
                    let rj = rows[j].clone();
                    axpy(&mut rows[i], -a, &rj);
                }
            }
        }
    }

    // R as a loop in t^{-1}.
    let depth = rows[0].len();
    let mut rc: BTreeMap<i64, CMat<T>> = BTreeMap::new();
    for j in 0..depth {
        let m = DMatrix::from_fn(n, n, |i, c| rows[i][j][c]);
        rc.insert(-(j as i64), m);
    }
    let r = MatrixLoop::from_coeffs(n, rc)?;
    let rg = r.mul(g);
    let mut plus_c: BTreeMap<i64, CMat<T>> = BTreeMap::new();
    let mut neg = T::zero();
    for (e, a) in rg.coeffs() {
        for i in 0..n {
            let ee = e - expo[i];
            let row = a.row(i).into_owned();
            if ee < 0 {
                neg += row.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
            } else {
                plus_c.entry(ee).or_insert_with(|| DMatrix::zeros(n, n)).row_mut(i).copy_from(&row);
            }
        }
    }
    let gscale = g.coeffs().values().map(|a| fro(a)).fold(T::zero(), |a, b| a.max(b));
    let rscale = r.coeffs().values().map(|a| fro(a)).fold(T::zero(), |a, b| a + b);
    let neg = neg.sqrt();
    if neg > T::lit(1e-8) * gscale * rscale {
        return Err(Error::InconsistentProfile(format!(
            "plus factor has negative powers of size {:e}",
            neg.as_f64()
        )));
    }
    let plus = MatrixLoop::from_coeffs(n, plus_c)?;
    let minus = minus_factor(g, &plus, &expo)?;

    let fac = Factorization { minus, k: k.clone(), exponents: expo, plus };
    let check = UnitCircleGrid::new(grid_for(g.grid_size(), 256))?;
    let (res, scale) = fac.residual(g, &check);
    if res > T::lit(1e-8) * scale {
        return Err(Error::Tolerance {
            what: "factorization residual".into(),
            achieved: (res / scale).as_f64(),
            required: 1e-8,
        });
    }
    for (name, f) in [("plus", &fac.plus), ("minus", &fac.minus)] {
        let dets: Vec<C<T>> = f.sample(&check).iter().map(det).collect();
        if winding_of_samples(&dets, name)? != 0 {
            return Err(Error::Tolerance {
                what: format!("{name} factor determinant winds around 0"),
                achieved: 1.0,
                required: 0.0,
            });
        }
    }
    Ok(fac)
}

/// `f- = G (f+)^{-1} d^{-1}` from grid samples; its positive Laurent
/// coefficients must vanish.
fn minus_factor<T: Real>(g: &MatrixLoop<T>, plus: &MatrixLoop<T>, expo: &[i64]) -> Result<MatrixLoop<T>> {
    let n = g.size();
    let span = (g.degree_span() + plus.degree_span()) as usize + expo.iter().map(|e| e.unsigned_abs() as usize).max().unwrap_or(0);
    let mut size = grid_for(8 * (span + 1), 256);
    loop {
        let grid = UnitCircleGrid::new(size)?;
        let mut samples = Vec::with_capacity(size);
        for t in grid.nodes::<T>() {
            let dinv = DMatrix::from_diagonal(&CVec::from_iterator(n, expo.iter().map(|&e| cpowi(t, -e))));
            samples.push(g.evaluate(t)? * inverse(&plus.evaluate(t)?)? * dinv);
        }
        let scale = samples.iter().map(|s| fro(s)).fold(T::zero(), |a, b| a.max(b));
        let coeffs = dft_coefficients(&samples);
        let half = size / 2;
        let positive: T = (1..half).map(|j| fro(&coeffs[j])).fold(T::zero(), |a, b| a + b);
        let edge: T = (half - size / 8..=half).map(|j| fro(&coeffs[j])).fold(T::zero(), |a, b| a + b);
        if edge <= T::lit(1e-13) * scale {
            if positive > T::lit(1e-8) * scale {
                return Err(Error::InconsistentProfile(format!(
                    "minus factor has positive powers of size {:e}",
                    (positive / scale).as_f64()
                )));
            }
            let mut mc: BTreeMap<i64, CMat<T>> = BTreeMap::new();
            let mut lo = 0usize;
            for j in (0..half).rev() {
                if fro(&coeffs[(size - j) % size]) > T::lit(1e-15) * scale {
                    lo = j;
                    break;
                }
            }
            for j in 0..=lo {
                mc.insert(-(j as i64), coeffs[(size - j) % size].clone());
            }
            return MatrixLoop::from_coeffs(n, mc);
        }
        if size >= 1 << 14 {
            return Err(Error::UnderResolved(format!(
                "minus factor not resolved on {size} points"
            )));
        }
        size *= 2;
    }
}

/// Dimension of the stabilizer space and codimension of the stratum of `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StratumInvariants {
    pub dim_hk: i64,
    pub codim: i64,
}

pub fn stratum_invariants(k: &SplittingType) -> StratumInvariants {
    let ks = k.as_slice();
    let mut dim_hk = 0;
    let mut codim = 0;
    for &a in ks {
        for &b in ks {
            if a >= b {
                dim_hk += a - b + 1;
            }
            if a > b {
                codim += a - b - 1;
            }
        }
    }
    StratumInvariants { dim_hk, codim }
}

/// `k_1 - k_n <= 1`.
pub fn is_stable(k: &SplittingType) -> bool {
    k.first() - k.last() <= 1
}
