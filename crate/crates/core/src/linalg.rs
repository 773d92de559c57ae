//! Dense complex linear algebra used by the loop and ODE modules.

use nalgebra::linalg::{Schur, SVD};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::*;

/// Relative rank cutoff for null-space extraction.
pub const RANK_CUTOFF: f64 = 1e-8;

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    DMatrix::identity(n, n)
}

pub fn det<T: Real>(m: &CMat<T>) -> C<T> {
    m.clone().lu().determinant()
}

/// Inverse via LU; fails when the matrix is numerically singular.
pub fn inverse<T: Real>(m: &CMat<T>) -> Result<CMat<T>> {
    let lu = m.clone().lu();
    let d = lu.determinant();
    let scale = max_abs(m).max(T::lit(1e-300));
    let n = m.nrows() as i32;
    if modulus(d) <= T::lit(1e-14) * scale.powi(n) || !d.re.is_finite() {
        return Err(Error::Singular {
            location: "matrix inverse".into(),
            det: modulus(d).as_f64(),
        });
    }
    lu.try_inverse().ok_or_else(|| Error::Singular {
        location: "matrix inverse".into(),
        det: modulus(d).as_f64(),
    })
}

/// Coefficients `c_0, ..., c_n` of `det(x I - m) = sum c_k x^k` by the
/// Faddeev-LeVerrier recursion.
pub fn char_poly<T: Real>(m: &CMat<T>) -> Vec<C<T>> {
    let n = m.nrows();
    let mut coeffs = vec![zero(); n + 1];
    coeffs[n] = one();
    let mut mk = DMatrix::<C<T>>::zeros(n, n);
    for k in 1..=n {
        mk = m * (&mk + identity::<T>(n) * coeffs[n + 1 - k]);
        coeffs[n - k] = -(mk.trace()) / cr(T::lit(k as f64));
    }
    coeffs
}

/// Coefficients of `prod (x - r)` in the layout of [`char_poly`].
pub fn poly_from_roots<T: Real>(roots: &[C<T>]) -> Vec<C<T>> {
    let mut p = vec![one::<T>()];
    for r in roots {
        let mut next = vec![zero(); p.len() + 1];
        for (k, a) in p.iter().enumerate() {
            next[k + 1] += *a;
            next[k] -= *a * *r;
        }
        p = next;
    }
    p
}

pub fn transpose<T: Real>(m: &CMat<T>) -> CMat<T> {
    m.transpose()
}

/// Matrix exponential by scaling and squaring of a Taylor polynomial.
pub fn expm<T: Real>(a: &CMat<T>) -> CMat<T> {
    let n = a.nrows();
    let norm = fro(a);
    let mut squarings = 0u32;
    let mut scale = T::one();
    let half = T::lit(0.5);
    while norm * scale > half {
        scale *= half;
        squarings += 1;
    }
    let scaled = a * cr(scale);
    let mut term = identity::<T>(n);
    let mut acc = identity::<T>(n);
    for k in 1..=24 {
        term = &term * &scaled * cr(T::one() / T::lit(k as f64));
        acc += &term;
        if fro(&term) <= T::lit(1e-18) * fro(&acc) {
            break;
        }
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    acc
}

/// Complex Schur form `m = Q T Q^H` with `T` upper triangular.
pub fn schur<T: Real>(m: &CMat<T>) -> (CMat<T>, CMat<T>) {
    let (q, mut t) = Schur::new(m.clone()).unpack();
    let n = t.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            t[(i, j)] = zero();
        }
    }
    (q, t)
}

/// Eigenvalues read from the Schur diagonal.
pub fn eigenvalues<T: Real>(m: &CMat<T>) -> Vec<C<T>> {
    let (_, t) = schur(m);
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Singular values (descending) and an orthonormal basis of the numerical
/// null space, as columns. The matrix is padded with zero rows when it is
/// wide so that the full right singular basis is available.
pub struct NullSpace<T: Real> {
    pub singular_values: Vec<T>,
    pub basis: CMat<T>,
}

impl<T: Real> NullSpace<T> {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Ratio of the singular value closest to the cutoff (from either side)
    /// to the largest one.
    pub fn nearest_ratio_to_cutoff(&self, cutoff: f64) -> Option<f64> {
        let smax = self.singular_values.first()?.as_f64();
        if smax == 0.0 {
            return None;
        }
        self.singular_values
            .iter()
            .map(|s| s.as_f64() / smax)
            .min_by(|a, b| {
                let da = (a.max(1e-300).ln() - cutoff.ln()).abs();
                let db = (b.max(1e-300).ln() - cutoff.ln()).abs();
                da.partial_cmp(&db).unwrap()
            })
    }

    /// Fails if some singular value sits within `band` decades of the cutoff.
    pub fn ensure_gap(&self, cutoff: f64, band: f64) -> Result<()> {
        if let Some(r) = self.nearest_ratio_to_cutoff(cutoff) {
            if r > 0.0 && (r.log10() - cutoff.log10()).abs() < band {
                return Err(Error::AmbiguousRank { ratio: r, cutoff });
            }
        }
        Ok(())
    }
}

pub fn null_space<T: Real>(m: &CMat<T>, rel_cutoff: f64) -> NullSpace<T> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return NullSpace {
            singular_values: vec![],
            basis: DMatrix::zeros(0, 0),
        };
    }
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("requested V");
    let sv: Vec<T> = svd.singular_values.iter().copied().collect();
    let smax = sv.first().copied().unwrap_or(T::zero());
    let cutoff = smax * T::lit(rel_cutoff);
    let rank = if smax == T::zero() {
        0
    } else {
        sv.iter().filter(|s| **s > cutoff).count()
    };
    let nullity = cols - rank;
    let mut basis = DMatrix::zeros(cols, nullity);
    for (k, row) in (rank..cols).enumerate() {
        for j in 0..cols {
            basis[(j, k)] = v_t[(row, j)].conj();
        }
    }
    NullSpace {
        singular_values: sv,
        basis,
    }
}

/// Numerical nullity from singular values alone; fails if a singular value
/// sits within `band` decades of the relative cutoff.
pub fn nullity<T: Real>(m: &CMat<T>, rel_cutoff: f64, band: f64) -> Result<usize> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(cols);
    }
    let sv = SVD::new(m.clone(), false, false).singular_values;
    let smax = sv[0];
    if smax == T::zero() {
        return Ok(cols);
    }
    let mut rank = 0;
    for s in sv.iter() {
        let r = (*s / smax).as_f64();
        if r > 0.0 && (r.log10() - rel_cutoff.log10()).abs() < band {
            return Err(Error::AmbiguousRank { ratio: r, cutoff: rel_cutoff });
        }
        if r > rel_cutoff {
            rank += 1;
        }
    }
    Ok(cols - rank)
}

/// The `k` right singular vectors belonging to the smallest singular values
/// (as columns), and the largest of those `k` singular values relative to
/// the largest overall.
pub fn trailing_singular_vectors<T: Real>(m: &CMat<T>, k: usize) -> (T, CMat<T>) {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("requested V");
    let sv = &svd.singular_values;
    let smax = if sv.is_empty() { T::zero() } else { sv[0] };
    let ratio = if k == 0 || smax == T::zero() {
        T::zero()
    } else {
        sv[cols - k] / smax
    };
    let mut basis = DMatrix::zeros(cols, k);
    for (c, row) in (cols - k..cols).enumerate() {
        for j in 0..cols {
            basis[(j, c)] = v_t[(row, j)].conj();
        }
    }
    (ratio, basis)
}

/// Unit vector `v` minimising `|(m - lambda I) v|`.
pub fn right_eigenvector<T: Real>(m: &CMat<T>, lambda: C<T>) -> CVec<T> {
    let n = m.nrows();
    let shifted = m - identity::<T>(n) * lambda;
    let svd = SVD::new(shifted, false, true);
    let v_t = svd.v_t.expect("requested V");
    let last = v_t.nrows() - 1;
    CVec::from_iterator(n, (0..n).map(|j| v_t[(last, j)].conj()))
}

/// Row vector `w` (returned as a column) with `w m = lambda w`.
pub fn left_eigenvector<T: Real>(m: &CMat<T>, lambda: C<T>) -> CVec<T> {
    right_eigenvector(&m.transpose(), lambda)
}

/// Analytic scalar function with a local Taylor expansion, used by the
/// divided-difference evaluation of primary matrix functions.
pub trait AnalyticFn<T: Real> {
    fn value(&self, z: C<T>) -> C<T>;
    /// First `terms` Taylor coefficients about `center`.
    fn taylor(&self, center: C<T>, terms: usize) -> Vec<C<T>>;
    /// Radius of the disc about `center` on which the Taylor series is valid.
    fn radius(&self, center: C<T>) -> T;
    /// Whether one Taylor expansion represents `f` at all of `pts`; false
    /// for multivalued functions whose points sit on different sheets.
    fn single_branch(&self, _pts: &[C<T>]) -> bool {
        true
    }
}

/// Divided difference `f[x_0, ..., x_k]`, confluent points allowed.
pub fn divided_difference<T: Real, F: AnalyticFn<T>>(f: &F, pts: &[C<T>]) -> C<T> {
    match pts.len() {
        0 => zero(),
        1 => f.value(pts[0]),
        k1 => {
            let (mut ia, mut ib, mut spread) = (0, 1, T::zero());
            for i in 0..k1 {
                for j in (i + 1)..k1 {
                    let d = modulus(pts[i] - pts[j]);
                    if d > spread {
                        spread = d;
                        ia = i;
                        ib = j;
                    }
                }
            }
            let centroid =
                pts.iter().fold(zero::<T>(), |a, p| a + *p) / cr(T::lit(k1 as f64));
            let radius = f.radius(centroid);
            if spread <= T::lit(0.25) * radius && f.single_branch(pts) {
                taylor_divided_difference(f, pts, centroid)
            } else {
                let without = |skip: usize| -> Vec<C<T>> {
                    pts.iter()
                        .enumerate()
                        .filter(|(i, _)| *i != skip)
                        .map(|(_, p)| *p)
                        .collect()
                };
                (divided_difference(f, &without(ia)) - divided_difference(f, &without(ib)))
                    / (pts[ib] - pts[ia])
            }
        }
    }
}

// f[x_0..x_k] = sum_{m >= k} a_m h_{m-k}(x - c)
fn taylor_divided_difference<T: Real, F: AnalyticFn<T>>(
    f: &F,
    pts: &[C<T>],
    center: C<T>,
) -> C<T> {
    let k = pts.len() - 1;
    let terms = 120 + k;
    let a = f.taylor(center, terms);
    let max_h = terms - k;
    // complete homogeneous symmetric polynomials h_0..h_max_h
    let mut h = vec![zero::<T>(); max_h];
    h[0] = one();
    let y0 = pts[0] - center;
    for j in 1..max_h {
        h[j] = h[j - 1] * y0;
    }
    for p in &pts[1..] {
        let y = *p - center;
        for j in 1..max_h {
            let prev = h[j - 1];
            h[j] += y * prev;
        }
    }
    let mut acc = zero::<T>();
    for (j, hj) in h.iter().enumerate() {
        acc += a[k + j] * *hj;
    }
    acc
}

/// Primary matrix function of an upper-triangular matrix through the
/// path-sum formula over strictly increasing index chains:
/// `F_ij = sum_{i=s0<...<sk=j} T_{s0 s1} ... T_{s(k-1) sk} f[t_s0, ..., t_sk]`.
pub fn triangular_function<T: Real, F: AnalyticFn<T>>(t: &CMat<T>, f: &F) -> CMat<T> {
    let n = t.nrows();
    let diag: Vec<C<T>> = (0..n).map(|i| t[(i, i)]).collect();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = f.value(diag[i]);
        for j in (i + 1)..n {
            let inner = j - i - 1;
            let mut acc = zero::<T>();
            for mask in 0u64..(1u64 << inner) {
                let mut chain = vec![i];
                for b in 0..inner {
                    if mask & (1 << b) != 0 {
                        chain.push(i + 1 + b);
                    }
                }
                chain.push(j);
                let mut weight = one::<T>();
                for w in chain.windows(2) {
                    weight *= t[(w[0], w[1])];
                }
                if weight == zero() {
                    continue;
                }
                let pts: Vec<C<T>> = chain.iter().map(|&s| diag[s]).collect();
                acc += weight * divided_difference(f, &pts);
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Primary matrix function through complex Schur triangularization.
pub fn primary_function<T: Real, F: AnalyticFn<T>>(m: &CMat<T>, f: &F) -> CMat<T> {
    let (q, t) = schur(m);
    let ft = triangular_function(&t, f);
    &q * ft * q.adjoint()
}

/// `exp`, used to cross-check the primary-function machinery.
pub struct ExpFn;

impl<T: Real> AnalyticFn<T> for ExpFn {
    fn value(&self, z: C<T>) -> C<T> {
        cexp(z)
    }
    fn taylor(&self, center: C<T>, terms: usize) -> Vec<C<T>> {
        let e = cexp(center);
        let mut out = Vec::with_capacity(terms);
        let mut fact = T::one();
        for m in 0..terms {
            if m > 0 {
                fact *= T::lit(m as f64);
            }
            out.push(e / cr(fact));
        }
        out
    }
    fn radius(&self, _center: C<T>) -> T {
        T::lit(1e300)
    }
}
