//! Gauge transformations `g -> H g` by constant matrices and diagonal
//! shears `(z - s)^D`, and the exponent-reduction algorithm built on them.

use nalgebra::DMatrix;

use super::system::RegularSystem;
use crate::birkhoff::{partial_indices, SplittingType};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, identity, inverse, left_eigenvector, right_eigenvector};
use crate::loop_algebra::{loop_from_samples, UnitCircleGrid};
use crate::scalar::*;

/// One factor of a gauge transformation.
#[derive(Debug, Clone, PartialEq)]
pub enum GaugeFactor<T: Real> {
    Constant(CMat<T>),
    /// `(z - s)^{diag(d)}` at a marked point `s`.
    Shear { at: C<T>, d: Vec<i64> },
}

impl<T: Real> GaugeFactor<T> {
    pub fn evaluate(&self, z: C<T>) -> CMat<T> {
        match self {
            GaugeFactor::Constant(c) => c.clone(),
            GaugeFactor::Shear { at, d } => {
                DMatrix::from_diagonal(&CVec::from_iterator(d.len(), d.iter().map(|e| cpowi(z - *at, *e))))
            }
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(match self {
            GaugeFactor::Constant(c) => GaugeFactor::Constant(inverse(c)?),
            GaugeFactor::Shear { at, d } => GaugeFactor::Shear { at: *at, d: d.iter().map(|e| -e).collect() },
        })
    }
}

/// `T(z) = H_k(z) ... H_1(z)` for factors applied in order `H_1, ..., H_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gauge<T: Real> {
    pub n: usize,
    pub factors: Vec<GaugeFactor<T>>,
}

impl<T: Real> Gauge<T> {
    pub fn identity(n: usize) -> Self {
        Gauge { n, factors: Vec::new() }
    }

    pub fn evaluate(&self, z: C<T>) -> CMat<T> {
        self.factors.iter().fold(identity(self.n), |acc, f| f.evaluate(z) * acc)
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }
}

/// Scalar rational function `sum_j sum_k p_jk (z - s_j)^{-k} + sum_q q_q z^q`.
#[derive(Clone)]
struct Entry<T: Real> {
    pp: Vec<Vec<C<T>>>,
    poly: Vec<C<T>>,
}

fn add_at<T: Real>(v: &mut Vec<C<T>>, i: usize, x: C<T>) {
    if v.len() <= i {
        v.resize(i + 1, zero());
    }
    v[i] += x;
}

impl<T: Real> Entry<T> {
    /// Multiplies by `z - s_l`.
    fn mul_linear(&mut self, pts: &[C<T>], l: usize) {
        let s = pts[l];
        let mut poly = vec![zero(); self.poly.len() + 1];
        for (q, a) in self.poly.iter().enumerate() {
            poly[q + 1] += *a;
            poly[q] -= *a * s;
        }
        let mut pp = vec![Vec::new(); pts.len()];
        for (j, parts) in self.pp.iter().enumerate() {
            let d = pts[j] - s;
            for (k0, p) in parts.iter().enumerate() {
                if j != l {
                    add_at(&mut pp[j], k0, *p * d);
                }
                if k0 == 0 {
                    poly[0] += *p;
                } else {
                    add_at(&mut pp[j], k0 - 1, *p);
                }
            }
        }
        self.pp = pp;
        self.poly = poly;
    }

    /// Divides by `z - s_l`.
    fn div_linear(&mut self, pts: &[C<T>], l: usize) {
        let s = pts[l];
        let mut pp = vec![Vec::new(); pts.len()];
        // polynomial part: Q(z) = (z - s) q(z) + Q(s)
        let deg = self.poly.len();
        let mut quotient = vec![zero(); deg.saturating_sub(1)];
        let mut carry = zero();
        for i in (0..deg).rev() {
            let b = self.poly[i] + carry * s;
            if i > 0 {
                quotient[i - 1] = b;
            } else {
                add_at(&mut pp[l], 0, b);
            }
            carry = b;
        }
        for (j, parts) in self.pp.iter().enumerate() {
            if j == l {
                for (k0, p) in parts.iter().enumerate() {
                    add_at(&mut pp[l], k0 + 1, *p);
                }
                continue;
            }
            let f = one::<T>() / (pts[j] - s);
            for (k0, p) in parts.iter().enumerate() {
                let mut coef = *p;
                for r in (0..=k0).rev() {
                    add_at(&mut pp[j], r, coef * f);
                    coef = -coef * f;
                }
                add_at(&mut pp[l], 0, coef);
            }
        }
        self.pp = pp;
        self.poly = quotient;
    }
}

fn point_index<T: Real>(sys: &RegularSystem<T>, at: C<T>) -> Result<usize> {
    sys.points()
        .iter()
        .position(|s| modulus(*s - at) <= T::lit(1e-12) * (T::one() + modulus(at)))
        .ok_or_else(|| Error::invalid("shears are only allowed at marked points"))
}

fn shear<T: Real>(sys: &RegularSystem<T>, l: usize, d: &[i64]) -> Result<RegularSystem<T>> {
    let n = sys.size();
    if d.len() != n {
        return Err(Error::invalid("shear exponent has the wrong length"));
    }
    let pts = sys.points().to_vec();
    let mut entries = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut e = Entry {
                pp: (0..pts.len()).map(|j| sys.principal(j).iter().map(|m| m[(a, b)]).collect()).collect(),
                poly: sys.poly().iter().map(|m| m[(a, b)]).collect(),
            };
            let shift = d[a] - d[b];
            for _ in 0..shift.max(0) {
                e.mul_linear(&pts, l);
            }
            for _ in 0..(-shift).max(0) {
                e.div_linear(&pts, l);
            }
            entries.push(e);
        }
    }
    let mut principal: Vec<Vec<CMat<T>>> = (0..pts.len())
        .map(|j| {
            let len = entries.iter().map(|e| e.pp[j].len()).max().unwrap_or(0);
            (0..len)
                .map(|k| {
                    DMatrix::from_fn(n, n, |a, b| entries[a * n + b].pp[j].get(k).copied().unwrap_or(zero()))
                })
                .collect()
        })
        .collect();
    let plen = entries.iter().map(|e| e.poly.len()).max().unwrap_or(0);
    let poly = (0..plen)
        .map(|q| DMatrix::from_fn(n, n, |a, b| entries[a * n + b].poly.get(q).copied().unwrap_or(zero())))
        .collect();
    // logarithmic derivative D / (z - s)
    if principal[l].is_empty() {
        principal[l].push(DMatrix::zeros(n, n));
    }
    for (i, e) in d.iter().enumerate() {
        principal[l][0][(i, i)] += cr(T::lit(*e as f64));
    }
    RegularSystem::new(pts, principal, poly, sys.basepoint())
}

/// `B = H' H^{-1} + H A H^{-1}` for one factor.
pub fn gauge_transform<T: Real>(sys: &RegularSystem<T>, h: &GaugeFactor<T>) -> Result<RegularSystem<T>> {
    match h {
        GaugeFactor::Constant(c) => {
            let ci = inverse(c)?;
            let conj = |m: &CMat<T>| c * m * &ci;
            RegularSystem::new(
                sys.points().to_vec(),
                (0..sys.points().len()).map(|j| sys.principal(j).iter().map(conj).collect()).collect(),
                sys.poly().iter().map(conj).collect(),
                sys.basepoint(),
            )
        }
        GaugeFactor::Shear { at, d } => shear(sys, point_index(sys, *at)?, d),
    }
}

/// Applies all factors of a gauge in order.
pub fn apply_gauge<T: Real>(sys: &RegularSystem<T>, g: &Gauge<T>) -> Result<RegularSystem<T>> {
    let mut out = sys.clone();
    for f in &g.factors {
        out = gauge_transform(&out, f)?;
    }
    Ok(out)
}

/// Output of [`reduce_exponents`].
#[derive(Debug, Clone)]
pub struct Reduction<T: Real> {
    pub system: RegularSystem<T>,
    pub gauge: Gauge<T>,
}

const MAX_REDUCTION_STEPS: usize = 1000;

/// Basis change whose first row is `v` (the other rows are unit vectors).
fn first_row_basis<T: Real>(v: &CVec<T>) -> CMat<T> {
    let n = v.len();
    let p = (0..n).max_by(|&a, &b| modulus(v[a]).partial_cmp(&modulus(v[b])).unwrap()).unwrap();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = v[j];
    }
    let mut row = 1;
    for i in 0..n {
        if i != p {
            m[(row, i)] = one();
            row += 1;
        }
    }
    m
}

/// Moves every exponent at the finite points into `0 <= Re beta < 1`.
///
/// An eigenvalue `beta` of the residue at `s` with `Re beta >= 1` is
/// lowered by one: a constant change of basis makes the first basis row a
/// left eigenvector for `beta`, after which the shear `(z - s)^{diag(-1,
/// 0, ...)}` keeps the point Fuchsian and replaces `beta` by `beta - 1`.
/// Exponents with `Re beta < 0` are raised the same way using a right
/// eigenvector and `diag(1, 0, ...)`. Infinity absorbs the changes and may
/// become non-Fuchsian.
pub fn reduce_exponents<T: Real>(sys: &RegularSystem<T>) -> Result<Reduction<T>> {
    let n = sys.size();
    for j in 0..sys.points().len() {
        if !sys.is_fuchsian_at(j) {
            return Err(Error::invalid(format!("point {j} is not Fuchsian")));
        }
    }
    let tol = T::lit(1e-9);
    let mut cur = sys.clone();
    let mut gauge = Gauge::identity(n);
    for j in 0..sys.points().len() {
        let s = sys.points()[j];
        for step in 0.. {
            if step >= MAX_REDUCTION_STEPS {
                return Err(Error::invalid("exponent reduction does not terminate"));
            }
            let r = cur.residue(j);
            let eig = eigenvalues(&r);
            let high = eig
                .iter()
                .copied()
                .filter(|b| b.re >= T::one() - tol)
                .max_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
            let low = eig
                .iter()
                .copied()
                .filter(|b| b.re < -tol)
                .min_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
            let (basis, sign, beta) = match (high, low) {
                (Some(b), _) => (first_row_basis(&left_eigenvector(&r, b)), -1, b),
                (None, Some(b)) => (inverse(&first_row_basis(&right_eigenvector(&r, b)).transpose())?, 1, b),
                (None, None) => break,
            };
            let c = GaugeFactor::Constant(basis);
            cur = gauge_transform(&cur, &c)?;
            gauge.factors.push(c);
            let mut d = vec![0; n];
            d[0] = sign;
            let sh = GaugeFactor::Shear { at: s, d };
            let next = gauge_transform(&cur, &sh)?;
            if !next.is_fuchsian_at(j) {
                return Err(Error::Resonance {
                    point: j,
                    a: format!("{:.10}{:+.10}i", beta.re.as_f64(), beta.im.as_f64()),
                    b: "shifted copy".into(),
                });
            }
            cur = next;
            gauge.factors.push(sh);
        }
    }
    Ok(Reduction { system: cur, gauge })
}

/// Splitting type of the bundle produced by the reduction: the partial
/// indices of `T` on a circle enclosing every finite point, negated.
pub fn splitting_via_reduction<T: Real>(sys: &RegularSystem<T>) -> Result<(SplittingType, Reduction<T>)> {
    let red = reduce_exponents(sys)?;
    let big = sys.points().iter().fold(T::zero(), |a, s| a.max(modulus(*s)));
    let rho = big * T::lit(2.0) + T::one();
    let grid = UnitCircleGrid::new(256)?;
    let samples: Vec<CMat<T>> = grid
        .nodes::<T>()
        .into_iter()
        .map(|t| red.gauge.evaluate(t * cr(rho)))
        .collect();
    let lp = loop_from_samples(&samples, 1e-13)?;
    let k = partial_indices(&lp)?;
    Ok((k.negated(), red))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::levelt::all_exponents;
    use crate::fuchsian::{monodromy, FuchsianSystem};

    fn hyper(a: f64, b: f64, g: f64) -> RegularSystem<f64> {
        let a0 = DMatrix::from_row_slice(2, 2, &[zero(), zero(), c(-a * b, 0.0), c(-g, 0.0)]);
        let a1 = DMatrix::from_row_slice(2, 2, &[zero(), one(), zero(), c(g - a - b, 0.0)]);
        FuchsianSystem::new(vec![zero(), one()], vec![a0.clone(), a1.clone()], Some(-(a0 + a1)), None)
            .unwrap()
            .to_regular()
            .unwrap()
    }

    fn close(a: &RegularSystem<f64>, b: &RegularSystem<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for z in [c(0.3, 0.7), c(-2.0, 0.1), c(1.5, -1.0)] {
            worst = worst.max((a.coefficient(z) - b.coefficient(z)).norm());
        }
        worst
    }

    #[test]
    fn constant_gauge_conjugates_residues_and_monodromy() {
        let sys = hyper(0.25, 0.25, 0.5);
        let cm = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.2), c(-0.3, 0.0), c(2.0, 0.0)]);
        let out = gauge_transform(&sys, &GaugeFactor::Constant(cm.clone())).unwrap();
        let ci = inverse(&cm).unwrap();
        assert!((out.residue(0) - &cm * sys.residue(0) * &ci).norm() < 1e-14);
        let m0 = monodromy(&sys).unwrap();
        let m1 = monodromy(&out).unwrap();
        for (g0, g1) in m0.generators.iter().zip(&m1.generators) {
            assert!((g1 - &cm * g0 * &ci).norm() < 1e-8);
        }
    }

    #[test]
    fn shear_shifts_the_residue_and_round_trips() {
        let sys = hyper(0.3, 0.45, -0.5);
        let d = vec![1, 0];
        let h = GaugeFactor::Shear { at: zero(), d: d.clone() };
        let out = gauge_transform(&sys, &h).unwrap();
        // pointwise check of H' H^{-1} + H A H^{-1}
        let z = c(0.4, -0.9);
        let hz = h.evaluate(z);
        let dh = DMatrix::from_diagonal(&CVec::from_vec(vec![one(), zero()]));
        let want = &dh * inverse(&hz).unwrap() + &hz * sys.coefficient(z) * inverse(&hz).unwrap();
        assert!((out.coefficient(z) - want).norm() < 1e-13);
        let back = gauge_transform(&out, &h.inverse().unwrap()).unwrap();
        assert!(close(&back, &sys) < 1e-12);
    }

    #[test]
    fn diagonal_example() {
        let a = DMatrix::from_diagonal(&CVec::from_vec(vec![c::<f64>(1.0, 0.0), zero()]));
        let sys = FuchsianSystem::new(vec![zero()], vec![a.clone()], Some(-a), None)
            .unwrap()
            .to_regular()
            .unwrap();
        let (k, red) = splitting_via_reduction(&sys).unwrap();
        assert_eq!(k.as_slice(), &[1, 0]);
        let t = red.gauge.evaluate(c(2.0, 0.0));
        assert!((t - DMatrix::from_diagonal(&CVec::from_vec(vec![c(0.5, 0.0), one()]))).norm() < 1e-14);
        let ex = all_exponents(&red.system.clone()).unwrap();
        assert!(ex[0].phi.iter().all(|p| *p == 0));
    }

    #[test]
    fn hypergeometric_reduction() {
        let sys = hyper(0.3, 0.45, -0.5);
        let red = reduce_exponents(&sys).unwrap();
        assert!(!red.gauge.is_identity());
        for j in 0..2 {
            let ex = crate::fuchsian::local_exponents(&red.system, j).unwrap();
            assert!(ex.phi.iter().all(|p| *p == 0), "{ex:?}");
        }
        let untouched = hyper(0.25, 0.25, 0.5);
        let (k, _) = splitting_via_reduction(&untouched).unwrap();
        // T = diag(z, 1) C for a constant C, whose indices are (1, 0)
        assert_eq!(k.as_slice(), &[0, -1]);
        // two raising shears at 1: det T winds twice
        let (k, _) = splitting_via_reduction(&sys).unwrap();
        assert_eq!(k.sum(), -2);
    }
}
