use nalgebra::DMatrix;

use super::ode::{integrate_piece, Piece, RTOL};
use super::system::{Point, RegularSystem};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, expm};
use crate::loop_algebra::dft_coefficients;
use crate::regularization::normalized_log;
use crate::scalar::*;

/// Integer differences closer than this count as resonance.
pub const RESONANCE_TOL: f64 = 1e-8;

/// Levelt exponents at one point: `beta = phi + mu` with integer `phi`
/// weakly decreasing and `0 <= Re mu < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeveltData<T: Real> {
    pub point: Point<T>,
    pub phi: Vec<i64>,
    pub mu: Vec<C<T>>,
    pub beta: Vec<C<T>>,
}

impl<T: Real> LeveltData<T> {
    pub fn beta_sum(&self) -> C<T> {
        self.beta.iter().fold(zero(), |a, b| a + *b)
    }
}

fn from_pairs<T: Real>(point: Point<T>, mut pairs: Vec<(i64, C<T>)>) -> LeveltData<T> {
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.re.partial_cmp(&b.1.re).unwrap()));
    LeveltData {
        point,
        phi: pairs.iter().map(|p| p.0).collect(),
        mu: pairs.iter().map(|p| p.1).collect(),
        beta: pairs.iter().map(|p| p.1 + cr(T::lit(p.0 as f64))).collect(),
    }
}

/// Splits each `beta` as `phi + mu` with `phi = floor(Re beta)`; real
/// parts within rounding of an integer are snapped to it.
pub fn levelt_split<T: Real>(point: Point<T>, betas: &[C<T>]) -> LeveltData<T> {
    let pairs = betas
        .iter()
        .map(|b| {
            let near = b.re.round();
            let fl = if (b.re - near).abs() < T::lit(1e-10) { near } else { b.re.floor() };
            let phi = fl.as_f64() as i64;
            (phi, *b - cr(fl))
        })
        .collect();
    from_pairs(point, pairs)
}

fn check_resonance<T: Real>(point: usize, eig: &[C<T>]) -> Result<()> {
    for i in 0..eig.len() {
        for j in 0..i {
            let d = eig[i] - eig[j];
            let k = d.re.round();
            if k != T::zero() && modulus(d - cr(k)) < T::lit(RESONANCE_TOL) {
                return Err(Error::Resonance {
                    point,
                    a: format!("{:.10}{:+.10}i", eig[i].re.as_f64(), eig[i].im.as_f64()),
                    b: format!("{:.10}{:+.10}i", eig[j].re.as_f64(), eig[j].im.as_f64()),
                });
            }
        }
    }
    Ok(())
}

fn commutes<T: Real>(a: &CMat<T>, b: &CMat<T>, scale: T) -> bool {
    max_abs(&(a * b - b * a)) <= T::lit(1e-12) * scale * scale
}

/// Exactly solvable resonant case: every coefficient commutes with the
/// residue and the residue is normal, so the solution is
/// `(z - s)^{A} H(z)` with no logarithmic terms.
fn pure_split<T: Real>(sys: &RegularSystem<T>, a: &CMat<T>) -> bool {
    let scale = sys
        .points()
        .iter()
        .enumerate()
        .flat_map(|(k, _)| sys.principal(k).iter())
        .chain(sys.poly().iter())
        .fold(T::one(), |m, x| m.max(max_abs(x)));
    let normal = commutes(a, &a.adjoint(), scale);
    let all = (0..sys.points().len())
        .flat_map(|k| sys.principal(k).iter())
        .chain(sys.poly().iter())
        .all(|m| commutes(a, m, scale));
    normal && all
}

/// Levelt exponents at the finite Fuchsian point `j`: the eigenvalues of
/// the residue, split under the window. Resonant points are rejected
/// unless the local system is exactly solvable.
pub fn local_exponents<T: Real>(sys: &RegularSystem<T>, j: usize) -> Result<LeveltData<T>> {
    if j >= sys.points().len() {
        return Err(Error::invalid(format!("no point with index {j}")));
    }
    if !sys.is_fuchsian_at(j) {
        return Err(Error::invalid(format!(
            "point {j} is a pole of order {}; use levelt_numeric",
            sys.pole_order(j)
        )));
    }
    let eig = eigenvalues(&sys.residue(j));
    if check_resonance(j, &eig).is_err() && !pure_split(sys, &sys.residue(j)) {
        check_resonance(j, &eig)?;
    }
    Ok(levelt_split(Point::Finite(sys.points()[j]), &eig))
}

/// Levelt exponents at infinity when it is a Fuchsian point.
pub fn local_exponents_at_infinity<T: Real>(sys: &RegularSystem<T>) -> Result<LeveltData<T>> {
    if !sys.poly().is_empty() {
        return Err(Error::invalid("infinity is not a Fuchsian point"));
    }
    let res = sys.residue_at_infinity();
    let eig = eigenvalues(&res);
    if check_resonance(sys.points().len(), &eig).is_err() && !pure_split(sys, &res) {
        check_resonance(sys.points().len(), &eig)?;
    }
    Ok(levelt_split(Point::Infinity, &eig))
}

/// Samples on the small circle and thresholds used by [`levelt_numeric`].
const LOCAL_SAMPLES: usize = 128;
const VALUATION_TOL: f64 = 1e-7;

fn singular_values<T: Real>(m: &CMat<T>) -> Vec<T> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Nullity with an absolute threshold and a one-decade ambiguity check.
fn nullity_abs<T: Real>(m: &CMat<T>, thr: T) -> Result<usize> {
    let cols = m.ncols();
    let sv = singular_values(m);
    for s in &sv {
        if *s > thr * T::lit(0.1) && *s < thr * T::lit(10.0) {
            return Err(Error::AmbiguousRank { ratio: (*s / thr).as_f64(), cutoff: VALUATION_TOL });
        }
    }
    Ok(cols - sv.iter().filter(|s| **s > thr).count())
}

/// Levelt exponents at any finite regular singular point, computed from
/// the single-valued part `Y = Phi (z - s)^{-E}` of a local fundamental
/// matrix, `E` the normalized logarithm of the local monodromy.
///
/// For each generalized eigenspace `V` of `E` (eigenvalue `mu`, nilpotent
/// part `N`) the valuation filtration is
/// `S_m = { c in V : Y_p N^k c = 0 for all p < m, k >= 0 }`, and the
/// exponent `m + mu` occurs `dim S_m - dim S_{m+1}` times.
pub fn levelt_numeric<T: Real>(sys: &RegularSystem<T>, j: usize) -> Result<LeveltData<T>> {
    let n = sys.size();
    let s = sys.points()[j];
    let others = (0..sys.points().len())
        .filter(|&k| k != j)
        .map(|k| modulus(sys.points()[k] - s))
        .fold(T::max_value().unwrap(), |a, b| a.min(b));
    let rho = if others.is_finite() && others < T::max_value().unwrap() {
        others * T::lit(0.25)
    } else {
        T::lit(0.25)
    };
    let m_samples = LOCAL_SAMPLES;
    let coef = |z: C<T>| sys.coefficient(z);
    let step = two_pi::<T>() / T::lit(m_samples as f64);
    let mut phi_k = Vec::with_capacity(m_samples);
    let mut y = DMatrix::identity(n, n);
    for k in 0..m_samples {
        phi_k.push(y.clone());
        let arc = Piece::Arc { center: s, radius: rho, start: step * T::lit(k as f64), sweep: step };
        y = integrate_piece(&coef, &arc, &y, RTOL)?;
    }
    let g = y;
    let e = normalized_log(&g)?;
    let ln_rho = rho.ln();
    let ys: Vec<CMat<T>> = phi_k
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let l = C::new(ln_rho, step * T::lit(k as f64));
            p * expm(&(&e * (-l)))
        })
        .collect();
    let raw = dft_coefficients(&ys);
    let coeff = |p: i64| -> &CMat<T> { &raw[p.rem_euclid(m_samples as i64) as usize] };
    let scale = raw.iter().fold(T::zero(), |a, m| a.max(fro(m)));
    let thr = T::lit(VALUATION_TOL) * scale;
    let quarter = (m_samples / 4) as i64;
    let mut order = 0i64;
    for p in 1..=quarter {
        if fro(coeff(-p)) > thr {
            order = p;
        }
    }
    if order == quarter {
        return Err(Error::UnderResolved(format!("principal part at point {j} reaches the sampling band")));
    }

    // cluster the eigenvalues of E
    let mu = eigenvalues(&e);
    let mut clusters: Vec<Vec<C<T>>> = Vec::new();
    for m in mu {
        match clusters.iter_mut().find(|cl| modulus(cl[0] - m) < T::lit(1e-3)) {
            Some(cl) => cl.push(m),
            None => clusters.push(vec![m]),
        }
    }
    let centroid = |cl: &Vec<C<T>>| cl.iter().fold(zero::<T>(), |a, b| a + *b) / cr(T::lit(cl.len() as f64));
    let id: CMat<T> = DMatrix::identity(n, n);
    let mut pairs = Vec::new();
    for (ci, cl) in clusters.iter().enumerate() {
        let q = cl.len();
        let mu_bar = centroid(cl);
        let mut proj = id.clone();
        for (oi, other) in clusters.iter().enumerate() {
            if oi != ci {
                let f = &e - &id * centroid(other);
                for _ in 0..other.len() {
                    proj = &f * proj;
                }
            }
        }
        let svd = proj.svd(true, false);
        let u = svd.u.unwrap();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
        let v = DMatrix::from_fn(n, q, |r, col| u[(r, idx[col])]);
        let nil = v.adjoint() * (&e - &id * mu_bar) * &v;
        let mut powers = vec![DMatrix::identity(q, q)];
        for _ in 1..q {
            let next = powers.last().unwrap() * &nil;
            powers.push(next);
        }
        let dim_at = |m: i64| -> Result<usize> {
            let mut blocks = Vec::new();
            for p in -order..m {
                for pw in &powers {
                    blocks.push(coeff(p) * &v * pw);
                }
            }
            if blocks.is_empty() {
                return Ok(q);
            }
            let stacked = DMatrix::from_fn(blocks.len() * n, q, |r, col| blocks[r / n][(r % n, col)]);
            nullity_abs(&stacked, thr)
        };
        let mut phis = Vec::with_capacity(q);
        let mut m = -order;
        let mut dim = dim_at(m)?;
        while dim > 0 {
            if m > quarter {
                return Err(Error::UnderResolved(format!("valuation at point {j} does not terminate")));
            }
            let next = dim_at(m + 1)?;
            for _ in next..dim {
                phis.push(m);
            }
            dim = next;
            m += 1;
        }
        if phis.len() != q {
            return Err(Error::InconsistentProfile(format!(
                "valuation filtration at point {j} has {} steps for multiplicity {q}",
                phis.len()
            )));
        }
        pairs.extend(phis.into_iter().zip(cl.iter().copied()));
    }
    Ok(from_pairs(Point::Finite(s), pairs))
}

/// Levelt data at every singular point: analytic at Fuchsian points,
/// numeric at higher-order poles, and at infinity when it is singular.
pub fn all_exponents<T: Real>(sys: &RegularSystem<T>) -> Result<Vec<LeveltData<T>>> {
    let mut out = Vec::new();
    for j in 0..sys.points().len() {
        out.push(if sys.is_fuchsian_at(j) { local_exponents(sys, j)? } else { levelt_numeric(sys, j)? });
    }
    if sys.infinity_is_singular() {
        out.push(local_exponents_at_infinity(sys)?);
    }
    Ok(out)
}

/// Total of all exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaReport<T: Real> {
    pub beta: C<T>,
    /// Nearest integer when within `1e-8`.
    pub integer: Option<i64>,
    pub fuchsian: bool,
}

pub fn fuchs_weight_beta<T: Real>(data: &[LeveltData<T>]) -> BetaReport<T> {
    let beta = data.iter().fold(zero::<T>(), |a, d| a + d.beta_sum());
    let r = beta.re.round();
    let integer = (modulus(beta - cr(r)) <= T::lit(1e-8)).then(|| r.as_f64() as i64);
    BetaReport { beta, integer, fuchsian: integer == Some(0) }
}
