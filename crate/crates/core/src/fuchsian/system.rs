use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::eigenvalues;
use crate::scalar::*;

/// Relative size below which a residue sum counts as zero.
pub const RESIDUE_SUM_TOL: f64 = 1e-12;

/// A marked point of the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point<T: Real> {
    Finite(C<T>),
    Infinity,
}

impl<T: Real> std::fmt::Display for Point<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Point::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            Point::Infinity => write!(f, "inf"),
        }
    }
}

/// `dPhi = A(z) Phi dz` with `A(z) = sum_j sum_k P_jk (z - s_j)^{-k} + sum_q Q_q z^q`.
///
/// Finite singular points carry principal parts of any finite order; the
/// polynomial part describes the behaviour at infinity.
#[derive(Debug, Clone)]
pub struct RegularSystem<T: Real> {
    n: usize,
    points: Vec<C<T>>,
    /// `principal[j][k - 1]` multiplies `(z - s_j)^{-k}`.
    principal: Vec<Vec<CMat<T>>>,
    poly: Vec<CMat<T>>,
    basepoint: Option<C<T>>,
}

fn check_distinct<T: Real>(points: &[C<T>]) -> Result<()> {
    for i in 0..points.len() {
        for j in 0..i {
            if modulus(points[i] - points[j]) <= T::lit(1e-12) * (T::one() + modulus(points[i])) {
                return Err(Error::invalid(format!("points {j} and {i} coincide")));
            }
        }
    }
    Ok(())
}

fn trim<T: Real>(v: &mut Vec<CMat<T>>, scale: T) {
    while let Some(last) = v.last() {
        if max_abs(last) <= T::lit(1e-14) * scale {
            v.pop();
        } else {
            break;
        }
    }
}

impl<T: Real> RegularSystem<T> {
    pub fn new(
        points: Vec<C<T>>,
        principal: Vec<Vec<CMat<T>>>,
        poly: Vec<CMat<T>>,
        basepoint: Option<C<T>>,
    ) -> Result<Self> {
        if points.len() != principal.len() {
            return Err(Error::invalid("one principal part per point is required"));
        }
        let n = principal
            .iter()
            .flatten()
            .chain(poly.iter())
            .map(|m| m.nrows())
            .next()
            .ok_or_else(|| Error::invalid("the system has no coefficients"))?;
        for m in principal.iter().flatten().chain(poly.iter()) {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::invalid("coefficient matrices must all be n x n"));
            }
        }
        check_distinct(&points)?;
        if let Some(b) = basepoint {
            if points.iter().any(|s| modulus(*s - b) < T::lit(1e-12)) {
                return Err(Error::invalid("basepoint coincides with a singular point"));
            }
        }
        let mut sys = RegularSystem { n, points, principal, poly, basepoint };
        sys.normalize();
        Ok(sys)
    }

    /// Drops trailing negligible orders.
    pub(crate) fn normalize(&mut self) {
        let scale = self
            .principal
            .iter()
            .flatten()
            .chain(self.poly.iter())
            .fold(T::one(), |a, m| a.max(max_abs(m)));
        for p in self.principal.iter_mut() {
            trim(p, scale);
        }
        trim(&mut self.poly, scale);
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[C<T>] {
        &self.points
    }

    pub fn principal(&self, j: usize) -> &[CMat<T>] {
        &self.principal[j]
    }

    pub fn poly(&self) -> &[CMat<T>] {
        &self.poly
    }

    pub fn basepoint(&self) -> Option<C<T>> {
        self.basepoint
    }

    pub fn with_basepoint(mut self, b: Option<C<T>>) -> Self {
        self.basepoint = b;
        self
    }

    /// Coefficient of `(z - s_j)^{-1}`.
    pub fn residue(&self, j: usize) -> CMat<T> {
        self.principal[j]
            .first()
            .cloned()
            .unwrap_or_else(|| DMatrix::zeros(self.n, self.n))
    }

    pub fn pole_order(&self, j: usize) -> usize {
        self.principal[j].len()
    }

    pub fn is_fuchsian_at(&self, j: usize) -> bool {
        self.pole_order(j) <= 1
    }

    /// Residue of the coefficient form at infinity, `-sum_j Res_j`.
    pub fn residue_at_infinity(&self) -> CMat<T> {
        let mut s = DMatrix::zeros(self.n, self.n);
        for j in 0..self.points.len() {
            s -= self.residue(j);
        }
        s
    }

    /// Pole order of the coefficient form at infinity in `w = 1/z`.
    pub fn pole_order_at_infinity(&self) -> usize {
        if !self.poly.is_empty() {
            return self.poly.len() + 1;
        }
        let res = self.residue_at_infinity();
        let scale = (0..self.points.len()).fold(T::one(), |a, j| a.max(max_abs(&self.residue(j))));
        usize::from(max_abs(&res) > T::lit(RESIDUE_SUM_TOL) * scale)
    }

    pub fn infinity_is_singular(&self) -> bool {
        self.pole_order_at_infinity() > 0
    }

    pub fn coefficient(&self, z: C<T>) -> CMat<T> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for (s, parts) in self.points.iter().zip(&self.principal) {
            let inv = one::<T>() / (z - *s);
            let mut p = inv;
            for m in parts {
                a += m * p;
                p *= inv;
            }
        }
        let mut p = one::<T>();
        for m in &self.poly {
            a += m * p;
            p *= z;
        }
        a
    }

    /// Taylor coefficients of `A(z + h)` in `h` up to `h^{len-1}`.
    pub fn coefficient_jet(&self, z: C<T>, len: usize) -> Vec<CMat<T>> {
        let mut out = vec![DMatrix::zeros(self.n, self.n); len];
        for (s, parts) in self.points.iter().zip(&self.principal) {
            // (z - s + h)^{-k} = sum_r binom(-k, r) (z - s)^{-k-r} h^r
            let d = z - *s;
            for (k0, m) in parts.iter().enumerate() {
                let k = (k0 + 1) as f64;
                let mut coef = cpowi(d, -(k0 as i64) - 1);
                for (r, slot) in out.iter_mut().enumerate() {
                    *slot += m * coef;
                    coef = coef * cr(T::lit(-(k + r as f64) / (r as f64 + 1.0))) / d;
                }
            }
        }
        for (q, m) in self.poly.iter().enumerate() {
            // (z + h)^q
            let mut binom = 1.0;
            for (r, slot) in out.iter_mut().enumerate().take(q + 1) {
                *slot += m * (cr(T::lit(binom)) * cpowi(z, (q - r) as i64));
                binom = binom * (q - r) as f64 / (r + 1) as f64;
            }
        }
        out
    }

    /// Distance from `z` to the nearest finite singular point.
    pub fn distance_to_singular(&self, z: C<T>) -> T {
        self.points
            .iter()
            .map(|s| modulus(z - *s))
            .fold(T::max_value().unwrap(), |a, b| a.min(b))
    }
}

/// Fuchsian system `dPhi = sum_i A_i/(z - s_i) Phi dz`, optionally with
/// infinity marked and its residue given.
#[derive(Debug, Clone)]
pub struct FuchsianSystem<T: Real> {
    points: Vec<C<T>>,
    residues: Vec<CMat<T>>,
    infinity: Option<CMat<T>>,
    basepoint: Option<C<T>>,
}

impl<T: Real> FuchsianSystem<T> {
    /// Validates distinctness and the residue sum: `sum A_i = 0`, or
    /// `sum A_i + A_inf = 0` when infinity is marked.
    pub fn new(
        points: Vec<C<T>>,
        residues: Vec<CMat<T>>,
        infinity: Option<CMat<T>>,
        basepoint: Option<C<T>>,
    ) -> Result<Self> {
        if points.len() != residues.len() || points.is_empty() {
            return Err(Error::invalid("one residue per finite point is required"));
        }
        let n = residues[0].nrows();
        for m in residues.iter().chain(infinity.iter()) {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::invalid("residues must all be n x n"));
            }
        }
        check_distinct(&points)?;
        let sys = FuchsianSystem { points, residues, infinity, basepoint };
        let defect = sys.residue_sum_defect();
        if defect > T::lit(RESIDUE_SUM_TOL) {
            return Err(Error::invalid(format!(
                "residues do not sum to zero (relative defect {:e})",
                defect.as_f64()
            )));
        }
        sys.to_regular()?;
        Ok(sys)
    }

    pub fn size(&self) -> usize {
        self.residues[0].nrows()
    }

    pub fn points(&self) -> &[C<T>] {
        &self.points
    }

    pub fn residues(&self) -> &[CMat<T>] {
        &self.residues
    }

    pub fn infinity(&self) -> Option<&CMat<T>> {
        self.infinity.as_ref()
    }

    pub fn basepoint(&self) -> Option<C<T>> {
        self.basepoint
    }

    /// `|sum A_i (+ A_inf)| / max |A_i|`.
    pub fn residue_sum_defect(&self) -> T {
        let n = self.size();
        let mut s = DMatrix::zeros(n, n);
        let mut scale = T::zero();
        for m in self.residues.iter().chain(self.infinity.iter()) {
            s += m;
            scale = scale.max(max_abs(m));
        }
        if scale == T::zero() {
            return T::zero();
        }
        max_abs(&s) / scale
    }

    pub fn to_regular(&self) -> Result<RegularSystem<T>> {
        RegularSystem::new(
            self.points.clone(),
            self.residues.iter().map(|a| vec![a.clone()]).collect(),
            Vec::new(),
            self.basepoint,
        )
    }
}

/// Outcome of [`validate_fuchsian`].
#[derive(Debug, Clone)]
pub struct FuchsianReport<T: Real> {
    pub residue_sum_defect: T,
    /// Eigenvalues of each residue, finite points first, then infinity
    /// when it is singular.
    pub eigenvalues: Vec<(Point<T>, Vec<C<T>>)>,
}

pub fn validate_fuchsian<T: Real>(sys: &FuchsianSystem<T>) -> FuchsianReport<T> {
    let mut eigs: Vec<(Point<T>, Vec<C<T>>)> = sys
        .points
        .iter()
        .zip(&sys.residues)
        .map(|(s, a)| (Point::Finite(*s), eigenvalues(a)))
        .collect();
    let reg = sys.to_regular().expect("validated on construction");
    if sys.infinity.is_some() || reg.infinity_is_singular() {
        eigs.push((Point::Infinity, eigenvalues(&reg.residue_at_infinity())));
    }
    FuchsianReport { residue_sum_defect: sys.residue_sum_defect(), eigenvalues: eigs }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nil() -> CMat<f64> {
        DMatrix::from_row_slice(2, 2, &[zero(), one(), zero(), zero()])
    }

    #[test]
    fn validation_examples() {
        let ok = FuchsianSystem::new(vec![c(1.0, 0.0), c(-1.0, 0.0)], vec![nil(), -nil()], None, None);
        assert!(ok.is_ok());
        let id = DMatrix::<C<f64>>::identity(2, 2);
        let bad = FuchsianSystem::new(vec![c(1.0, 0.0), c(-1.0, 0.0)], vec![id.clone(), id], None, None);
        assert!(matches!(bad, Err(Error::Invalid(_))));
        let same = FuchsianSystem::new(vec![c(1.0, 0.0), c(1.0, 0.0)], vec![nil(), -nil()], None, None);
        assert!(same.is_err());
    }

    #[test]
    fn jet_matches_finite_differences() {
        let sys = RegularSystem::new(
            vec![c(0.0, 0.0), c(1.0, 0.5)],
            vec![vec![nil(), nil() * c(0.5, 0.0)], vec![-nil()]],
            vec![nil() * c(0.2, 0.0), nil()],
            None,
        )
        .unwrap();
        let z = c(0.3, -0.7);
        let jet = sys.coefficient_jet(z, 3);
        assert!((&jet[0] - sys.coefficient(z)).norm() < 1e-14);
        let h = 1e-4;
        let d = (sys.coefficient(z + c(h, 0.0)) - sys.coefficient(z - c(h, 0.0))) / c(2.0 * h, 0.0);
        assert!((&jet[1] - d).norm() < 1e-6);
        let d2 = (sys.coefficient(z + c(h, 0.0)) - sys.coefficient(z) * c(2.0, 0.0) + sys.coefficient(z - c(h, 0.0)))
            / c(h * h, 0.0);
        assert!((&jet[2] * c(2.0, 0.0) - d2).norm() < 1e-5);
        assert_eq!(sys.pole_order(0), 2);
        assert_eq!(sys.pole_order_at_infinity(), 3);
    }
}
