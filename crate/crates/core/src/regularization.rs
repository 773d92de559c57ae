//! Normalized matrix logarithms and the reduction of piecewise-continuous
//! transmission data to continuous data.
//!
//! At each jump `s_j` the jump matrix `G(s_j+0)^{-1} G(s_j-0)` has the
//! logarithm `Gamma_j` with eigenvalue real parts in `[0, 1)`. The factors
//! `Omega_j^+ = A_j G(s_j+0) (z - s_j)^{Gamma_j}` (cut along the outward ray)
//! and `Omega_j^- = B_j ((z - s_j)/(z - z0))^{Gamma_j}` (cut along the segment
//! from `z0` to `s_j`) absorb the jumps, so that
//! `G_1 = (prod Omega^+)^{-1} G prod Omega^-` is continuous on the circle.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{expm, inverse, schur, triangular_function, AnalyticFn};
use crate::loop_algebra::{loop_from_samples, MatrixLoop, PiecewiseLoop, UnitCircleGrid};
use crate::scalar::*;

/// Arguments within this distance of `2 pi` are treated as `0`.
const CUT_SNAP: f64 = 1e-9;
/// Eigenvalues closer than this (relative) share one branch.
const CLUSTER: f64 = 1e-3;
/// Distinct clusters on different sheets closer than this (relative) make
/// the normalization ill-posed.
const STRADDLE: f64 = 1e-2;

/// `(1 / 2 pi i) log` with branches fixed per eigenvalue cluster.
struct NormalizedLogFn<T: Real> {
    eig: Vec<C<T>>,
    /// Imaginary part of `log` assigned to each eigenvalue.
    sheet: Vec<T>,
}

fn arg_in_turn<T: Real>(z: C<T>) -> T {
    let mut a = arg(z);
    if a < T::zero() {
        a += two_pi::<T>();
    }
    if a >= two_pi::<T>() - T::lit(CUT_SNAP) {
        a -= two_pi::<T>();
    }
    a
}

impl<T: Real> NormalizedLogFn<T> {
    fn new(eig: Vec<C<T>>) -> Result<Self> {
        let n = eig.len();
        for z in &eig {
            if modulus(*z) == T::zero() {
                return Err(Error::Singular { location: "normalized_log".into(), det: 0.0 });
            }
        }
        // single-linkage clusters
        let mut label: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for j in 0..n {
                let close = modulus(eig[i] - eig[j]) <= T::lit(CLUSTER) * modulus(eig[i]).max(modulus(eig[j]));
                if close && label[j] != label[i] {
                    let (from, to) = (label[j], label[i]);
                    for l in label.iter_mut() {
                        if *l == from {
                            *l = to;
                        }
                    }
                }
            }
        }
        let mut sheet = vec![T::zero(); n];
        for i in 0..n {
            let members: Vec<usize> = (0..n).filter(|&j| label[j] == label[i]).collect();
            let centroid = members.iter().fold(zero::<T>(), |a, &j| a + eig[j]) / cr(T::lit(members.len() as f64));
            let reference = arg_in_turn(centroid);
            sheet[i] = nearest_branch(arg(eig[i]), reference);
        }
        for i in 0..n {
            for j in 0..n {
                if label[i] == label[j] {
                    continue;
                }
                let d = modulus(eig[i] - eig[j]);
                let close = d <= T::lit(STRADDLE) * modulus(eig[i]).max(modulus(eig[j]));
                if close && (sheet[i] - sheet[j]).abs() > T::pi() {
                    return Err(Error::Branch(format!(
                        "eigenvalues {:.6e}{:+.6e}i and {:.6e}{:+.6e}i straddle the branch cut",
                        eig[i].re.as_f64(),
                        eig[i].im.as_f64(),
                        eig[j].re.as_f64(),
                        eig[j].im.as_f64()
                    )));
                }
            }
        }
        Ok(NormalizedLogFn { eig, sheet })
    }

    fn reference(&self, z: C<T>) -> T {
        let mut best = 0;
        for i in 1..self.eig.len() {
            if modulus(self.eig[i] - z) < modulus(self.eig[best] - z) {
                best = i;
            }
        }
        self.sheet[best]
    }

    fn log(&self, z: C<T>) -> C<T> {
        let im = nearest_branch(arg(z), self.reference(z));
        C::new(modulus(z).ln(), im)
    }
}

/// `a + 2 pi k` closest to `reference`.
fn nearest_branch<T: Real>(a: T, reference: T) -> T {
    let tp = two_pi::<T>();
    let k = ((reference - a) / tp).round();
    a + k * tp
}

impl<T: Real> AnalyticFn<T> for NormalizedLogFn<T> {
    fn value(&self, z: C<T>) -> C<T> {
        self.log(z) / (imag_unit::<T>() * cr(two_pi::<T>()))
    }

    fn taylor(&self, center: C<T>, terms: usize) -> Vec<C<T>> {
        let scale = one::<T>() / (imag_unit::<T>() * cr(two_pi::<T>()));
        let mut out = Vec::with_capacity(terms);
        out.push(self.log(center) * scale);
        let inv = one::<T>() / center;
        let mut p = one::<T>();
        for m in 1..terms {
            p *= inv;
            let sign = if m % 2 == 1 { T::one() } else { -T::one() };
            out.push(p * cr(sign / T::lit(m as f64)) * scale);
        }
        out
    }

    fn radius(&self, center: C<T>) -> T {
        modulus(center)
    }

    fn single_branch(&self, pts: &[C<T>]) -> bool {
        let first = self.reference(pts[0]);
        pts.iter().all(|p| (self.reference(*p) - first).abs() < T::pi())
    }
}

/// `Gamma = (1 / 2 pi i) ln G` with every eigenvalue real part in `[0, 1)`.
pub fn normalized_log<T: Real>(g: &CMat<T>) -> Result<CMat<T>> {
    let n = g.nrows();
    if g.ncols() != n {
        return Err(Error::invalid("normalized_log needs a square matrix"));
    }
    inverse(g)?;
    let (q, t) = schur(g);
    let f = NormalizedLogFn::new((0..n).map(|i| t[(i, i)]).collect())?;
    let ft = triangular_function(&t, &f);
    let gamma = &q * ft * q.adjoint();
    let back = expm(&(&gamma * (imag_unit::<T>() * cr(two_pi::<T>()))));
    let err = fro(&(&back - g)) / fro(g);
    if err > T::lit(1e-8) {
        return Err(Error::Tolerance {
            what: "exp(2 pi i Gamma) = G".into(),
            achieved: err.as_f64(),
            required: 1e-8,
        });
    }
    Ok(gamma)
}

/// Logarithm of `w` whose argument lies in `(angle - 2 pi, angle]`, i.e.
/// with the cut along the ray of direction `angle`.
pub fn log_on_cut<T: Real>(w: C<T>, angle: T) -> Result<C<T>> {
    let r = modulus(w);
    if r == T::zero() {
        return Err(Error::invalid("logarithm of zero"));
    }
    let mut a = arg(w);
    let tp = two_pi::<T>();
    while a > angle {
        a -= tp;
    }
    while a <= angle - tp {
        a += tp;
    }
    let gap = (angle - a).min(a - (angle - tp));
    if gap < T::lit(1e-12) {
        return Err(Error::invalid("point lies on the branch cut"));
    }
    Ok(C::new(r.ln(), a))
}

/// `(z - s)^Gamma = exp(Gamma log(z - s))` with the cut along the ray from
/// `s` in direction `angle`.
pub fn matrix_power<T: Real>(z: C<T>, s: C<T>, gamma: &CMat<T>, angle: T) -> Result<CMat<T>> {
    let l = log_on_cut(z - s, angle)?;
    Ok(expm(&(gamma * l)))
}

/// `((z - s)/(z - z0))^Gamma` with the principal logarithm; its cut is the
/// segment from `z0` to `s`.
pub fn ratio_power<T: Real>(z: C<T>, s: C<T>, z0: C<T>, gamma: &CMat<T>) -> Result<CMat<T>> {
    let l = log_on_cut((z - s) / (z - z0), T::pi())?;
    Ok(expm(&(gamma * l)))
}

/// Data attached to one jump point.
#[derive(Debug, Clone)]
pub struct JumpData<T: Real> {
    pub s: C<T>,
    pub plus: CMat<T>,
    pub minus: CMat<T>,
    /// `G(s+0)^{-1} G(s-0)`.
    pub jump: CMat<T>,
    pub gamma: CMat<T>,
    pub a: CMat<T>,
    pub b: CMat<T>,
}

impl<T: Real> JumpData<T> {
    pub fn omega_plus(&self, z: C<T>) -> Result<CMat<T>> {
        Ok(&self.a * &self.plus * matrix_power(z, self.s, &self.gamma, arg(self.s))?)
    }

    pub fn omega_minus(&self, z: C<T>, z0: C<T>) -> Result<CMat<T>> {
        Ok(&self.b * ratio_power(z, self.s, z0, &self.gamma)?)
    }
}

/// All regularizing factors for a piecewise loop.
#[derive(Debug, Clone)]
pub struct Regularizers<T: Real> {
    pub z0: C<T>,
    pub jumps: Vec<JumpData<T>>,
    pub n: usize,
}

impl<T: Real> Regularizers<T> {
    /// `Omega_1^+ ... Omega_m^+` at `z` (restricted to the first `upto`
    /// factors when given).
    pub fn product_plus(&self, z: C<T>, range: std::ops::Range<usize>) -> Result<CMat<T>> {
        let mut acc = DMatrix::identity(self.n, self.n);
        for j in range {
            acc *= self.jumps[j].omega_plus(z)?;
        }
        Ok(acc)
    }

    pub fn product_minus(&self, z: C<T>, range: std::ops::Range<usize>) -> Result<CMat<T>> {
        let mut acc = DMatrix::identity(self.n, self.n);
        for j in range {
            acc *= self.jumps[j].omega_minus(z, self.z0)?;
        }
        Ok(acc)
    }
}

fn check_z0<T: Real>(z0: C<T>) -> Result<()> {
    if modulus(z0) >= T::one() {
        return Err(Error::invalid("z0 must lie inside the unit disk"));
    }
    Ok(())
}

/// Builds `Gamma_j`, `A_j = [prod_{k<j} Omega_k^+(s_j)]^{-1}` and
/// `B_j = [prod_{k<j} Omega_k^-(s_j)]^{-1}` in order.
pub fn build_regularizers<T: Real>(data: &PiecewiseLoop<T>, z0: C<T>) -> Result<Regularizers<T>> {
    check_z0(z0)?;
    let n = data.size();
    let mut reg = Regularizers { z0, jumps: Vec::new(), n };
    for (j, &s) in data.jumps().iter().enumerate() {
        if modulus(s - z0) < T::lit(1e-12) {
            return Err(Error::invalid(format!("jump {j} coincides with z0")));
        }
        let plus = data.limit_plus(j);
        let minus = data.limit_minus(j);
        let jump = inverse(&plus)? * &minus;
        let gamma = normalized_log(&jump)?;
        let a = inverse(&reg.product_plus(s, 0..j)?)?;
        let b = inverse(&reg.product_minus(s, 0..j)?)?;
        reg.jumps.push(JumpData { s, plus, minus, jump, gamma, a, b });
    }
    Ok(reg)
}

/// Polynomial extrapolation to `x = 0` (Neville).
pub fn extrapolate_to_zero<T: Real>(xs: &[T], ys: &[CMat<T>]) -> CMat<T> {
    let mut p: Vec<CMat<T>> = ys.to_vec();
    let m = xs.len();
    for level in 1..m {
        for i in 0..m - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            // value at 0 of the interpolant through points i..i+level
            p[i] = (&p[i + 1] * cr(xi) - &p[i] * cr(xj)) * cr(T::one() / (xi - xj));
        }
    }
    p[0].clone()
}

/// Offsets used for one-sided limits.
pub const LIMIT_OFFSETS: [f64; 4] = [1e-3, 1e-4, 1e-5, 1e-6];

/// Continuous loop obtained from piecewise data.
#[derive(Debug, Clone)]
pub struct RegularizedLoop<T: Real> {
    pub regularizers: Regularizers<T>,
    pub data: PiecewiseLoop<T>,
    pub grid: UnitCircleGrid,
    /// `G_1` at the grid nodes; nodes on a jump use the common limit.
    pub samples: Vec<CMat<T>>,
    /// Extrapolated `(G_1(s_j + 0), G_1(s_j - 0))`.
    pub limits: Vec<(CMat<T>, CMat<T>)>,
    /// `|G_1(s_j + 0) - G_1(s_j - 0)| / |G_1(s_j + 0)|`.
    pub defects: Vec<T>,
}

impl<T: Real> RegularizedLoop<T> {
    pub fn max_defect(&self) -> T {
        self.defects.iter().fold(T::zero(), |a, b| a.max(*b))
    }

    /// Laurent expansion of the samples; fails when `G_1` is not resolved
    /// by the grid to `tail_tolerance`.
    pub fn to_loop(&self, tail_tolerance: f64) -> Result<MatrixLoop<T>> {
        loop_from_samples(&self.samples, tail_tolerance)
    }
}

/// `G_1(z)` at a point of the circle that is not a jump.
pub fn regularized_value<T: Real>(reg: &Regularizers<T>, data: &PiecewiseLoop<T>, t: C<T>) -> Result<CMat<T>> {
    let m = reg.jumps.len();
    let left = inverse(&reg.product_plus(t, 0..m)?)?;
    Ok(left * data.evaluate(t) * reg.product_minus(t, 0..m)?)
}

/// Closed-form common limit of `G_1` at jump `j`.
fn limit_at_jump<T: Real>(reg: &Regularizers<T>, j: usize) -> Result<CMat<T>> {
    let m = reg.jumps.len();
    let jd = &reg.jumps[j];
    let s = jd.s;
    // from the counterclockwise side z - s ~ i s eta; the real parts of the
    // two logarithms cancel, leaving the sheet difference
    let dir = imag_unit::<T>() * s;
    let d = log_on_cut(dir / (s - reg.z0), T::pi())? - log_on_cut(dir, arg(s))?;
    let mid = expm(&(&jd.gamma * d));
    let left = inverse(&reg.product_plus(s, j + 1..m)?)?;
    Ok(left * mid * reg.product_minus(s, j + 1..m)?)
}

/// Reduces discontinuous data to a continuous loop `G_1` sampled on
/// `grid`, and measures the one-sided limits at every jump by extrapolation.
pub fn regularize_transmission<T: Real>(
    data: &PiecewiseLoop<T>,
    z0: C<T>,
    grid: &UnitCircleGrid,
) -> Result<RegularizedLoop<T>> {
    let reg = build_regularizers(data, z0)?;
    let mut samples = Vec::with_capacity(grid.size());
    for t in grid.nodes::<T>() {
        let hit = reg.jumps.iter().position(|jd| modulus(jd.s - t) < T::lit(1e-12));
        samples.push(match hit {
            Some(j) => limit_at_jump(&reg, j)?,
            None => regularized_value(&reg, data, t)?,
        });
    }
    let xs: Vec<T> = LIMIT_OFFSETS.iter().map(|&d| T::lit(d)).collect();
    let mut limits = Vec::new();
    let mut defects = Vec::new();
    for jd in &reg.jumps {
        let side = |sign: T| -> Result<CMat<T>> {
            let ys = xs
                .iter()
                .map(|&d| regularized_value(&reg, data, jd.s * cis(sign * d)))
                .collect::<Result<Vec<_>>>()?;
            Ok(extrapolate_to_zero(&xs, &ys))
        };
        let plus = side(T::one())?;
        let minus = side(-T::one())?;
        defects.push(fro(&(&plus - &minus)) / fro(&plus));
        limits.push((plus, minus));
    }
    Ok(RegularizedLoop {
        regularizers: reg,
        data: data.clone(),
        grid: grid.clone(),
        samples,
        limits,
        defects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[(f64, f64)]]) -> CMat<f64> {
        DMatrix::from_fn(rows.len(), rows.len(), |i, j| c(rows[i][j].0, rows[i][j].1))
    }

    fn exp_check(g: &CMat<f64>, gamma: &CMat<f64>) -> f64 {
        let back = expm(&(gamma * c(0.0, std::f64::consts::TAU)));
        (back - g).norm()
    }

    #[test]
    fn log_examples() {
        let id = DMatrix::<C<f64>>::identity(2, 2);
        assert!(normalized_log(&id).unwrap().norm() < 1e-14);

        let g = m(&[&[(1.0, 0.0), (1.0, 0.0)], &[(0.0, 0.0), (1.0, 0.0)]]);
        let gamma = normalized_log(&g).unwrap();
        let want = m(&[&[(0.0, 0.0), (0.0, -1.0 / std::f64::consts::TAU)], &[(0.0, 0.0), (0.0, 0.0)]]);
        assert!((&gamma - want).norm() < 1e-14);
        assert!(exp_check(&g, &gamma) < 1e-12);

        let g = DMatrix::<C<f64>>::identity(2, 2) * c(-1.0, 0.0);
        let gamma = normalized_log(&g).unwrap();
        assert!((gamma - DMatrix::identity(2, 2) * c(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn log_window_and_round_trip_on_nonnormal_matrices() {
        let g = m(&[
            &[(0.3, 0.4), (2.0, 0.0), (0.0, 1.0)],
            &[(0.0, 0.0), (0.3, 0.4), (5.0, 0.0)],
            &[(1e-3, 0.0), (0.0, 0.0), (-2.0, 0.1)],
        ]);
        let gamma = normalized_log(&g).unwrap();
        assert!(exp_check(&g, &gamma) < 1e-9 * g.norm());
        for mu in crate::linalg::eigenvalues(&gamma) {
            assert!(mu.re >= -1e-9 && mu.re < 1.0);
        }
        // eigenvalues just below the positive real axis map near 1
        let g = DMatrix::from_diagonal(&CVec::from_vec(vec![cis(-0.3), c(2.0, 0.0)]));
        let gamma = normalized_log(&g).unwrap();
        assert!((gamma[(0, 0)].re - (1.0 - 0.3 / std::f64::consts::TAU)).abs() < 1e-14);
        assert!(gamma[(1, 1)].re.abs() < 1e-14);
    }

    #[test]
    fn straddling_cluster_is_reported() {
        let g = m(&[&[(1.0, 1e-4), (1.0, 0.0)], &[(0.0, 0.0), (1.0, -1e-4)]]);
        assert!(normalized_log(&g).is_ok());
        let g = m(&[&[(1.0, 2e-3), (1.0, 0.0)], &[(0.0, 0.0), (1.0, -2e-3)]]);
        assert!(matches!(normalized_log(&g), Err(Error::Branch(_))));
        // well separated eigenvalues on both sides of the cut
        let g = m(&[&[(1.0, 0.3), (1.0, 0.0)], &[(0.0, 0.0), (1.0, -0.3)]]);
        let e = normalized_log(&g).unwrap();
        let back = expm(&(&e * (imag_unit::<f64>() * two_pi::<f64>())));
        assert!((back - &g).norm() < 1e-12);
    }

    #[test]
    fn matrix_power_examples() {
        let zero_m = DMatrix::<C<f64>>::zeros(2, 2);
        let p = matrix_power(c(0.3, 0.2), c(1.0, 0.0), &zero_m, 0.0).unwrap();
        assert!((p - DMatrix::identity(2, 2)).norm() < 1e-15);
        let half = DMatrix::from_element(1, 1, c(0.5, 0.0));
        let p = matrix_power(c(4.0, 0.0), zero(), &half, std::f64::consts::PI).unwrap();
        assert!((p[(0, 0)] - c(2.0, 0.0)).norm() < 1e-14);
        assert!(matrix_power(c(2.0, 0.0), c(1.0, 0.0), &half, 0.0).is_err());
    }

    #[test]
    fn continuation_around_s_multiplies_by_jump() {
        // track exp(Gamma log(z - s)) continuously once around s
        let g = m(&[&[(0.2, 0.1), (1.0, 0.0)], &[(0.0, 0.0), (-1.5, 0.5)]]);
        let gamma = normalized_log(&g).unwrap();
        let s = c(0.5, -0.2);
        let start = matrix_power(s + c(0.3, 0.0), s, &gamma, std::f64::consts::PI).unwrap();
        let steps = 400;
        let mut log_prev = c(0.3f64, 0.0).ln();
        let mut unwrapped = log_prev;
        for k in 1..=steps {
            let th = std::f64::consts::TAU * k as f64 / steps as f64;
            let w = cis(th) * 0.3;
            let mut l = w.ln();
            while l.im - log_prev.im > std::f64::consts::PI {
                l.im -= std::f64::consts::TAU;
            }
            while log_prev.im - l.im > std::f64::consts::PI {
                l.im += std::f64::consts::TAU;
            }
            unwrapped = l;
            log_prev = l;
        }
        let end = expm(&(&gamma * unwrapped));
        assert!((end - &start * &g).norm() < 1e-8);
    }

    fn scalar_loop(jumps: &[f64], values: &[(f64, f64)]) -> PiecewiseLoop<f64> {
        PiecewiseLoop::piecewise_constant(
            jumps.iter().map(|a| cis(*a)).collect(),
            values.iter().map(|v| DMatrix::from_element(1, 1, c(v.0, v.1))).collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_scalar_jump_closed_form() {
        // G(s+0) = 1 and G(s-0) = e^{2 pi i theta} at s = 1
        let theta = 0.3;
        let data = scalar_loop(&[0.0, 3.0], &[(1.0, 0.0), (1.0, 0.0)]);
        let data = PiecewiseLoop::piecewise_constant(
            data.jumps().to_vec(),
            vec![
                DMatrix::from_element(1, 1, one::<f64>()),
                DMatrix::from_element(1, 1, cis(std::f64::consts::TAU * theta)),
            ],
        )
        .unwrap();
        let reg = build_regularizers(&data, zero()).unwrap();
        assert!((reg.jumps[0].gamma[(0, 0)] - c(theta, 0.0)).norm() < 1e-13);
        let z = c::<f64>(0.2, 0.4);
        let w: C<f64> = z - one::<f64>();
        // cut along the positive real ray from s = 1
        let want = (c::<f64>(theta, 0.0) * c(w.norm().ln(), w.arg() - std::f64::consts::TAU)).exp();
        assert!((reg.jumps[0].omega_plus(z).unwrap()[(0, 0)] - want).norm() < 1e-13);
    }

    #[test]
    fn no_jumps_is_identity() {
        let lp = MatrixLoop::<f64>::diagonal_monomial(&[1, 0]);
        let data = PiecewiseLoop::continuous(lp.clone());
        let grid = UnitCircleGrid::new(16).unwrap();
        let r = regularize_transmission(&data, zero(), &grid).unwrap();
        assert!(r.regularizers.jumps.is_empty());
        for (k, t) in grid.nodes::<f64>().into_iter().enumerate() {
            assert!((&r.samples[k] - lp.evaluate(t).unwrap()).norm() < 1e-15);
        }
    }

    #[test]
    fn scalar_two_piece_is_continuous() {
        let data = scalar_loop(&[0.4, 2.5], &[(2.0, 0.0), (0.5, 1.0)]);
        let grid = UnitCircleGrid::new(64).unwrap();
        let r = regularize_transmission(&data, c(0.1, -0.2), &grid).unwrap();
        assert!(r.max_defect() < 1e-8, "defect {}", r.max_defect());
    }

    #[test]
    fn matrix_data_is_continuous() {
        let a = m(&[&[(1.0, 0.2), (0.5, 0.0)], &[(-0.3, 0.1), (2.0, 0.0)]]);
        let b = m(&[&[(0.0, 1.0), (1.0, 0.0)], &[(1.0, 0.0), (0.5, -0.5)]]);
        let data = PiecewiseLoop::piecewise_constant(vec![cis(0.7), cis(4.0)], vec![a, b]).unwrap();
        let grid = UnitCircleGrid::new(64).unwrap();
        let r = regularize_transmission(&data, c(-0.2, 0.1), &grid).unwrap();
        assert!(r.max_defect() < 1e-8, "defect {}", r.max_defect());

        // unipotent jumps whose product is the identity
        let (c1, c2) = (1.0, 2.0);
        let u = |x: f64| m(&[&[(1.0, 0.0), (x, 0.0)], &[(0.0, 0.0), (1.0, 0.0)]]);
        let values = vec![u(0.0), u(-c1), u(-c1 - c2)];
        let data = PiecewiseLoop::piecewise_constant(vec![cis(0.5), cis(2.5), cis(4.5)], values).unwrap();
        let r = regularize_transmission(&data, zero(), &grid).unwrap();
        assert!(r.max_defect() < 1e-8, "defect {}", r.max_defect());
    }

    #[test]
    fn neville_is_exact_on_cubics() {
        let xs = [1e-3, 1e-4, 1e-5, 1e-6];
        let ys: Vec<CMat<f64>> = xs
            .iter()
            .map(|x| DMatrix::from_element(1, 1, c(2.0 + 3.0 * x - x * x + 5.0 * x * x * x, 0.0)))
            .collect();
        assert!((extrapolate_to_zero(&xs, &ys)[(0, 0)] - c(2.0, 0.0)).norm() < 1e-12);
    }
}
