//! Cauchy-type integrals over the unit circle, principal values, boundary
//! traces and the singular integral form of the transmission problem
//! `Phi+ = G Phi-`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{null_space, RANK_CUTOFF};
use crate::loop_algebra::{dft_coefficients, MatrixLoop, UnitCircleGrid};
use crate::scalar::*;

/// Default minimum distance from the circle for off-curve evaluation.
pub const DEFAULT_MIN_DISTANCE: f64 = 1e-2;

/// Samples of a vector- or matrix-valued function on a circle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Density<T: Real> {
    grid: UnitCircleGrid,
    samples: Vec<CMat<T>>,
    jumps: Vec<C<T>>,
}

impl<T: Real> Density<T> {
    pub fn new(grid: UnitCircleGrid, samples: Vec<CMat<T>>) -> Result<Self> {
        if samples.len() != grid.size() {
            return Err(Error::invalid(format!(
                "{} samples for a grid of size {}",
                samples.len(),
                grid.size()
            )));
        }
        let shape = samples[0].shape();
        if samples.iter().any(|s| s.shape() != shape) {
            return Err(Error::invalid("density samples have different shapes"));
        }
        Ok(Density { grid, samples, jumps: vec![] })
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: UnitCircleGrid, f: impl Fn(C<T>) -> CMat<T>) -> Result<Self> {
        let samples = grid.nodes::<T>().into_iter().map(f).collect();
        Self::new(grid, samples)
    }

    /// Scalar density from a closure.
    pub fn scalar(grid: UnitCircleGrid, f: impl Fn(C<T>) -> C<T>) -> Result<Self> {
        Self::from_fn(grid, |t| DMatrix::from_element(1, 1, f(t)))
    }

    /// Declares points where the density is discontinuous.
    pub fn with_jumps(mut self, jumps: Vec<C<T>>) -> Self {
        self.jumps = jumps;
        self
    }

    pub fn grid(&self) -> &UnitCircleGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[CMat<T>] {
        &self.samples
    }

    fn shape(&self) -> (usize, usize) {
        self.samples[0].shape()
    }
}

/// `(1 / 2 pi i) \oint phi(t) / (t - z) dt` by the trapezoid rule.
pub fn cauchy_offcurve<T: Real>(density: &Density<T>, z: C<T>) -> Result<CMat<T>> {
    cauchy_offcurve_with(density, z, DEFAULT_MIN_DISTANCE)
}

pub fn cauchy_offcurve_with<T: Real>(density: &Density<T>, z: C<T>, min_distance: f64) -> Result<CMat<T>> {
    let dist = (modulus(z) - T::one()).abs();
    if dist < T::lit(min_distance) {
        return Err(Error::invalid(format!(
            "z is {} from the circle, below the cutoff {min_distance}; use boundary values",
            dist.as_f64()
        )));
    }
    let big_n = density.grid.size();
    let (r, c) = density.shape();
    let mut acc = DMatrix::zeros(r, c);
    for (k, phi) in density.samples.iter().enumerate() {
        let t = density.grid.node::<T>(k);
        acc += phi * (t / (t - z));
    }
    Ok(acc * cr(T::one() / T::lit(big_n as f64)))
}

/// Matrix of the discrete principal-value operator on an `N`-point grid:
/// `(P phi)_a ~ (1 / 2 pi i) PV \oint phi(t) / (t - t_a) dt`.
///
/// Analytic subtraction: the regularised integrand
/// `(phi(t) - phi(t_a)) t / (t - t_a)` is summed off the diagonal, its
/// diagonal limit `t_a phi'(t_a)` comes from spectral differentiation, and
/// `PV[1] = 1/2` is added exactly.
pub fn pv_matrix<T: Real>(grid: &UnitCircleGrid) -> CMat<T> {
    let big_n = grid.size();
    let nodes = grid.nodes::<T>();
    let inv_n = cr(T::one() / T::lit(big_n as f64));
    // d[m] = (1/N) sum_{|j| < N/2} j w^{jm}: kernel of t d/dt on the grid.
    let half = (big_n / 2) as i64;
    let d: Vec<C<T>> = (0..big_n)
        .map(|m| {
            let mut s = zero::<T>();
            for j in (-half + 1)..half {
                s += cr(T::lit(j as f64)) * nodes[((j * m as i64).rem_euclid(big_n as i64)) as usize];
            }
            s * inv_n
        })
        .collect();
    let mut p = DMatrix::zeros(big_n, big_n);
    for a in 0..big_n {
        let mut row_sum = zero::<T>();
        for k in 0..big_n {
            if k != a {
                let w = nodes[k] / (nodes[k] - nodes[a]) * inv_n;
                p[(a, k)] = w;
                row_sum += w;
            }
        }
        p[(a, a)] = cr(T::lit(0.5)) - row_sum;
        for k in 0..big_n {
            p[(a, k)] += d[(a + big_n - k) % big_n] * inv_n;
        }
    }
    p
}

/// Principal value at grid node `k`.
pub fn principal_value<T: Real>(density: &Density<T>, k: usize) -> Result<CMat<T>> {
    let big_n = density.grid.size();
    if k >= big_n {
        return Err(Error::invalid(format!("node index {k} outside a grid of size {big_n}")));
    }
    let t0 = density.grid.node::<T>(k);
    check_not_jump(density, t0, k)?;
    let p = pv_matrix::<T>(&density.grid);
    let (r, c) = density.shape();
    let mut acc = DMatrix::zeros(r, c);
    for (j, phi) in density.samples.iter().enumerate() {
        acc += phi * p[(k, j)];
    }
    Ok(acc)
}

fn check_not_jump<T: Real>(density: &Density<T>, t0: C<T>, k: usize) -> Result<()> {
    if density.jumps.iter().any(|s| modulus(*s - t0) < T::lit(1e-12)) {
        return Err(Error::invalid(format!("node {k} coincides with a declared jump point")));
    }
    Ok(())
}

/// Boundary traces `(Phi+, Phi-)` at every node: `Phi± = ±phi/2 + PV`.
pub fn plemelj_boundary<T: Real>(density: &Density<T>) -> Result<(Vec<CMat<T>>, Vec<CMat<T>>)> {
    let big_n = density.grid.size();
    for k in 0..big_n {
        check_not_jump(density, density.grid.node::<T>(k), k)?;
    }
    let p = pv_matrix::<T>(&density.grid);
    let half = cr(T::lit(0.5));
    let (r, c) = density.shape();
    let mut plus = Vec::with_capacity(big_n);
    let mut minus = Vec::with_capacity(big_n);
    for a in 0..big_n {
        let mut pv = DMatrix::zeros(r, c);
        for (k, phi) in density.samples.iter().enumerate() {
            pv += phi * p[(a, k)];
        }
        let h = &density.samples[a] * half;
        // Phi- is built from Phi+ so the jump is phi up to one rounding.
        let up = &pv + &h;
        minus.push(&up - &density.samples[a]);
        plus.push(up);
    }
    Ok((plus, minus))
}

/// Discretized singular integral system
/// `A(t) phi(t) + 2 B(t) (P phi)(t) = F(t)` with `A = I + G`, `B = I - G`
/// and `F = 2 (G - I) gamma`, over the `nN` grid unknowns `phi_i(t_k)`
/// (unknown index `k * n + i`).
#[derive(Debug, Clone)]
pub struct TransmissionSystem<T: Real> {
    pub matrix: CMat<T>,
    pub rhs: CVec<T>,
    pub grid: UnitCircleGrid,
    pub n: usize,
}

/// Assembles the transmission system for `G` with polynomial part
/// `gamma(t) = sum_q gamma[q] t^q`.
pub fn assemble_transmission_system<T: Real>(
    g: &MatrixLoop<T>,
    gamma: &[CVec<T>],
    grid: &UnitCircleGrid,
) -> Result<TransmissionSystem<T>> {
    let n = g.size();
    if gamma.iter().any(|v| v.len() != n) {
        return Err(Error::invalid("principal part coefficients must have length n"));
    }
    g.check_invertible(grid)?;
    let big_n = grid.size();
    let p = pv_matrix::<T>(grid);
    let gs = g.sample(grid);
    let nodes = grid.nodes::<T>();
    let id = DMatrix::<C<T>>::identity(n, n);
    let two = cr(T::lit(2.0));
    let mut m = DMatrix::zeros(n * big_n, n * big_n);
    let mut rhs = CVec::zeros(n * big_n);
    for a in 0..big_n {
        let amat = &id + &gs[a];
        let bmat = (&id - &gs[a]) * two;
        for i in 0..n {
            for j in 0..n {
                m[(a * n + i, a * n + j)] += amat[(i, j)];
                for k in 0..big_n {
                    m[(a * n + i, k * n + j)] += bmat[(i, j)] * p[(a, k)];
                }
            }
        }
        let mut gam = CVec::zeros(n);
        for (q, coef) in gamma.iter().enumerate() {
            gam += coef * cpowi(nodes[a], q as i64);
        }
        let f = (&gs[a] - &id) * gam * two;
        for i in 0..n {
            rhs[a * n + i] = f[i];
        }
    }
    Ok(TransmissionSystem { matrix: m, rhs, grid: grid.clone(), n })
}

/// Vector function holomorphic off the circle,
/// `Phi(z) = Cauchy[phi](z) + gamma(z)`, stored through the Laurent
/// coefficients of its density.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseHolomorphic<T: Real> {
    /// Coefficients `c_j` of `phi(t) = sum_j c_j t^j`, from `j = -band`.
    pub density_coeffs: Vec<CVec<T>>,
    pub band: i64,
    /// `gamma(z) = sum_q gamma[q] z^q`.
    pub gamma: Vec<CVec<T>>,
}

impl<T: Real> PiecewiseHolomorphic<T> {
    fn dim(&self) -> usize {
        self.gamma.first().or(self.density_coeffs.first()).map_or(0, |v| v.len())
    }

    fn coeff(&self, j: i64) -> &CVec<T> {
        &self.density_coeffs[(j + self.band) as usize]
    }

    fn gamma_at(&self, z: C<T>) -> CVec<T> {
        let mut acc = CVec::zeros(self.dim());
        for (q, g) in self.gamma.iter().enumerate() {
            acc += g * cpowi(z, q as i64);
        }
        acc
    }

    /// Value inside the disk (`|z| < 1`), continuous up to the circle.
    pub fn plus(&self, z: C<T>) -> CVec<T> {
        let mut acc = self.gamma_at(z);
        for j in 0..=self.band {
            acc += self.coeff(j) * cpowi(z, j);
        }
        acc
    }

    /// Value outside the disk (`|z| > 1`), continuous up to the circle.
    pub fn minus(&self, z: C<T>) -> CVec<T> {
        let mut acc = self.gamma_at(z);
        for j in -self.band..0 {
            acc -= self.coeff(j) * cpowi(z, j);
        }
        acc
    }

    pub fn evaluate(&self, z: C<T>) -> CVec<T> {
        if modulus(z) < T::one() {
            self.plus(z)
        } else {
            self.minus(z)
        }
    }

    /// Density samples on `grid`.
    pub fn density(&self, grid: &UnitCircleGrid) -> Result<Density<T>> {
        let n = self.dim();
        Density::from_fn(grid.clone(), |t| {
            let mut v = CVec::zeros(n);
            for j in -self.band..=self.band {
                v += self.coeff(j) * cpowi(t, j);
            }
            DMatrix::from_column_slice(n, 1, v.as_slice())
        })
    }

    /// Order of the pole at infinity (degree of `gamma`), `None` when
    /// `gamma` vanishes.
    pub fn pole_order(&self, tol: f64) -> Option<usize> {
        self.gamma
            .iter()
            .rposition(|g| vec_norm(g) > T::lit(tol))
    }

    /// `sup_k |Phi+(t_k) - G(t_k) Phi-(t_k)|` divided by `sup |Phi-|`.
    pub fn transmission_residual(&self, g: &MatrixLoop<T>, grid: &UnitCircleGrid) -> T {
        let mut res = T::zero();
        let mut scale = T::zero();
        for t in grid.nodes::<T>() {
            let pm = self.minus(t);
            let pp = self.plus(t);
            let gt = g.evaluate(t).unwrap();
            res = res.max(vec_norm(&(pp - gt * &pm)));
            scale = scale.max(vec_norm(&pm));
        }
        if scale > T::zero() {
            res / scale
        } else {
            res
        }
    }
}

/// Basis of solutions of `Phi+ = G Phi-` whose pole order at infinity is at
/// most `pole_order`.
///
/// The density is parametrized by its Laurent coefficients in the band
/// `|j| <= N/4`; together with the coefficients of `gamma` these are the
/// unknowns of the assembled system, whose numerical null space (relative
/// cutoff `1e-8`) is the solution space.
pub fn solve_rhtp<T: Real>(g: &MatrixLoop<T>, pole_order: usize) -> Result<Vec<PiecewiseHolomorphic<T>>> {
    solve_rhtp_on(g, pole_order, &g.grid())
}

pub fn solve_rhtp_on<T: Real>(
    g: &MatrixLoop<T>,
    pole_order: usize,
    grid: &UnitCircleGrid,
) -> Result<Vec<PiecewiseHolomorphic<T>>> {
    let n = g.size();
    let big_n = grid.size();
    if big_n < 8 {
        return Err(Error::invalid("grid too small for the transmission solver"));
    }
    let band = (big_n / 4) as i64;
    let sys = assemble_transmission_system(g, &[], grid)?;
    let nodes = grid.nodes::<T>();
    let gs = g.sample(grid);
    let id = DMatrix::<C<T>>::identity(n, n);
    let two = cr(T::lit(2.0));
    let ncoef = (2 * band + 1) as usize;
    let cols = n * ncoef + n * (pole_order + 1);
    // Synthesis of grid samples from band coefficients, applied to the
    // operator, followed by the gamma columns moved to the left-hand side.
    let mut m = DMatrix::zeros(n * big_n, cols);
    for (ci, j) in (-band..=band).enumerate() {
        let col_samples: Vec<C<T>> = nodes.iter().map(|t| cpowi(*t, j)).collect();
        for comp in 0..n {
            let col = ci * n + comp;
            for row in 0..n * big_n {
                let mut s = zero::<T>();
                for k in 0..big_n {
                    let v = sys.matrix[(row, k * n + comp)];
                    if v != zero() {
                        s += v * col_samples[k];
                    }
                }
                m[(row, col)] = s;
            }
        }
    }
    for q in 0..=pole_order {
        for comp in 0..n {
            let col = n * ncoef + q * n + comp;
            for a in 0..big_n {
                let f = (&gs[a] - &id) * two * cpowi(nodes[a], q as i64);
                for i in 0..n {
                    m[(a * n + i, col)] = -f[(i, comp)];
                }
            }
        }
    }
    let ns = null_space(&m, RANK_CUTOFF);
    ns.ensure_gap(RANK_CUTOFF, 1.0)?;
    let mut out = Vec::with_capacity(ns.dim());
    for b in 0..ns.dim() {
        let v = ns.basis.column(b);
        let density_coeffs = (0..ncoef)
            .map(|ci| CVec::from_fn(n, |i, _| v[ci * n + i]))
            .collect();
        let gamma = (0..=pole_order)
            .map(|q| CVec::from_fn(n, |i, _| v[n * ncoef + q * n + i]))
            .collect();
        let sol = PiecewiseHolomorphic { density_coeffs, band, gamma };
        let r = sol.transmission_residual(g, grid);
        if r > T::lit(1e-8) {
            return Err(Error::Tolerance {
                what: format!("transmission residual of solution {b}"),
                achieved: r.as_f64(),
                required: 1e-8,
            });
        }
        out.push(sol);
    }
    Ok(out)
}

/// Laurent coefficients of a sampled scalar density (band `|j| < N/2`).
pub fn density_coefficients<T: Real>(density: &Density<T>) -> Vec<CMat<T>> {
    dft_coefficients(density.samples())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> UnitCircleGrid {
        UnitCircleGrid::new(n).unwrap()
    }

    fn s(m: CMat<f64>) -> C<f64> {
        m[(0, 0)]
    }

    #[test]
    fn offcurve_examples() {
        let g = grid(64);
        let one_d = Density::scalar(g.clone(), |_| one::<f64>()).unwrap();
        assert!((s(cauchy_offcurve(&one_d, c(0.0, 0.0)).unwrap()) - one()).norm() < 1e-14);
        assert!(s(cauchy_offcurve(&one_d, c(2.0, 0.0)).unwrap()).norm() < 1e-14);
        let t_d = Density::scalar(g.clone(), |t| t).unwrap();
        assert!((s(cauchy_offcurve(&t_d, c(0.5, 0.0)).unwrap()) - c(0.5, 0.0)).norm() < 1e-14);
        let inv_d = Density::scalar(g.clone(), |t| one::<f64>() / t).unwrap();
        assert!((s(cauchy_offcurve(&inv_d, c(2.0, 0.0)).unwrap()) - c(-0.5, 0.0)).norm() < 1e-14);
        assert!(cauchy_offcurve(&one_d, c(1.0001, 0.0)).is_err());
    }

    #[test]
    fn principal_value_examples() {
        let g = grid(32);
        let one_d = Density::scalar(g.clone(), |_| one::<f64>()).unwrap();
        for k in [0, 5, 17] {
            assert!((s(principal_value(&one_d, k).unwrap()) - c(0.5, 0.0)).norm() < 1e-13);
        }
        let t_d = Density::scalar(g.clone(), |t| t).unwrap();
        assert!((s(principal_value(&t_d, 0).unwrap()) - c(0.5, 0.0)).norm() < 1e-13);
        let inv_d = Density::scalar(g.clone(), |t| one::<f64>() / t).unwrap();
        assert!((s(principal_value(&inv_d, 0).unwrap()) - c(-0.5, 0.0)).norm() < 1e-13);
        let jd = one_d.clone().with_jumps(vec![c(1.0, 0.0)]);
        assert!(principal_value(&jd, 0).is_err());
    }

    #[test]
    fn plemelj_examples_and_jump_identity() {
        let g = grid(32);
        let nodes = g.nodes::<f64>();
        let one_d = Density::scalar(g.clone(), |_| one::<f64>()).unwrap();
        let (p, m) = plemelj_boundary(&one_d).unwrap();
        for k in 0..32 {
            assert!((s(p[k].clone()) - one()).norm() < 1e-13);
            assert!(s(m[k].clone()).norm() < 1e-13);
        }
        let t_d = Density::scalar(g.clone(), |t| t).unwrap();
        let (p, m) = plemelj_boundary(&t_d).unwrap();
        for k in 0..32 {
            assert!((s(p[k].clone()) - nodes[k]).norm() < 1e-13);
            assert!(s(m[k].clone()).norm() < 1e-13);
        }
        let inv_d = Density::scalar(g.clone(), |t| one::<f64>() / t).unwrap();
        let (p, m) = plemelj_boundary(&inv_d).unwrap();
        for k in 0..32 {
            assert!(s(p[k].clone()).norm() < 1e-13);
            assert!((s(m[k].clone()) + one::<f64>() / nodes[k]).norm() < 1e-13);
        }
        let rough = Density::scalar(g.clone(), |t: C<f64>| c(t.re.abs(), t.im * t.im * t.im)).unwrap();
        let (p, m) = plemelj_boundary(&rough).unwrap();
        for k in 0..32 {
            assert!((&p[k] - &m[k] - &rough.samples()[k]).norm() <= 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn pv_of_smooth_density_is_spectral() {
        // phi(t) = 1 / (t - 3): Phi+ = phi, Phi- = 0, so PV = phi / 2.
        let g = grid(64);
        let d = Density::scalar(g.clone(), |t| one::<f64>() / (t - c(3.0, 0.0))).unwrap();
        for k in [0, 9, 40] {
            let t = g.node::<f64>(k);
            let want = one::<f64>() / (t - c(3.0, 0.0)) * 0.5;
            assert!((s(principal_value(&d, k).unwrap()) - want).norm() < 1e-13);
        }
    }

    #[test]
    fn transmission_system_shapes_and_coefficients() {
        let g = grid(16);
        let lp = MatrixLoop::<f64>::identity(2);
        let sys = assemble_transmission_system(&lp, &[], &g).unwrap();
        assert_eq!(sys.matrix.shape(), (32, 32));
        assert!((sys.matrix.clone() - DMatrix::identity(32, 32) * c(2.0, 0.0)).norm() < 1e-13);
        assert_eq!(sys.rhs.norm(), 0.0);

        let d = DMatrix::from_diagonal(&CVec::from_vec(vec![c(2.0, 0.0), c(1.0, 0.0)]));
        let sys = assemble_transmission_system::<f64>(&MatrixLoop::constant(d), &[], &g).unwrap();
        // component 1 is untouched by B, component 0 sees A = 3, B = -1.
        let p = pv_matrix::<f64>(&g);
        assert!((sys.matrix[(1, 1)] - c::<f64>(2.0, 0.0)).norm() < 1e-13);
        assert!((sys.matrix[(0, 0)] - (c::<f64>(3.0, 0.0) - p[(0, 0)] * 2.0)).norm() < 1e-13);
        assert!((sys.matrix[(0, 2)] - (-p[(0, 1)] * 2.0)).norm() < 1e-13);
        assert!(sys.matrix[(1, 3)].norm() < 1e-15);
    }

    #[test]
    fn solve_examples() {
        assert_eq!(solve_rhtp(&MatrixLoop::<f64>::identity(2), 0).unwrap().len(), 2);
        let t = MatrixLoop::<f64>::scalar_monomial(one(), 1);
        let sols = solve_rhtp(&t, 0).unwrap();
        assert_eq!(sols.len(), 2);
        let inv = MatrixLoop::<f64>::scalar_monomial(one(), -1);
        assert_eq!(solve_rhtp(&inv, 0).unwrap().len(), 0);
        let tt = MatrixLoop::<f64>::diagonal_monomial(&[1, 1]);
        assert_eq!(solve_rhtp(&tt, 0).unwrap().len(), 4);
    }

    #[test]
    fn solutions_with_poles_at_infinity() {
        // Phi+ = t^{-1} Phi-: bounded solutions vanish, pole order 1 gives Phi- = z.
        let inv = MatrixLoop::<f64>::scalar_monomial(one(), -1);
        let sols = solve_rhtp(&inv, 1).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].pole_order(1e-8), Some(1));
        let id = MatrixLoop::<f64>::identity(1);
        assert_eq!(solve_rhtp(&id, 2).unwrap().len(), 3);
    }
}
