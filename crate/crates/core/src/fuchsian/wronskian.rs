//! Scalarization of a system through one row of its fundamental matrix.
//!
//! For a constant row `c_0` the functions `y = c_0 Phi` satisfy
//! `y^{(k)} = c_k Phi` with `c_{k+1} = c_k' + c_k A`. Their Wronskian is
//! `W = det[c_0; ...; c_{n-1}] det Phi`; the first factor is rational and
//! carries all the zeros, which are the apparent singularities of the
//! scalar equation.

use nalgebra::DMatrix;

use super::ode::{integrate_piece, Piece, RTOL};
use super::system::RegularSystem;
use crate::error::{Error, Result};
use crate::linalg::{det, inverse};
use crate::loop_algebra::winding_of_samples;
use crate::scalar::*;

#[derive(Debug, Clone)]
pub struct Scalarization<T: Real> {
    pub system: RegularSystem<T>,
    pub row: CVec<T>,
    pub basepoint: C<T>,
}

/// Row vector as a `1 x n` matrix.
type Row<T> = CMat<T>;

impl<T: Real> Scalarization<T> {
    /// Rows `c_0(z), ..., c_n(z)`.
    pub fn rows(&self, z: C<T>) -> Vec<Row<T>> {
        let n = self.system.size();
        let len = n + 1;
        let jet = self.system.coefficient_jet(z, len);
        let mut cur: Vec<Row<T>> = vec![DMatrix::zeros(1, n); len];
        cur[0] = DMatrix::from_fn(1, n, |_, j| self.row[j]);
        let mut out = vec![cur[0].clone()];
        for _ in 0..n {
            let mut next: Vec<Row<T>> = vec![DMatrix::zeros(1, n); len];
            for r in 0..len {
                if r + 1 < len {
                    next[r] += &cur[r + 1] * cr(T::lit((r + 1) as f64));
                }
                for a in 0..=r {
                    next[r] += &cur[a] * &jet[r - a];
                }
            }
            out.push(next[0].clone());
            cur = next;
        }
        out
    }

    fn stacked(&self, z: C<T>) -> (CMat<T>, Row<T>) {
        let n = self.system.size();
        let rows = self.rows(z);
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][(0, j)]);
        (m, rows[n].clone())
    }

    /// `det[c_0; ...; c_{n-1}](z)`, the rational factor of the Wronskian.
    pub fn reduced(&self, z: C<T>) -> C<T> {
        det(&self.stacked(z).0)
    }

    /// Coefficients `a_k` of `y^{(n)} = sum_k a_k y^{(k)}`.
    pub fn scalar_coefficients(&self, z: C<T>) -> Result<Vec<C<T>>> {
        let (m, last) = self.stacked(z);
        let a = last * inverse(&m)?;
        Ok(a.iter().copied().collect())
    }

    /// `det Phi(z)` for the fundamental matrix normalized at the
    /// basepoint, continued along the straight segment.
    pub fn det_fundamental(&self, z: C<T>) -> Result<C<T>> {
        let seg = Piece::Segment { from: self.basepoint, to: z };
        let scale = (0..self.system.points().len())
            .map(|j| {
                let s = self.system.points()[j];
                (0..self.system.points().len())
                    .filter(|&k| k != j)
                    .map(|k| modulus(self.system.points()[k] - s))
                    .fold(T::one(), |a, b| a.min(b))
            })
            .collect::<Vec<_>>();
        for (j, s) in self.system.points().iter().enumerate() {
            if seg.distance_to(*s) < T::lit(1e-3) * scale[j] * T::lit(0.25) {
                return Err(Error::PathTooClose(format!("segment to z passes point {j}")));
            }
        }
        let tr = |w: C<T>| DMatrix::from_element(1, 1, self.system.coefficient(w).trace());
        let y = integrate_piece(&tr, &seg, &DMatrix::from_element(1, 1, one::<T>()), RTOL)?;
        Ok(y[(0, 0)])
    }

    /// Full Wronskian `W(z)` along the straight segment from the basepoint.
    pub fn wronskian(&self, z: C<T>) -> Result<C<T>> {
        Ok(self.reduced(z) * self.det_fundamental(z)?)
    }
}

/// Scalarizes through row `row` of the fundamental matrix. Fails when the
/// Wronskian vanishes identically.
pub fn scalarize<T: Real>(sys: &RegularSystem<T>, row: usize) -> Result<Scalarization<T>> {
    let n = sys.size();
    if row >= n {
        return Err(Error::invalid(format!("row {row} out of range")));
    }
    let mut c0 = CVec::zeros(n);
    c0[row] = one();
    let big = sys.points().iter().fold(T::one(), |a, s| a.max(modulus(*s)));
    let basepoint = sys.basepoint().unwrap_or(-cr(big * T::lit(2.0)) * cis(T::lit(0.1)));
    let sc = Scalarization { system: sys.clone(), row: c0, basepoint };
    // probe a few generic points for a nonzero reduced Wronskian
    let probes = [0.37, 1.91, 3.3, 4.7];
    let nonzero = probes.iter().any(|th| {
        let z = cis(T::lit(*th)) * cr(big * T::lit(1.37));
        let rows = sc.rows(z);
        let norm = rows.iter().take(n).fold(T::one(), |a, r| a.max(fro(r)));
        modulus(sc.reduced(z)) > T::lit(1e-10) * norm.powi(n as i32)
    });
    if !nonzero {
        return Err(Error::invalid(format!("row {row} gives an identically vanishing Wronskian")));
    }
    Ok(sc)
}

/// Winding number of `f` around the circle `|z - center| = radius`,
/// refining the sampling until consecutive arguments are resolved.
pub fn winding_on_circle<T: Real, F: Fn(C<T>) -> C<T>>(f: &F, center: C<T>, radius: T) -> Result<i64> {
    let mut m = 256;
    loop {
        let vals: Vec<C<T>> = (0..m)
            .map(|k| f(center + cis(two_pi::<T>() * T::lit(k as f64 / m as f64)) * cr(radius)))
            .collect();
        match winding_of_samples(&vals, "function on contour") {
            Err(Error::UnderResolved(_)) if m < 1 << 16 => m *= 2,
            Err(Error::Singular { .. }) => {
                return Err(Error::invalid("function vanishes on the contour"));
            }
            other => return other,
        }
    }
}

/// Zeros of `f` inside `|z| < radius` not located at the listed points:
/// the winding on the big circle minus the windings on small circles
/// around each listed point inside it.
pub fn count_wronskian_zeros<T: Real, F: Fn(C<T>) -> C<T>>(f: &F, radius: T, points: &[C<T>]) -> Result<i64> {
    let total = winding_on_circle(f, zero(), radius)?;
    let mut local = 0;
    for (j, s) in points.iter().enumerate() {
        if modulus(*s) >= radius {
            continue;
        }
        let gap = points
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .map(|(_, p)| modulus(*p - *s))
            .fold(radius - modulus(*s), |a, b| a.min(b));
        local += winding_on_circle(f, *s, gap * T::lit(0.25))?;
    }
    Ok(total - local)
}
