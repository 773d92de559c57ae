use nalgebra::DMatrix;

use super::ode::{integrate_path, Piece, RTOL};
use super::system::{Point, RegularSystem};
use crate::error::{Error, Result};
use crate::linalg::identity;
use crate::regularization::normalized_log;
use crate::scalar::*;

/// Monodromy generators at a basepoint, ordered so that
/// `G_m ... G_2 G_1 = I`. Continuation along a loop acts on the right,
/// `Phi -> Phi G`.
#[derive(Debug, Clone)]
pub struct MonodromyRep<T: Real> {
    pub basepoint: C<T>,
    pub points: Vec<Point<T>>,
    /// Index of each generator's point in the system (`None` for infinity).
    pub source: Vec<Option<usize>>,
    pub radii: Vec<T>,
    pub generators: Vec<CMat<T>>,
}

impl<T: Real> MonodromyRep<T> {
    /// `G_m ... G_1`.
    pub fn product(&self) -> CMat<T> {
        let n = self.generators[0].nrows();
        self.generators.iter().fold(identity(n), |acc, g| g * acc)
    }

    /// Largest entry of `G_m ... G_1 - I`.
    pub fn relation_defect(&self) -> T {
        let n = self.generators[0].nrows();
        max_abs(&(self.product() - identity::<T>(n)))
    }

    /// Generator attached to finite point `j` of the system.
    pub fn generator_at(&self, j: usize) -> Option<&CMat<T>> {
        self.source.iter().position(|s| *s == Some(j)).map(|k| &self.generators[k])
    }

    pub fn generator_at_infinity(&self) -> Option<&CMat<T>> {
        self.source.iter().position(|s| s.is_none()).map(|k| &self.generators[k])
    }
}

/// `sum_i tr ln(G_i) / 2 pi i` with normalized logarithms; must be an
/// integer.
pub fn chern_canonical<T: Real>(generators: &[CMat<T>]) -> Result<i64> {
    let mut total = zero::<T>();
    for g in generators {
        total += normalized_log(g)?.trace();
    }
    let r = total.re.round();
    let off = modulus(total - cr(r));
    if off > T::lit(1e-8) {
        return Err(Error::Tolerance {
            what: "integrality of sum tr E_i".into(),
            achieved: off.as_f64(),
            required: 1e-8,
        });
    }
    Ok(r.as_f64() as i64)
}

/// Loop radii: a quarter of the distance to the nearest other point.
pub fn loop_radii<T: Real>(points: &[C<T>]) -> Vec<T> {
    let big = points.iter().fold(T::one(), |a, s| a.max(modulus(*s)));
    (0..points.len())
        .map(|i| {
            let d = (0..points.len())
                .filter(|&k| k != i)
                .map(|k| modulus(points[i] - points[k]))
                .fold(big, |a, b| a.min(b));
            d * T::lit(0.25)
        })
        .collect()
}

fn generator_path<T: Real>(z0: C<T>, s: C<T>, r: T) -> Vec<Piece<T>> {
    let u = (z0 - s) / cr(modulus(z0 - s));
    let a = s + u * cr(r);
    vec![
        Piece::Segment { from: z0, to: a },
        Piece::Arc { center: s, radius: r, start: arg(u), sweep: two_pi() },
        Piece::Segment { from: a, to: z0 },
    ]
}

fn infinity_path<T: Real>(z0: C<T>) -> Piece<T> {
    Piece::Arc { center: zero(), radius: modulus(z0), start: arg(z0), sweep: -two_pi::<T>() }
}

/// Smallest ratio `dist(path, s_k) / r_k` over the pieces of generator `i`
/// and all other points.
fn clearance<T: Real>(points: &[C<T>], radii: &[T], z0: C<T>, i: usize) -> T {
    let path = generator_path(z0, points[i], radii[i]);
    let mut worst = T::max_value().unwrap();
    for (k, s) in points.iter().enumerate() {
        if k == i {
            continue;
        }
        for p in &path {
            worst = worst.min(p.distance_to(*s) / radii[k]);
        }
    }
    worst
}

fn direction_angles<T: Real>(points: &[C<T>], z0: C<T>) -> Vec<T> {
    let reference = if modulus(z0) > T::zero() { -z0 } else { one() };
    points.iter().map(|s| arg((*s - z0) / reference)).collect()
}

fn distinct_angles<T: Real>(angles: &[T]) -> bool {
    for i in 0..angles.len() {
        for j in 0..i {
            if (angles[i] - angles[j]).abs() < T::lit(1e-6) {
                return false;
            }
        }
    }
    true
}

/// Basepoint on the circle of radius `2 max(|s|, 1)`, rotated away from
/// the negative real axis when rays from it would pass near other points.
pub fn default_basepoint<T: Real>(points: &[C<T>]) -> Result<C<T>> {
    let big = points.iter().fold(T::one(), |a, s| a.max(modulus(*s)));
    let radii = loop_radii(points);
    for step in 0..200 {
        let k = (step + 1) / 2;
        let sign = if step % 2 == 1 { 1.0 } else { -1.0 };
        let phi = T::lit(sign * 0.05 * k as f64);
        let z0 = -cis(phi) * cr(big * T::lit(2.0));
        let clear = (0..points.len()).all(|i| clearance(points, &radii, z0, i) >= T::lit(1.5));
        if clear && distinct_angles(&direction_angles(points, z0)) {
            return Ok(z0);
        }
    }
    Err(Error::PathTooClose("no admissible default basepoint".into()))
}

/// Monodromy generators of the system at its basepoint (or the default
/// one). Each loop runs along a ray to a circle of radius `r_i`, once
/// around counterclockwise and back; loops are ordered by the direction
/// of `s_i` seen from the basepoint. A singular infinity contributes the
/// clockwise circle through the basepoint, placed last.
pub fn monodromy<T: Real>(sys: &RegularSystem<T>) -> Result<MonodromyRep<T>> {
    monodromy_with(sys, RTOL)
}

pub fn monodromy_with<T: Real>(sys: &RegularSystem<T>, rtol: f64) -> Result<MonodromyRep<T>> {
    let points = sys.points();
    let n = sys.size();
    let z0 = match sys.basepoint() {
        Some(b) => b,
        None => default_basepoint(points)?,
    };
    let radii = loop_radii(points);
    for i in 0..points.len() {
        let c = clearance(points, &radii, z0, i);
        if c < T::lit(1e-3) {
            return Err(Error::PathTooClose(format!(
                "loop around point {i} passes within {:e} radii of another point",
                c.as_f64()
            )));
        }
        if modulus(z0 - points[i]) <= radii[i] {
            return Err(Error::PathTooClose(format!("basepoint lies inside the loop around point {i}")));
        }
    }
    let angles = direction_angles(points, z0);
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| angles[a].partial_cmp(&angles[b]).unwrap());

    let coef = |z: C<T>| sys.coefficient(z);
    let id: CMat<T> = DMatrix::identity(n, n);
    let mut rep = MonodromyRep {
        basepoint: z0,
        points: Vec::new(),
        source: Vec::new(),
        radii: Vec::new(),
        generators: Vec::new(),
    };
    for &i in &order {
        let path = generator_path(z0, points[i], radii[i]);
        rep.generators.push(integrate_path(&coef, &path, &id, rtol)?);
        rep.points.push(Point::Finite(points[i]));
        rep.source.push(Some(i));
        rep.radii.push(radii[i]);
    }
    if sys.infinity_is_singular() {
        let circle = infinity_path(z0);
        for (k, s) in points.iter().enumerate() {
            if circle.distance_to(*s) < T::lit(1e-3) * radii[k] {
                return Err(Error::PathTooClose(format!("loop around infinity passes near point {k}")));
            }
        }
        rep.generators.push(integrate_path(&coef, &[circle], &id, rtol)?);
        rep.points.push(Point::Infinity);
        rep.source.push(None);
        rep.radii.push(modulus(z0));
    }
    for (k, g) in rep.generators.iter().enumerate() {
        crate::linalg::inverse(g).map_err(|_| Error::Singular {
            location: format!("generator {k}"),
            det: modulus(crate::linalg::det(g)).as_f64(),
        })?;
    }
    Ok(rep)
}
