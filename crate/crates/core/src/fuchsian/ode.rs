//! Adaptive Dormand-Prince 5(4) integration of `dPhi/dz = A(z) Phi` along
//! piecewise paths in the plane.

use crate::error::{Error, Result};
use crate::scalar::*;

/// Relative local tolerance of the integrator. Local errors accumulate
/// roughly linearly over a generator loop, so this sits one decade below
/// the global accuracy aimed for (`1e-10`).
pub const RTOL: f64 = 1e-11;
const MAX_STEPS: usize = 200_000;

/// One smooth piece of an integration path, parametrized by `tau in [0, 1]`.
#[derive(Debug, Clone, Copy)]
pub enum Piece<T: Real> {
    Segment { from: C<T>, to: C<T> },
    /// `center + radius e^{i(start + tau sweep)}`.
    Arc { center: C<T>, radius: T, start: T, sweep: T },
}

impl<T: Real> Piece<T> {
    pub fn at(&self, tau: T) -> (C<T>, C<T>) {
        match *self {
            Piece::Segment { from, to } => (from + (to - from) * cr(tau), to - from),
            Piece::Arc { center, radius, start, sweep } => {
                let e = cis(start + sweep * tau) * cr(radius);
                (center + e, e * imag_unit::<T>() * cr(sweep))
            }
        }
    }

    pub fn start(&self) -> C<T> {
        self.at(T::zero()).0
    }

    pub fn end(&self) -> C<T> {
        self.at(T::one()).0
    }

    /// Smallest distance from the piece to `p`.
    pub fn distance_to(&self, p: C<T>) -> T {
        match *self {
            Piece::Segment { from, to } => {
                let d = to - from;
                let len2 = d.norm_sqr();
                if len2 == T::zero() {
                    return modulus(p - from);
                }
                let u = ((p - from) * d.conj()).re / len2;
                let u = u.max(T::zero()).min(T::one());
                modulus(p - (from + d * cr(u)))
            }
            Piece::Arc { center, radius, start, sweep } => {
                // sample densely; arcs here are full or near-full circles
                let m = 720;
                (0..=m)
                    .map(|k| {
                        let th = start + sweep * T::lit(k as f64 / m as f64);
                        modulus(p - (center + cis(th) * cr(radius)))
                    })
                    .fold(T::max_value().unwrap(), |a, b| a.min(b))
            }
        }
    }
}

// Dormand-Prince tableau
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const CNODE: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `dY/dtau = A(z(tau)) z'(tau) Y` over one piece.
pub fn integrate_piece<T: Real, F>(coef: &F, piece: &Piece<T>, y0: &CMat<T>, rtol: f64) -> Result<CMat<T>>
where
    F: Fn(C<T>) -> CMat<T>,
{
    let rhs = |tau: T, y: &CMat<T>| -> CMat<T> {
        let (z, dz) = piece.at(tau);
        coef(z) * y * dz
    };
    let rtol = T::lit(rtol);
    let atol = rtol * T::lit(1e-3);
    let mut tau = T::zero();
    let mut y = y0.clone();
    let mut h = T::lit(1e-2);
    let mut k1 = rhs(tau, &y);
    for _ in 0..MAX_STEPS {
        if tau >= T::one() {
            return Ok(y);
        }
        if tau + h > T::one() {
            h = T::one() - tau;
        }
        let mut k = vec![k1.clone()];
        for s in 1..7 {
            let mut yi = y.clone();
            for (r, kr) in k.iter().enumerate() {
                if A[s][r] != 0.0 {
                    yi += kr * cr(h * T::lit(A[s][r]));
                }
            }
            k.push(rhs(tau + h * T::lit(CNODE[s]), &yi));
        }
        let mut y5 = y.clone();
        let mut err = y.clone() * zero::<T>();
        for s in 0..7 {
            if B5[s] != 0.0 {
                y5 += &k[s] * cr(h * T::lit(B5[s]));
            }
            err += &k[s] * cr(h * T::lit(B5[s] - B4[s]));
        }
        let scale = atol + rtol * fro(&y).max(fro(&y5));
        let e = fro(&err) / scale;
        if !e.is_finite() {
            return Err(Error::Integrator("non-finite step".into()));
        }
        if e <= T::one() {
            tau += h;
            y = y5;
            k1 = k.pop().unwrap();
        }
        let factor = if e == T::zero() {
            T::lit(5.0)
        } else {
            (T::lit(0.9) * e.powf(T::lit(-0.2))).min(T::lit(5.0)).max(T::lit(0.2))
        };
        h *= factor;
        if h < T::lit(1e-14) {
            return Err(Error::Integrator("step size underflow".into()));
        }
    }
    Err(Error::Integrator(format!("more than {MAX_STEPS} steps")))
}

/// Integrates along consecutive pieces.
pub fn integrate_path<T: Real, F>(coef: &F, path: &[Piece<T>], y0: &CMat<T>, rtol: f64) -> Result<CMat<T>>
where
    F: Fn(C<T>) -> CMat<T>,
{
    let mut y = y0.clone();
    for p in path {
        y = integrate_piece(coef, p, &y, rtol)?;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn scalar_exponential_and_log() {
        // y' = y along [0, 1] gives e
        let f = |_z: C<f64>| DMatrix::from_element(1, 1, one::<f64>());
        let id = DMatrix::from_element(1, 1, one::<f64>());
        let y = integrate_piece(&f, &Piece::Segment { from: zero(), to: c(1.0, 0.0) }, &id, RTOL).unwrap();
        assert!((y[(0, 0)] - c(std::f64::consts::E, 0.0)).norm() < 1e-9);
        // y' = a y / z once around 0 gives e^{2 pi i a}
        let a = 0.3;
        let g = move |z: C<f64>| DMatrix::from_element(1, 1, c::<f64>(a, 0.0) / z);
        let arc = Piece::Arc { center: zero(), radius: 0.5, start: 0.0, sweep: std::f64::consts::TAU };
        let y = integrate_piece(&g, &arc, &id, RTOL).unwrap();
        assert!((y[(0, 0)] - cis(std::f64::consts::TAU * a)).norm() < 1e-9);
    }

    #[test]
    fn segment_distance() {
        let s = Piece::Segment { from: c::<f64>(0.0, 0.0), to: c(2.0, 0.0) };
        assert!((s.distance_to(c(1.0, 0.5)) - 0.5).abs() < 1e-15);
        assert!((s.distance_to(c(3.0, 0.0)) - 1.0).abs() < 1e-15);
    }
}
