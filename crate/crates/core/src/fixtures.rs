//! Reference systems and transmission data used by the test suites and the
//! command-line self test.

use nalgebra::DMatrix;

use crate::fuchsian::{FuchsianSystem, RegularSystem};
use crate::loop_algebra::PiecewiseLoop;
use crate::scalar::*;

fn real(rows: usize, v: &[f64]) -> CMat<f64> {
    DMatrix::from_row_slice(rows, rows, &v.iter().map(|x| c(*x, 0.0)).collect::<Vec<_>>())
}

/// `A/(z - 1) - A/(z + 1)` with `A = [[0, 1], [0, 0]]`; the residues
/// commute, so `Phi = exp(A ln((z - 1)/(z + 1)))`.
pub fn commuting_nilpotent() -> FuchsianSystem<f64> {
    let a = real(2, &[0.0, 1.0, 0.0, 0.0]);
    FuchsianSystem::new(vec![c(1.0, 0.0), c(-1.0, 0.0)], vec![a.clone(), -a], None, None).unwrap()
}

/// First-order form of the hypergeometric equation: residues
/// `[[0, 0], [-ab, -g]]` at 0 and `[[0, 1], [0, g - a - b]]` at 1, with
/// exponents `{0, -g}`, `{0, g - a - b}` and `{a, b}` at infinity.
pub fn hypergeometric(a: f64, b: f64, g: f64) -> FuchsianSystem<f64> {
    let a0 = real(2, &[0.0, 0.0, -a * b, -g]);
    let a1 = real(2, &[0.0, 1.0, 0.0, g - a - b]);
    let inf = -(&a0 + &a1);
    FuchsianSystem::new(vec![zero(), one()], vec![a0, a1], Some(inf), None).unwrap()
}

/// `diag(1, 0)/z`, singular at 0 and infinity.
pub fn diagonal_shift() -> FuchsianSystem<f64> {
    let a = real(2, &[1.0, 0.0, 0.0, 0.0]);
    FuchsianSystem::new(vec![zero()], vec![a.clone()], Some(-a), None).unwrap()
}

/// Rank-three system with a second-order pole at 0 and nilpotent residues
/// at `-1`, `1` and `1/2`. Every residue has a vanishing first column, so
/// the constant `e_1` solves it and the monodromy is reducible.
///
/// The residue at 1 has `(3, 2)` entry `1/2`; with this entry the residues
/// sum to zero, infinity is not singular and the residue is nilpotent.
pub fn bolibruch_regular() -> RegularSystem<f64> {
    let scaled = |v: [f64; 9], k: f64| real(3, &v.map(|x| x * k));
    let at0 = vec![
        scaled([0., 0., 0., 0., 1., 0., 0., 0., -1.], 1.0),
        scaled([0., 1., 0., 0., 0., 0., 0., 0., 0.], 1.0),
    ];
    let am1 = scaled([0., 6., 0., 0., -1., 1., 0., -1., 1.], 1.0 / 6.0);
    let a1 = scaled([0., 0., 2., 0., -1., -1., 0., 1., 1.], 0.5);
    let ah = scaled([0., -3., -3., 0., -1., 1., 0., -1., 1.], 1.0 / 3.0);
    RegularSystem::new(
        vec![zero(), c(-1.0, 0.0), c(1.0, 0.0), c(0.5, 0.0)],
        vec![at0, vec![am1], vec![a1], vec![ah]],
        Vec::new(),
        None,
    )
    .unwrap()
}

/// Unipotent triple `[[1, c1], [0, 1]]`, `[[1, c2], [0, 1]]`,
/// `[[1, -c1 - c2], [0, 1]]` with product the identity.
pub fn bolibruch_triple(c1: f64, c2: f64) -> Vec<CMat<f64>> {
    [c1, c2, -c1 - c2]
        .iter()
        .map(|x| real(2, &[1.0, *x, 0.0, 1.0]))
        .collect()
}

/// Scalar data with two jumps.
pub fn scalar_two_jump() -> PiecewiseLoop<f64> {
    PiecewiseLoop::piecewise_constant(
        vec![cis(0.4), cis(2.5)],
        vec![DMatrix::from_element(1, 1, c(2.0, 0.0)), DMatrix::from_element(1, 1, c(0.5, 1.0))],
    )
    .unwrap()
}

/// Generic `2 x 2` data with two jumps.
pub fn generic_two_jump() -> PiecewiseLoop<f64> {
    let a = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.2), c(0.5, 0.0), c(-0.3, 0.1), c(2.0, 0.0)]);
    let b = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(1.0, 0.0), c(1.0, 0.0), c(0.5, -0.5)]);
    PiecewiseLoop::piecewise_constant(vec![cis(0.7), cis(4.0)], vec![a, b]).unwrap()
}

/// Piecewise-constant data whose jumps `G(s+0)^{-1} G(s-0)` form the
/// unipotent triple with `c1 = 1`, `c2 = 2`.
pub fn bolibruch_three_jump() -> PiecewiseLoop<f64> {
    let u = |x: f64| real(2, &[1.0, x, 0.0, 1.0]);
    PiecewiseLoop::piecewise_constant(vec![cis(0.5), cis(2.5), cis(4.5)], vec![u(0.0), u(-1.0), u(-3.0)])
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bolibruch_residues() {
        let sys = bolibruch_regular();
        assert_eq!(sys.pole_order(0), 2);
        assert!(!sys.infinity_is_singular());
        for j in 1..4 {
            let r = sys.residue(j);
            assert!((&r * &r * &r).norm() < 1e-15);
            for i in 0..3 {
                assert_eq!(r[(i, 0)], zero());
            }
        }
    }

    #[test]
    fn three_jump_data_has_unipotent_jumps() {
        let d = bolibruch_three_jump();
        let want = bolibruch_triple(1.0, 2.0);
        let jumps: Vec<CMat<f64>> = (0..3)
            .map(|j| crate::linalg::inverse(&d.limit_plus(j)).unwrap() * d.limit_minus(j))
            .collect();
        // the jumps are a cyclic rotation of the triple
        let found = want.iter().all(|w| jumps.iter().any(|j| (j - w).norm() < 1e-15));
        assert!(found, "{jumps:?}");
    }
}
