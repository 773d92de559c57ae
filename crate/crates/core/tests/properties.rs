//! Randomized properties across modules.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rhbundle::birkhoff::{partial_indices, stratum_invariants};
use rhbundle::bundle::*;
use rhbundle::cauchy::{plemelj_boundary, solve_rhtp_on, Density};
use rhbundle::fixtures;
use rhbundle::fuchsian::{gauge_transform, monodromy, GaugeFactor};
use rhbundle::linalg::{eigenvalues, expm, inverse};
use rhbundle::loop_algebra::{global_index, loop_from_samples, MatrixLoop, UnitCircleGrid};
use rhbundle::random;
use rhbundle::regularization::normalized_log;
use rhbundle::scalar::*;
use rhbundle::SplittingType;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_matrix(r: &mut ChaCha8Rng, n: usize, scale: f64) -> CMat<f64> {
    DMatrix::from_fn(n, n, |_, _| c(r.gen_range(-scale..scale), r.gen_range(-scale..scale)))
}

fn weakly_decreasing(max_len: usize, bound: i64) -> impl Strategy<Value = SplittingType> {
    prop::collection::vec(-bound..=bound, 1..=max_len).prop_map(SplittingType::from_unsorted)
}

fn sup_diff(a: &[CMat<f64>], b: &[CMat<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| max_abs(&(x - y))).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn winding_is_multiplicative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=3);
        let f = random::symbol::<f64, _>(&mut r, n, 2, -3, 3).symbol;
        let g = random::symbol::<f64, _>(&mut r, n, 2, -3, 3).symbol;
        let kf = global_index(&f).unwrap();
        let kg = global_index(&g).unwrap();
        prop_assert_eq!(global_index(&f.mul(&g)).unwrap(), kf + kg);
        let inv = f.inverse_sampled(512, 1e-12).unwrap();
        prop_assert_eq!(global_index(&inv).unwrap(), -kf);
    }

    #[test]
    fn samples_determine_band_limited_loops(seed in any::<u64>(), lo in -6i64..=0, width in 0i64..=10) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=3);
        let coeffs: BTreeMap<i64, CMat<f64>> =
            (lo..=lo + width).map(|k| (k, random_matrix(&mut r, n, 1.0))).collect();
        let lp = MatrixLoop::from_coeffs(n, coeffs).unwrap();
        let back = loop_from_samples(&lp.sample(&UnitCircleGrid::new(64).unwrap()), 1e-12).unwrap();
        for k in lo..=lo + width {
            prop_assert!(max_abs(&(back.coeff(k) - lp.coeff(k))) < 1e-13);
        }
    }

    #[test]
    fn plemelj_jump_is_the_density(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_matrix(&mut r, 2, 1.0);
        let b = random_matrix(&mut r, 2, 1.0);
        let grid = UnitCircleGrid::new(64).unwrap();
        let d = Density::from_fn(grid, |t| &a * t.powi(3) + &b / t).unwrap();
        let (plus, minus) = plemelj_boundary(&d).unwrap();
        let jump: Vec<CMat<f64>> = plus.iter().zip(&minus).map(|(p, m)| p - m).collect();
        let scale = d.samples().iter().map(max_abs).fold(0.0, f64::max);
        prop_assert!(sup_diff(&jump, d.samples()) <= 4.0 * f64::EPSILON * scale);
    }

    #[test]
    fn factored_symbols_recover_their_type(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=3);
        let degree = r.gen_range(0..=3);
        let s = random::symbol::<f64, _>(&mut r, n, degree, -4, 4);
        prop_assert_eq!(partial_indices(&s.symbol).unwrap(), s.k);
    }

    #[test]
    fn type_is_invariant_under_the_group_action(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=3);
        let s = random::symbol::<f64, _>(&mut r, n, 1, -3, 3);
        // G = f- d_K f+, so the group acts by h- G h+
        let hm = random::invertible_factor::<f64, _>(&mut r, n, 2, -1);
        let hp = random::invertible_factor::<f64, _>(&mut r, n, 2, 1);
        let moved = hm.mul(&s.symbol).mul(&hp);
        prop_assert_eq!(partial_indices(&moved).unwrap(), s.k);
    }

    #[test]
    fn invariants_determine_the_type(k in weakly_decreasing(6, 10)) {
        let n = k.len() as i64;
        let (c1, tau, nu) = (chern_number(&k), weight_tau(&k), reduced_dimension_nu(&k));
        prop_assert_eq!((tau + c1) % n, 0);
        prop_assert_eq!((tau + c1) / n, k.first());
        if n == 2 {
            prop_assert_eq!(tau, nu);
        }
        prop_assert_eq!(endo_cohomology(&k).h0, stratum_invariants(&k).dim_hk);
    }

    #[test]
    fn normalized_log_inverts_the_exponential(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=4);
        let g = DMatrix::<C<f64>>::identity(n, n) + random_matrix(&mut r, n, 1.0);
        prop_assume!(inverse(&g).is_ok());
        let e = normalized_log(&g).unwrap();
        let back = expm(&(&e * (imag_unit::<f64>() * two_pi::<f64>())));
        prop_assert!(max_abs(&(back - &g)) <= 1e-10 * max_abs(&g).max(1.0));
        for lam in eigenvalues(&e) {
            prop_assert!(lam.re >= -1e-12 && lam.re < 1.0 + 1e-12, "eigenvalue {}", lam);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solver_dimension_matches_the_count(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=2);
        let s = random::symbol::<f64, _>(&mut r, n, 1, -2, 2);
        let grid = UnitCircleGrid::new(128).unwrap();
        let dim = solve_rhtp_on(&s.symbol.transpose(), 0, &grid).unwrap().len();
        prop_assert_eq!(dim as i64, solvability_count(&s.k).l);
    }

    #[test]
    fn constant_gauge_conjugates_monodromy(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sys = fixtures::hypergeometric(r.gen_range(0.1..0.4), r.gen_range(0.5..0.8), r.gen_range(0.15..0.85))
            .to_regular()
            .unwrap();
        let cm = DMatrix::<C<f64>>::identity(2, 2) + random_matrix(&mut r, 2, 0.4);
        prop_assume!(inverse(&cm).is_ok());
        let ci = inverse(&cm).unwrap();
        let out = gauge_transform(&sys, &GaugeFactor::Constant(cm.clone())).unwrap();
        let m0 = monodromy(&sys).unwrap();
        let m1 = monodromy(&out).unwrap();
        for (g0, g1) in m0.generators.iter().zip(&m1.generators) {
            prop_assert!(max_abs(&(g1 - &cm * g0 * &ci)) < 1e-8);
        }
    }
}
