//! End-to-end acceptance checks shared by the integration tests and the
//! command-line `selftest`.

use std::time::Instant;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::birkhoff::{factorize, partial_indices, stratum_invariants, SplittingType};
use crate::bundle::{
    apparent_bound_ohtsuki, chern_number, endo_cohomology, reduced_dimension_nu, solvability_count,
    splitting_from_invariants_rank2, splitting_from_invariants_rank3, type_codimension, weight_tau, Rational,
};
use crate::cauchy::solve_rhtp_on;
use crate::error::{Error, Result};
use crate::fixtures;
use crate::fuchsian::{
    all_exponents, count_wronskian_zeros, fuchs_weight_beta, local_exponents, local_exponents_at_infinity,
    monodromy, reduce_exponents, scalarize, splitting_via_reduction, MonodromyRep, RegularSystem,
};
use crate::linalg::{char_poly, eigenvalues, expm, poly_from_roots};
use crate::loop_algebra::{global_index, MatrixLoop, UnitCircleGrid};
use crate::random;
use crate::regularization::{normalized_log, regularize_transmission};
use crate::scalar::*;

/// Outcome of one criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

pub const NAMES: [&str; 13] = [
    "scalar calibration",
    "diagonal exactness",
    "factorization residual",
    "index-sum identity",
    "solvability oracle",
    "invariant round trips",
    "cross-formula consistency",
    "regularization limits",
    "monodromy engine",
    "exponent calculus",
    "chern formula",
    "reduction pipeline",
    "apparent singularities",
];

const DEFAULT_SEED: u64 = 20240601;

/// Runs criterion `id` (1 to 13).
pub fn run(id: u32, seed: Option<u64>) -> CriterionResult {
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let start = Instant::now();
    let (limit, outcome) = match id {
        1 => (Some(1.0), scalar_calibration()),
        2 => (None, diagonal_exactness(seed)),
        3 => (Some(60.0), factorization_residual(seed)),
        4 => (None, index_sum(seed)),
        5 => (None, solvability_oracle(seed)),
        6 => (None, round_trips()),
        7 => (None, cross_formulas()),
        8 => (Some(10.0), regularization_limits()),
        9 => (Some(30.0), monodromy_engine()),
        10 => (None, exponent_calculus()),
        11 => (None, chern_formula()),
        12 => (Some(30.0), reduction_pipeline()),
        13 => (None, apparent_singularities()),
        _ => (None, Err(Error::invalid(format!("no criterion {id}")))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match outcome {
        Ok(d) => (true, d),
        Err(e) => (false, e.to_string()),
    };
    if let Some(l) = limit {
        if seconds >= l {
            passed = false;
            detail = format!("{detail}; runtime {seconds:.2} s exceeds {l} s");
        }
    }
    let name = NAMES.get(id.wrapping_sub(1) as usize).copied().unwrap_or("unknown");
    CriterionResult { id, name, passed, detail, seconds }
}

pub fn run_all(seed: Option<u64>) -> Vec<CriterionResult> {
    (1..=13).map(|id| run(id, seed)).collect()
}

fn fail(msg: String) -> Error {
    Error::Tolerance { what: msg, achieved: f64::NAN, required: f64::NAN }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(fail(msg()))
    }
}

fn check_tol(what: &str, achieved: f64, required: f64) -> Result<()> {
    if achieved <= required {
        Ok(())
    } else {
        Err(Error::Tolerance { what: what.into(), achieved, required })
    }
}

// ---- loops and indices -------------------------------------------------

fn scalar_symbols() -> Vec<(SplittingType, MatrixLoop<f64>)> {
    (-5..=5)
        .map(|k| (SplittingType::new(vec![k]).unwrap(), MatrixLoop::scalar_monomial(one(), k)))
        .collect()
}

fn diagonal_symbols(seed: u64) -> Vec<(SplittingType, MatrixLoop<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..50)
        .map(|_| {
            let n = rng.gen_range(1..=4);
            let k = random::splitting_type(&mut rng, n, -5, 5);
            let g = MatrixLoop::diagonal_monomial(k.as_slice());
            (k, g)
        })
        .collect()
}

fn random_symbols(seed: u64) -> Vec<random::Symbol<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    (0..100)
        .map(|_| {
            let n = rng.gen_range(1..=3);
            let degree = rng.gen_range(0..=3);
            random::symbol(&mut rng, n, degree, -3, 3)
        })
        .collect()
}

fn scalar_calibration() -> Result<String> {
    for (k, g) in scalar_symbols() {
        let got = partial_indices(&g)?;
        ensure(got == k, || format!("t^{}: partial indices {got}", k.first()))?;
        let kappa = global_index(&g)?;
        ensure(kappa == k.first(), || format!("t^{}: global index {kappa}", k.first()))?;
    }
    Ok("k = -5..5 recovered exactly".into())
}

fn diagonal_exactness(seed: u64) -> Result<String> {
    for (k, g) in diagonal_symbols(seed) {
        let got = partial_indices(&g)?;
        ensure(got == k, || format!("d_K with K = {k}: got {got}"))?;
    }
    Ok("50 diagonal symbols recovered exactly".into())
}

fn factorization_residual(seed: u64) -> Result<String> {
    let grid = UnitCircleGrid::new(256)?;
    let mut worst = 0.0f64;
    for (i, s) in random_symbols(seed).iter().enumerate() {
        let f = factorize(&s.symbol)?;
        ensure(f.k == s.k, || format!("symbol {i}: K = {}, recovered {}", s.k, f.k))?;
        let (res, _) = f.residual(&s.symbol, &grid);
        check_tol(&format!("reassembly residual of symbol {i}"), res, 1e-8)?;
        worst = worst.max(res);
    }
    Ok(format!("100 symbols, max residual {worst:.2e}"))
}

fn index_sum(seed: u64) -> Result<String> {
    let mut loops: Vec<MatrixLoop<f64>> = scalar_symbols().into_iter().map(|p| p.1).collect();
    loops.extend(diagonal_symbols(seed).into_iter().map(|p| p.1));
    loops.extend(random_symbols(seed).into_iter().map(|s| s.symbol));
    for (i, g) in loops.iter().enumerate() {
        let k = partial_indices(g)?;
        let kappa = global_index(g)?;
        ensure(k.sum() == kappa, || format!("symbol {i}: sum {} vs global index {kappa}", k.sum()))?;
    }
    Ok(format!("{} symbols", loops.len()))
}

// ---- solvability oracle ------------------------------------------------

/// Exact rank of an integer matrix over the rationals.
fn exact_rank(mut m: Vec<Vec<Ratio<i64>>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| m[r][col] != Ratio::from_integer(0)) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][col];
        for r in 0..rows {
            if r != rank && m[r][col] != Ratio::from_integer(0) {
                let f = m[r][col] / pivot;
                for c in col..cols {
                    let v = m[rank][c];
                    m[r][c] -= f * v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Dimension of the solutions of `phi+ = d_K phi-` with `phi+` a vector
/// polynomial in `t` and `phi-` a vector polynomial in `t^{-1}`, both of
/// degree at most `degree`, found as the null space of the coefficient
/// equations.
pub fn polynomial_solution_dim(k: &[i64], degree: usize) -> usize {
    let d = degree as i64;
    let block = 2 * (d as usize + 1);
    let cols = k.len() * block;
    let mut rows = Vec::new();
    for (i, &ki) in k.iter().enumerate() {
        for p in (-d).min(ki - d)..=d.max(ki) {
            let mut row = vec![Ratio::from_integer(0); cols];
            if (0..=d).contains(&p) {
                row[i * block + p as usize] = Ratio::from_integer(1);
            }
            let j = ki - p;
            if (0..=d).contains(&j) {
                row[i * block + d as usize + 1 + j as usize] = Ratio::from_integer(-1);
            }
            rows.push(row);
        }
    }
    cols - exact_rank(rows)
}

fn all_types(n: usize, lo: i64, hi: i64) -> Vec<SplittingType> {
    fn rec(n: usize, lo: i64, hi: i64, cur: &mut Vec<i64>, out: &mut Vec<SplittingType>) {
        if cur.len() == n {
            out.push(SplittingType::new(cur.clone()).unwrap());
            return;
        }
        let top = cur.last().copied().unwrap_or(hi);
        for v in (lo..=top).rev() {
            cur.push(v);
            rec(n, lo, hi, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, lo, hi, &mut Vec::new(), &mut out);
    out
}

fn solvability_oracle(seed: u64) -> Result<String> {
    let mut all = Vec::new();
    for n in 1..=3 {
        all.extend(all_types(n, -3, 3));
    }
    for k in &all {
        let l = solvability_count(k).l;
        let brute = polynomial_solution_dim(k.as_slice(), 8);
        ensure(l as usize == brute, || format!("K = {k}: l = {l}, brute force {brute}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let grid = UnitCircleGrid::new(128)?;
    for _ in 0..10 {
        let k = &all[rng.gen_range(0..all.len())];
        let g = MatrixLoop::<f64>::diagonal_monomial(k.as_slice());
        let dim = solve_rhtp_on(&g, 0, &grid)?.len();
        let l = solvability_count(k).l;
        ensure(dim as i64 == l, || format!("K = {k}: solver dimension {dim}, l = {l}"))?;
    }
    Ok(format!("{} types against the oracle, 10 against the solver", all.len()))
}

// ---- bundle calculus ---------------------------------------------------

fn round_trip_types() -> Vec<SplittingType> {
    let mut v = all_types(2, -10, 10);
    v.extend(all_types(3, -10, 10));
    v
}

fn round_trips() -> Result<String> {
    let all = round_trip_types();
    for k in &all {
        let (c1, tau, nu) = (chern_number(k), weight_tau(k), reduced_dimension_nu(k));
        let back = if k.len() == 2 {
            splitting_from_invariants_rank2(c1, nu)?
        } else {
            splitting_from_invariants_rank3(c1, tau, nu)?
        };
        ensure(&back == k, || format!("K = {k} came back as {back}"))?;
    }
    Ok(format!("{} types", all.len()))
}

fn cross_formulas() -> Result<String> {
    let all = round_trip_types();
    for k in &all {
        let st = stratum_invariants(k);
        let h0 = endo_cohomology(k).h0;
        ensure(h0 == st.dim_hk, || format!("K = {k}: h0 = {h0}, dim H_K = {}", st.dim_hk))?;
        let mu: Vec<Rational> = k.as_slice().iter().map(|&x| Rational::from_integer(x)).collect();
        let codim = type_codimension(&mu, 0)?;
        ensure(codim == Rational::from_integer(st.codim), || {
            format!("K = {k}: type codimension {codim}, stratum codimension {}", st.codim)
        })?;
    }
    Ok(format!("{} types", all.len()))
}

// ---- regularization ----------------------------------------------------

fn regularization_limits() -> Result<String> {
    let grid = UnitCircleGrid::new(256)?;
    let cases = [
        ("scalar two-jump", fixtures::scalar_two_jump(), c(0.1, -0.2)),
        ("generic two-jump", fixtures::generic_two_jump(), c(-0.2, 0.1)),
        ("unipotent three-jump", fixtures::bolibruch_three_jump(), zero()),
    ];
    let mut worst = 0.0f64;
    for (name, data, z0) in cases {
        let r = regularize_transmission(&data, z0, &grid)?;
        check_tol(&format!("{name} one-sided limit mismatch"), r.max_defect(), 1e-8)?;
        worst = worst.max(r.max_defect());
    }
    Ok(format!("max relative mismatch {worst:.2e}"))
}

// ---- systems -----------------------------------------------------------

fn system_fixtures() -> Result<Vec<(&'static str, RegularSystem<f64>, bool)>> {
    Ok(vec![
        ("commuting nilpotent", fixtures::commuting_nilpotent().to_regular()?, true),
        ("hypergeometric (1/2, 1/4, 1/4)", fixtures::hypergeometric(0.25, 0.25, 0.5).to_regular()?, true),
        ("hypergeometric (-1/2, 0.3, 0.45)", fixtures::hypergeometric(0.3, 0.45, -0.5).to_regular()?, true),
        ("diag(1, 0)", fixtures::diagonal_shift().to_regular()?, true),
        ("rank-three regular", fixtures::bolibruch_regular(), false),
    ])
}

fn monodromy_engine() -> Result<String> {
    // (a)
    let sys = fixtures::commuting_nilpotent();
    let rep = monodromy(&sys.to_regular()?)?;
    let want = expm(&(&sys.residues()[0] * (imag_unit::<f64>() * two_pi::<f64>())));
    let g1 = rep.generator_at(0).ok_or_else(|| fail("no generator at 1".into()))?;
    check_tol("commuting nilpotent generator", max_abs(&(g1 - want)), 1e-8)?;
    // (b)
    let rep = monodromy(&fixtures::hypergeometric(0.25, 0.25, 0.5).to_regular()?)?;
    let g0 = rep.generator_at(0).ok_or_else(|| fail("no generator at 0".into()))?;
    let mut eig = eigenvalues(g0);
    eig.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    let expected = [cis(-std::f64::consts::PI), one()];
    let err = eig.iter().zip(&expected).map(|(a, b)| modulus(*a - *b)).fold(0.0, f64::max);
    check_tol("hypergeometric eigenvalues at 0", err, 1e-8)?;
    // (c)
    let mut worst = 0.0f64;
    for (name, sys, _) in system_fixtures()? {
        let rep = monodromy(&sys)?;
        check_tol(&format!("{name} product relation"), rep.relation_defect(), 1e-8)?;
        worst = worst.max(rep.relation_defect());
    }
    // (d)
    let sys = fixtures::bolibruch_regular();
    ensure(sys.pole_order(0) == 2, || format!("pole order {} at 0", sys.pole_order(0)))?;
    let rep = monodromy(&sys)?;
    let mut fix = 0.0f64;
    for g in &rep.generators {
        let col = g.column(0).into_owned();
        let mut e1 = CVec::<f64>::zeros(3);
        e1[0] = one();
        fix = fix.max(vec_norm(&(col - e1)));
    }
    check_tol("generators fixing e1", fix, 1e-8)?;
    Ok(format!("max relation defect {worst:.2e}, e1 defect {fix:.2e}"))
}

fn poly_gap(g: &CMat<f64>, betas: &[C<f64>]) -> f64 {
    let roots: Vec<C<f64>> = betas.iter().map(|b| cexp(*b * imag_unit::<f64>() * two_pi::<f64>())).collect();
    char_poly(g)
        .iter()
        .zip(poly_from_roots(&roots))
        .map(|(a, b)| modulus(*a - b))
        .fold(0.0, f64::max)
}

/// Compares the characteristic polynomial of each generator with the one
/// predicted by the exponents at every Fuchsian, non-resonant point.
fn eigen_correspondence(sys: &RegularSystem<f64>, rep: &MonodromyRep<f64>) -> Result<(usize, f64)> {
    let mut count = 0;
    let mut worst = 0.0f64;
    for j in 0..sys.points().len() {
        if !sys.is_fuchsian_at(j) {
            continue;
        }
        let data = match local_exponents(sys, j) {
            Ok(d) => d,
            Err(Error::Resonance { .. }) => continue,
            Err(e) => return Err(e),
        };
        let g = rep.generator_at(j).ok_or_else(|| fail(format!("no generator at point {j}")))?;
        worst = worst.max(poly_gap(g, &data.beta));
        count += 1;
    }
    if sys.infinity_is_singular() && sys.poly().is_empty() {
        match local_exponents_at_infinity(sys) {
            Ok(data) => {
                let g = rep.generator_at_infinity().ok_or_else(|| fail("no generator at infinity".into()))?;
                worst = worst.max(poly_gap(g, &data.beta));
                count += 1;
            }
            Err(Error::Resonance { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((count, worst))
}

fn exponent_calculus() -> Result<String> {
    let mut points = 0;
    let mut worst = 0.0f64;
    let mut sums = Vec::new();
    for (name, sys, fuchsian) in system_fixtures()? {
        let report = fuchs_weight_beta(&all_exponents(&sys)?);
        if fuchsian {
            check_tol(&format!("{name} exponent sum"), modulus(report.beta), 1e-8)?;
        } else {
            match report.integer {
                Some(b) if b < 0 => {}
                _ => return Err(fail(format!("{name}: exponent sum {} is not a negative integer", report.beta))),
            }
        }
        sums.push(format!("{:.1}", report.beta.re));
        let rep = monodromy(&sys)?;
        let (n, w) = eigen_correspondence(&sys, &rep)?;
        check_tol(&format!("{name} eigenvalue correspondence"), w, 1e-8)?;
        points += n;
        worst = worst.max(w);
    }
    Ok(format!("exponent sums [{}], {points} points matched to {worst:.2e}", sums.join(", ")))
}

fn trace_log_sum(gens: &[CMat<f64>]) -> Result<C<f64>> {
    let mut total = zero::<f64>();
    for g in gens {
        total += normalized_log(g)?.trace();
    }
    Ok(total)
}

fn integer_within(z: C<f64>, tol: f64) -> Option<i64> {
    let r = z.re.round();
    (modulus(z - c(r, 0.0)) <= tol).then_some(r as i64)
}

fn chern_formula() -> Result<String> {
    let mut values = Vec::new();
    for (name, sys, _) in system_fixtures()? {
        let rep = monodromy(&sys)?;
        let s = trace_log_sum(&rep.generators)?;
        let k = integer_within(s, 1e-8).ok_or_else(|| fail(format!("{name}: trace sum {s} is not an integer")))?;
        values.push(k.to_string());
    }
    let s = trace_log_sum(&fixtures::bolibruch_triple(1.0, 2.0))?;
    ensure(integer_within(s, 1e-8) == Some(0), || format!("unipotent triple: trace sum {s}"))?;
    values.push("0".into());
    Ok(format!("trace sums [{}]", values.join(", ")))
}

fn reduction_pipeline() -> Result<String> {
    let cases = [
        ("diag(1, 0)", fixtures::diagonal_shift()),
        ("hypergeometric (1/2, 1/4, 1/4)", fixtures::hypergeometric(0.25, 0.25, 0.5)),
        ("hypergeometric (-1/2, 0.3, 0.45)", fixtures::hypergeometric(0.3, 0.45, -0.5)),
    ];
    let mut found = Vec::new();
    for (name, sys) in cases {
        let sys = sys.to_regular()?;
        let red = reduce_exponents(&sys)?;
        for j in 0..red.system.points().len() {
            let d = local_exponents(&red.system, j)?;
            ensure(d.phi.iter().all(|&p| p == 0), || format!("{name}: point {j} keeps phi = {:?}", d.phi))?;
        }
        let (k, _) = splitting_via_reduction(&sys)?;
        let back = match k.len() {
            2 => splitting_from_invariants_rank2(chern_number(&k), reduced_dimension_nu(&k))?,
            3 => splitting_from_invariants_rank3(chern_number(&k), weight_tau(&k), reduced_dimension_nu(&k))?,
            _ => k.clone(),
        };
        ensure(back == k, || format!("{name}: K = {k}, invariants give {back}"))?;
        found.push(format!("{name}: {k}"));
    }
    Ok(found.join("; "))
}

fn apparent_singularities() -> Result<String> {
    let sys = fixtures::hypergeometric(0.25, 0.25, 0.5).to_regular()?;
    let bound = apparent_bound_ohtsuki(2, 0, 3);
    let mut counts = Vec::new();
    for row in 0..2 {
        let sc = match scalarize(&sys, row) {
            Ok(sc) => sc,
            Err(Error::Invalid(_)) => continue,
            Err(e) => return Err(e),
        };
        let f = |z: C<f64>| sc.reduced(z);
        let n = count_wronskian_zeros(&f, 50.0, sys.points())?;
        ensure(n == bound, || format!("row {row}: {n} zeros, bound {bound}"))?;
        counts.push(n);
    }
    ensure(!counts.is_empty(), || "no usable row".into())?;
    Ok(format!("zero counts {counts:?}, bound {bound}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_on_single_components() {
        assert_eq!(polynomial_solution_dim(&[3], 6), 4);
        assert_eq!(polynomial_solution_dim(&[0], 6), 1);
        assert_eq!(polynomial_solution_dim(&[-1], 6), 0);
        assert_eq!(polynomial_solution_dim(&[2, -2, 0], 6), 4);
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(all_types(3, -3, 3).len(), 84);
        assert_eq!(all_types(2, -10, 10).len(), 231);
    }
}
