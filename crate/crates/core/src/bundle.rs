//! Closed-form invariants of the bundle `O(k_1) + ... + O(k_n)` on the
//! Riemann sphere and the related counting bounds.

use num_rational::Ratio;

use crate::birkhoff::{stratum_invariants, SplittingType};
use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// `c_1 = sum k_i`.
pub fn chern_number(k: &SplittingType) -> i64 {
    k.sum()
}

/// `tau = sum (k_1 - k_i) = n k_1 - c_1`.
pub fn weight_tau(k: &SplittingType) -> i64 {
    let k1 = k.first();
    let tau: i64 = k.as_slice().iter().map(|ki| k1 - ki).sum();
    debug_assert_eq!(tau, k.len() as i64 * k1 - chern_number(k));
    tau
}

/// `nu = sum over i < j of (k_i - k_j)`, the gaps over strictly ordered pairs.
pub fn reduced_dimension_nu(k: &SplittingType) -> i64 {
    let ks = k.as_slice();
    let mut nu = 0;
    for (i, a) in ks.iter().enumerate() {
        for b in &ks[i + 1..] {
            nu += a - b;
        }
    }
    nu
}

/// Rank-two bundle with Chern number `c1` and reduced dimension `nu`.
pub fn splitting_from_invariants_rank2(c1: i64, nu: i64) -> Result<SplittingType> {
    if nu < 0 {
        return Err(Error::invalid(format!("nu = {nu} is negative")));
    }
    if (c1 + nu).rem_euclid(2) != 0 {
        return Err(Error::invalid(format!("c1 + nu = {} is odd", c1 + nu)));
    }
    SplittingType::new(vec![(c1 + nu) / 2, (c1 - nu) / 2])
}

/// Rank-three bundle from `(c1, tau, nu)`:
/// `k1 = (c1 + tau)/3`, `k2 = c1/3 - 2 tau/3 + nu/2`, `k3 = k1 - nu/2`.
pub fn splitting_from_invariants_rank3(c1: i64, tau: i64, nu: i64) -> Result<SplittingType> {
    let r = |a: i64, b: i64| Rational::new(a, b);
    let k1 = r(c1 + tau, 3);
    let k2 = r(c1, 3) - r(2 * tau, 3) + r(nu, 2);
    let k3 = k1 - r(nu, 2);
    let ks = [k1, k2, k3];
    if ks.iter().any(|q| !q.is_integer()) {
        return Err(Error::invalid(format!(
            "(c1, tau, nu) = ({c1}, {tau}, {nu}) gives non-integral indices {k1}, {k2}, {k3}"
        )));
    }
    let k = SplittingType::new(ks.iter().map(|q| q.to_integer()).collect())
        .map_err(|_| Error::invalid(format!("(c1, tau, nu) = ({c1}, {tau}, {nu}) gives unordered indices")))?;
    if weight_tau(&k) != tau || reduced_dimension_nu(&k) != nu {
        return Err(Error::invalid(format!(
            "(c1, tau, nu) = ({c1}, {tau}, {nu}) is not realized by {k}"
        )));
    }
    Ok(k)
}

/// Solvability of the homogeneous problem with splitting type `K` and the
/// number `l` of independent bounded solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolvabilityCount {
    pub solvable: bool,
    pub l: i64,
}

/// `l = sum max(k_i + 1, 0)`.
pub fn solvability_count(k: &SplittingType) -> SolvabilityCount {
    let l: i64 = k.as_slice().iter().map(|ki| (ki + 1).max(0)).sum();
    SolvabilityCount { solvable: l > 0, l }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EndoCohomology {
    pub h0: i64,
    pub h1: i64,
}

/// Cohomology of `End E = sum O(k_i - k_j)`.
pub fn endo_cohomology(k: &SplittingType) -> EndoCohomology {
    let ks = k.as_slice();
    let mut h0 = 0;
    let mut h1 = 0;
    for &a in ks {
        for &b in ks {
            h0 += (a - b + 1).max(0);
            h1 += (a - b - 1).max(0);
        }
    }
    EndoCohomology { h0, h1 }
}

/// `c_1 / n`.
pub fn slope(k: &SplittingType) -> Rational {
    Rational::new(chern_number(k), k.len() as i64)
}

/// Upper bound on apparent singularities of a scalar equation with the
/// monodromy of a rank `n` system with `m` singular points on a genus `g`
/// curve: `1 - n(1 - g) + n(n - 1)/2 (m + 2g - 2)`.
pub fn apparent_bound_ohtsuki(n: i64, g: i64, m: i64) -> i64 {
    1 - n * (1 - g) + n * (n - 1) / 2 * (m + 2 * g - 2)
}

/// `n^2 g - n(n - 1)/2 + 1`.
pub fn apparent_bound_corollary(n: i64, g: i64) -> i64 {
    n * n * g - n * (n - 1) / 2 + 1
}

/// Right-hand side of `sum (k_1 - k_i) <= (m - 2) n (n - 1)/2 + 1 - l`.
pub fn partial_index_bound(n: i64, m: i64, l: i64) -> i64 {
    (m - 2) * n * (n - 1) / 2 + 1 - l
}

/// Whether `K` satisfies the partial index bound for `m` points and `l`.
pub fn satisfies_partial_index_bound(k: &SplittingType, m: i64, l: i64) -> bool {
    weight_tau(k) <= partial_index_bound(k.len() as i64, m, l)
}

/// `k_1 - k_2 + 2` for rank two.
pub fn minimal_singularities_rank2(k: &SplittingType) -> Result<i64> {
    if k.len() != 2 {
        return Err(Error::invalid(format!("{k} does not have rank two")));
    }
    Ok(k.first() - k.last() + 2)
}

/// Fuchsian weight of a rank-two representation, `k_1 - k_2` (equal to `nu`).
pub fn fuchsian_weight(k: &SplittingType) -> Result<i64> {
    minimal_singularities_rank2(k).map(|p| p - 2)
}

/// Sum over pairs `mu_i > mu_j` of `mu_i - mu_j + g - 1`.
pub fn type_codimension(mu: &[Rational], g: i64) -> Result<Rational> {
    if mu.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::invalid("slopes must be weakly decreasing"));
    }
    let mut acc = Rational::from_integer(0);
    for a in mu {
        for b in mu {
            if a > b {
                acc += a - b + Rational::from_integer(g - 1);
            }
        }
    }
    Ok(acc)
}

/// `n^2 (g - 1) + 1`.
pub fn moduli_dimension(n: i64, g: i64) -> i64 {
    n * n * (g - 1) + 1
}

/// Every invariant of one splitting type.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleReport {
    pub k: SplittingType,
    pub c1: i64,
    pub tau: i64,
    pub nu: i64,
    pub h0: i64,
    pub h1: i64,
    pub dim_hk: i64,
    pub codim: i64,
    pub stable: bool,
    pub solvable: bool,
    pub l: i64,
    pub slope: Rational,
}

pub fn bundle_report(k: &SplittingType) -> BundleReport {
    let e = endo_cohomology(k);
    let s = stratum_invariants(k);
    let sc = solvability_count(k);
    BundleReport {
        k: k.clone(),
        c1: chern_number(k),
        tau: weight_tau(k),
        nu: reduced_dimension_nu(k),
        h0: e.h0,
        h1: e.h1,
        dim_hk: s.dim_hk,
        codim: s.codim,
        stable: crate::birkhoff::is_stable(k),
        solvable: sc.solvable,
        l: sc.l,
        slope: slope(k),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(v: &[i64]) -> SplittingType {
        SplittingType::new(v.to_vec()).unwrap()
    }

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn basic_invariants() {
        assert_eq!(chern_number(&k(&[0, 0, 0])), 0);
        assert_eq!(chern_number(&k(&[2, 1, 0])), 3);
        assert_eq!(chern_number(&k(&[-4])), -4);
        assert_eq!(weight_tau(&k(&[2, 1, 0])), 3);
        assert_eq!(weight_tau(&k(&[3, 3, 3])), 0);
        assert_eq!(weight_tau(&k(&[3, 1, 0])), 5);
        assert_eq!(reduced_dimension_nu(&k(&[2, 1, 0])), 4);
        assert_eq!(reduced_dimension_nu(&k(&[5, 5])), 0);
        assert_eq!(reduced_dimension_nu(&k(&[3, 1, 0])), 6);
    }

    #[test]
    fn reconstruction() {
        assert_eq!(splitting_from_invariants_rank2(1, 1).unwrap(), k(&[1, 0]));
        assert_eq!(splitting_from_invariants_rank2(0, 0).unwrap(), k(&[0, 0]));
        assert_eq!(splitting_from_invariants_rank2(2, 4).unwrap(), k(&[3, -1]));
        assert!(splitting_from_invariants_rank2(1, 2).is_err());
        assert_eq!(splitting_from_invariants_rank3(3, 3, 4).unwrap(), k(&[2, 1, 0]));
        assert_eq!(splitting_from_invariants_rank3(0, 0, 0).unwrap(), k(&[0, 0, 0]));
        assert_eq!(splitting_from_invariants_rank3(4, 5, 6).unwrap(), k(&[3, 1, 0]));
        assert!(splitting_from_invariants_rank3(1, 0, 0).is_err());
    }

    #[test]
    fn counts() {
        assert_eq!(solvability_count(&k(&[0])).l, 1);
        for e in 0..6 {
            assert_eq!(solvability_count(&k(&[e])).l, e + 1);
        }
        assert_eq!(solvability_count(&k(&[1, 0])).l, 3);
        assert_eq!(solvability_count(&k(&[2, 1, 0])).l, 6);
        assert!(!solvability_count(&k(&[-1, -2])).solvable);
        assert_eq!(endo_cohomology(&k(&[0, 0])), EndoCohomology { h0: 4, h1: 0 });
        assert_eq!(endo_cohomology(&k(&[2, 1, 0])), EndoCohomology { h0: 10, h1: 1 });
        assert_eq!(endo_cohomology(&k(&[7])), EndoCohomology { h0: 1, h1: 0 });
    }

    #[test]
    fn slopes_and_bounds() {
        assert_eq!(slope(&k(&[1, 0])), q(1, 2));
        assert_eq!(slope(&k(&[0, 0, 0])), q(0, 1));
        assert_eq!(slope(&k(&[2, 2])), q(2, 1));
        assert_eq!(apparent_bound_ohtsuki(2, 0, 3), 0);
        assert_eq!(apparent_bound_ohtsuki(1, 3, 7), 3);
        assert_eq!(apparent_bound_ohtsuki(2, 0, 4), 1);
        assert_eq!(apparent_bound_corollary(2, 1), 4);
        assert_eq!(apparent_bound_corollary(1, 5), 6);
        assert_eq!(apparent_bound_corollary(3, 0), -2);
        assert_eq!(partial_index_bound(2, 3, 2), 0);
        assert_eq!(partial_index_bound(2, 4, 1), 2);
        assert_eq!(partial_index_bound(3, 3, 3), 1);
        assert_eq!(minimal_singularities_rank2(&k(&[0, 0])).unwrap(), 2);
        assert_eq!(minimal_singularities_rank2(&k(&[1, 0])).unwrap(), 3);
        assert_eq!(minimal_singularities_rank2(&k(&[2, 0])).unwrap(), 4);
        assert_eq!(type_codimension(&[q(1, 1), q(0, 1)], 0).unwrap(), q(0, 1));
        assert_eq!(type_codimension(&[q(3, 2), q(3, 2)], 4).unwrap(), q(0, 1));
        assert_eq!(type_codimension(&[q(2, 1), q(0, 1)], 0).unwrap(), q(1, 1));
        assert_eq!(moduli_dimension(2, 2), 5);
        assert_eq!(moduli_dimension(4, 1), 1);
        assert_eq!(moduli_dimension(1, 6), 6);
    }
}
