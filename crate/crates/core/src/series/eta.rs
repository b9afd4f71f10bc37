use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use super::QSeries;
use crate::error::{Error, Result};

/// `Π η(mτ)^e` over `(m, e)` factors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaQuotient {
    pub factors: Vec<(u32, i32)>,
}

impl EtaQuotient {
    pub fn new(factors: Vec<(u32, i32)>) -> Result<Self> {
        if factors.iter().any(|&(m, _)| m == 0) {
            return Err(Error::InvalidArgument("eta multiplier must be positive".into()));
        }
        Ok(EtaQuotient { factors })
    }

    /// `Σ m·e / 24`.
    pub fn lead_exp(&self) -> Rational {
        let s: i64 = self.factors.iter().map(|&(m, e)| m as i64 * e as i64).sum();
        Rational::from((s, 24))
    }

    /// Twice the weight: `Σ e`.
    pub fn weight_times_two(&self) -> i64 {
        self.factors.iter().map(|&(_, e)| e as i64).sum()
    }

    /// Exact expansion `q^{lead} Σ_{i≤N} F_i q^i`.
    pub fn expand(&self, n: usize) -> QSeries {
        QSeries::from_integers(self.lead_exp(), self.product_coeffs(n))
    }

    /// Coefficients of `Π_{(m,e)} Π_{k≥1} (1 − q^{mk})^e` through `q^N`, via the
    /// logarithmic derivative: with `D_i = −Σ_{m | i} e·m·σ₁(i/m)` one has
    /// `j·F_j = Σ_{i=1}^{j} D_i F_{j−i}`.
    pub fn product_coeffs(&self, n: usize) -> Vec<Integer> {
        let sigma1 = sigma_table(n, 1);
        let mut d = vec![Integer::new(); n + 1];
        for &(m, e) in &self.factors {
            let m = m as usize;
            let em = Integer::from(e as i64 * m as i64);
            for k in 1..=n / m {
                d[k * m] -= Integer::from(&em * sigma1[k]);
            }
        }
        let mut f: Vec<Integer> = Vec::with_capacity(n + 1);
        f.push(Integer::from(1));
        let mut tmp = Integer::new();
        for j in 1..=n {
            let mut acc = Integer::new();
            for i in 1..=j {
                if d[i] == 0 || f[j - i] == 0 {
                    continue;
                }
                tmp.assign(&d[i] * &f[j - i]);
                acc += &tmp;
            }
            acc.div_exact_u_mut(j as u32);
            f.push(acc);
        }
        f
    }
}

use rug::Assign;

/// `σ_k(i)` for `i ≤ n` (entry 0 is 0); exact in `u64` for `k ≤ 3` and `n ≤ 10^4`.
pub fn sigma_table(n: usize, k: u32) -> Vec<u64> {
    let mut s = vec![0u64; n + 1];
    for d in 1..=n {
        let p = (d as u64).pow(k);
        for m in (d..=n).step_by(d) {
            s[m] += p;
        }
    }
    s
}

/// Integer coefficients of `Π_{k≥1}(1 − q^{mk})^e` through `q^N` by repeated
/// multiplication by binomial factors. Quadratic-time; independent of the
/// log-derivative route and kept as its cross-check.
pub fn product_coeffs_naive(factors: &[(u32, i32)], n: usize) -> Vec<Integer> {
    let mut p = vec![Integer::new(); n + 1];
    p[0] = Integer::from(1);
    for &(m, e) in factors {
        let m = m as usize;
        for k in 1..=n / m {
            let step = m * k;
            for _ in 0..e.unsigned_abs() {
                if e > 0 {
                    for i in (step..=n).rev() {
                        let t = p[i - step].clone();
                        p[i] -= t;
                    }
                } else {
                    for i in step..=n {
                        let t = p[i - step].clone();
                        p[i] += t;
                    }
                }
            }
        }
    }
    p
}

/// Sparse `Π_{k≥1}(1 − q^{k})^3 = Σ_{j≥0} (−1)^j (2j+1) q^{j(j+1)/2}` with
/// `q → q^m`, as (exponent, coefficient) pairs with exponent ≤ N.
pub fn jacobi_cube(m: u64, n: u64) -> Vec<(u64, i64)> {
    let mut out = Vec::new();
    let mut j = 0u64;
    loop {
        let e = m * (j * (j + 1) / 2);
        if e > n {
            break;
        }
        let sign = if j.is_multiple_of(2) { 1 } else { -1 };
        out.push((e, sign * (2 * j + 1) as i64));
        j += 1;
    }
    out
}

/// Sparse `Π_{k≥1}(1 − q^k) = Σ_j (−1)^j q^{j(3j−1)/2}` with `q → q^m`.
pub fn pentagonal(m: u64, n: u64) -> Vec<(u64, i64)> {
    let mut out = vec![(0u64, 1i64)];
    let mut j = 1u64;
    loop {
        let sign = if j.is_multiple_of(2) { 1 } else { -1 };
        let e1 = m * (j * (3 * j - 1) / 2);
        let e2 = m * (j * (3 * j + 1) / 2);
        if e1 > n {
            break;
        }
        out.push((e1, sign));
        if e2 <= n {
            out.push((e2, sign));
        }
        j += 1;
    }
    out.sort_unstable();
    out
}

/// Dense product of sparse series through `q^N`, with an offset applied to
/// every exponent. Checked `i64` arithmetic.
pub fn sparse_product(a: &[(u64, i64)], b: &[(u64, i64)], offset: u64, n: usize) -> Result<Vec<i64>> {
    let mut out = vec![0i64; n + 1];
    for &(ea, ca) in a {
        for &(eb, cb) in b {
            let e = (ea + eb + offset) as usize;
            if e > n {
                continue;
            }
            let v = ca.checked_mul(cb).ok_or(Error::CoefficientOverflow(e))?;
            out[e] = out[e].checked_add(v).ok_or(Error::CoefficientOverflow(e))?;
        }
    }
    Ok(out)
}

/// Coefficients `c_0..c_N` (with `c_0 = 0`) of `η(2τ)³η(6τ)³ = q Π(1−q^{2k})³(1−q^{6k})³`.
pub fn eta2_cubed_eta6_cubed(n: usize) -> Result<Vec<i64>> {
    let a = jacobi_cube(2, n as u64);
    let b = jacobi_cube(6, n as u64);
    sparse_product(&a, &b, 1, n)
}

/// Coefficients `c_0..c_N` of `η(4τ)⁶ = q Π(1−q^{4k})⁶`.
pub fn eta4_sixth(n: usize) -> Result<Vec<i64>> {
    let a = jacobi_cube(4, n as u64);
    sparse_product(&a, &a, 1, n)
}

/// Coefficients `c_0..c_N` of `η(τ)³η(7τ)³ = q Π(1−q^k)³(1−q^{7k})³`.
pub fn eta1_cubed_eta7_cubed(n: usize) -> Result<Vec<i64>> {
    let a = jacobi_cube(1, n as u64);
    let b = jacobi_cube(7, n as u64);
    sparse_product(&a, &b, 1, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hauptmodul_of_level_three() {
        let eq = EtaQuotient::new(vec![(3, 12), (1, -12)]).unwrap();
        let s = eq.expand(2);
        assert_eq!(s, QSeries::from_ints(1, &[1, 12, 90]));
    }

    #[test]
    fn single_eta() {
        let s = EtaQuotient::new(vec![(1, 1)]).unwrap().expand(0);
        assert_eq!(s.lead_exp(), &Rational::from((1, 24)));
        assert_eq!(s.coeffs(), &[Rational::from(1)]);
    }

    #[test]
    fn level_four_hauptmodul_has_integral_lead() {
        let eq = EtaQuotient::new(vec![(1, 8), (4, 16), (2, -24)]).unwrap();
        assert_eq!(eq.lead_exp(), Rational::from(1));
        let s = eq.expand(3);
        assert_eq!(s, QSeries::from_ints(1, &[1, -8, 44, -192]));
    }

    #[test]
    fn euler_pentagonal_matches_dense() {
        let dense = EtaQuotient::new(vec![(1, 1)]).unwrap().product_coeffs(60);
        let mut sparse = vec![0i64; 61];
        for (e, c) in pentagonal(1, 60) {
            sparse[e as usize] += c;
        }
        let dense: Vec<i64> = dense.iter().map(|c| c.to_i64().unwrap()).collect();
        assert_eq!(dense, sparse);
    }

    #[test]
    fn sparse_weight_three_forms_match_dense() {
        let n = 120;
        for (factors, sparse) in [
            (vec![(2, 3), (6, 3)], eta2_cubed_eta6_cubed(n).unwrap()),
            (vec![(4, 6)], eta4_sixth(n).unwrap()),
            (vec![(1, 3), (7, 3)], eta1_cubed_eta7_cubed(n).unwrap()),
        ] {
            let eq = EtaQuotient::new(factors).unwrap();
            assert_eq!(eq.lead_exp(), 1);
            let dense = eq.expand(n - 1);
            for i in 0..n {
                assert_eq!(dense.coeff(i), &Rational::from(sparse[i + 1]));
            }
        }
    }

    fn factor_list() -> impl Strategy<Value = Vec<(u32, i32)>> {
        prop::collection::vec((1u32..8, -6i32..7), 1..4)
    }

    proptest! {
        #[test]
        fn lead_exponent_is_weighted_sum(f in factor_list()) {
            let eq = EtaQuotient::new(f.clone()).unwrap();
            let s: i64 = f.iter().map(|&(m, e)| (m as i64) * (e as i64)).sum();
            prop_assert_eq!(eq.expand(3).lead_exp().clone(), Rational::from((s, 24)));
        }

        #[test]
        fn log_derivative_matches_naive_product(f in factor_list()) {
            let eq = EtaQuotient::new(f.clone()).unwrap();
            prop_assert_eq!(eq.product_coeffs(30), product_coeffs_naive(&f, 30));
        }
    }
}
