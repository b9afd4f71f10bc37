use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use super::QSeries;
use crate::error::{Error, Result};

/// `q^lead · Π_{n≥1} (1 − qⁿ)^{e(n)}` with `e` periodic: `e(n) = exponents[n mod modulus]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicProduct {
    #[serde(default)]
    pub lead: i64,
    pub modulus: u32,
    pub exponents: Vec<i32>,
}

impl PeriodicProduct {
    pub fn new(lead: i64, modulus: u32, exponents: Vec<i32>) -> Result<Self> {
        if modulus == 0 || exponents.len() != modulus as usize {
            return Err(Error::InvalidArgument(format!("exponents must list one value per residue mod {modulus}")));
        }
        Ok(PeriodicProduct { lead, modulus, exponents })
    }

    fn exponent(&self, n: usize) -> i64 {
        self.exponents[n % self.modulus as usize] as i64
    }

    /// Same log-derivative recurrence as for eta quotients, with
    /// `D_i = −Σ_{k | i} k·e(k)`.
    pub fn product_coeffs(&self, n: usize) -> Vec<Integer> {
        let mut d = vec![0i64; n + 1];
        for k in 1..=n {
            let w = k as i64 * self.exponent(k);
            if w != 0 {
                for m in (k..=n).step_by(k) {
                    d[m] -= w;
                }
            }
        }
        let mut f: Vec<Integer> = Vec::with_capacity(n + 1);
        f.push(Integer::from(1));
        for j in 1..=n {
            let mut acc = Integer::new();
            for i in 1..=j {
                if d[i] != 0 && f[j - i] != 0 {
                    acc += Integer::from(&f[j - i] * d[i]);
                }
            }
            acc.div_exact_u_mut(j as u32);
            f.push(acc);
        }
        f
    }

    pub fn expand(&self, n: usize) -> QSeries {
        QSeries::from_integers(Rational::from(self.lead), self.product_coeffs(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::EtaQuotient;
    use proptest::prelude::*;

    // Multiply out one binomial factor at a time.
    fn naive(p: &PeriodicProduct, n: usize) -> Vec<Integer> {
        let mut c = vec![Integer::new(); n + 1];
        c[0] = Integer::from(1);
        for k in 1..=n {
            let e = p.exponent(k);
            for _ in 0..e.unsigned_abs() {
                if e > 0 {
                    for i in (k..=n).rev() {
                        let t = c[i - k].clone();
                        c[i] -= t;
                    }
                } else {
                    for i in k..=n {
                        let t = c[i - k].clone();
                        c[i] += t;
                    }
                }
            }
        }
        c
    }

    #[test]
    fn legendre_five_product() {
        let p = PeriodicProduct::new(1, 5, vec![0, 5, -5, -5, 5]).unwrap();
        let got = p.expand(4);
        assert_eq!(got, QSeries::from_ints(1, &[1, -5, 15, -30, 40]));
        assert_eq!(p.product_coeffs(40), naive(&p, 40));
    }

    #[test]
    fn constant_exponent_is_eta() {
        let p = PeriodicProduct::new(0, 1, vec![3]).unwrap();
        let eta = EtaQuotient::new(vec![(1, 3)]).unwrap();
        assert_eq!(p.product_coeffs(50), eta.product_coeffs(50));
    }

    #[test]
    fn rejects_short_exponent_table() {
        assert!(PeriodicProduct::new(0, 3, vec![1, 2]).is_err());
    }

    proptest! {
        #[test]
        fn log_derivative_matches_naive(m in 1u32..7, seed in proptest::collection::vec(-3i32..4, 7)) {
            let p = PeriodicProduct::new(0, m, seed[..m as usize].to_vec()).unwrap();
            prop_assert_eq!(p.product_coeffs(25), naive(&p, 25));
        }
    }
}
