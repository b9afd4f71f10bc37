use rug::Rational;
use serde::{Deserialize, Serialize};

use super::eta::sigma_table;
use super::QSeries;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Eisenstein {
    E2,
    E4,
}

impl Eisenstein {
    fn data(self) -> (u32, i64) {
        match self {
            Eisenstein::E2 => (1, -24),
            Eisenstein::E4 => (3, 240),
        }
    }

    /// `E(mτ)` through `q^N`.
    pub fn expand(self, multiplier: usize, n: usize) -> QSeries {
        assert!(multiplier >= 1, "multiplier must be positive");
        let (k, c) = self.data();
        let sigma = sigma_table(n / multiplier, k);
        let mut coeffs = vec![Rational::new(); n + 1];
        coeffs[0] = Rational::from(1);
        for (i, s) in sigma.iter().enumerate().skip(1) {
            coeffs[i * multiplier] = Rational::from(c) * Rational::from(*s);
        }
        QSeries::new(Rational::new(), coeffs)
    }
}

/// `scale · Σ w_i E(m_i τ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EisensteinCombination {
    pub kind: Eisenstein,
    /// `(multiplier, weight)` pairs.
    pub terms: Vec<(usize, i64)>,
    #[serde(with = "crate::rat")]
    pub scale: Rational,
}

impl EisensteinCombination {
    pub fn expand(&self, n: usize) -> Result<QSeries> {
        let mut acc = QSeries::zero(n);
        for &(m, w) in &self.terms {
            acc = acc.add(&self.kind.expand(m, n).scale(&Rational::from(w)))?;
        }
        Ok(acc.scale(&self.scale))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_terms() {
        assert_eq!(Eisenstein::E2.expand(1, 2), QSeries::from_ints(0, &[1, -24, -72]));
        assert_eq!(Eisenstein::E4.expand(2, 1), QSeries::from_ints(0, &[1, 0]));
        assert_eq!(Eisenstein::E4.expand(1, 2), QSeries::from_ints(0, &[1, 240, 2160]));
    }

    #[test]
    fn e4_squared_is_e8() {
        // E8 = 1 + 480 Σ σ₇(n) qⁿ, computed independently by trial division.
        let n = 12;
        let e4 = Eisenstein::E4.expand(1, n);
        let sq = e4.mul(&e4);
        for i in 1..=n {
            let s7: i64 = (1..=i as i64).filter(|d| i as i64 % d == 0).map(|d| d.pow(7)).sum();
            assert_eq!(sq.coeff(i), &Rational::from(480 * s7));
        }
    }
}
