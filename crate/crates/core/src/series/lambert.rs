use rug::Rational;
use serde::{Deserialize, Serialize};

use super::QSeries;
use crate::error::{Error, Result};

/// The registered Lambert-type shapes. Each has `q`-coefficients of the form
/// `Σ_{d e = N} u(d)·v(e)`, so all expand through one divisor sieve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum LambertShape {
    /// `Σ_n w(n)·n^power · qⁿ/(1−qⁿ)` with `w` periodic mod `modulus`
    /// (`weights[r]` is the value on `n ≡ r`).
    CharacterDivisor { modulus: u32, weights: Vec<i64>, power: u32 },
    /// `Σ_n n^power Σ_k χ(k) q^{kn}` with `χ` periodic mod `modulus`.
    TwistedDivisor { modulus: u32, weights: Vec<i64>, power: u32 },
    /// `Σ_n (−1)^{n−1} n² qⁿ/(1+q^{2n})`.
    AlternatingSquares,
    /// `Σ_n (3q^{5n−4}/(1−q^{5n−4}) + q^{5n−3}/(1−q^{5n−3}) − q^{5n−2}/(1−q^{5n−2}) − 3q^{5n−1}/(1−q^{5n−1}))`.
    FiveTerm,
}

/// `constant + scale · shape`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambertPattern {
    #[serde(flatten)]
    pub shape: LambertShape,
    #[serde(with = "crate::rat", default = "one")]
    pub scale: Rational,
    #[serde(with = "crate::rat", default)]
    pub constant: Rational,
}

fn one() -> Rational {
    Rational::from(1)
}

fn periodic(modulus: u32, weights: &[i64]) -> Result<()> {
    if modulus == 0 || weights.len() != modulus as usize {
        return Err(Error::UnknownPattern(format!("weights must list one value per residue mod {modulus}")));
    }
    Ok(())
}

impl LambertShape {
    fn validate(&self) -> Result<()> {
        match self {
            LambertShape::CharacterDivisor { modulus, weights, .. }
            | LambertShape::TwistedDivisor { modulus, weights, .. } => periodic(*modulus, weights),
            _ => Ok(()),
        }
    }

    /// `(u(d), v(e))` for the divisor-pair form of the shape.
    fn factor_weights(&self, d: u64, e: u64) -> (i64, i64) {
        let pow = |x: u64, p: u32| (x as i64).pow(p);
        let at = |w: &[i64], m: u32, x: u64| w[(x % m as u64) as usize];
        match self {
            LambertShape::CharacterDivisor { modulus, weights, power } => {
                (at(weights, *modulus, d) * pow(d, *power), 1)
            }
            LambertShape::TwistedDivisor { modulus, weights, power } => (pow(d, *power), at(weights, *modulus, e)),
            LambertShape::AlternatingSquares => {
                let sign = if d % 2 == 1 { 1 } else { -1 };
                (sign * pow(d, 2), at(&[0, 1, 0, -1], 4, e))
            }
            LambertShape::FiveTerm => (at(&[0, 3, 1, -1, -3], 5, d), 1),
        }
    }

    /// Integer coefficients `c_0..c_N` (with `c_0 = 0`), checked for overflow.
    pub fn coeffs_i64(&self, n: usize) -> Result<Vec<i64>> {
        self.validate()?;
        let mut c = vec![0i64; n + 1];
        for d in 1..=n as u64 {
            for e in 1..=(n as u64) / d {
                let (u, v) = self.factor_weights(d, e);
                if u == 0 || v == 0 {
                    continue;
                }
                let i = (d * e) as usize;
                let term = u.checked_mul(v).ok_or(Error::CoefficientOverflow(i))?;
                c[i] = c[i].checked_add(term).ok_or(Error::CoefficientOverflow(i))?;
            }
        }
        Ok(c)
    }
}

impl LambertPattern {
    pub fn new(shape: LambertShape) -> Self {
        LambertPattern { shape, scale: one(), constant: Rational::new() }
    }

    pub fn with(shape: LambertShape, scale: Rational, constant: Rational) -> Self {
        LambertPattern { shape, scale, constant }
    }

    /// Parse a pattern from JSON, mapping an unrecognised shape to
    /// [`Error::UnknownPattern`].
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        serde_json::from_value(v.clone()).map_err(|e| Error::UnknownPattern(e.to_string()))
    }

    pub fn expand(&self, n: usize) -> Result<QSeries> {
        let raw = self.shape.coeffs_i64(n)?;
        let mut coeffs: Vec<Rational> = raw.into_iter().map(|c| Rational::from(c) * &self.scale).collect();
        coeffs[0] += &self.constant;
        Ok(QSeries::new(Rational::new(), coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chi3() -> Vec<i64> {
        vec![0, 1, -1]
    }

    #[test]
    fn level_three_weight_one_series() {
        let p = LambertPattern::with(
            LambertShape::CharacterDivisor { modulus: 3, weights: chi3(), power: 0 },
            Rational::from(6),
            Rational::from(1),
        );
        assert_eq!(p.expand(3).unwrap(), QSeries::from_ints(0, &[1, 6, 0, 6]));
    }

    #[test]
    fn twisted_squares_first_term() {
        let p = LambertPattern::new(LambertShape::TwistedDivisor { modulus: 3, weights: chi3(), power: 2 });
        assert_eq!(p.expand(1).unwrap(), QSeries::from_ints(0, &[0, 1]));
    }

    #[test]
    fn five_term_series() {
        let p = LambertPattern::with(LambertShape::FiveTerm, Rational::from(1), Rational::from(1));
        assert_eq!(p.expand(4).unwrap(), QSeries::from_ints(0, &[1, 3, 4, 2, 1]));
    }

    #[test]
    fn alternating_squares_by_expansion() {
        // Oracle: expand (−1)^{n−1} n² qⁿ Σ_j (−1)^j q^{2nj} term by term.
        let n = 40usize;
        let mut want = vec![0i64; n + 1];
        for k in 1..=n {
            let mut j = 0;
            while k * (2 * j + 1) <= n {
                let sign = if (k - 1 + j) % 2 == 0 { 1 } else { -1 };
                want[k * (2 * j + 1)] += sign * (k * k) as i64;
                j += 1;
            }
        }
        assert_eq!(LambertShape::AlternatingSquares.coeffs_i64(n).unwrap(), want);
    }

    #[test]
    fn unknown_shape_is_rejected() {
        let v = serde_json::json!({"shape": "hypergeometric"});
        assert!(matches!(LambertPattern::from_json(&v), Err(Error::UnknownPattern(_))));
        let bad = serde_json::json!({"shape": "character_divisor", "modulus": 3, "weights": [0, 1], "power": 0});
        let p = LambertPattern::from_json(&bad).unwrap();
        assert!(matches!(p.expand(3), Err(Error::UnknownPattern(_))));
    }

    #[test]
    fn json_round_trip() {
        let p = LambertPattern::with(
            LambertShape::CharacterDivisor { modulus: 7, weights: vec![0, 1, 1, -1, 1, -1, -1], power: 0 },
            Rational::from(2),
            Rational::from(1),
        );
        let s = serde_json::to_value(&p).unwrap();
        assert_eq!(s["shape"], "character_divisor");
        assert_eq!(LambertPattern::from_json(&s).unwrap(), p);
    }

    proptest! {
        #[test]
        fn character_divisor_is_divisor_sum(m in 1u32..8, w in prop::collection::vec(-3i64..4, 8), p in 0u32..3) {
            let weights: Vec<i64> = w[..m as usize].to_vec();
            let shape = LambertShape::CharacterDivisor { modulus: m, weights: weights.clone(), power: p };
            let c = shape.coeffs_i64(60).unwrap();
            for (n, cn) in c.iter().enumerate().skip(1) {
                let want: i64 = (1..=n).filter(|d| n % d == 0)
                    .map(|d| weights[d % m as usize] * (d as i64).pow(p)).sum();
                prop_assert_eq!(*cn, want);
            }
        }
    }
}
