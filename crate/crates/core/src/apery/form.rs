use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::series::{EisensteinCombination, EtaQuotient, LambertPattern, PeriodicProduct, QSeries};

/// A closed-form `q`-series as it appears in the case registry.
///
/// Leaves expand to `N + 1` coefficients from their own lead exponent;
/// composite forms inherit truncation from [`QSeries`] arithmetic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SeriesForm {
    Eta {
        factors: Vec<(u32, i32)>,
    },
    PeriodicProduct(PeriodicProduct),
    Lambert(LambertPattern),
    Eisenstein(EisensteinCombination),
    Constant {
        #[serde(with = "crate::rat")]
        value: Rational,
    },
    /// `p(t)` for the uniformizer of the enclosing case.
    PolyInT {
        poly: Poly,
    },
    Sum {
        terms: Vec<SeriesForm>,
    },
    Product {
        factors: Vec<SeriesForm>,
    },
    Scaled {
        #[serde(with = "crate::rat")]
        factor: Rational,
        of: Box<SeriesForm>,
    },
    Quotient {
        num: Box<SeriesForm>,
        den: Box<SeriesForm>,
    },
    Inverse {
        of: Box<SeriesForm>,
    },
}

impl SeriesForm {
    pub fn eta(factors: Vec<(u32, i32)>) -> Self {
        SeriesForm::Eta { factors }
    }

    /// Expand with `N + 1` coefficients per leaf; `t` resolves [`SeriesForm::PolyInT`].
    pub fn expand(&self, n: usize, t: Option<&QSeries>) -> Result<QSeries> {
        Ok(match self {
            SeriesForm::Eta { factors } => EtaQuotient::new(factors.clone())?.expand(n),
            SeriesForm::PeriodicProduct(p) => PeriodicProduct::new(p.lead, p.modulus, p.exponents.clone())?.expand(n),
            SeriesForm::Lambert(p) => p.expand(n)?,
            SeriesForm::Eisenstein(e) => e.expand(n)?,
            SeriesForm::Constant { value } => QSeries::constant(value.clone(), n),
            SeriesForm::PolyInT { poly } => {
                let t = t.ok_or_else(|| Error::Registry("poly_in_t used outside a case context".into()))?;
                t.compose_poly(poly)?.truncate(n)
            }
            SeriesForm::Sum { terms } => {
                let mut parts = terms.iter().map(|f| f.expand(n, t));
                let first = parts.next().ok_or_else(|| Error::Registry("empty sum".into()))??;
                parts.try_fold(first, |acc, p| acc.add(&p?))?
            }
            SeriesForm::Product { factors } => {
                let mut parts = factors.iter().map(|f| f.expand(n, t));
                let first = parts.next().ok_or_else(|| Error::Registry("empty product".into()))??;
                parts.try_fold(first, |acc, p| Ok::<_, Error>(acc.mul(&p?)))?
            }
            SeriesForm::Scaled { factor, of } => of.expand(n, t)?.scale(factor),
            SeriesForm::Quotient { num, den } => num.expand(n, t)?.div(&den.expand(n, t)?)?,
            SeriesForm::Inverse { of } => of.expand(n, t)?.inverse()?,
        })
    }

    /// Expand with padding so that the result is known through relative
    /// order `N` even after cancellation of leading terms in sums.
    pub fn expand_to(&self, n: usize, t: Option<&QSeries>) -> Result<QSeries> {
        let s = self.expand(n + PAD, t)?.normalized();
        if s.trunc_order() < n {
            return Err(Error::Registry(format!(
                "form loses precision: known to relative order {} < {n}",
                s.trunc_order()
            )));
        }
        Ok(s.truncate(n))
    }
}

/// Extra terms requested from leaves to absorb leading cancellation.
const PAD: usize = 8;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::LambertShape;

    #[test]
    fn level_seven_hauptmodul_inverse() {
        // (η⁴/η₇⁴ + 14 + 49 η₇⁴/η⁴)^{-1}
        let f = SeriesForm::Inverse {
            of: Box::new(SeriesForm::Sum {
                terms: vec![
                    SeriesForm::eta(vec![(1, 4), (7, -4)]),
                    SeriesForm::Constant { value: Rational::from(14) },
                    SeriesForm::Scaled {
                        factor: Rational::from(49),
                        of: Box::new(SeriesForm::eta(vec![(7, 4), (1, -4)])),
                    },
                ],
            }),
        };
        let t = f.expand_to(4, None).unwrap();
        assert_eq!(t, QSeries::from_ints(1, &[1, -10, 49, -184]));
        assert_eq!(t.trunc_order(), 4);
    }

    #[test]
    fn quotient_by_polynomial_in_t() {
        // (1 + 6 Σ χ₃(n) qⁿ/(1−qⁿ)) / (1 + 27t) with t = η(3τ)¹²/η(τ)¹².
        let t = SeriesForm::eta(vec![(3, 12), (1, -12)]).expand_to(10, None).unwrap();
        let a = SeriesForm::Quotient {
            num: Box::new(SeriesForm::Lambert(LambertPattern::with(
                LambertShape::CharacterDivisor { modulus: 3, weights: vec![0, 1, -1], power: 0 },
                Rational::from(6),
                Rational::from(1),
            ))),
            den: Box::new(SeriesForm::PolyInT { poly: Poly::from_ints(&[1, 27]) }),
        };
        let a = a.expand_to(10, Some(&t)).unwrap();
        assert_eq!(*a.coeff(0), 1);
        assert_eq!(*a.coeff(1), -21);
        assert!(a.is_integral());
    }

    #[test]
    fn poly_in_t_needs_context() {
        let f = SeriesForm::PolyInT { poly: Poly::from_ints(&[1, 1]) };
        assert!(matches!(f.expand(3, None), Err(Error::Registry(_))));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"form":"quotient",
            "num":{"form":"lambert","shape":"character_divisor","modulus":3,"weights":[0,1,-1],"power":0,"scale":"6","constant":"1"},
            "den":{"form":"poly_in_t","poly":[1,27]}}"#;
        let f: SeriesForm = serde_json::from_str(text).unwrap();
        let back: SeriesForm = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(f, back);
        let e: SeriesForm =
            serde_json::from_str(r#"{"form":"eisenstein","kind":"E4","terms":[[1,1],[2,-17],[4,16]],"scale":"1/240"}"#)
                .unwrap();
        assert!(matches!(e, SeriesForm::Eisenstein(_)));
    }
}
