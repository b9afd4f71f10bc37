use std::fmt;

use rug::{Assign, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A truncated power series `q^lead_exp * Σ_{i=0}^{N} coeffs[i] q^i` with exact
/// rational coefficients, known through `q^(lead_exp + N)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QSeries {
    #[serde(with = "crate::rat")]
    lead_exp: Rational,
    #[serde(with = "crate::rat::vec")]
    coeffs: Vec<Rational>,
}

impl QSeries {
    /// Panics if `coeffs` is empty; a series always carries at least its
    /// leading slot.
    pub fn new(lead_exp: Rational, coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "QSeries needs at least one coefficient");
        QSeries { lead_exp, coeffs }
    }

    pub fn from_ints(lead_exp: i64, coeffs: &[i64]) -> Self {
        Self::new(Rational::from(lead_exp), coeffs.iter().map(|&c| Rational::from(c)).collect())
    }

    pub fn from_integers(lead_exp: Rational, coeffs: Vec<Integer>) -> Self {
        Self::new(lead_exp, coeffs.into_iter().map(Rational::from).collect())
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Rational::new(), vec![Rational::new(); order + 1])
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Rational::from(1), order)
    }

    pub fn constant(c: Rational, order: usize) -> Self {
        let mut coeffs = vec![Rational::new(); order + 1];
        coeffs[0] = c;
        Self::new(Rational::new(), coeffs)
    }

    /// `q` itself, known through `q^(order+1)`.
    pub fn q(order: usize) -> Self {
        Self::new(Rational::from(1), {
            let mut c = vec![Rational::new(); order + 1];
            c[0] = Rational::from(1);
            c
        })
    }

    pub fn lead_exp(&self) -> &Rational {
        &self.lead_exp
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Relative truncation order `N`.
    pub fn trunc_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Absolute exponent of the last known coefficient.
    pub fn known_through(&self) -> Rational {
        Rational::from(&self.lead_exp + self.trunc_order() as i64)
    }

    pub fn coeff(&self, i: usize) -> &Rational {
        &self.coeffs[i]
    }

    /// Coefficient of `q^exp`; `None` when `exp` lies beyond the truncation
    /// order or off the exponent lattice.
    pub fn coeff_at(&self, exp: &Rational) -> Option<Rational> {
        let rel = Rational::from(exp - &self.lead_exp);
        if *rel.denom() != 1 {
            return None;
        }
        if rel < 0 {
            return Some(Rational::new());
        }
        let i = rel.numer().to_usize()?;
        self.coeffs.get(i).cloned()
    }

    pub fn leading_coeff(&self) -> &Rational {
        &self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| *c.denom() == 1)
    }

    /// Integer coefficients, when all are integral.
    pub fn integer_coeffs(&self) -> Option<Vec<Integer>> {
        self.is_integral().then(|| self.coeffs.iter().map(|c| c.numer().clone()).collect())
    }

    pub fn truncate(mut self, order: usize) -> Self {
        self.coeffs.truncate(order + 1);
        self
    }

    pub fn with_lead_exp(mut self, lead_exp: Rational) -> Self {
        self.lead_exp = lead_exp;
        self
    }

    /// Drop leading zero coefficients, raising the lead exponent; the
    /// absolute truncation point is unchanged. A zero series is returned as is.
    pub fn normalized(mut self) -> Self {
        let k = match self.coeffs.iter().position(|c| *c != 0) {
            Some(k) => k,
            None => return self,
        };
        if k > 0 {
            self.coeffs.drain(..k);
            self.lead_exp += k as i64;
        }
        self
    }

    pub fn scale(&self, k: &Rational) -> Self {
        QSeries::new(self.lead_exp.clone(), self.coeffs.iter().map(|c| Rational::from(c * k)).collect())
    }

    pub fn neg(&self) -> Self {
        self.scale(&Rational::from(-1))
    }

    fn integer_gap(&self, other: &QSeries) -> Result<i64> {
        let d = Rational::from(&other.lead_exp - &self.lead_exp);
        if *d.denom() != 1 {
            return Err(Error::IncompatibleExponents(self.lead_exp.clone(), other.lead_exp.clone()));
        }
        d.numer().to_i64().ok_or_else(|| Error::InvalidArgument("lead exponent gap too large".into()))
    }

    fn add_scaled(&self, other: &QSeries, sign: i32) -> Result<QSeries> {
        let gap = self.integer_gap(other)?;
        let (lo, hi, hi_sign, lo_sign, gap) =
            if gap >= 0 { (self, other, sign, 1, gap as usize) } else { (other, self, 1, sign, (-gap) as usize) };
        // Absolute truncation is the smaller of the two known-through points.
        let len = (lo.coeffs.len()).min(gap + hi.coeffs.len());
        let mut coeffs: Vec<Rational> =
            lo.coeffs[..len].iter().map(|c| if lo_sign < 0 { Rational::from(-c) } else { c.clone() }).collect();
        for (i, c) in hi.coeffs.iter().enumerate() {
            let j = i + gap;
            if j >= len {
                break;
            }
            if hi_sign < 0 {
                coeffs[j] -= c;
            } else {
                coeffs[j] += c;
            }
        }
        Ok(QSeries::new(lo.lead_exp.clone(), coeffs))
    }

    pub fn add(&self, other: &QSeries) -> Result<QSeries> {
        self.add_scaled(other, 1)
    }

    pub fn sub(&self, other: &QSeries) -> Result<QSeries> {
        self.add_scaled(other, -1)
    }

    pub fn mul(&self, other: &QSeries) -> QSeries {
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut out = vec![Rational::new(); n];
        let mut tmp = Rational::new();
        for (i, a) in self.coeffs[..n].iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in other.coeffs[..n - i].iter().enumerate() {
                if *b == 0 {
                    continue;
                }
                tmp.assign(a * b);
                out[i + j] += &tmp;
            }
        }
        QSeries::new(Rational::from(&self.lead_exp + &other.lead_exp), out)
    }

    /// Multiplicative inverse; requires a nonzero leading coefficient.
    pub fn inverse(&self) -> Result<QSeries> {
        let b0 = &self.coeffs[0];
        if *b0 == 0 {
            return Err(Error::ZeroLeadingCoefficient);
        }
        let inv0 = Rational::from(b0.recip_ref());
        let n = self.coeffs.len();
        let mut out: Vec<Rational> = Vec::with_capacity(n);
        out.push(inv0.clone());
        let mut tmp = Rational::new();
        for k in 1..n {
            let mut acc = Rational::new();
            for i in 1..=k {
                let b = &self.coeffs[i];
                if *b == 0 {
                    continue;
                }
                tmp.assign(b * &out[k - i]);
                acc += &tmp;
            }
            acc *= &inv0;
            out.push(-acc);
        }
        Ok(QSeries::new(Rational::from(-&self.lead_exp), out))
    }

    pub fn div(&self, other: &QSeries) -> Result<QSeries> {
        Ok(self.mul(&other.inverse()?))
    }

    pub fn pow(&self, e: i64) -> Result<QSeries> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut result = QSeries::one(self.trunc_order());
        let mut p = base;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&p);
            }
            k >>= 1;
            if k > 0 {
                p = p.mul(&p);
            }
        }
        Ok(result)
    }

    /// `q d/dq`: the coefficient of `q^e` is multiplied by `e`.
    pub fn theta_q(&self) -> QSeries {
        let coeffs =
            self.coeffs.iter().enumerate().map(|(i, c)| c * Rational::from(&self.lead_exp + i as i64)).collect();
        QSeries::new(self.lead_exp.clone(), coeffs)
    }

    /// Evaluate a polynomial (ascending coefficients) at this series by
    /// Horner's rule. The lead exponent must be a non-negative integer.
    pub fn compose_poly(&self, poly: &crate::poly::Poly) -> Result<QSeries> {
        let order = self.trunc_order();
        let mut acc = QSeries::zero(order);
        for c in poly.coeffs().iter().rev() {
            acc = acc.mul(self).add(&QSeries::constant(c.clone(), order))?;
        }
        Ok(acc)
    }

    /// Compare coefficients on the common range of absolute exponents.
    /// Returns the first exponent (relative to the smaller lead) where the
    /// two disagree, or `None` when they agree throughout.
    pub fn first_mismatch(&self, other: &QSeries) -> Result<Option<Rational>> {
        let diff = self.sub(other)?;
        Ok(diff.coeffs.iter().position(|c| *c != 0).map(|i| Rational::from(&diff.lead_exp + i as i64)))
    }
}

impl PartialEq for QSeries {
    /// Equal iff the lead exponents agree and every coefficient on the
    /// shared truncation range agrees exactly.
    fn eq(&self, other: &Self) -> bool {
        self.lead_exp == other.lead_exp && self.coeffs.iter().zip(other.coeffs.iter()).all(|(a, b)| a == b)
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            let e = Rational::from(&self.lead_exp + i as i64);
            let neg = *c < 0;
            let abs = Rational::from(c.abs_ref());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let es = crate::rat::format(&e);
            let coeff = crate::rat::format(&abs);
            match (abs == 1, e == 0) {
                (_, true) => write!(f, "{coeff}")?,
                (true, false) if e == 1 => write!(f, "q")?,
                (true, false) => write!(f, "q^{es}")?,
                (false, false) if e == 1 => write!(f, "{coeff}q")?,
                (false, false) => write!(f, "{coeff}q^{es}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^{})", crate::rat::format(&(self.known_through() + 1u32)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn difference_of_squares() {
        let a = QSeries::from_ints(0, &[1, 1, 0]);
        let b = QSeries::from_ints(0, &[1, -1, 0]);
        assert_eq!(a.mul(&b), QSeries::from_ints(0, &[1, 0, -1]));
    }

    #[test]
    fn geometric_series() {
        let one_minus_q = QSeries::from_ints(0, &[1, -1, 0, 0]);
        let inv = QSeries::one(3).div(&one_minus_q).unwrap();
        assert_eq!(inv, QSeries::from_ints(0, &[1, 1, 1, 1]));
    }

    #[test]
    fn theta_examples() {
        assert!(QSeries::one(3).theta_q().is_zero());
        let s = QSeries::from_ints(1, &[1, 3]);
        assert_eq!(s.theta_q(), QSeries::from_ints(1, &[1, 6]));
        let eta_lead = QSeries::new(Rational::from((1, 24)), vec![Rational::from(1)]);
        assert_eq!(eta_lead.theta_q().coeff(0), &Rational::from((1, 24)));
    }

    #[test]
    fn add_aligns_integer_gaps_and_truncates() {
        let a = QSeries::from_ints(0, &[1, 2, 3, 4]);
        let b = QSeries::from_ints(1, &[10, 20]);
        let s = a.add(&b).unwrap();
        // b is only known through q^2.
        assert_eq!(s, QSeries::from_ints(0, &[1, 12, 23]));
        assert_eq!(s.trunc_order(), 2);
        let d = b.sub(&a).unwrap();
        assert_eq!(d, QSeries::from_ints(0, &[-1, 8, 17]));
    }

    #[test]
    fn add_rejects_fractional_gap() {
        let a = QSeries::new(Rational::from((1, 24)), vec![Rational::from(1)]);
        let b = QSeries::one(0);
        assert!(matches!(a.add(&b), Err(Error::IncompatibleExponents(..))));
    }

    #[test]
    fn division_needs_unit() {
        let a = QSeries::from_ints(0, &[1, 1]);
        let b = QSeries::from_ints(0, &[0, 1]);
        assert!(matches!(a.div(&b), Err(Error::ZeroLeadingCoefficient)));
    }

    #[test]
    fn pow_and_negative_pow() {
        let a = QSeries::from_ints(0, &[1, -1, 0, 0, 0]);
        let cube = a.pow(3).unwrap();
        assert_eq!(cube, QSeries::from_ints(0, &[1, -3, 3, -1, 0]));
        let inv2 = a.pow(-2).unwrap();
        assert_eq!(inv2, QSeries::from_ints(0, &[1, 2, 3, 4, 5]));
    }

    #[test]
    fn compose_poly_in_q() {
        let t = QSeries::from_ints(1, &[1, 1, 0]);
        let p = crate::poly::Poly::from_ints(&[1, 27]);
        // 1 + 27(q + q^2) through q^2.
        let c = t.compose_poly(&p).unwrap();
        assert_eq!(c, QSeries::from_ints(0, &[1, 27, 27]));
    }

    #[test]
    fn json_shape() {
        let s = QSeries::new(Rational::from((1, 24)), vec![Rational::from(1), Rational::from((-1, 2))]);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"lead_exp":"1/24","coeffs":["1","-1/2"]}"#);
        let back: QSeries = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn display() {
        let s = QSeries::from_ints(1, &[1, -10, 49]);
        assert_eq!(s.to_string(), "q - 10q^2 + 49q^3 + O(q^4)");
    }

    fn unit_series() -> impl Strategy<Value = QSeries> {
        (1i64..5, prop::collection::vec(-20i64..20, 1..12)).prop_map(|(c0, rest)| {
            let mut v = vec![c0];
            v.extend(rest);
            QSeries::from_ints(0, &v)
        })
    }

    proptest! {
        #[test]
        fn mul_then_div_round_trips(a in unit_series(), b in unit_series()) {
            let n = a.trunc_order().min(b.trunc_order());
            let back = a.mul(&b).div(&b).unwrap();
            prop_assert_eq!(back.trunc_order(), n);
            prop_assert_eq!(back, a.truncate(n));
        }

        #[test]
        fn theta_is_a_derivation(a in unit_series(), b in unit_series()) {
            let lhs = a.mul(&b).theta_q();
            let rhs = a.theta_q().mul(&b).add(&a.mul(&b.theta_q())).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
