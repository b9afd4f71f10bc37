//! Dense univariate polynomials with exact rational coefficients.

use std::fmt;

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

/// Coefficients in ascending order; trailing zeros are trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Poly(#[serde(with = "crate::rat::vec")] Vec<Rational>);

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Rational::from(c)).collect())
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    /// `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![Rational::new(); k + 1];
        c[k] = Rational::from(1);
        Poly(c)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.0.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.0.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn eval_int(&self, x: i64) -> Rational {
        self.eval(&Rational::from(x))
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64())
    }

    /// `p(x + shift)`.
    pub fn shift(&self, shift: i64) -> Poly {
        // Horner in the polynomial ring: acc = acc * (x + shift) + c.
        let s = Rational::from(shift);
        let mut acc: Vec<Rational> = Vec::new();
        for c in self.0.iter().rev() {
            let mut next = vec![Rational::new(); acc.len() + 1];
            for (i, a) in acc.iter().enumerate() {
                next[i + 1] += a;
                next[i] += Rational::from(a * &s);
            }
            next[0] += c;
            acc = next;
        }
        Poly::new(acc)
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        Poly::new(self.0.iter().map(|c| Rational::from(c * k)).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::new(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        Poly::new(out)
    }

    /// Leading coefficient, zero for the zero polynomial.
    pub fn leading(&self) -> Rational {
        self.0.last().cloned().unwrap_or_default()
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|c| *c.denom() == 1)
    }

    /// Integer coefficients when every coefficient is integral.
    pub fn integer_coeffs(&self) -> Option<Vec<Integer>> {
        self.is_integral().then(|| self.0.iter().map(|c| c.numer().clone()).collect())
    }
}

impl fmt::Display for Poly {
    /// Renders in descending powers of `n`, e.g. `34n^3 + 153n^2 + 231n + 117`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.0.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
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
            let show_coeff = abs != 1 || i == 0;
            if show_coeff {
                write!(f, "{}", crate::rat::format(&abs))?;
            }
            match i {
                0 => {}
                1 => write!(f, "n")?,
                _ => write!(f, "n^{i}")?,
            }
        }
        Ok(())
    }
}
