use std::fmt;

use rug::{Float, Rational};
use serde::Serialize;

use super::ThetaOperator;
use crate::error::{Error, Result};
use crate::poly::Poly;

/// Indices above this are generated in floating point.
pub const EXACT_LIMIT: usize = 2000;

/// `Σ_{i=0}^{d} terms[i](m)·u_{m−i} = rhs_m` for every `m ≥ 0`, where
/// `terms[i](m) = P_i(m − i)` and `terms[0](m) = m^order`.
#[derive(Clone, Debug, PartialEq)]
pub struct Recurrence {
    order: usize,
    terms: Vec<Poly>,
    rhs: Poly,
}

pub fn ode_to_recurrence(op: &ThetaOperator, rhs: &Poly) -> Result<Recurrence> {
    if let Some(r) = rhs.degree() {
        if r >= op.degree().max(1) {
            return Err(Error::SourceDegree { rhs_degree: r, degree: op.degree() });
        }
    }
    let terms = op.polys().iter().enumerate().map(|(i, p)| p.shift(-(i as i64))).collect();
    Ok(Recurrence { order: op.order(), terms, rhs: rhs.clone() })
}

impl Recurrence {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn degree(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn terms(&self) -> &[Poly] {
        &self.terms
    }

    pub fn rhs(&self) -> &Poly {
        &self.rhs
    }

    /// Lowest power of `t` in the source; `None` for the homogeneous case.
    pub fn source_index(&self) -> Option<usize> {
        self.rhs.coeffs().iter().position(|c| *c != 0)
    }

    /// The recurrence written as `Σ_i Q_i(n) u_{n+d−i} = 0` with
    /// `Q_i(n) = P_i(n + d − i)`; `Q_0(n) = (n + d)^order`.
    pub fn shifted_form(&self) -> Vec<Poly> {
        let d = self.degree() as i64;
        self.terms.iter().map(|p| p.shift(d)).collect()
    }

    /// `Σ_i terms[i](m) u_{m−i} − source_m`, with `u` read as zero below index 0.
    pub fn residual(&self, u: &[Rational], m: usize, with_source: bool) -> Rational {
        let mut acc = Rational::new();
        for (i, p) in self.terms.iter().enumerate() {
            if i > m {
                break;
            }
            acc += p.eval_int(m as i64) * &u[m - i];
        }
        if with_source {
            acc -= self.rhs.coeff(m);
        }
        acc
    }

    fn solve_step(&self, u: &[Rational], m: usize, with_source: bool) -> Result<Rational> {
        let lead = self.terms[0].eval_int(m as i64);
        if lead == 0 {
            return Err(Error::SingularRecurrence(m));
        }
        let mut acc = if with_source { self.rhs.coeff(m) } else { Rational::new() };
        for (i, p) in self.terms.iter().enumerate().skip(1) {
            if i > m {
                break;
            }
            if u[m - i] != 0 {
                acc -= p.eval_int(m as i64) * &u[m - i];
            }
        }
        Ok(acc / lead)
    }

    /// Solve for `u_m` where `u[k]` holds `u_{start+k}`; indices below 0 read
    /// as zero.
    fn step_float(&self, u: &[Float], start: usize, m: usize, with_source: bool, prec: u32) -> Float {
        let mut acc = if with_source { Float::with_val(prec, &self.rhs.coeff(m)) } else { Float::new(prec) };
        for (i, p) in self.terms.iter().enumerate().skip(1) {
            if i > m {
                break;
            }
            let c = Float::with_val(prec, &p.eval_int(m as i64));
            acc -= c * &u[m - i - start];
        }
        let lead = Float::with_val(prec, &self.terms[0].eval_int(m as i64));
        acc / lead
    }

    /// Continue both sequences in floating point from the exact prefix up to
    /// index `n_max` at `prec` bits.
    pub fn extend_float(&self, pair: &SequencePair, n_max: usize, prec: u32) -> FloatSequences {
        let start = pair.len().saturating_sub(self.degree());
        let mut a: Vec<Float> = pair.a[start..].iter().map(|x| Float::with_val(prec, x)).collect();
        let mut b: Vec<Float> = pair.b[start..].iter().map(|x| Float::with_val(prec, x)).collect();
        self.continue_float(&mut a, &mut b, start, n_max, prec);
        FloatSequences { start, prec, a, b }
    }

    /// Float run from the initial data at index 0.
    pub fn float_from_scratch(&self, n_max: usize, prec: u32) -> FloatSequences {
        let mut a = vec![Float::with_val(prec, 1)];
        let mut b = vec![Float::new(prec)];
        self.continue_float(&mut a, &mut b, 0, n_max, prec);
        FloatSequences { start: 0, prec, a, b }
    }

    fn continue_float(&self, a: &mut Vec<Float>, b: &mut Vec<Float>, start: usize, n_max: usize, prec: u32) {
        for m in start + a.len()..=n_max {
            let na = self.step_float(a, start, m, false, prec);
            let nb = self.step_float(b, start, m, true, prec);
            a.push(na);
            b.push(nb);
        }
    }
}

impl fmt::Display for Recurrence {
    /// Shifted form, e.g. `(n + 2)^3 u(n+2) + (...) u(n+1) + (...) u(n) = 0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree();
        let q = self.shifted_form();
        for (i, p) in q.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let idx = d - i;
            let sub = if idx == 0 { "n".to_string() } else { format!("n+{idx}") };
            write!(f, "({p})·u({sub})")?;
        }
        write!(f, " = 0")
    }
}

/// Homogeneous `a` (with `a_0 = 1`) and inhomogeneous `b` (`b_0 = 0`, source
/// from the recurrence) through a common index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequencePair {
    /// Source index: `b_m = 0` for `m < j`.
    pub j: usize,
    #[serde(with = "crate::rat::vec")]
    pub a: Vec<Rational>,
    #[serde(with = "crate::rat::vec")]
    pub b: Vec<Rational>,
}

/// Outcome of comparing a stated initial value with the generated one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InitialValueCheck {
    pub sequence: char,
    pub index: usize,
    #[serde(with = "crate::rat")]
    pub stated: Rational,
    #[serde(with = "crate::rat")]
    pub computed: Rational,
    pub agrees: bool,
}

impl SequencePair {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `b_n / a_n`.
    pub fn ratio(&self, n: usize) -> Result<Rational> {
        if self.a[n] == 0 {
            return Err(Error::ZeroDenominator(n));
        }
        Ok(Rational::from(&self.b[n] / &self.a[n]))
    }

    /// Compare stated `(sequence, index, value)` triples; mismatches are
    /// reported, not raised.
    pub fn check_stated(&self, stated: &[(char, usize, Rational)]) -> Vec<InitialValueCheck> {
        stated
            .iter()
            .filter_map(|(s, i, v)| {
                let seq = match s {
                    'a' => &self.a,
                    'b' => &self.b,
                    _ => return None,
                };
                let computed = seq.get(*i)?.clone();
                Some(InitialValueCheck { sequence: *s, index: *i, agrees: computed == *v, stated: v.clone(), computed })
            })
            .collect()
    }
}

/// Generate `a` and `b` exactly through index `n`.
pub fn run_sequences(rec: &Recurrence, n: usize) -> Result<SequencePair> {
    if n < rec.degree() {
        return Err(Error::InvalidArgument(format!("need N ≥ {} terms, got {n}", rec.degree())));
    }
    let src = rec.rhs.coeff(0);
    if src != 0 {
        return Err(Error::InvalidArgument("source must vanish at t = 0".into()));
    }
    let mut a = vec![Rational::from(1)];
    let mut b = vec![Rational::new()];
    for m in 1..=n {
        let na = rec.solve_step(&a, m, false)?;
        let nb = rec.solve_step(&b, m, true)?;
        a.push(na);
        b.push(nb);
    }
    Ok(SequencePair { j: rec.source_index().unwrap_or(0), a, b })
}

/// Floating-point continuation of a [`SequencePair`]: entries cover indices
/// `start..start + a.len()`.
#[derive(Clone, Debug)]
pub struct FloatSequences {
    pub start: usize,
    pub prec: u32,
    pub a: Vec<Float>,
    pub b: Vec<Float>,
}

impl FloatSequences {
    pub fn last_index(&self) -> usize {
        self.start + self.a.len() - 1
    }

    pub fn ratio(&self, n: usize) -> Result<Float> {
        let i = n - self.start;
        if self.a[i].is_zero() {
            return Err(Error::ZeroDenominator(n));
        }
        Ok(Float::with_val(self.prec, &self.b[i] / &self.a[i]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rug::ops::Pow;
    use rug::Integer;

    fn zeta3_op() -> ThetaOperator {
        ThetaOperator::from_ints(3, &[&[-5, -27, -51, -34], &[1, 3, 3, 1]]).unwrap()
    }

    fn apery_binomial(n: u32) -> Integer {
        (0..=n)
            .map(|k| {
                let c1 = Integer::from(Integer::binomial_u(n, k));
                let c2 = Integer::from(Integer::binomial_u(n + k, k));
                Integer::from(&c1 * &c1) * Integer::from(&c2 * &c2)
            })
            .sum()
    }

    #[test]
    fn apery_middle_term() {
        let rec = ode_to_recurrence(&zeta3_op(), &Poly::from_ints(&[0, 1])).unwrap();
        let q = rec.shifted_form();
        assert_eq!(q[0], Poly::from_ints(&[8, 12, 6, 1]));
        assert_eq!(q[1], Poly::from_ints(&[-117, -231, -153, -34]));
        assert_eq!(q[2], Poly::from_ints(&[1, 3, 3, 1]));
    }

    #[test]
    fn level_six_weight_three_terms() {
        let op = ThetaOperator::from_ints(2, &[&[2, 9, 25], &[32, 144, 208], &[144, 576, 576]]).unwrap();
        let rec = ode_to_recurrence(&op, &Poly::from_ints(&[0, 1, 8])).unwrap();
        let q = rec.shifted_form();
        assert_eq!(q[1], Poly::from_ints(&[120, 109, 25]));
        assert_eq!(q[2], Poly::from_ints(&[24, 35, 13]).scale(&Rational::from(16)));
        assert_eq!(q[3], Poly::from_ints(&[1, 4, 4]).scale(&Rational::from(144)));
        let s = run_sequences(&rec, 3).unwrap();
        assert_eq!(s.a[1], -2);
        assert_eq!(s.a[2], 10);
        assert_eq!(s.b[2], -7);
    }

    #[test]
    fn trivial_operator() {
        let op = ThetaOperator::new(2, vec![Poly::monomial(2)]).unwrap();
        let rec = ode_to_recurrence(&op, &Poly::zero()).unwrap();
        assert_eq!(rec.terms().len(), 1);
        assert!(matches!(ode_to_recurrence(&op, &Poly::from_ints(&[0, 1])), Err(Error::SourceDegree { .. })));
    }

    #[test]
    fn apery_numbers_and_denominators() {
        let rec = ode_to_recurrence(&zeta3_op(), &Poly::from_ints(&[0, 1])).unwrap();
        let s = run_sequences(&rec, 50).unwrap();
        for n in 0..=50u32 {
            assert_eq!(s.a[n as usize], apery_binomial(n));
        }
        assert_eq!(s.b[2], Rational::from((117, 8)));
        let mut lcm = Integer::from(1);
        for n in 1..=50u32 {
            lcm.lcm_u_mut(n);
            let l3 = lcm.clone().pow(3);
            assert!(l3.is_divisible(s.b[n as usize].denom()), "n = {n}");
        }
    }

    #[test]
    fn level_seven_initial_values() {
        let op = ThetaOperator::from_ints(2, &[&[-2, -14, -30], &[-4, 28, 57], &[0, -14, -28]]).unwrap();
        let rec = ode_to_recurrence(&op, &Poly::from_ints(&[0, 1, -1])).unwrap();
        let s = run_sequences(&rec, 3).unwrap();
        let checks = s.check_stated(&[
            ('a', 1, Rational::from(2)),
            ('a', 2, Rational::from(24)),
            ('b', 2, Rational::from((45, 4))),
            ('b', 1, Rational::from(7)),
        ]);
        assert!(checks[..3].iter().all(|c| c.agrees));
        assert!(!checks[3].agrees);
    }

    #[test]
    fn float_continuation_tracks_exact() {
        let rec = ode_to_recurrence(&zeta3_op(), &Poly::from_ints(&[0, 1])).unwrap();
        let s = run_sequences(&rec, 60).unwrap();
        let head = SequencePair { j: 1, a: s.a[..=40].to_vec(), b: s.b[..=40].to_vec() };
        let ext = rec.extend_float(&head, 60, 2000);
        let scratch = rec.float_from_scratch(60, 2000);
        for n in 41..=60 {
            let exact = Float::with_val(2000, &s.ratio(n).unwrap());
            let e1 = Float::with_val(64, ext.ratio(n).unwrap() - &exact).abs();
            let e2 = Float::with_val(64, scratch.ratio(n).unwrap() - &exact).abs();
            let tiny = |e: &Float| e.is_zero() || e.get_exp().is_some_and(|x| x < -1600);
            assert!(tiny(&e1) && tiny(&e2), "n = {n}");
        }
    }

    proptest! {
        #[test]
        fn generated_terms_satisfy_recurrence(
            p1 in prop::collection::vec(-9i64..10, 1..4),
            p2 in prop::collection::vec(-9i64..10, 1..4),
            s1 in 1i64..6,
        ) {
            let op = ThetaOperator::from_ints(3, &[&p1, &p2]).unwrap();
            let rec = ode_to_recurrence(&op, &Poly::from_ints(&[0, s1])).unwrap();
            let s = run_sequences(&rec, 25).unwrap();
            for m in 1..=25 {
                prop_assert_eq!(rec.residual(&s.a, m, false), 0);
                prop_assert_eq!(rec.residual(&s.b, m, true), 0);
            }
        }
    }
}
