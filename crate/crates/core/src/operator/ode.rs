use rug::ops::Pow;
use rug::Rational;
use serde::Serialize;

use super::ThetaOperator;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::series::QSeries;

/// Result of applying an operator to a `q`-parameterized function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OdeReport {
    /// Certified order: the residual vanishes through `q^order`.
    pub order: usize,
    pub verified: bool,
    /// Exponent of the first nonzero residual coefficient, if any.
    pub first_failure: Option<String>,
}

impl OdeReport {
    fn from_residual(res: &QSeries) -> OdeReport {
        let first = res
            .coeffs()
            .iter()
            .position(|c| *c != 0)
            .map(|i| crate::rat::format(&Rational::from(res.lead_exp() + i as i64)));
        let order = res.known_through().numer().to_usize().unwrap_or(0);
        OdeReport { order, verified: first.is_none(), first_failure: first }
    }
}

/// `t / θ_q t`, so that `θ_t F = θ_q F · t/θ_q t`.
fn theta_ratio(t: &QSeries) -> Result<QSeries> {
    let dt = t.theta_q();
    if *dt.leading_coeff() == 0 {
        return Err(Error::DegenerateUniformizer);
    }
    t.div(&dt)
}

/// `L F` with `F` and `t` given as `q`-series.
fn apply(op: &ThetaOperator, t: &QSeries, f: &QSeries) -> Result<QSeries> {
    let ratio = theta_ratio(t)?;
    let n = f.trunc_order().min(ratio.trunc_order());
    let mut powers = vec![f.clone().truncate(n)];
    for _ in 0..op.order() {
        let next = powers.last().expect("nonempty").theta_q().mul(&ratio);
        powers.push(next);
    }
    let mut acc = QSeries::zero(n);
    let mut tj = QSeries::one(n);
    for p in op.polys() {
        let mut inner = QSeries::zero(n);
        for (k, c) in p.coeffs().iter().enumerate() {
            if *c != 0 {
                inner = inner.add(&powers[k].scale(c))?;
            }
        }
        acc = acc.add(&tj.mul(&inner))?;
        tj = tj.mul(t);
    }
    Ok(acc)
}

/// Certify `L A = O(q^{N+1})` exactly.
pub fn verify_ode(op: &ThetaOperator, t: &QSeries, a: &QSeries, n: usize) -> Result<OdeReport> {
    if *t.lead_exp() != 1 {
        return Err(Error::InvalidArgument("t must start at q^1".into()));
    }
    if *a.lead_exp() != 0 || *a.leading_coeff() != 1 {
        return Err(Error::InvalidArgument("A must have constant term 1".into()));
    }
    let t = t.clone().truncate(n);
    let a = a.clone().truncate(n);
    Ok(OdeReport::from_residual(&apply(op, &t, &a)?))
}

/// `Σ c_n qⁿ / n^order` for `f = Σ c_n qⁿ` with zero constant term.
pub fn eichler_generating(f: &QSeries, order: usize) -> Result<QSeries> {
    if *f.lead_exp() != 0 {
        return Err(Error::InvalidArgument("integrand must be given from q^0".into()));
    }
    if *f.leading_coeff() != 0 {
        return Err(Error::NonzeroConstantTerm(f.leading_coeff().clone()));
    }
    let coeffs = f
        .coeffs()
        .iter()
        .enumerate()
        .map(
            |(i, c)| {
                if i == 0 {
                    Rational::new()
                } else {
                    Rational::from(c / rug::Integer::from(i).pow(order as u32))
                }
            },
        )
        .collect();
    Ok(QSeries::new(Rational::new(), coeffs))
}

/// Certify `L(A · Σ c_n qⁿ/n^order) = rhs(t) + O(q^{N+1})`: the normalized
/// particular solution built from the integrand solves the inhomogeneous
/// equation.
pub fn verify_inhomogeneous(
    op: &ThetaOperator,
    t: &QSeries,
    a: &QSeries,
    f: &QSeries,
    rhs: &Poly,
    n: usize,
) -> Result<OdeReport> {
    let e = eichler_generating(f, op.order())?;
    let t = t.clone().truncate(n);
    let b = a.clone().truncate(n).mul(&e);
    let lb = apply(op, &t, &b)?;
    let src = t.compose_poly(rhs)?;
    Ok(OdeReport::from_residual(&lb.sub(&src)?))
}

/// `f = (θ_q t / t)^order · g_num(t) / (g_den(t)·A)` through `q^N`.
pub fn build_integrand(
    t: &QSeries,
    a: &QSeries,
    g_num: &Poly,
    g_den: &Poly,
    order: usize,
    n: usize,
) -> Result<QSeries> {
    let t = t.clone().truncate(n);
    let a = a.clone().truncate(n);
    let lift = t.theta_q().div(&t)?;
    let num = t.compose_poly(g_num)?;
    let den = t.compose_poly(g_den)?;
    if *den.leading_coeff() == 0 {
        return Err(Error::ZeroLeadingCoefficient);
    }
    let f = lift.pow(order as i64)?.mul(&num).div(&den.mul(&a))?;
    if *f.leading_coeff() != 0 {
        return Err(Error::NonzeroConstantTerm(f.leading_coeff().clone()));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{Eisenstein, EisensteinCombination, EtaQuotient};

    fn zeta3_pair(n: usize) -> (ThetaOperator, QSeries, QSeries) {
        let op = ThetaOperator::from_ints(3, &[&[-5, -27, -51, -34], &[1, 3, 3, 1]]).unwrap();
        let t = EtaQuotient::new(vec![(1, 12), (6, 12), (2, -12), (3, -12)]).unwrap().expand(n);
        let a = EtaQuotient::new(vec![(2, 7), (3, 7), (1, -5), (6, -5)]).unwrap().expand(n);
        (op, t, a)
    }

    #[test]
    fn trivial_operator_kills_constant() {
        let op = ThetaOperator::from_ints(1, &[]).unwrap();
        let r = verify_ode(&op, &QSeries::q(10), &QSeries::one(10), 10).unwrap();
        assert!(r.verified);
        assert_eq!(r.order, 10);
    }

    #[test]
    fn level_six_parameterization() {
        let (op, t, a) = zeta3_pair(60);
        let r = verify_ode(&op, &t, &a, 60).unwrap();
        assert!(r.verified, "{r:?}");
        let f = build_integrand(&t, &a, &Poly::from_ints(&[0, 1]), &Poly::from_ints(&[1, -34, 1]), 3, 60).unwrap();
        let closed = EisensteinCombination {
            kind: Eisenstein::E4,
            terms: vec![(1, 1), (2, -28), (3, 63), (6, -36)],
            scale: Rational::from((1, 240)),
        }
        .expand(60)
        .unwrap();
        assert_eq!(f, closed);
        let lift = EisensteinCombination {
            kind: Eisenstein::E2,
            terms: vec![(1, 1), (2, -2), (3, -3), (6, 6)],
            scale: Rational::from((1, 2)),
        }
        .expand(60)
        .unwrap();
        assert_eq!(t.theta_q().div(&t).unwrap(), lift);
        let inh = verify_inhomogeneous(&op, &t, &a, &f, &Poly::from_ints(&[0, 1]), 60).unwrap();
        assert!(inh.verified, "{inh:?}");
    }

    #[test]
    fn perturbed_operator_fails_at_low_order() {
        let (_, t, a) = zeta3_pair(20);
        let bad = ThetaOperator::from_ints(3, &[&[-5, -27, -51, -34], &[1, 3, 3, 2]]).unwrap();
        let r = verify_ode(&bad, &t, &a, 20).unwrap();
        assert!(!r.verified);
        assert_eq!(r.first_failure.as_deref(), Some("3"));
    }

    #[test]
    fn constant_uniformizer_is_degenerate() {
        let op = ThetaOperator::from_ints(1, &[]).unwrap();
        let t = QSeries::one(3);
        assert!(matches!(apply(&op, &t, &QSeries::one(3)), Err(Error::DegenerateUniformizer)));
    }
}
