use rug::float::Constant as MpfrConstant;
use rug::{Complex, Float, Rational};
use serde::Serialize;

use super::abel::{abel_class_sums, abel_regularized_twisted_sum, AbelConfig, AbelModel};
use super::smoothed::{detect_root_number, lvalue_smoothed, LSeriesData, RootOfUnity};
use super::CoeffStream;
use crate::analytic::Constant;
use crate::error::{Error, Result};
use crate::series::LambertShape;

/// One numerical identity check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub identity: String,
    pub lhs: String,
    pub rhs: String,
    pub abs_error: f64,
    pub digits_requested: u32,
    pub method: String,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(identity: impl Into<String>, lhs: Complex, rhs: Complex, tol: f64, digits: u32, method: &str) -> Self {
        let w = lhs.prec().0.max(rhs.prec().0);
        let err = Float::with_val(64, Complex::with_val(w, &lhs - &rhs).abs().real()).to_f64();
        CheckReport {
            identity: identity.into(),
            lhs: fmt_complex(&lhs, digits + 4),
            rhs: fmt_complex(&rhs, digits + 4),
            abs_error: err,
            digits_requested: digits,
            method: method.to_string(),
            pass: err < tol,
        }
    }

    pub fn exact(identity: impl Into<String>, holds: bool, detail: String, method: &str) -> Self {
        CheckReport {
            identity: identity.into(),
            lhs: detail,
            rhs: "0".into(),
            abs_error: if holds { 0.0 } else { 1.0 },
            digits_requested: 0,
            method: method.to_string(),
            pass: holds,
        }
    }
}

pub(crate) fn fmt_float(x: &Float, digits: u32) -> String {
    x.to_string_radix(10, Some(digits as usize))
}

fn fmt_complex(z: &Complex, digits: u32) -> String {
    let im = z.imag();
    let re = fmt_float(z.real(), digits);
    if im.is_zero() || Float::with_val(64, im.abs_ref()) < Float::with_val(64, 10f64.powi(-(digits as i32) - 4)) {
        re
    } else {
        format!("{re} + {}i", fmt_float(im, digits))
    }
}

fn real(x: f64) -> Complex {
    Complex::with_val(64, (x, 0))
}

/// `(label, value at a given precision)`.
pub type ClosedForm = (String, fn(u32) -> Float);

/// A parabolic matrix fixing a cusp, together with the coefficient stream
/// it acts on.
#[derive(Clone, Debug)]
pub struct StabilizerCase {
    pub name: String,
    pub stream: CoeffStream,
    pub weight: u32,
    pub gamma: [i64; 4],
    /// Functional-equation data `(d/c, c²)` for the `α`-twisted series, when
    /// one exists; otherwise `L_α(2)` is computed by Abel regularization.
    pub alpha_fe: Option<(Rational, Rational)>,
    pub abel_model: AbelModel,
    /// Known closed form for the common value, as `(label, value)`.
    pub closed_form: Option<ClosedForm>,
}

fn zeta2_over_5(prec: u32) -> Float {
    Constant::Zeta2.eval(prec) / 5u32
}

fn neg_l2f6(prec: u32) -> Float {
    // -L(2, f) for the level-12 cusp form, through its own Fricke series.
    let data =
        LSeriesData::untwisted(CoeffStream::eta2_cubed_eta6_cubed(), 3, Rational::from(12)).with_eps(RootOfUnity::I);
    let digits = (prec as f64 / std::f64::consts::LOG2_10) as u32;
    let v = lvalue_smoothed(&data, 2, digits).expect("level-12 L-value");
    -Float::with_val(prec, v.value.real())
}

impl StabilizerCase {
    /// `η(2τ)³η(6τ)³` with `γ = (7, −3; 12, −5)` fixing `1/2`.
    pub fn level12() -> Self {
        StabilizerCase {
            name: "eta(2t)^3 eta(6t)^3".into(),
            stream: CoeffStream::eta2_cubed_eta6_cubed(),
            weight: 3,
            gamma: [7, -3, 12, -5],
            alpha_fe: Some((Rational::from((-1, 2)), Rational::from(12))),
            abel_model: AbelModel::Power,
            closed_form: Some(("-L(2,f)".into(), neg_l2f6)),
        }
    }

    /// The weight-3 Eisenstein series `Σ ψ(n) n² qⁿ/(1−qⁿ)` with
    /// `γ = (1, 0; 5, 1)` fixing `0`.
    pub fn level5_eisenstein() -> Self {
        StabilizerCase {
            name: "sum psi(n) n^2 q^n/(1-q^n)".into(),
            stream: CoeffStream::lambert(
                "psi n^2 lambert",
                LambertShape::CharacterDivisor { modulus: 5, weights: vec![0, 1, -2, 2, -1], power: 2 },
            ),
            weight: 3,
            gamma: [1, 0, 5, 1],
            alpha_fe: None,
            abel_model: AbelModel::LogPower,
            closed_form: Some(("zeta(2)/5".into(), zeta2_over_5)),
        }
    }
}

/// Fixed point `α = (a − d)/(2c)` of a parabolic `γ` with `c > 0`.
pub fn parabolic_fixed_point(gamma: [i64; 4]) -> Result<Rational> {
    let [a, b, c, d] = gamma;
    if a * d - b * c != 1 || a + d != 2 || c <= 0 {
        return Err(Error::NotParabolic(gamma));
    }
    Ok(Rational::from((a - d, 2 * c)))
}

/// Check that `α` is fixed by `γ`: `cα² + (d − a)α − b = 0`.
pub fn check_fixed(gamma: [i64; 4], alpha: &Rational) -> Result<()> {
    let [a, b, c, d] = gamma;
    let v = Rational::from(alpha * alpha) * c + Rational::from(alpha * (d - a)) - b;
    if v != 0 {
        return Err(Error::NotFixed { alpha: alpha.clone(), gamma });
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilizerReport {
    pub case: String,
    pub gamma: [i64; 4],
    pub alpha: String,
    pub root_number: RootOfUnity,
    pub l: String,
    pub l_star: String,
    pub l_alpha: String,
    pub max_deviation: f64,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
}

/// Evaluate `L(2)`, `L*(2)` and `L_α(2)` for a stabilizer `γ` of `α` and
/// compare them pairwise (and with a closed form when known).
pub fn verify_stabilizer_identity(
    case: &StabilizerCase,
    alpha: Option<&Rational>,
    digits: u32,
) -> Result<StabilizerReport> {
    let fixed = parabolic_fixed_point(case.gamma)?;
    if let Some(a) = alpha {
        check_fixed(case.gamma, a)?;
    }
    let tol = 10f64.powi(-(digits as i32));
    let data = LSeriesData::from_matrix(case.stream.clone(), case.weight, case.gamma)?;
    let eps = detect_root_number(&data, 2, digits + 10)?;
    let data = data.with_eps(eps);
    let l = lvalue_smoothed(&data, 2, digits + 10)?.value;
    let l_star = lvalue_smoothed(&data.dual_series(), 2, digits + 10)?.value;

    let cfg = AbelConfig::default().with_model(case.abel_model);
    let (l_alpha, alpha_method) = match &case.alpha_fe {
        Some((d_over_c, scale_sq)) => {
            let mut twisted = LSeriesData::untwisted(case.stream.clone(), case.weight, scale_sq.clone());
            twisted.twist_a = fixed.clone();
            twisted.twist_d = d_over_c.clone();
            let e = detect_root_number(&twisted, 2, digits + 10)?;
            (lvalue_smoothed(&twisted.with_eps(e), 2, digits + 10)?.value, "smoothed functional equation")
        }
        None => {
            let v = abel_regularized_twisted_sum(&case.stream, &fixed, 2, &cfg)?;
            (Complex::with_val(64, (v.re.value, v.im.value)), "Abel regularization")
        }
    };
    let abel_l = abel_regularized_twisted_sum(&case.stream, &data.twist_a, 2, &cfg)?;

    let mut checks = vec![
        CheckReport::new("L(2) = L*(2)", l.clone(), l_star.clone(), tol, digits, "smoothed functional equation"),
        CheckReport::new("L(2) = L_alpha(2)", l.clone(), l_alpha.clone(), tol, digits, alpha_method),
        CheckReport::new("L*(2) = L_alpha(2)", l_star.clone(), l_alpha.clone(), tol, digits, alpha_method),
        CheckReport::new(
            "smoothed L(2) = Abel-regularized L(2)",
            l.clone(),
            Complex::with_val(64, (abel_l.re.value, abel_l.im.value)),
            1e-6,
            6,
            "Abel regularization",
        ),
    ];
    let max_deviation = checks[..3].iter().map(|c| c.abs_error).fold(0.0, f64::max);
    if let Some((label, value)) = &case.closed_form {
        let prec = l.prec().0;
        checks.push(CheckReport::new(
            format!("L(2) = {label}"),
            l.clone(),
            Complex::with_val(prec, value(prec)),
            tol,
            digits,
            "closed form",
        ));
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(StabilizerReport {
        case: case.name.clone(),
        gamma: case.gamma,
        alpha: crate::rat::format(&fixed),
        root_number: eps,
        l: fmt_complex(&l, digits + 4),
        l_star: fmt_complex(&l_star, digits + 4),
        l_alpha: fmt_complex(&l_alpha, digits + 4),
        max_deviation,
        checks,
        pass,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Corollary {
    Mod12,
    Mod16,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorollaryReport {
    pub which: Corollary,
    pub l2: String,
    pub root_number: RootOfUnity,
    pub class_sums: Vec<(usize, f64, f64)>,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
}

/// Residue-class identities for `η(2τ)³η(6τ)³` (mod 12) and `η(4τ)⁶` (mod 16):
/// Abel-regularized class sums against `L(2, f)` from the smoothed
/// functional equation.
pub fn corollary_checks(which: Corollary, digits: u32) -> Result<CorollaryReport> {
    let tol = 10f64.powi(-(digits as i32));
    let (stream, scale_sq, modulus) = match which {
        Corollary::Mod12 => (CoeffStream::eta2_cubed_eta6_cubed(), 12, 12),
        Corollary::Mod16 => (CoeffStream::eta4_sixth(), 16, 16),
    };
    let data = LSeriesData::untwisted(stream.clone(), 3, Rational::from(scale_sq));
    let eps = detect_root_number(&data, 2, digits + 10)?;
    let lval = lvalue_smoothed(&data.with_eps(eps), 2, digits + 10)?.value;
    let l = lval.real().to_f64();
    let cfg = AbelConfig::default();
    let sums = abel_class_sums(&stream, modulus, 2, &cfg)?;
    let s = |r: usize| sums[r].value;
    let abel_total: f64 = sums.iter().map(|e| e.value).sum();
    let sqrt3 = 3f64.sqrt();
    let method = "Abel-regularized class sums vs smoothed L(2,f)";
    let mut checks = Vec::new();
    let support = stream.prefix(2000)?;
    match which {
        Corollary::Mod12 => {
            let bad: Vec<usize> =
                (1..=2000).filter(|&n| support[n] != 0 && (n % 2 == 0 || n % 12 == 5 || n % 12 == 11)).collect();
            checks.push(CheckReport::exact(
                "c_n = 0 for even n and n = 5, 11 mod 12 (n <= 2000)",
                bad.is_empty(),
                format!("{} violations", bad.len()),
                "exact",
            ));
            let (l1, l2) = (s(1), s(7));
            checks.push(CheckReport::new(
                "L1 = (2+sqrt3)/3 L(2,f)",
                real(l1),
                real((2.0 + sqrt3) / 3.0 * l),
                tol,
                digits,
                method,
            ));
            checks.push(CheckReport::new(
                "L2 = (2-sqrt3)/3 L(2,f)",
                real(l2),
                real((2.0 - sqrt3) / 3.0 * l),
                tol,
                digits,
                method,
            ));
            checks.push(CheckReport::new(
                "L1 + L2 = (4/3) L(2,f)",
                real(l1 + l2),
                real(4.0 / 3.0 * l),
                tol,
                digits,
                method,
            ));
            checks.push(CheckReport::new(
                "L1 - L2 = (2/sqrt3) L(2,f)",
                real(l1 - l2),
                real(2.0 / sqrt3 * l),
                tol,
                digits,
                method,
            ));
        }
        Corollary::Mod16 => {
            let bad: Vec<usize> = (1..=2000).filter(|&n| support[n] != 0 && n % 4 != 1).collect();
            checks.push(CheckReport::exact(
                "c_n = 0 unless n = 1 mod 4 (n <= 2000)",
                bad.is_empty(),
                format!("{} violations", bad.len()),
                "exact",
            ));
            let pi8 = Float::with_val(64, MpfrConstant::Pi).to_f64() / 8.0;
            checks.push(CheckReport::new(
                "L0 - L2 = cos(pi/8) L(2,f)",
                real(s(1) - s(9)),
                real(pi8.cos() * l),
                tol,
                digits,
                method,
            ));
            checks.push(CheckReport::new(
                "L1 - L3 = -sin(pi/8) L(2,f)",
                real(s(5) - s(13)),
                real(-pi8.sin() * l),
                tol,
                digits,
                method,
            ));
        }
    }
    checks.push(CheckReport::new(
        "Abel L(2,f) = smoothed L(2,f)",
        real(abel_total),
        lval.clone(),
        1e-6,
        6,
        "Abel regularization",
    ));
    let pass = checks.iter().all(|c| c.pass);
    Ok(CorollaryReport {
        which,
        l2: fmt_complex(&lval, digits + 4),
        root_number: eps,
        class_sums: sums
            .iter()
            .enumerate()
            .filter(|(_, e)| e.value != 0.0)
            .map(|(r, e)| (r, e.value, e.error))
            .collect(),
        checks,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabolic_matrices() {
        assert_eq!(parabolic_fixed_point([7, -3, 12, -5]).unwrap(), Rational::from((1, 2)));
        assert_eq!(parabolic_fixed_point([1, 0, 5, 1]).unwrap(), 0);
        assert!(matches!(parabolic_fixed_point([2, 1, 1, 1]), Err(Error::NotParabolic(_))));
        assert!(matches!(parabolic_fixed_point([1, 0, -5, 1]), Err(Error::NotParabolic(_))));
        assert!(check_fixed([7, -3, 12, -5], &Rational::from((1, 2))).is_ok());
        assert!(matches!(check_fixed([7, -3, 12, -5], &Rational::from((1, 3))), Err(Error::NotFixed { .. })));
    }

    #[test]
    fn degenerate_twist_collapses() {
        // γ = (1, 0; 1, 1): a/c = d/c = 1, so every twist is trivial.
        let case =
            StabilizerCase { gamma: [1, 0, 1, 1], alpha_fe: None, closed_form: None, ..StabilizerCase::level12() };
        let data = LSeriesData::from_matrix(case.stream.clone(), 3, case.gamma).unwrap();
        let plain = LSeriesData::untwisted(case.stream.clone(), 3, Rational::from(1));
        let e1 = detect_root_number(&data, 2, 20);
        let e2 = detect_root_number(&plain, 2, 20);
        assert_eq!(e1.is_ok(), e2.is_ok());
        let cfg = AbelConfig::default();
        let a = abel_regularized_twisted_sum(&case.stream, &data.twist_a, 2, &cfg).unwrap();
        let b = abel_regularized_twisted_sum(&case.stream, &Rational::new(), 2, &cfg).unwrap();
        assert!((a.re.value - b.re.value).abs() < 1e-14);
    }
}
