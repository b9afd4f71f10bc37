use std::fmt;

use rug::float::Constant as MpfrConstant;
use rug::{Complex, Float, Integer, Rational};
use serde::{Serialize, Serializer};

use super::CoeffStream;
use crate::analytic::digits_to_bits;
use crate::error::{Error, Result};

/// `e^{2πi k/24}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootOfUnity(pub u32);

impl std::ops::Mul for RootOfUnity {
    type Output = RootOfUnity;

    // Exponents add.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, other: RootOfUnity) -> RootOfUnity {
        RootOfUnity::new(self.0 as i64 + other.0 as i64)
    }
}

impl RootOfUnity {
    pub const ONE: RootOfUnity = RootOfUnity(0);
    pub const I: RootOfUnity = RootOfUnity(6);
    pub const MINUS_ONE: RootOfUnity = RootOfUnity(12);
    pub const MINUS_I: RootOfUnity = RootOfUnity(18);

    pub fn new(k: i64) -> Self {
        RootOfUnity(k.rem_euclid(24) as u32)
    }

    pub fn inv(self) -> Self {
        Self::new(-(self.0 as i64))
    }

    /// `i^k`.
    pub fn i_pow(k: u32) -> Self {
        Self::new(6 * k as i64)
    }

    pub fn to_complex(self, prec: u32) -> Complex {
        let angle = Float::with_val(prec + 16, MpfrConstant::Pi) * self.0 / 12u32;
        let (s, c) = angle.sin_cos(Float::new(prec + 16));
        Complex::with_val(prec, (c, s))
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => write!(f, "1"),
            6 => write!(f, "i"),
            12 => write!(f, "-1"),
            18 => write!(f, "-i"),
            k => write!(f, "exp(2πi·{k}/24)"),
        }
    }
}

impl Serialize for RootOfUnity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Data of a twisted weight-`k` L-series `L(s) = Σ c_n e^{2πin·a/c} n^{−s}`
/// with functional equation
/// `(2π/c)^{−s}Γ(s)L(s) = i^k ε (2π/c)^{s−k}Γ(k−s)L*(k−s)`,
/// `L*(s) = Σ c*_n e^{−2πin·d/c} n^{−s}`.
#[derive(Clone, Debug)]
pub struct LSeriesData {
    pub coeffs: CoeffStream,
    /// `None` when self-dual.
    pub dual: Option<CoeffStream>,
    pub weight: u32,
    /// `c²` (rational, so that `c = √7` is representable).
    pub scale_sq: Rational,
    pub eps: Option<RootOfUnity>,
    /// `a/c`.
    pub twist_a: Rational,
    /// `d/c`.
    pub twist_d: Rational,
}

impl LSeriesData {
    pub fn untwisted(coeffs: CoeffStream, weight: u32, scale_sq: Rational) -> Self {
        LSeriesData {
            coeffs,
            dual: None,
            weight,
            scale_sq,
            eps: None,
            twist_a: Rational::new(),
            twist_d: Rational::new(),
        }
    }

    /// Twist data from a matrix `(a, b; c, d)`: phases `a/c`, `d/c`, scale `c`.
    pub fn from_matrix(coeffs: CoeffStream, weight: u32, gamma: [i64; 4]) -> Result<Self> {
        let [a, _, c, d] = gamma;
        if c <= 0 {
            return Err(Error::InvalidArgument("matrix entry c must be positive".into()));
        }
        Ok(LSeriesData {
            coeffs,
            dual: None,
            weight,
            scale_sq: Rational::from(c * c),
            eps: None,
            twist_a: Rational::from((a, c)),
            twist_d: Rational::from((d, c)),
        })
    }

    pub fn with_eps(mut self, eps: RootOfUnity) -> Self {
        self.eps = Some(eps);
        self
    }

    /// Parameters of `L*`, whose dual is `L` again: `a' = −d/c`, `d' = −a/c`,
    /// `ε' = ε^{−1}(−1)^k`.
    pub fn dual_series(&self) -> LSeriesData {
        LSeriesData {
            coeffs: self.dual.clone().unwrap_or_else(|| self.coeffs.clone()),
            dual: self.dual.as_ref().map(|_| self.coeffs.clone()),
            weight: self.weight,
            scale_sq: self.scale_sq.clone(),
            eps: self.eps.map(|e| e.inv() * RootOfUnity::new(12 * self.weight as i64)),
            twist_a: Rational::from(-&self.twist_d),
            twist_d: Rational::from(-&self.twist_a),
        }
    }

    fn dual_stream(&self) -> &CoeffStream {
        self.dual.as_ref().unwrap_or(&self.coeffs)
    }
}

/// Value of a smoothed L-series evaluation.
#[derive(Clone, Debug)]
pub struct LValue {
    pub value: Complex,
    /// Split-point discrepancy at the probe points (see [`fe_residual`]).
    pub residual: f64,
    pub terms: usize,
}

/// Split points: the symmetric point `y = 1` and a second point used only
/// to measure the functional-equation residual and detect root numbers.
const SPLIT_PROBE: (i64, i64) = (5, 4);

/// `Γ(m, x) = (m−1)! e^{−x} Σ_{j<m} x^j/j!` for integer `m ≥ 1`.
fn upper_gamma_int(m: u32, x: &Float) -> Float {
    let prec = x.prec();
    let mut term = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 1);
    for j in 1..m {
        term *= x;
        term /= j;
        sum += &term;
    }
    let fact = Float::with_val(prec, Integer::from(Integer::factorial(m.saturating_sub(1))));
    let e = Float::with_val(prec, -x).exp();
    sum * fact * e
}

/// `e^{2πi n·p/q}` for `n mod q`, tabulated.
fn phase_table(r: &Rational, prec: u32) -> Vec<Complex> {
    let q = r.denom().to_u32().expect("phase denominator fits u32");
    let p = Integer::from(r.numer().mod_u(q));
    let p = p.to_u32().expect("reduced numerator fits u32");
    let two_pi = Float::with_val(prec + 16, MpfrConstant::Pi) * 2u32;
    (0..q)
        .map(|n| {
            let k = (n as u64 * p as u64) % q as u64;
            let ang = Float::with_val(prec + 16, &two_pi * k) / q;
            let (s, c) = ang.sin_cos(Float::new(prec + 16));
            Complex::with_val(prec, (c, s))
        })
        .collect()
}

/// Number of terms so that both sums are below `10^{−digits}` past the cut,
/// with `|c_n| ≤ C n^k` checked on the materialized prefix.
fn terms_needed(data: &LSeriesData, y: f64, digits: u32) -> Result<usize> {
    let c = data.scale_sq.to_f64().sqrt();
    let m = y.min(1.0 / y);
    let k = data.weight as f64;
    let goal = digits as f64 * std::f64::consts::LN_10 + 20.0;
    let mut n = 16usize;
    loop {
        // log of C n^k e^{−2πnm/c} with C ≤ n (generous for weight ≤ 3).
        let logt = (k + 1.0) * (n as f64).ln() - 2.0 * std::f64::consts::PI * n as f64 * m / c;
        if -logt > goal {
            break;
        }
        n += 16;
    }
    for s in [&data.coeffs, data.dual_stream()] {
        let p = s.prefix(n)?;
        if let Some((i, _)) =
            p.iter().enumerate().skip(1).find(|(i, v)| (v.unsigned_abs() as f64) > (*i as f64).powf(k + 1.0))
        {
            return Err(Error::InvalidArgument(format!("coefficient c_{i} exceeds the assumed growth n^{}", k + 1.0)));
        }
    }
    Ok(n)
}

/// `(I₁, I₂)` with `Λ(s) = I₁ + i^k ε I₂` at split point `y`.
fn split_parts(data: &LSeriesData, s: u32, y: &Float, n: usize, prec: u32) -> Result<(Complex, Complex)> {
    let k = data.weight;
    let w = prec + 32;
    let c = Float::with_val(w, &data.scale_sq).sqrt();
    let two_pi_over_c = Float::with_val(w, MpfrConstant::Pi) * 2u32 / &c;
    let ph1 = phase_table(&data.twist_a, w);
    let ph2 = phase_table(&Rational::from(-&data.twist_d), w);
    let a = data.coeffs.prefix(n)?;
    let b = data.dual_stream().prefix(n)?;
    let mut i1 = Complex::new(w);
    let mut i2 = Complex::new(w);
    let y_inv = Float::with_val(w, y.recip_ref());
    for m in 1..=n {
        let x = Float::with_val(w, &two_pi_over_c * m as u32);
        if a[m] != 0 {
            let g = upper_gamma_int(s, &Float::with_val(w, &x * y));
            let t = g * a[m] / Float::with_val(w, (&x).pow(s));
            i1 += Complex::with_val(w, &ph1[m % ph1.len()] * t);
        }
        if b[m] != 0 && k > s {
            let g = upper_gamma_int(k - s, &Float::with_val(w, &x * &y_inv));
            let t = g * b[m] / Float::with_val(w, (&x).pow(k - s));
            i2 += Complex::with_val(w, &ph2[m % ph2.len()] * t);
        }
    }
    Ok((i1, i2))
}

use rug::ops::Pow;

fn to_l(data: &LSeriesData, s: u32, lambda: Complex, prec: u32) -> Complex {
    let w = lambda.prec().0;
    let c = Float::with_val(w, &data.scale_sq).sqrt();
    let factor = (Float::with_val(w, MpfrConstant::Pi) * 2u32 / c).pow(s)
        / Float::with_val(w, Integer::from(Integer::factorial(s - 1)));
    Complex::with_val(prec, lambda * factor)
}

fn l_at_split(data: &LSeriesData, eps: RootOfUnity, s: u32, y: &Float, n: usize, prec: u32) -> Result<Complex> {
    let (i1, i2) = split_parts(data, s, y, n, prec)?;
    let w = i1.prec().0;
    let coef = (RootOfUnity::i_pow(data.weight) * eps).to_complex(w);
    let lambda = i1 + Complex::with_val(w, coef * i2);
    Ok(to_l(data, s, lambda, prec))
}

/// Largest split-point discrepancy `|L_{y=1}(s) − L_{y=5/4}(s)|` over the
/// probe points `s = 1, 2` (restricted to `0 < s < k`).
pub fn fe_residual(data: &LSeriesData, digits: u32) -> Result<f64> {
    let eps = data.eps.ok_or_else(|| Error::InvalidArgument("root number not set".into()))?;
    let prec = digits_to_bits(digits) + 64;
    let y1 = Float::with_val(prec, 1);
    let y2 = Float::with_val(prec, SPLIT_PROBE.0) / SPLIT_PROBE.1;
    let n = terms_needed(data, y2.to_f64(), digits + 5)?;
    let mut worst = 0.0f64;
    for s in [1u32, 2] {
        if s == 0 || s >= data.weight {
            continue;
        }
        let a = l_at_split(data, eps, s, &y1, n, prec)?;
        let b = l_at_split(data, eps, s, &y2, n, prec)?;
        let d = Float::with_val(64, Complex::with_val(prec, a - b).abs().real());
        worst = worst.max(d.to_f64());
    }
    Ok(worst)
}

/// `L(s)` by the two-sum split of the completed integral at `y = 1`, with
/// incomplete gammas at integer arguments in closed form. The root number
/// is checked by [`fe_residual`] against `10^{−(digits−5)}`.
pub fn lvalue_smoothed(data: &LSeriesData, s: u32, digits: u32) -> Result<LValue> {
    if s == 0 || s >= data.weight {
        return Err(Error::InvalidArgument(format!(
            "s = {s} must lie strictly between 0 and the weight {}",
            data.weight
        )));
    }
    let eps = data.eps.ok_or_else(|| Error::InvalidArgument("root number not set".into()))?;
    let prec = digits_to_bits(digits) + 64;
    let n = terms_needed(data, 1.0, digits + 5)?;
    let value = l_at_split(data, eps, s, &Float::with_val(prec, 1), n, prec)?;
    let residual = fe_residual(data, digits)?;
    let tolerance = 10f64.powi(-(digits as i32 - 5));
    if residual > tolerance {
        return Err(Error::FunctionalEquation { residual, tolerance });
    }
    Ok(LValue { value, residual, terms: n })
}

/// Solve the split-point independence for `ε`:
/// `ε = (I₁(y₂) − I₁(1)) / (i^k (I₂(1) − I₂(y₂)))`, then snap to the nearest
/// 24th root of unity within `10^{−10}`.
pub fn detect_root_number(data: &LSeriesData, s_probe: u32, digits: u32) -> Result<RootOfUnity> {
    let prec = digits_to_bits(digits.max(20)) + 64;
    let y1 = Float::with_val(prec, 1);
    let y2 = Float::with_val(prec, SPLIT_PROBE.0) / SPLIT_PROBE.1;
    let n = terms_needed(data, y2.to_f64(), digits.max(20) + 5)?;
    let (a1, b1) = split_parts(data, s_probe, &y1, n, prec)?;
    let (a2, b2) = split_parts(data, s_probe, &y2, n, prec)?;
    let w = a1.prec().0;
    let num = Complex::with_val(w, &a2 - &a1);
    let den = Complex::with_val(w, &b1 - &b2) * RootOfUnity::i_pow(data.weight).to_complex(w);
    if Float::with_val(64, den.abs_ref()) == 0 {
        return Err(Error::RootNumber { distance: f64::INFINITY });
    }
    let eps = Complex::with_val(w, num / den);
    let (re, im) = (eps.real().to_f64(), eps.imag().to_f64());
    let k = (im.atan2(re) / (2.0 * std::f64::consts::PI) * 24.0).round() as i64;
    let snapped = RootOfUnity::new(k);
    let dist = Float::with_val(64, Complex::with_val(w, eps - snapped.to_complex(w)).abs().real()).to_f64();
    if dist > 1e-10 {
        return Err(Error::RootNumber { distance: dist });
    }
    Ok(snapped)
}
