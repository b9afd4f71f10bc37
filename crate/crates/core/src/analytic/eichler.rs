use rug::float::Constant as MpfrConstant;
use rug::{Complex, Float, Integer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::series::QSeries;

/// A value with a certified bound on its series-truncation error. Rounding
/// error is controlled by guard bits and not tracked.
#[derive(Clone, Debug)]
pub struct Certified {
    pub value: Complex,
    pub bound: Float,
    pub terms: usize,
}

impl Certified {
    pub fn re(&self) -> &Float {
        self.value.real()
    }

    pub fn im(&self) -> &Float {
        self.value.imag()
    }
}

/// `Σ_{n≥1} c_n qⁿ / n^order` with `|c_n| ≤ C·n^σ` on every materialized
/// coefficient.
#[derive(Clone, Debug, Serialize)]
pub struct EichlerSeries {
    #[serde(skip)]
    coeffs: Vec<Integer>,
    pub order: u32,
    pub bound_c: f64,
    pub bound_sigma: u32,
}

impl EichlerSeries {
    /// `coeffs[n]` is `c_n`; `coeffs[0]` is ignored. The bound defaults to
    /// `σ = order` and the smallest `C` valid for the given prefix.
    pub fn new(coeffs: Vec<Integer>, order: u32) -> Self {
        let mut s = EichlerSeries { coeffs, order, bound_c: 0.0, bound_sigma: order };
        s.refresh_bound();
        s
    }

    /// From an integral `q`-series starting at `q^0`.
    pub fn from_qseries(f: &QSeries, order: u32) -> Result<Self> {
        if *f.lead_exp() != 0 {
            return Err(Error::InvalidArgument("series must be given from q^0".into()));
        }
        let coeffs =
            f.integer_coeffs().ok_or_else(|| Error::InvalidArgument("coefficients must be integral".into()))?;
        Ok(Self::new(coeffs, order))
    }

    /// The same coefficients with a different power of `n` in the denominator.
    pub fn with_order(&self, order: u32) -> Self {
        let mut s = self.clone();
        s.order = order;
        s
    }

    pub fn len(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    /// Append coefficients and re-verify the bound.
    pub fn extend(&mut self, more: impl IntoIterator<Item = Integer>) {
        self.coeffs.extend(more);
        self.refresh_bound();
    }

    fn refresh_bound(&mut self) {
        let sigma = self.bound_sigma as i32;
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| c.to_f64().abs() / (n as f64).powi(sigma))
            .fold(0.0f64, f64::max);
        // Pad for rounding in the f64 quotient.
        self.bound_c = c * (1.0 + 1e-12);
    }

    /// Tail bound `Σ_{n>M} C n^{σ−order} r^n` for `r = |q| < 1`.
    fn tail(&self, m: usize, r: f64) -> f64 {
        let p = self.bound_sigma as f64 - self.order as f64;
        let n1 = (m + 1) as f64;
        let first = self.bound_c * n1.max(1.0).powf(p.max(0.0)) * r.powf(n1);
        let growth = if p > 0.0 { ((n1 + 1.0) / n1).powf(p) } else { 1.0 };
        let ratio = r * growth;
        if ratio >= 1.0 {
            f64::INFINITY
        } else {
            first / (1.0 - ratio)
        }
    }
}

/// `q = e^{2πiτ}` at `prec` bits, via real `exp`, `cos`, `sin`.
pub fn nome(tau: &Complex, prec: u32) -> Complex {
    let w = prec + 32;
    let two_pi = Float::with_val(w, MpfrConstant::Pi) * 2u32;
    let modulus = Float::with_val(w, -(Float::with_val(w, tau.imag() * &two_pi))).exp();
    let arg = Float::with_val(w, tau.real() * &two_pi);
    let (s, c) = arg.sin_cos(Float::new(w));
    Complex::with_val(prec, (Float::with_val(w, &modulus * &c), Float::with_val(w, &modulus * &s)))
}

/// `Σ_{n≥1} c_n qⁿ / n^order` at `q = e^{2πiτ}`, with the truncation chosen
/// so that the certified tail is below `10^{−digits}`.
pub fn eichler_eval(e: &EichlerSeries, tau: &Complex, digits: u32) -> Result<Certified> {
    if *tau.imag() <= 0 {
        return Err(Error::NotInUpperHalfPlane);
    }
    let prec = tau.prec().0.max(digits_to_bits(digits) + 16);
    let q = nome(tau, prec + 16);
    let r = Float::with_val(64, q.abs_ref()).to_f64();
    let target = 10f64.powi(-(digits as i32));
    let m = (1..=e.len())
        .find(|&m| e.tail(m, r) <= target)
        .or_else(|| (r == 0.0).then_some(0))
        .ok_or(Error::StreamExhausted { needed: terms_needed(e, r, target), available: e.len() })?;
    let w = prec + 32;
    let mut acc = Complex::new(w);
    let mut qn = Complex::with_val(w, 1);
    for n in 1..=m {
        qn *= &q;
        let c = &e.coeffs[n];
        if *c == 0 {
            continue;
        }
        let denom = Integer::from(n).pow(e.order);
        let coef = Float::with_val(w, c) / Float::with_val(w, &denom);
        acc += Complex::with_val(w, &qn * &coef);
    }
    Ok(Certified { value: Complex::with_val(prec, acc), bound: Float::with_val(64, e.tail(m, r)), terms: m })
}

use rug::ops::Pow;

/// Evaluate at several points, in parallel when enabled.
pub fn eichler_eval_many(exec: Exec, e: &EichlerSeries, taus: Vec<Complex>, digits: u32) -> Vec<Result<Certified>> {
    par::map(exec, taus, |t| eichler_eval(e, &t, digits))
}

fn terms_needed(e: &EichlerSeries, r: f64, target: f64) -> usize {
    if r >= 1.0 {
        return usize::MAX;
    }
    let mut m = e.len().max(1);
    while e.tail(m, r) > target && m < usize::MAX / 2 {
        m *= 2;
    }
    m
}

pub fn digits_to_bits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32
}

/// `Σ_{n≥1} χ₋₃(n) xⁿ / (n²(1 − xⁿ))` with the tail bounded by
/// `|x|^{M+1} / ((M+1)²(1−|x|)²)`.
pub fn ramanujan_sum(x: &Complex, digits: u32) -> Result<Certified> {
    let r = Float::with_val(64, x.abs_ref()).to_f64();
    if r >= 1.0 {
        return Err(Error::OutsideUnitDisc);
    }
    let prec = x.prec().0.max(digits_to_bits(digits) + 16);
    let w = prec + 32;
    let target = 10f64.powi(-(digits as i32) - 2);
    let tail = |m: usize| {
        let n1 = (m + 1) as f64;
        r.powf(n1) / (n1 * n1 * (1.0 - r) * (1.0 - r))
    };
    let mut m = 1usize;
    while r > 0.0 && tail(m) > target {
        m += 1;
    }
    let mut acc = Complex::new(w);
    let mut xn = Complex::with_val(w, 1);
    for n in 1..=m {
        xn *= x;
        let chi = match n % 3 {
            1 => 1,
            2 => -1,
            _ => continue,
        };
        let denom = Complex::with_val(w, 1 - Complex::with_val(w, &xn)) * (n * n) as u64;
        let term = Complex::with_val(w, &xn / &denom);
        if chi > 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(Certified { value: Complex::with_val(prec, acc), bound: Float::with_val(64, tail(m)), terms: m })
}
