use std::sync::Mutex;
use std::sync::OnceLock;

use rug::float::Constant as MpfrConstant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named classical constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constant {
    Pi,
    Zeta2,
    Zeta3,
    /// `L(2, χ₋₃)` with `χ₋₃ = (·/3)`.
    #[serde(rename = "L2_chi3")]
    L2Chi3,
    /// `L(2, χ₋₄)`, Catalan's constant.
    #[serde(rename = "L2_chi_minus1")]
    L2ChiMinus1,
}

impl Constant {
    pub fn parse(name: &str) -> Result<Constant> {
        serde_json::from_value(serde_json::Value::String(name.to_string()))
            .map_err(|_| Error::InvalidArgument(format!("unknown constant {name:?}")))
    }

    pub fn eval(self, prec: u32) -> Float {
        let w = prec + 32;
        let v = match self {
            Constant::Pi => Float::with_val(w, MpfrConstant::Pi),
            Constant::Zeta2 => {
                let pi = Float::with_val(w, MpfrConstant::Pi);
                Float::with_val(w, pi.square_ref()) / 6u32
            }
            Constant::Zeta3 => hurwitz_zeta(3, &Rational::from(1), w),
            Constant::L2Chi3 => dirichlet_l(2, &[0, 1, -1], w),
            Constant::L2ChiMinus1 => dirichlet_l(2, &[0, 1, 0, -1], w),
        };
        Float::with_val(prec, v)
    }
}

/// `B_0..B_m` exactly, via `Σ_{k=0}^{m} C(m+1, k) B_k = 0`.
fn bernoulli_table(m: usize) -> Vec<Rational> {
    static CACHE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(vec![Rational::from(1)]));
    let mut b = cache.lock().expect("bernoulli cache poisoned");
    while b.len() <= m {
        let n = b.len();
        let mut acc = Rational::new();
        for (k, bk) in b.iter().enumerate() {
            acc += Rational::from(Integer::binomial_u(n as u32 + 1, k as u32)) * bk;
        }
        b.push(-acc / (n as u32 + 1));
    }
    b[..=m].to_vec()
}

/// `ζ(s, a) = Σ_{n≥0} (n + a)^{−s}` for integer `s ≥ 2` and rational `a > 0`,
/// by Euler–Maclaurin with `M` direct terms and `J` Bernoulli corrections.
/// The remainder is below the first omitted correction, about
/// `(πe)^{−2J}` for `M ≈ J`.
pub fn hurwitz_zeta(s: u32, a: &Rational, prec: u32) -> Float {
    assert!(s >= 2 && *a > 0, "hurwitz_zeta needs s ≥ 2 and a > 0");
    let w = prec + 32;
    let j_max = (prec as usize) / 6 + 8;
    let m = j_max + 8;
    let a = Float::with_val(w, a);
    let mut sum = Float::new(w);
    for n in 0..m {
        let x = Float::with_val(w, &a + n as u32);
        sum += x.pow(-(s as i32));
    }
    let x = Float::with_val(w, &a + m as u32);
    // (M+a)^{1−s}/(s−1) + (M+a)^{−s}/2
    let xs = Float::with_val(w, (&x).pow(-(s as i32)));
    sum += Float::with_val(w, &xs * &x) / (s - 1);
    sum += Float::with_val(w, &xs / 2u32);
    let bern = bernoulli_table(2 * j_max);
    let x2 = Float::with_val(w, x.square_ref());
    // term_j = B_{2j}/(2j)! · s(s+1)…(s+2j−2) · x^{−s−2j+1}
    let mut rising = Float::with_val(w, s); // s(s+1)…(s+2j−2) / (2j)!
    rising /= 2u32;
    let mut pw = Float::with_val(w, &xs / &x); // x^{−s−1}
    for j in 1..=j_max {
        let b = Float::with_val(w, &bern[2 * j]);
        sum += Float::with_val(w, &b * &rising) * &pw;
        let k = 2 * j as u32;
        rising *= (s + k - 1) * (s + k);
        rising /= (k + 1) * (k + 2);
        pw /= &x2;
    }
    Float::with_val(prec, sum)
}

/// `L(s, χ) = m^{−s} Σ_{r=1}^{m} χ(r) ζ(s, r/m)` for a function `χ` periodic
/// mod `m = chi.len()`, given as `chi[r]` for `r = 0..m`.
pub fn dirichlet_l(s: u32, chi: &[i64], prec: u32) -> Float {
    let m = chi.len() as u32;
    let w = prec + 16;
    let mut acc = Float::new(w);
    for r in 1..=m {
        let c = chi[(r % m) as usize];
        if c == 0 {
            continue;
        }
        acc += hurwitz_zeta(s, &Rational::from((r, m)), w) * c;
    }
    let scale = Float::with_val(w, m).pow(-(s as i32));
    Float::with_val(prec, acc * scale)
}
