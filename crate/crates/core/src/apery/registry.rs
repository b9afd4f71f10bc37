use std::path::Path;

use rug::float::Constant as MpfrConstant;
use rug::ops::Pow;
use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};

use super::form::SeriesForm;
use crate::analytic::Constant;
use crate::error::{Error, Result};
use crate::lfunc::{detect_root_number, lvalue_smoothed, CoeffStream, LSeriesData};
use crate::operator::ThetaOperator;
use crate::poly::Poly;
use crate::series::EtaQuotient;

/// Environment variable naming an alternate registry directory.
pub const REGISTRY_ENV: &str = "APERY_REGISTRY";

const BUILTIN: [(&str, &str); 7] = [
    ("zeta3", include_str!("../../registry/zeta3.json")),
    ("zeta2", include_str!("../../registry/zeta2.json")),
    ("case_h", include_str!("../../registry/case_h.json")),
    ("l2f7", include_str!("../../registry/l2f7.json")),
    ("case_e", include_str!("../../registry/case_e.json")),
    ("l2f6", include_str!("../../registry/l2f6.json")),
    ("case_beta", include_str!("../../registry/case_beta.json")),
];

/// One registered differential equation with its modular parameterization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub id: String,
    pub title: String,
    pub operator: ThetaOperator,
    /// Source polynomial of the inhomogeneous equation `LB = rhs(t)`.
    pub rhs: Poly,
    pub t_form: SeriesForm,
    pub a_form: SeriesForm,
    pub g_num: Poly,
    pub g_den: Poly,
    /// Closed forms the integrand must match; at least one.
    pub integrand: Vec<SeriesForm>,
    pub singularities: Vec<Singularity>,
    pub expected_limit: LimitTarget,
    pub expected_rate: RateLaw,
    /// `K` in `|b_n/a_n − limit| ≤ K·rate(n)`.
    pub error_constant: f64,
    /// Ratio index used when a run does not pick one.
    #[serde(default)]
    pub default_n: Option<usize>,
    pub stated: Stated,
    #[serde(default)]
    pub analytic_checks: Vec<AnalyticCheck>,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Elliptic,
    Cusp,
}

/// A singular point `t` of the operator and the point of the upper
/// half-plane (or cusp) that `t(τ)` sends there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub t: String,
    /// Numerical value for finite `t`; checked against the operator symbol.
    #[serde(default)]
    pub t_approx: Option<f64>,
    pub kind: PointKind,
    pub tau: String,
}

/// Recurrence and initial values as printed alongside each result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stated {
    /// `Q_0..Q_d` of `Σ Q_i(n) u_{n+d−i} = 0`.
    pub recurrence: Vec<Poly>,
    #[serde(default)]
    pub initial: Vec<StatedValue>,
    /// The printed `b` is this multiple of the registered `b`.
    #[serde(with = "crate::rat", default = "one")]
    pub source_scale: Rational,
}

fn one() -> Rational {
    Rational::from(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatedValue {
    pub sequence: char,
    pub index: usize,
    #[serde(with = "crate::rat")]
    pub value: Rational,
}

/// `coef · constant^power`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstTerm {
    #[serde(with = "crate::rat")]
    pub coef: Rational,
    pub constant: Constant,
    #[serde(default = "one_u32")]
    pub power: u32,
}

fn one_u32() -> u32 {
    1
}

/// The value `b_n/a_n` should converge to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitTarget {
    /// `Σ coef · constant^power`.
    Constants { label: String, terms: Vec<ConstTerm> },
    /// `sign · L(s, f)` for an eta-quotient cusp form, through the smoothed
    /// functional-equation evaluator with the root number detected.
    LValue { label: String, eta: Vec<(u32, i32)>, level: i64, s: u32, sign: i32 },
}

impl LimitTarget {
    pub fn label(&self) -> &str {
        match self {
            LimitTarget::Constants { label, .. } | LimitTarget::LValue { label, .. } => label,
        }
    }

    pub fn eval(&self, digits: u32) -> Result<Float> {
        let prec = crate::analytic::digits_to_bits(digits) + 32;
        match self {
            LimitTarget::Constants { terms, .. } => {
                let mut acc = Float::new(prec);
                for term in terms {
                    let v = Float::with_val(prec + 16, term.constant.eval(prec + 16).pow(term.power));
                    acc += Float::with_val(prec + 16, v * &term.coef);
                }
                Ok(acc)
            }
            LimitTarget::LValue { eta, level, s, sign, .. } => {
                let stream = CoeffStream::eta_quotient(EtaQuotient::new(eta.clone())?)?;
                let data = LSeriesData::untwisted(stream, weight_of(eta)?, Rational::from(*level));
                let eps = detect_root_number(&data, *s, digits)?;
                let v = lvalue_smoothed(&data.with_eps(eps), *s, digits)?;
                Ok(Float::with_val(prec, v.value.real()) * *sign)
            }
        }
    }
}

fn weight_of(eta: &[(u32, i32)]) -> Result<u32> {
    let twice: i64 = eta.iter().map(|&(_, e)| e as i64).sum();
    if twice <= 0 || twice % 2 != 0 {
        return Err(Error::Registry(format!("eta quotient {eta:?} has no positive integral weight")));
    }
    Ok((twice / 2) as u32)
}

/// Convergence law of `b_n/a_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum RateLaw {
    /// `≪ ρⁿ`.
    Geometric { ratio: f64, label: String },
    /// `≪ n^{exponent}`.
    Power { exponent: f64 },
    /// `≪ 1/log n`.
    Loglike,
}

impl RateLaw {
    pub fn tag(&self) -> &'static str {
        match self {
            RateLaw::Geometric { .. } => "geometric",
            RateLaw::Power { .. } => "power",
            RateLaw::Loglike => "loglike",
        }
    }

    /// The rate function `r(n)` with `|b_n/a_n − limit| ≪ r(n)`, as `ln r(n)`.
    pub fn ln_rate(&self, n: usize) -> f64 {
        let x = n as f64;
        match self {
            RateLaw::Geometric { ratio, .. } => x * ratio.ln(),
            RateLaw::Power { exponent } => exponent * x.ln(),
            RateLaw::Loglike => -x.ln().ln(),
        }
    }
}

/// `τ = re + i·√im_sq`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauPoint {
    #[serde(with = "crate::rat")]
    pub re: Rational,
    #[serde(with = "crate::rat")]
    pub im_sq: Rational,
}

impl TauPoint {
    pub fn to_complex(&self, prec: u32) -> Complex {
        let im = Float::with_val(prec, &self.im_sq).sqrt();
        Complex::with_val(prec, (Float::with_val(prec, &self.re), im))
    }

    pub fn label(&self) -> String {
        format!("{} + i*sqrt({})", crate::rat::format(&self.re), crate::rat::format(&self.im_sq))
    }
}

/// How the Eichler integral at a point relates to the limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EichlerRelation {
    /// `E(τ) = limit`.
    Direct,
    /// `τ = iy` is fixed by a Fricke involution under which `E − limit` has
    /// weight `−m` (`m = order − 1`); differentiating the transformation law
    /// at the fixed point gives `limit = E(τ) + (2/m)·2πy·Σ c_n n^{1−order} qⁿ`.
    FrickeFixedPoint,
}

/// Independent analytic confirmations run alongside the limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum AnalyticCheck {
    /// Eichler integral of the first integrand closed form at `tau`.
    Eichler {
        tau: TauPoint,
        relation: EichlerRelation,
        /// Reported without gating the case verdict.
        #[serde(default)]
        advisory: bool,
    },
    /// `Σ χ₃(n) xⁿ/(n²(1 − xⁿ))` at `x = e^{2πiτ}`.
    RamanujanSum { tau: TauPoint },
}

impl AnalyticCheck {
    pub fn is_advisory(&self) -> bool {
        matches!(self, AnalyticCheck::Eichler { advisory: true, .. })
    }
}

impl CaseSpec {
    /// Parse and validate a registry document.
    pub fn from_json(text: &str) -> Result<CaseSpec> {
        let spec: CaseSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Registry(format!("{}: {msg}", self.id)));
        if self.integrand.is_empty() {
            return bad("no integrand closed form".into());
        }
        if self.stated.recurrence.len() != self.operator.degree() + 1 {
            return bad(format!(
                "stated recurrence has {} terms, operator degree is {}",
                self.stated.recurrence.len(),
                self.operator.degree()
            ));
        }
        if self.g_den.coeff(0) == 0 {
            return bad("g_den must not vanish at t = 0".into());
        }
        if self.error_constant.is_nan() || self.error_constant <= 0.0 {
            return bad("error_constant must be positive".into());
        }
        let symbol = self.operator.symbol();
        for s in &self.singularities {
            if let Some(t) = s.t_approx {
                let scale: f64 = symbol.coeffs().iter().map(|c| c.to_f64().abs()).sum::<f64>().max(1.0);
                if symbol.eval_f64(t).abs() > 1e-9 * scale * (1.0 + t.abs()).powi(symbol.degree().unwrap_or(0) as i32) {
                    return bad(format!("singularity t = {} is not a root of the symbol {symbol}", s.t));
                }
            }
        }
        Ok(())
    }
}

/// All registered cases, in canonical order.
#[derive(Clone, Debug)]
pub struct Registry {
    cases: Vec<CaseSpec>,
}

impl Registry {
    /// The built-in registry, or the directory named by `APERY_REGISTRY`.
    pub fn load() -> Result<Registry> {
        match std::env::var_os(REGISTRY_ENV) {
            Some(dir) => Registry::from_dir(Path::new(&dir)),
            None => Registry::builtin(),
        }
    }

    pub fn builtin() -> Result<Registry> {
        let cases = BUILTIN.iter().map(|(_, text)| CaseSpec::from_json(text)).collect::<Result<Vec<_>>>()?;
        Ok(Registry { cases })
    }

    /// Every `*.json` file in `dir`, sorted by file name.
    pub fn from_dir(dir: &Path) -> Result<Registry> {
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut cases = Vec::with_capacity(paths.len());
        for p in paths {
            let text = std::fs::read_to_string(&p)?;
            cases.push(CaseSpec::from_json(&text).map_err(|e| Error::Registry(format!("{}: {e}", p.display())))?);
        }
        if cases.is_empty() {
            return Err(Error::Registry(format!("no case files in {}", dir.display())));
        }
        Ok(Registry { cases })
    }

    pub fn cases(&self) -> &[CaseSpec] {
        &self.cases
    }

    pub fn ids(&self) -> Vec<&str> {
        self.cases.iter().map(|c| c.id.as_str()).collect()
    }

    pub fn get(&self, id: &str) -> Result<&CaseSpec> {
        self.cases.iter().find(|c| c.id == id).ok_or_else(|| Error::UnknownCase(id.to_string()))
    }
}

/// The built-in case `id`.
pub fn builtin_case(id: &str) -> Result<CaseSpec> {
    Registry::builtin()?.get(id).cloned()
}

pub(crate) fn two_pi(prec: u32) -> Float {
    Float::with_val(prec, MpfrConstant::Pi) * 2u32
}
