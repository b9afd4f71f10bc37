use rug::{Complex, Float, Rational};
use serde::Serialize;

use super::limit::{estimate_limit, exact_sequences, FitOutcome, LimitEstimate};
use super::registry::{two_pi, AnalyticCheck, CaseSpec, EichlerRelation, RateLaw, Registry};
use crate::analytic::{digits_to_bits, eichler_eval, nome, ramanujan_sum, EichlerSeries};
use crate::error::Result;
use crate::lfunc::CheckReport;
use crate::operator::{build_integrand, verify_inhomogeneous, verify_ode, InitialValueCheck, SequencePair};
use crate::par::{self, Exec};
use crate::poly::Poly;
use crate::series::{QSeries, DEFAULT_ORDER};

/// Fitted power-law exponent must land here for `n^{−1/3}` cases.
pub const POWER_EXPONENT_RANGE: (f64, f64) = (-0.40, -0.26);
/// Relative tolerance on a fitted geometric ratio.
pub const GEOMETRIC_RATIO_TOLERANCE: f64 = 0.05;
/// Agreement required of the loglike extrapolation.
pub const LOGLIKE_TOLERANCE: f64 = 1e-3;
/// Bound on `max/min` of `|b_n/a_n − limit|·log n` over the fit window.
pub const LOGLIKE_SPREAD: f64 = 3.0;

/// Knobs of one case run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Certification order of the `q`-series identities.
    pub series_order: usize,
    /// Index `N` of the ratio; `None` takes the case default.
    pub n: Option<usize>,
    pub prec_bits: u32,
    pub digits: u32,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { series_order: DEFAULT_ORDER, n: None, prec_bits: 256, digits: 25 }
    }
}

/// The case's registered index, else one per rate law: enough for the
/// geometric cases to reach 40 digits and for the slow cases to show their rate.
pub fn default_n(case: &CaseSpec) -> usize {
    if let Some(n) = case.default_n {
        return n;
    }
    match &case.expected_rate {
        RateLaw::Geometric { ratio, .. } => ((40.0 * std::f64::consts::LN_10) / -ratio.ln()).ceil().max(30.0) as usize,
        RateLaw::Power { .. } => 4000,
        RateLaw::Loglike => 10_000,
    }
}

/// One term of the printed recurrence next to the ODE-derived one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermAudit {
    /// `i` in `Q_i(n) u_{n+d−i}`.
    pub index: usize,
    pub stated: String,
    pub derived: String,
    pub agrees: bool,
    /// `derived / stated` when the two differ by a constant factor.
    pub factor: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecurrenceAudit {
    pub terms: Vec<TermAudit>,
    pub agrees: bool,
}

/// Compare stated `Q_i(n)` with `P_i(n + d − i)` from the operator.
pub fn audit_recurrence(case: &CaseSpec) -> Result<RecurrenceAudit> {
    let (rec, _) = exact_sequences(case, case.operator.degree())?;
    let derived = rec.shifted_form();
    let terms: Vec<TermAudit> = derived
        .iter()
        .zip(&case.stated.recurrence)
        .enumerate()
        .map(|(index, (d, s))| TermAudit {
            index,
            stated: s.to_string(),
            derived: d.to_string(),
            agrees: d == s,
            factor: if d == s { None } else { constant_factor(d, s) },
        })
        .collect();
    let agrees = terms.iter().all(|t| t.agrees);
    Ok(RecurrenceAudit { terms, agrees })
}

fn constant_factor(d: &Poly, s: &Poly) -> Option<String> {
    if s.is_zero() || d.degree() != s.degree() {
        return None;
    }
    let k = d.leading() / s.leading();
    (s.scale(&k) == *d).then(|| crate::rat::format(&k))
}

/// Stated initial values against the generated sequences, with the printed
/// `b` divided by the case's source scale.
pub fn check_initial_values(case: &CaseSpec, pair: &SequencePair) -> Vec<InitialValueCheck> {
    let stated: Vec<(char, usize, Rational)> = case
        .stated
        .initial
        .iter()
        .map(|v| {
            let value =
                if v.sequence == 'b' { Rational::from(&v.value / &case.stated.source_scale) } else { v.value.clone() };
            (v.sequence, v.index, value)
        })
        .collect();
    pair.check_stated(&stated)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegrandCheck {
    pub closed_form: usize,
    pub matches: bool,
    pub first_mismatch: Option<String>,
}

/// Aggregated result of one case.
#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub case: String,
    /// Order `N` with `LA = O(q^{N+1})` certified, or `None`.
    pub ode_verified_to: Option<usize>,
    pub ode_first_failure: Option<String>,
    /// Order through which every integrand closed form matched, or `None`.
    pub integrand_match_order: Option<usize>,
    pub integrand_checks: Vec<IntegrandCheck>,
    /// `L(A·E) = rhs(t)` through the same order.
    pub inhomogeneous_verified: bool,
    pub n_used: usize,
    pub limit_estimate: String,
    pub target: String,
    pub target_label: String,
    pub abs_error: f64,
    pub rate_model: String,
    pub fitted_rate: f64,
    pub rate_consistent: bool,
    pub limit_within_bound: bool,
    pub estimate: Option<LimitEstimate>,
    pub initial_values: Vec<InitialValueCheck>,
    pub recurrence_audit: Option<RecurrenceAudit>,
    pub analytic_checks: Vec<CheckReport>,
    /// Checks reported but not counted toward `pass`.
    pub advisory_checks: Vec<CheckReport>,
    pub errors: Vec<String>,
    pub pass: bool,
}

/// Expand `t`, `A` and the integrand of a case to `order`.
pub fn case_series(case: &CaseSpec, order: usize) -> Result<(QSeries, QSeries, QSeries)> {
    let t = case.t_form.expand_to(order, None)?;
    let a = case.a_form.expand_to(order, Some(&t))?;
    let f = build_integrand(&t, &a, &case.g_num, &case.g_den, case.operator.order(), order)?;
    Ok((t, a, f))
}

struct SeriesOutcome {
    ode_verified_to: Option<usize>,
    ode_first_failure: Option<String>,
    integrand_checks: Vec<IntegrandCheck>,
    inhomogeneous: bool,
    integrand: QSeries,
}

fn series_stage(case: &CaseSpec, order: usize) -> Result<SeriesOutcome> {
    let (t, a, f) = case_series(case, order)?;
    let ode = verify_ode(&case.operator, &t, &a, order)?;
    let mut integrand_checks = Vec::new();
    for (i, form) in case.integrand.iter().enumerate() {
        let closed = form.expand_to(order, Some(&t))?;
        let mismatch = f.first_mismatch(&closed)?;
        integrand_checks.push(IntegrandCheck {
            closed_form: i,
            matches: mismatch.is_none() && closed.known_through() >= order,
            first_mismatch: mismatch.map(|e| crate::rat::format(&e)),
        });
    }
    let inh = verify_inhomogeneous(&case.operator, &t, &a, &f, &case.rhs, order)?;
    Ok(SeriesOutcome {
        ode_verified_to: ode.verified.then_some(ode.order),
        ode_first_failure: ode.first_failure,
        integrand_checks,
        inhomogeneous: inh.verified,
        integrand: f,
    })
}

fn real(x: Float) -> Complex {
    Complex::with_val(x.prec(), (x, 0))
}

/// Evaluate one analytic cross-check against `target`.
pub fn analytic_check(
    case: &CaseSpec,
    check: &AnalyticCheck,
    integrand: &QSeries,
    target: &Float,
    digits: u32,
) -> Result<CheckReport> {
    let prec = digits_to_bits(digits) + 64;
    let tol = 10f64.powi(-(digits as i32 - 5));
    let order = case.operator.order() as u32;
    match check {
        AnalyticCheck::Eichler { tau, relation, .. } => {
            let series = EichlerSeries::from_qseries(integrand, order)?;
            let z = tau.to_complex(prec);
            let e = eichler_eval(&series, &z, digits)?;
            match relation {
                EichlerRelation::Direct => Ok(CheckReport::new(
                    format!("E({}) = {}", tau.label(), case.expected_limit.label()),
                    e.value,
                    real(target.clone()),
                    tol,
                    digits,
                    "certified Eichler series",
                )),
                EichlerRelation::FrickeFixedPoint => {
                    let lower = eichler_eval(&series.with_order(order - 1), &z, digits)?;
                    let m = order - 1;
                    let y = Float::with_val(prec, z.imag());
                    let factor = Float::with_val(prec, two_pi(prec) * &y) * 2u32 / m;
                    let lhs = Complex::with_val(prec, &e.value + Complex::with_val(prec, &lower.value * &factor));
                    Ok(CheckReport::new(
                        format!(
                            "E({0}) + (2/{m})*2*pi*Im(tau)*E'({0}) = {1}",
                            tau.label(),
                            case.expected_limit.label()
                        ),
                        lhs,
                        real(target.clone()),
                        tol,
                        digits,
                        "certified Eichler series at a Fricke fixed point",
                    ))
                }
            }
        }
        AnalyticCheck::RamanujanSum { tau } => {
            let x = nome(&tau.to_complex(prec), prec);
            let v = ramanujan_sum(&x, digits)?;
            Ok(CheckReport::new(
                format!(
                    "sum chi3(n) x^n/(n^2(1-x^n)) at x = e(tau), tau = {} equals {}",
                    tau.label(),
                    case.expected_limit.label()
                ),
                v.value,
                real(target.clone()),
                tol,
                digits,
                "certified Lambert-type sum",
            ))
        }
    }
}

/// Run every stage for one case and aggregate the outcome. Sub-step errors
/// are recorded in the report and fail it.
pub fn run_case(case: &CaseSpec, opts: &RunOptions) -> CaseReport {
    let mut errors = Vec::new();
    let order = opts.series_order;
    let n = opts.n.unwrap_or_else(|| default_n(case));

    let series = series_stage(case, order).map_err(|e| errors.push(format!("series: {e}"))).ok();
    let audit = audit_recurrence(case).map_err(|e| errors.push(format!("audit: {e}"))).ok();
    let initial = exact_sequences(case, case.operator.degree().max(4))
        .map(|(_, pair)| check_initial_values(case, &pair))
        .map_err(|e| errors.push(format!("sequences: {e}")))
        .unwrap_or_default();
    let estimate =
        estimate_limit(case, n, opts.prec_bits, opts.digits).map_err(|e| errors.push(format!("limit: {e}"))).ok();

    let mut analytic = Vec::new();
    let mut advisory_checks = Vec::new();
    if let Some(s) = &series {
        let digits = opts.digits.max(30);
        match case.expected_limit.eval(digits) {
            Ok(target) => {
                for check in &case.analytic_checks {
                    match analytic_check(case, check, &s.integrand, &target, digits) {
                        Ok(r) if check.is_advisory() => advisory_checks.push(r),
                        Ok(r) => analytic.push(r),
                        Err(e) => errors.push(format!("analytic: {e}")),
                    }
                }
            }
            Err(e) => errors.push(format!("target: {e}")),
        }
    }

    let (limit_ok, rate_ok) = estimate.as_ref().map(|e| judge(case, e, opts.prec_bits)).unwrap_or((false, false));
    let series_ok = series.as_ref().is_some_and(|s| {
        s.ode_verified_to == Some(order) && s.inhomogeneous && s.integrand_checks.iter().all(|c| c.matches)
    });
    let pass = errors.is_empty() && series_ok && limit_ok && rate_ok && analytic.iter().all(|c| c.pass);

    CaseReport {
        case: case.id.clone(),
        ode_verified_to: series.as_ref().and_then(|s| s.ode_verified_to),
        ode_first_failure: series.as_ref().and_then(|s| s.ode_first_failure.clone()),
        integrand_match_order: series
            .as_ref()
            .and_then(|s| s.integrand_checks.iter().all(|c| c.matches).then_some(order)),
        integrand_checks: series.as_ref().map(|s| s.integrand_checks.clone()).unwrap_or_default(),
        inhomogeneous_verified: series.as_ref().is_some_and(|s| s.inhomogeneous),
        n_used: n,
        limit_estimate: estimate.as_ref().map(|e| super::limit::fmt_sig(&e.value, 30)).unwrap_or_default(),
        target: estimate.as_ref().map(|e| super::limit::fmt_sig(&e.target, 30)).unwrap_or_default(),
        target_label: case.expected_limit.label().to_string(),
        abs_error: estimate.as_ref().map_or(f64::NAN, |e| e.error_vs_target),
        rate_model: case.expected_rate.tag().to_string(),
        fitted_rate: estimate.as_ref().map_or(f64::NAN, |e| e.rate_fit.fitted),
        rate_consistent: rate_ok,
        limit_within_bound: limit_ok,
        estimate,
        initial_values: initial,
        recurrence_audit: audit,
        analytic_checks: analytic,
        advisory_checks,
        errors,
        pass,
    }
}

/// `(limit within its rate bound, fitted rate consistent with the law)`.
pub fn judge(case: &CaseSpec, e: &LimitEstimate, prec: u32) -> (bool, bool) {
    let k = case.error_constant;
    let floor = (2f64).powi(-(prec as i32) + 16) * e.target.to_f64().abs().max(1.0);
    let n = e.n_used;
    match &case.expected_rate {
        RateLaw::Geometric { ratio, .. } => {
            let bound = (k.ln() + case.expected_rate.ln_rate(n)).exp().max(floor);
            let limit_ok = e.raw_error <= bound;
            let rate_ok = match e.rate_fit.outcome {
                FitOutcome::Measured => (e.rate_fit.fitted / ratio - 1.0).abs() <= GEOMETRIC_RATIO_TOLERANCE,
                FitOutcome::Unmeasurable => e.raw_error <= floor,
            };
            (limit_ok, rate_ok)
        }
        RateLaw::Power { .. } => {
            let limit_ok = e.scaled_error_range.1 <= k;
            let (lo, hi) = POWER_EXPONENT_RANGE;
            let rate_ok = e.rate_fit.outcome == FitOutcome::Measured && (lo..=hi).contains(&e.rate_fit.fitted);
            (limit_ok, rate_ok)
        }
        RateLaw::Loglike => {
            let limit_ok = e.error_vs_target < LOGLIKE_TOLERANCE && e.scaled_error_range.1 <= k;
            let rate_ok = e.scaled_error_spread() < LOGLIKE_SPREAD;
            (limit_ok, rate_ok)
        }
    }
}

/// Run the given cases, fanning out across worker threads.
pub fn run_cases(exec: Exec, cases: &[CaseSpec], opts: &RunOptions) -> Vec<CaseReport> {
    par::map(exec, cases.iter().collect(), |c| run_case(c, opts))
}

/// Run every case in the registry.
pub fn run_all(exec: Exec, registry: &Registry, opts: &RunOptions) -> Vec<CaseReport> {
    run_cases(exec, registry.cases(), opts)
}
