use nalgebra::{DMatrix, DVector};
use rug::{Float, Rational};
use serde::{Serialize, Serializer};

use super::registry::{CaseSpec, RateLaw};
use crate::error::{Error, Result};
use crate::operator::{ode_to_recurrence, run_sequences, Recurrence, SequencePair, EXACT_LIMIT};

/// `b_n/a_n` at every index `1..=N`, exact below [`EXACT_LIMIT`] and in
/// floating point above it.
#[derive(Clone, Debug)]
pub struct RatioSeries {
    /// `(n, b_n/a_n)` for `n = 1..=N`.
    pub points: Vec<(usize, Float)>,
    pub prec: u32,
    /// Largest index computed in exact arithmetic.
    pub exact_through: usize,
    /// Relative gap between a from-scratch float run and the exact ratio at
    /// the switchover index, when the float path was used.
    pub switch_check: Option<f64>,
}

impl RatioSeries {
    pub fn last(&self) -> &Float {
        &self.points.last().expect("ratio series is never empty").1
    }
}

/// Working precision of the float continuation: `prec` plus 64 guard bits,
/// raised to `n·log₂(1/ρ) + 64` when the ratio converges like `ρⁿ`.
pub fn float_precision(prec: u32, n: usize, law: &RateLaw) -> u32 {
    let geometric = match law {
        RateLaw::Geometric { ratio, .. } if *ratio > 0.0 && *ratio < 1.0 => {
            (n as f64 * (1.0 / ratio).log2()).ceil() as u32 + 64
        }
        _ => 0,
    };
    (prec + 64).max(geometric)
}

/// Ratios through `N` from an exact prefix `pair` (which must reach
/// `min(N, EXACT_LIMIT)`).
pub fn ratio_series(rec: &Recurrence, pair: &SequencePair, n: usize, prec: u32, law: &RateLaw) -> Result<RatioSeries> {
    let exact_through = n.min(EXACT_LIMIT).min(pair.len() - 1);
    let mut points = Vec::with_capacity(n);
    for i in 1..=exact_through {
        points.push((i, Float::with_val(prec, &pair.ratio(i)?)));
    }
    let mut switch_check = None;
    if n > exact_through {
        let wprec = float_precision(prec, n, law);
        let cont = rec.extend_float(pair, n, wprec);
        for i in exact_through + 1..=n {
            points.push((i, Float::with_val(prec, &cont.ratio(i)?)));
        }
        let scratch = rec.float_from_scratch(exact_through, wprec).ratio(exact_through)?;
        let exact = pair.ratio(exact_through)?;
        let gap = Float::with_val(wprec, &scratch - &exact);
        let scale = Float::with_val(64, exact.abs()).to_f64().max(f64::MIN_POSITIVE);
        switch_check = Some(gap.to_f64().abs() / scale);
    }
    if points.is_empty() {
        return Err(Error::InvalidArgument("need at least one ratio".into()));
    }
    Ok(RatioSeries { points, prec, exact_through, switch_check })
}

/// Whether a rate fit found enough signal above the precision floor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitOutcome {
    Measured,
    /// Fewer than [`MIN_FIT_POINTS`] errors above the precision floor.
    Unmeasurable,
}

pub const MIN_FIT_POINTS: usize = 20;

/// Least-squares fit of `log|b_n/a_n − target|` against the rate model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub model: String,
    pub outcome: FitOutcome,
    /// Slope against `n` (geometric), `log n` (power) or `log log n` (loglike).
    pub slope: f64,
    /// `e^{slope}` for geometric, the slope itself otherwise.
    pub fitted: f64,
    pub r_squared: f64,
    pub points: usize,
    pub window: (usize, usize),
}

/// Fit window `[lo, N]` for each model.
pub fn fit_window(law: &RateLaw, n: usize) -> (usize, usize) {
    let lo = match law {
        RateLaw::Geometric { .. } => n / 4,
        RateLaw::Power { .. } => n / 8,
        RateLaw::Loglike => n / 10,
    };
    (lo.max(1), n)
}

fn abs_error(x: &Float, target: &Float) -> Float {
    let w = x.prec().max(target.prec());
    Float::with_val(w, x - target).abs()
}

/// `ln|x|` of a possibly tiny float without underflow.
fn ln_abs(x: &Float) -> f64 {
    Float::with_val(64, x.abs_ref()).ln().to_f64()
}

pub fn fit_rate(points: &[(usize, Float)], target: &Float, law: &RateLaw, window: (usize, usize)) -> RateFit {
    let prec = points.first().map_or(64, |p| p.1.prec()).min(target.prec());
    let floor =
        (Float::with_val(64, target.abs_ref()).to_f64().max(1.0)).ln() - (prec as f64 - 16.0) * std::f64::consts::LN_2;
    let xs_ys: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, _)| *n >= window.0 && *n <= window.1)
        .filter_map(|(n, r)| {
            let e = abs_error(r, target);
            if e.is_zero() {
                return None;
            }
            let y = ln_abs(&e);
            (y > floor).then(|| (model_x(law, *n), y))
        })
        .collect();
    let model = law.tag().to_string();
    if xs_ys.len() < MIN_FIT_POINTS {
        return RateFit {
            model,
            outcome: FitOutcome::Unmeasurable,
            slope: 0.0,
            fitted: f64::NAN,
            r_squared: 0.0,
            points: xs_ys.len(),
            window,
        };
    }
    let (slope, _, r2) = linear_fit(&xs_ys);
    let fitted = match law {
        RateLaw::Geometric { .. } => slope.exp(),
        _ => slope,
    };
    RateFit { model, outcome: FitOutcome::Measured, slope, fitted, r_squared: r2, points: xs_ys.len(), window }
}

fn model_x(law: &RateLaw, n: usize) -> f64 {
    let x = n as f64;
    match law {
        RateLaw::Geometric { .. } => x,
        RateLaw::Power { .. } => x.ln(),
        RateLaw::Loglike => x.ln().ln(),
    }
}

/// `(slope, intercept, R²)` of ordinary least squares.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (slope, my - slope * mx, r2)
}

/// Least squares `y ≈ Σ_j c_j·basis_j(x)` by SVD; returns the
/// coefficients and the residual sum of squares.
pub fn least_squares(rows: &[Vec<f64>], ys: &[f64]) -> (Vec<f64>, f64) {
    let k = rows[0].len();
    let a = DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]);
    let y = DVector::from_column_slice(ys);
    let coef = a.clone().svd(true, true).solve(&y, 1e-14).expect("SVD with both factors");
    let rss = (a * &coef - y).norm_squared();
    (coef.iter().copied().collect(), rss)
}

/// Power-law extrapolation `c₀ + c₁ n^{exponent}` over the window.
pub fn power_extrapolate(pts: &[(usize, f64)], exponent: f64) -> f64 {
    let rows: Vec<Vec<f64>> = pts.iter().map(|&(n, _)| vec![1.0, (n as f64).powf(exponent)]).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    least_squares(&rows, &ys).0[0]
}

/// Three-term log model `c₀ + c₁/log n + c₂/log² n`.
pub fn log_poly_extrapolate(pts: &[(usize, f64)]) -> f64 {
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .map(|&(n, _)| {
            let l = (n as f64).ln();
            vec![1.0, 1.0 / l, 1.0 / (l * l)]
        })
        .collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    least_squares(&rows, &ys).0[0]
}

/// Shifted log model `c₀ + c₁/(log n + κ)`: linear in `(c₀, c₁)` for fixed
/// `κ`, so `κ` is found by a one-dimensional search on the residual.
/// Returns `(c₀, κ)`.
pub fn log_shift_extrapolate(pts: &[(usize, f64)]) -> (f64, f64) {
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let lmin = pts.iter().map(|p| (p.0 as f64).ln()).fold(f64::INFINITY, f64::min);
    let fit = |kappa: f64| {
        let rows: Vec<Vec<f64>> = pts.iter().map(|&(n, _)| vec![1.0, 1.0 / ((n as f64).ln() + kappa)]).collect();
        least_squares(&rows, &ys)
    };
    // Coarse scan in u = 1/(log n_min + κ) ∈ (0, 2], then golden section.
    let kappa_of = |u: f64| 1.0 / u - lmin;
    let grid: Vec<f64> = (1..=400).map(|i| i as f64 * 0.005).collect();
    let best = grid.iter().copied().min_by(|&a, &b| fit(kappa_of(a)).1.total_cmp(&fit(kappa_of(b)).1)).unwrap();
    let (mut lo, mut hi) = ((best - 0.005).max(1e-6), best + 0.005);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if fit(kappa_of(a)).1 < fit(kappa_of(b)).1 {
            hi = b;
        } else {
            lo = a;
        }
    }
    let kappa = kappa_of(0.5 * (lo + hi));
    (fit(kappa).0[0], kappa)
}

/// Aitken `Δ²` on three samples at geometrically spaced indices; exact for
/// a pure power law `c₀ + c₁ n^α`.
pub fn aitken(x0: &Float, x1: &Float, x2: &Float) -> Option<Float> {
    let w = x0.prec();
    let d1 = Float::with_val(w, x1 - x0);
    let d2 = Float::with_val(w, x2 - x1);
    let den = Float::with_val(w, &d2 - &d1);
    if den.is_zero() {
        return None;
    }
    Some(Float::with_val(w, x2 - Float::with_val(w, d2.square_ref()) / den))
}

fn ser_float<S: Serializer>(x: &Float, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_sig(x, 30))
}

fn ser_opt_float<S: Serializer>(x: &Option<Float>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(x) => ser_float(x, s),
        None => s.serialize_none(),
    }
}

/// Decimal string with `digits` significant digits.
pub fn fmt_sig(x: &Float, digits: usize) -> String {
    x.to_string_radix(10, Some(digits))
}

/// Extrapolated limit with the empirical rate check.
#[derive(Clone, Debug, Serialize)]
pub struct LimitEstimate {
    #[serde(serialize_with = "ser_float")]
    pub value: Float,
    /// `b_N/a_N` itself.
    #[serde(serialize_with = "ser_float")]
    pub raw: Float,
    pub method: String,
    pub n_used: usize,
    #[serde(serialize_with = "ser_float")]
    pub target: Float,
    /// `|value − target|`.
    pub error_vs_target: f64,
    /// `|b_N/a_N − target|`.
    pub raw_error: f64,
    pub rate_fit: RateFit,
    /// Aitken `Δ²` on `N/4, N/2, N` (power-law cases).
    #[serde(serialize_with = "ser_opt_float")]
    pub aitken: Option<Float>,
    /// Three-term `c₀ + c₁/log n + c₂/log² n` estimate (loglike cases).
    pub log_poly_estimate: Option<f64>,
    /// Range of `|b_n/a_n − target| / rate(n)` over the fit window.
    pub scaled_error_range: (f64, f64),
    pub exact_through: usize,
    pub switch_check: Option<f64>,
}

impl LimitEstimate {
    /// `max/min` of the scaled error over the window.
    pub fn scaled_error_spread(&self) -> f64 {
        self.scaled_error_range.1 / self.scaled_error_range.0
    }
}

/// Estimate the limit from a ratio series and compare with `target`.
pub fn estimate_from_ratios(ratios: &RatioSeries, target: &Float, law: &RateLaw) -> Result<LimitEstimate> {
    let n = ratios.points.last().map(|p| p.0).unwrap_or(0);
    let window = fit_window(law, n);
    let rate_fit = fit_rate(&ratios.points, target, law, window);
    let prec = ratios.prec;
    let raw = ratios.last().clone();
    let in_window: Vec<(usize, &Float)> =
        ratios.points.iter().filter(|p| p.0 >= window.0).map(|(i, r)| (*i, r)).collect();
    let as_f64: Vec<(usize, f64)> = in_window.iter().map(|(i, r)| (*i, r.to_f64())).collect();
    let at = |i: usize| &ratios.points[i - 1].1;

    let (value, method, aitken_v, log_poly) = match law {
        RateLaw::Geometric { .. } => (raw.clone(), "raw ratio b_N/a_N".to_string(), None, None),
        RateLaw::Power { exponent } => {
            let c0 = power_extrapolate(&as_f64, *exponent);
            let ait = if n >= 4 { aitken(at(n / 4), at(n / 2), at(n)) } else { None };
            (Float::with_val(prec, c0), format!("least squares c0 + c1*n^({exponent:.4})"), ait, None)
        }
        RateLaw::Loglike => {
            let (c0, kappa) = log_shift_extrapolate(&as_f64);
            let poly = log_poly_extrapolate(&as_f64);
            (
                Float::with_val(prec, c0),
                format!("least squares c0 + c1/(log n + kappa), kappa = {kappa:.4}"),
                None,
                Some(poly),
            )
        }
    };

    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (i, r) in &in_window {
        let e = abs_error(r, target);
        if e.is_zero() {
            continue;
        }
        let scaled = (ln_abs(&e) - law.ln_rate(*i)).exp();
        lo = lo.min(scaled);
        hi = hi.max(scaled);
    }

    Ok(LimitEstimate {
        error_vs_target: abs_error(&value, target).to_f64(),
        raw_error: abs_error(&raw, target).to_f64(),
        value,
        raw,
        method,
        n_used: n,
        target: target.clone(),
        rate_fit,
        aitken: aitken_v,
        log_poly_estimate: log_poly,
        scaled_error_range: (lo, hi),
        exact_through: ratios.exact_through,
        switch_check: ratios.switch_check,
    })
}

/// Sequences for `case` through `min(N, EXACT_LIMIT)` in exact arithmetic.
pub fn exact_sequences(case: &CaseSpec, n: usize) -> Result<(Recurrence, SequencePair)> {
    let rec = ode_to_recurrence(&case.operator, &case.rhs)?;
    let pair = run_sequences(&rec, n.min(EXACT_LIMIT).max(rec.degree()))?;
    Ok((rec, pair))
}

/// `b_n/a_n` through `N` at `prec` bits, extrapolated per the case's rate
/// law and compared with its target evaluated to `digits`.
pub fn estimate_limit(case: &CaseSpec, n: usize, prec: u32, digits: u32) -> Result<LimitEstimate> {
    let d = case.operator.degree();
    if n < 10 * d {
        return Err(Error::InvalidArgument(format!("need N ≥ {} for a degree-{d} recurrence", 10 * d)));
    }
    let (rec, pair) = exact_sequences(case, n)?;
    let ratios = ratio_series(&rec, &pair, n, prec, &case.expected_rate)?;
    let digits = digits.max((prec as f64 / std::f64::consts::LOG2_10) as u32 + 2);
    let target = case.expected_limit.eval(digits)?;
    let target = Float::with_val(prec, &target);
    estimate_from_ratios(&ratios, &target, &case.expected_rate)
}

/// Rescale both sequences by `c`; used to check that estimates depend only
/// on the ratio.
pub fn rescale(pair: &SequencePair, c: &Rational) -> SequencePair {
    SequencePair {
        j: pair.j,
        a: pair.a.iter().map(|x| Rational::from(x * c)).collect(),
        b: pair.b.iter().map(|x| Rational::from(x * c)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rug::ops::Pow;

    fn law_geo(r: f64) -> RateLaw {
        RateLaw::Geometric { ratio: r, label: String::new() }
    }

    #[test]
    fn linear_fit_recovers_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 - 0.5 * i as f64)).collect();
        let (s, c, r2) = linear_fit(&pts);
        assert!((s + 0.5).abs() < 1e-12 && (c - 3.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_rate_is_recovered() {
        let target = Float::with_val(256, 2);
        let pts: Vec<(usize, Float)> = (1..=60)
            .map(|n| (n, Float::with_val(256, 2) + Float::with_val(256, 0.3f64).pow(n as u32) * 5u32))
            .collect();
        let fit = fit_rate(&pts, &target, &law_geo(0.3), (10, 60));
        assert_eq!(fit.outcome, FitOutcome::Measured);
        assert!((fit.fitted - 0.3).abs() < 1e-9, "{fit:?}");
    }

    #[test]
    fn constant_sequence_is_unmeasurable() {
        let target = Float::with_val(128, 7);
        let pts: Vec<(usize, Float)> = (1..=50).map(|n| (n, target.clone())).collect();
        let fit = fit_rate(&pts, &target, &law_geo(0.5), (1, 50));
        assert_eq!(fit.outcome, FitOutcome::Unmeasurable);
    }

    #[test]
    fn power_law_extrapolation_and_aitken() {
        let f = |n: usize| 0.25 + 3.0 * (n as f64).powf(-1.0 / 3.0);
        let pts: Vec<(usize, f64)> = (100..=800).map(|n| (n, f(n))).collect();
        assert!((power_extrapolate(&pts, -1.0 / 3.0) - 0.25).abs() < 1e-10);
        let x = |n: usize| Float::with_val(200, f(n));
        let a = aitken(&x(200), &x(400), &x(800)).unwrap();
        assert!((a.to_f64() - 0.25).abs() < 1e-10);
    }

    #[test]
    fn shifted_log_model_is_exact_on_its_own_family() {
        let f = |n: usize| 0.5 + 0.8 / ((n as f64).ln() + 2.5);
        let pts: Vec<(usize, f64)> = (1000..=10000).step_by(50).map(|n| (n, f(n))).collect();
        let (c0, kappa) = log_shift_extrapolate(&pts);
        assert!((c0 - 0.5).abs() < 1e-8, "{c0}");
        assert!((kappa - 2.5).abs() < 1e-4, "{kappa}");
    }

    #[test]
    fn float_precision_grows_for_geometric_cases() {
        assert_eq!(float_precision(256, 4000, &RateLaw::Loglike), 320);
        assert!(float_precision(256, 4000, &law_geo(1.0 / 16.0)) >= 4000 * 4);
    }

    proptest! {
        #[test]
        fn ratio_invariant_under_common_rescaling(num in 1i64..50, den in 1i64..50, neg in any::<bool>()) {
            let case = super::super::registry::builtin_case("zeta3").unwrap();
            let (rec, pair) = exact_sequences(&case, 30).unwrap();
            let c = Rational::from((if neg { -num } else { num }, den));
            let scaled = rescale(&pair, &c);
            let r1 = ratio_series(&rec, &pair, 30, 200, &case.expected_rate).unwrap();
            let r2 = ratio_series(&rec, &scaled, 30, 200, &case.expected_rate).unwrap();
            let t = Float::with_val(200, 1);
            let e1 = estimate_from_ratios(&r1, &t, &case.expected_rate).unwrap();
            let e2 = estimate_from_ratios(&r2, &t, &case.expected_rate).unwrap();
            prop_assert_eq!(e1.value, e2.value);
        }
    }
}
