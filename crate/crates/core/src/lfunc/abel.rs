use nalgebra::{DMatrix, DVector};
use rug::Rational;
use serde::Serialize;

use super::CoeffStream;
use crate::error::{Error, Result};
use crate::par::{self, Exec};

/// Correction terms in the `δ → 0` expansion of a damped sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AbelModel {
    /// `v + Σ_{j=1}^{order} a_j δ^j`, for cusp forms.
    Power,
    /// `v + b δ log δ + Σ_{j=1}^{order} a_j δ^j`, for streams with
    /// Eisenstein growth whose Dirichlet series has a pole at `s + 1`.
    LogPower,
}

#[derive(Clone, Debug)]
pub struct AbelConfig {
    /// Decreasing damping parameters.
    pub deltas: Vec<f64>,
    /// Richardson order: number of `δ^j` correction terms.
    pub order: usize,
    pub model: AbelModel,
    /// Truncation of each damped sum: dropped terms below `10^{−digits}`.
    pub digits: f64,
    /// Largest acceptable difference between the last two extrapolants,
    /// relative to `max(1, |value|)`.
    pub max_error: f64,
    pub exec: Exec,
}

impl Default for AbelConfig {
    fn default() -> Self {
        AbelConfig {
            deltas: (5..=14).map(|k| 2f64.powi(-k)).collect(),
            order: 4,
            model: AbelModel::Power,
            digits: 14.0,
            max_error: 1e-5,
            exec: Exec::default(),
        }
    }
}

impl AbelConfig {
    pub fn with_model(mut self, model: AbelModel) -> Self {
        self.model = model;
        self
    }

    /// Terms needed so that `Σ_{n>N} e^{−δn}` is below `10^{−digits}` after
    /// weighting: `δN ≥ digits·ln10 + ln(1/δ)`.
    pub fn terms_for(&self, delta: f64) -> usize {
        let need = (self.digits + 4.0) * std::f64::consts::LN_10 + (1.0 / delta).ln();
        (need / delta).ceil() as usize
    }

    pub fn max_terms(&self) -> usize {
        self.deltas.iter().map(|&d| self.terms_for(d)).max().unwrap_or(0)
    }
}

/// Extrapolated limit with the spread of the last two window estimates.
#[derive(Clone, Debug, Serialize)]
pub struct Extrapolated {
    pub value: f64,
    pub error: f64,
    pub windows: Vec<f64>,
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, other: Compensated) {
        self.add(other.sum);
        self.add(other.comp);
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Damped class sums `S_r(δ) = Σ_{n ≡ r (mod m)} c_n e^{−δn} n^{−s}` for each
/// `δ`, one pass per `δ`, split across chunks of `n`.
pub fn damped_class_sums(coeffs: &[i64], modulus: usize, s: u32, cfg: &AbelConfig) -> Result<Vec<Vec<f64>>> {
    let need = cfg.max_terms();
    if coeffs.len() <= need {
        return Err(Error::StreamExhausted { needed: need + 1, available: coeffs.len() });
    }
    let mut out = Vec::with_capacity(cfg.deltas.len());
    for &delta in &cfg.deltas {
        let n_max = cfg.terms_for(delta);
        let ranges = par::chunks(n_max + 1, 1 << 15);
        let parts = par::map(cfg.exec, ranges, |(lo, hi)| {
            let mut acc = vec![Compensated::default(); modulus];
            for n in lo.max(1)..hi {
                let c = coeffs[n];
                if c == 0 {
                    continue;
                }
                let nf = n as f64;
                let term = c as f64 * (-delta * nf).exp() / nf.powi(s as i32);
                acc[n % modulus].add(term);
            }
            acc
        });
        let mut total = vec![Compensated::default(); modulus];
        for part in parts {
            for (t, p) in total.iter_mut().zip(part) {
                t.merge(p);
            }
        }
        out.push(total.into_iter().map(Compensated::value).collect());
    }
    Ok(out)
}

/// Solve a small dense system by LU with partial pivoting.
fn solve(a: Vec<Vec<f64>>, b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    m.lu().solve(&DVector::from_vec(b)).map(|x| x.iter().copied().collect())
}

fn basis(model: AbelModel, order: usize, delta: f64, scale: f64) -> Vec<f64> {
    let u = delta / scale;
    let mut row = vec![1.0];
    if model == AbelModel::LogPower {
        row.push(u * delta.ln());
    }
    row.extend((1..=order).map(|j| u.powi(j as i32)));
    row
}

/// Fit the model exactly on each window of consecutive `δ` values and take
/// the constant term; the estimate is the last window's, the error the
/// difference from the previous window's.
pub fn extrapolate(values: &[f64], cfg: &AbelConfig) -> Result<Extrapolated> {
    let width = cfg.order + 1 + usize::from(cfg.model == AbelModel::LogPower);
    if values.len() < width + 1 {
        return Err(Error::InvalidArgument(format!(
            "need at least {} damping parameters, got {}",
            width + 1,
            values.len()
        )));
    }
    let mut windows = Vec::new();
    for lo in 0..=values.len() - width {
        let ds = &cfg.deltas[lo..lo + width];
        let scale = ds.iter().cloned().fold(0.0, f64::max);
        let a: Vec<Vec<f64>> = ds.iter().map(|&d| basis(cfg.model, cfg.order, d, scale)).collect();
        let x = solve(a, values[lo..lo + width].to_vec())
            .ok_or_else(|| Error::InvalidArgument("singular extrapolation system".into()))?;
        windows.push(x[0]);
    }
    let value = *windows.last().expect("at least two windows");
    let error = (value - windows[windows.len() - 2]).abs();
    if !error.is_finite() || error > cfg.max_error * value.abs().max(1.0) {
        return Err(Error::NonConvergent(error));
    }
    Ok(Extrapolated { value, error, windows })
}

/// Abel-regularized `Σ_{n ≡ r (mod m)} c_n n^{−s}` for every class `r`.
pub fn abel_class_sums(stream: &CoeffStream, modulus: usize, s: u32, cfg: &AbelConfig) -> Result<Vec<Extrapolated>> {
    let coeffs = stream.prefix(cfg.max_terms())?;
    let sums = damped_class_sums(&coeffs, modulus, s, cfg)?;
    (0..modulus)
        .map(|r| {
            let v: Vec<f64> = sums.iter().map(|row| row[r]).collect();
            extrapolate(&v, cfg)
        })
        .collect()
}

/// Complex result of a twisted sum.
#[derive(Clone, Debug, Serialize)]
pub struct AbelEstimate {
    pub re: Extrapolated,
    pub im: Extrapolated,
}

impl AbelEstimate {
    pub fn error(&self) -> f64 {
        self.re.error.hypot(self.im.error)
    }
}

/// Abel-regularized `Σ c_n e^{2πin·α} n^{−s}`: the damped sums are bucketed
/// by `n mod q` (`α = p/q`), phased, and extrapolated to `δ → 0`.
pub fn abel_regularized_twisted_sum(
    stream: &CoeffStream,
    phase: &Rational,
    s: u32,
    cfg: &AbelConfig,
) -> Result<AbelEstimate> {
    let q = phase.denom().to_usize().ok_or_else(|| Error::InvalidArgument("phase denominator too large".into()))?;
    let p = phase.numer().mod_u(q as u32) as usize;
    let coeffs = stream.prefix(cfg.max_terms())?;
    let sums = damped_class_sums(&coeffs, q, s, cfg)?;
    let angle = |r: usize| 2.0 * std::f64::consts::PI * ((r * p) % q) as f64 / q as f64;
    let (mut re, mut im) = (Vec::new(), Vec::new());
    for row in &sums {
        let (mut a, mut b) = (Compensated::default(), Compensated::default());
        for (r, v) in row.iter().enumerate() {
            let (sn, cs) = angle(r).sin_cos();
            a.add(v * cs);
            b.add(v * sn);
        }
        re.push(a.value());
        im.push(b.value());
    }
    Ok(AbelEstimate { re: extrapolate(&re, cfg)?, im: extrapolate(&im, cfg)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::LambertShape;

    fn chi4() -> CoeffStream {
        CoeffStream::from_fn("chi4", |n| Ok((0..=n).map(|i| [0, 1, 0, -1][i % 4]).collect()))
    }

    #[test]
    fn catalan_by_abel() {
        let cfg = AbelConfig::default();
        let v = abel_regularized_twisted_sum(&chi4(), &Rational::new(), 2, &cfg).unwrap();
        assert!((v.re.value - 0.915_965_594_177_219).abs() < 1e-9);
        assert!(v.im.value.abs() < 1e-12);
    }

    #[test]
    fn integer_phase_is_trivial() {
        let cfg = AbelConfig { deltas: vec![0.01], ..AbelConfig::default() };
        let coeffs = chi4().prefix(cfg.max_terms()).unwrap();
        let a = damped_class_sums(&coeffs, 1, 2, &cfg).unwrap();
        let b = damped_class_sums(&coeffs, 4, 2, &cfg).unwrap();
        let total: f64 = b[0].iter().sum();
        assert!((a[0][0] - total).abs() < 1e-15);
    }

    #[test]
    fn richardson_removes_polynomial_corrections() {
        let cfg = AbelConfig::default();
        let vals: Vec<f64> = cfg.deltas.iter().map(|d| 2.5 + 3.0 * d - 7.0 * d * d + d.powi(4)).collect();
        let e = extrapolate(&vals, &cfg).unwrap();
        assert!((e.value - 2.5).abs() < 1e-12);
        let log_cfg = AbelConfig::default().with_model(AbelModel::LogPower);
        let vals: Vec<f64> = cfg.deltas.iter().map(|d| 1.25 + 0.5 * d * d.ln() + 2.0 * d).collect();
        assert!((extrapolate(&vals, &log_cfg).unwrap().value - 1.25).abs() < 1e-12);
    }

    #[test]
    fn divergent_data_is_rejected() {
        let cfg = AbelConfig::default();
        let vals: Vec<f64> = cfg.deltas.iter().map(|d| 1.0 / d).collect();
        assert!(matches!(extrapolate(&vals, &cfg), Err(Error::NonConvergent(_))));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let shape = LambertShape::CharacterDivisor { modulus: 5, weights: vec![0, 1, -2, 2, -1], power: 2 };
        let s = CoeffStream::lambert("psi", shape);
        let cfg = AbelConfig { deltas: vec![2f64.powi(-6), 2f64.powi(-7)], ..AbelConfig::default() };
        let c = s.prefix(cfg.max_terms()).unwrap();
        let seq = damped_class_sums(&c, 5, 2, &AbelConfig { exec: Exec::Sequential, ..cfg.clone() }).unwrap();
        let par = damped_class_sums(&c, 5, 2, &AbelConfig { exec: Exec::Parallel, ..cfg }).unwrap();
        for (a, b) in seq.iter().flatten().zip(par.iter().flatten()) {
            assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0));
        }
    }
}
