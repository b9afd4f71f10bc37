use rug::Rational;

use super::QSeries;
use crate::error::{Error, Result};

/// `scale · Σ_{n≥0} (−1)ⁿ(2n+1) q^{multiplier·(2n+1)²}`, kept through relative
/// order `N` from its leading exponent `multiplier`.
///
/// Exponents `multiplier·((2n+1)² − 1) = 8·multiplier·n(n+1)/2` must be
/// integral relative to the lead, so `8·multiplier` must be an integer.
pub fn triple_product_sparse(scale: &Rational, multiplier: &Rational, n: usize) -> Result<QSeries> {
    let step = Rational::from(multiplier * 8u32);
    if *step.denom() != 1 || *multiplier <= 0 {
        return Err(Error::InvalidArgument(format!(
            "multiplier {} must be positive with 8·multiplier integral",
            crate::rat::format(multiplier)
        )));
    }
    let step = step.numer().to_usize().ok_or_else(|| Error::InvalidArgument("multiplier too large".into()))?;
    let mut coeffs = vec![Rational::new(); n + 1];
    let mut j = 0usize;
    loop {
        let rel = step * (j * (j + 1) / 2);
        if rel > n {
            break;
        }
        let sign: i64 = if j.is_multiple_of(2) { 1 } else { -1 };
        coeffs[rel] = Rational::from(sign * (2 * j + 1) as i64) * scale;
        j += 1;
    }
    Ok(QSeries::new(multiplier.clone(), coeffs))
}
