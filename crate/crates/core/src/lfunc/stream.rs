use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::series::{eta, EtaQuotient, LambertShape};

type Generator = dyn Fn(usize) -> Result<Vec<i64>> + Send + Sync;

struct Inner {
    name: String,
    generate: Option<Box<Generator>>,
    cache: RwLock<Arc<Vec<i64>>>,
}

/// Integer coefficients `c_0, c_1, …` materialized on demand.
///
/// Extension takes the write lock; readers holding an earlier prefix keep a
/// valid snapshot. Cloning shares the cache.
#[derive(Clone)]
pub struct CoeffStream(Arc<Inner>);

impl fmt::Debug for CoeffStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoeffStream").field("name", &self.0.name).field("materialized", &self.materialized()).finish()
    }
}

impl CoeffStream {
    /// A stream backed by `generate(n)`, which must return `c_0..c_n`.
    pub fn from_fn(
        name: impl Into<String>,
        generate: impl Fn(usize) -> Result<Vec<i64>> + Send + Sync + 'static,
    ) -> Self {
        CoeffStream(Arc::new(Inner {
            name: name.into(),
            generate: Some(Box::new(generate)),
            cache: RwLock::new(Arc::new(Vec::new())),
        }))
    }

    /// A fixed, non-extensible stream.
    pub fn from_vec(name: impl Into<String>, coeffs: Vec<i64>) -> Self {
        CoeffStream(Arc::new(Inner { name: name.into(), generate: None, cache: RwLock::new(Arc::new(coeffs)) }))
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn materialized(&self) -> usize {
        self.0.cache.read().expect("stream lock poisoned").len()
    }

    /// A snapshot holding at least `c_0..c_n`.
    pub fn prefix(&self, n: usize) -> Result<Arc<Vec<i64>>> {
        {
            let cur = self.0.cache.read().expect("stream lock poisoned");
            if cur.len() > n {
                return Ok(Arc::clone(&cur));
            }
        }
        let mut cur = self.0.cache.write().expect("stream lock poisoned");
        if cur.len() > n {
            return Ok(Arc::clone(&cur));
        }
        let generate =
            self.0.generate.as_ref().ok_or(Error::StreamExhausted { needed: n + 1, available: cur.len() })?;
        let target = n.max(2 * cur.len());
        let fresh = generate(target)?;
        if fresh.len() <= n {
            return Err(Error::StreamExhausted { needed: n + 1, available: fresh.len() });
        }
        *cur = Arc::new(fresh);
        Ok(Arc::clone(&cur))
    }

    /// `η(2τ)³η(6τ)³`, by the Jacobi triple product.
    pub fn eta2_cubed_eta6_cubed() -> Self {
        Self::from_fn("eta(2t)^3 eta(6t)^3", eta::eta2_cubed_eta6_cubed)
    }

    /// `η(4τ)⁶`, by the Jacobi triple product.
    pub fn eta4_sixth() -> Self {
        Self::from_fn("eta(4t)^6", eta::eta4_sixth)
    }

    /// `η(τ)³η(7τ)³`, by the Jacobi triple product.
    pub fn eta1_cubed_eta7_cubed() -> Self {
        Self::from_fn("eta(t)^3 eta(7t)^3", eta::eta1_cubed_eta7_cubed)
    }

    pub fn lambert(name: impl Into<String>, shape: LambertShape) -> Self {
        Self::from_fn(name, move |n| shape.coeffs_i64(n))
    }

    /// Dense expansion of an eta quotient with integral lead exponent ≥ 0.
    pub fn eta_quotient(eq: EtaQuotient) -> Result<Self> {
        let lead = eq.lead_exp();
        let offset = match (lead.denom() == &1u32, lead.numer().to_usize()) {
            (true, Some(k)) => k,
            _ => return Err(Error::InvalidArgument("eta quotient must start at a non-negative integer power".into())),
        };
        let name = format!("eta quotient {:?}", eq.factors);
        Ok(Self::from_fn(name, move |n| {
            let mut out = vec![0i64; n + 1];
            if n >= offset {
                for (i, c) in eq.product_coeffs(n - offset).into_iter().enumerate() {
                    out[i + offset] = c.to_i64().ok_or(Error::CoefficientOverflow(i + offset))?;
                }
            }
            Ok(out)
        }))
    }
}
