//! Theta-form differential operators `L = Σ_j t^j P_j(θ)`, `θ = t d/dt`,
//! their recurrences, and their action on `q`-parameterized solutions.

mod ode;
mod recurrence;

pub use ode::{build_integrand, eichler_generating, verify_inhomogeneous, verify_ode, OdeReport};
pub use recurrence::{
    ode_to_recurrence, run_sequences, FloatSequences, InitialValueCheck, Recurrence, SequencePair, EXACT_LIMIT,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;

/// `L = Σ_{j=0}^{d} t^j P_j(θ)` with `P_0 = θ^order`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOperator", into = "RawOperator")]
pub struct ThetaOperator {
    order: usize,
    polys: Vec<Poly>,
}

#[derive(Serialize, Deserialize)]
struct RawOperator {
    order: usize,
    polys: Vec<Poly>,
}

impl TryFrom<RawOperator> for ThetaOperator {
    type Error = Error;
    fn try_from(r: RawOperator) -> Result<Self> {
        ThetaOperator::new(r.order, r.polys)
    }
}

impl From<ThetaOperator> for RawOperator {
    fn from(op: ThetaOperator) -> Self {
        RawOperator { order: op.order, polys: op.polys }
    }
}

impl ThetaOperator {
    /// `polys[0]` must be `θ^order`; every `P_j` has degree at most `order`.
    pub fn new(order: usize, polys: Vec<Poly>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOperator("order must be positive".into()));
        }
        match polys.first() {
            Some(p0) if *p0 == Poly::monomial(order) => {}
            _ => {
                return Err(Error::InvalidOperator(format!("P_0 must be θ^{order}")));
            }
        }
        if let Some(j) = polys.iter().position(|p| p.degree().is_some_and(|d| d > order)) {
            return Err(Error::InvalidOperator(format!("deg P_{j} exceeds the order {order}")));
        }
        Ok(ThetaOperator { order, polys })
    }

    /// Build from `P_1..P_d` given as ascending integer coefficient lists.
    pub fn from_ints(order: usize, rest: &[&[i64]]) -> Result<Self> {
        let mut polys = vec![Poly::monomial(order)];
        polys.extend(rest.iter().map(|c| Poly::from_ints(c)));
        Self::new(order, polys)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn degree(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    /// Coefficient of `θ^order` as a polynomial in `t`.
    pub fn symbol(&self) -> Poly {
        Poly::new(self.polys.iter().map(|p| p.coeff(self.order)).collect())
    }
}
