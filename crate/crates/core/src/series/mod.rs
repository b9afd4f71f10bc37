//! Exact truncated `q`-series and the modular building blocks used to state
//! the parameterization identities: eta quotients, Eisenstein series,
//! Lambert series and Jacobi triple products.

mod eisenstein;
pub mod eta;
mod lambert;
mod product;
mod qseries;
mod theta;

pub use eisenstein::{Eisenstein, EisensteinCombination};
pub use eta::EtaQuotient;
pub use lambert::{LambertPattern, LambertShape};
pub use product::PeriodicProduct;
pub use qseries::QSeries;
pub use theta::triple_product_sparse;

/// Default certification order for series identities.
pub const DEFAULT_ORDER: usize = 200;
