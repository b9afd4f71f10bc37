//! Weight-3 L-values and their additive twists: a smoothed evaluator built
//! on the functional equation, an Abel-regularization oracle, and checks of
//! the stabilizer and residue-class identities.

pub mod abel;
mod identities;
mod smoothed;
mod stream;

pub use abel::{abel_class_sums, abel_regularized_twisted_sum, AbelConfig, AbelEstimate, AbelModel, Extrapolated};
pub use identities::{
    check_fixed, corollary_checks, parabolic_fixed_point, verify_stabilizer_identity, CheckReport, Corollary,
    CorollaryReport, StabilizerCase, StabilizerReport,
};
pub use smoothed::{detect_root_number, fe_residual, lvalue_smoothed, LSeriesData, LValue, RootOfUnity};
pub use stream::CoeffStream;
