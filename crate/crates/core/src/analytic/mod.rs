//! Arbitrary-precision evaluation: classical constants, Eichler integrals at
//! points of the upper half-plane, and a level-3 Lambert-type sum.

mod constants;
mod eichler;

pub use constants::{dirichlet_l, hurwitz_zeta, Constant};
pub use eichler::{digits_to_bits, eichler_eval, eichler_eval_many, nome, ramanujan_sum, Certified, EichlerSeries};
