//! Apéry limits from modular parameterizations.
//!
//! Theta-form differential operators give recurrences whose solution ratios
//! `b_n/a_n` converge to special values. This crate certifies the modular
//! parameterizations behind each registered case as exact `q`-series
//! identities, evaluates the matching Eichler integrals and weight-3
//! L-values to high precision, and measures the convergence of the ratios.

pub mod analytic;
pub mod apery;
pub mod error;
pub mod lfunc;
pub mod operator;
pub mod par;
pub mod poly;
pub mod rat;
pub mod series;

pub use error::{Error, Result};
