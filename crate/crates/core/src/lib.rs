//! Numerical laboratory for the general Degasperis–Procesi family of
//! shallow-water conservation laws.

// negated comparisons are deliberate: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod interaction;
pub mod model;
pub mod moments;
pub mod oracle;
pub mod profile;
pub mod quadrature;

pub use error::{Error, Result};
