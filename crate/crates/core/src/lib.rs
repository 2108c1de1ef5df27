//! Logarithmic energy and capacity of unions of uniformly spaced intervals.
// `!(x > 0.0)` style checks reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod interval_sets;
pub mod measures;

pub use error::{Error, Result};
