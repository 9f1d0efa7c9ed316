// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod dense;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod incident;
pub mod kernels;
pub mod operators;
pub mod oracle;
pub mod postprocess;
pub mod quadrature;
pub mod selftest;
pub mod solver;
pub mod special;
pub mod surface;
pub mod usercurve;

pub use error::{Error, Result};
