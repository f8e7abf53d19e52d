//! Parameter sweeps over the micromaser engine: configuration, figure
//! recipes, parallel evaluation, CSV rows and gnuplot scripts.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod expr;
pub mod output;
pub mod recipes;
pub mod sweep;

pub use config::{load, Config, SweepSpec};
pub use error::{CliError, Result};
pub use output::{run, RunOutput};

/// The guide's chapter on sweeps, compiled and run as a doctest.
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/sweeps.md")]
struct SweepsGuide;
