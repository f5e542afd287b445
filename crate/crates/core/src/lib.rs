//! Numerical model of the order structure on the universal cover of
//! `Sp(2n, R)` and of commuting quantomorphism families.
//!
//! Maslov indices are in radians throughout (see [`maslov`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod error;
pub mod maslov;
pub mod matrix_core;
pub mod order_metric;
pub mod path_calculus;
pub mod prequantization;
pub mod sampling;

pub use error::{Error, Result};
pub use maslov::{maslov_index, MaslovResult};
pub use path_calculus::{ConeStatus, ConeVerdict, SampledPath};

/// Recorded in every result document produced by the command-line tool.
pub const MASLOV_CONVENTION: &str =
    "radians: mu = total change of arg det of the unitary polar factor (one turn = 2 pi)";
