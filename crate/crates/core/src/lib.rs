//! Analytic torsion of bounded cones over flat tori.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod config;
pub mod error;
pub mod olverpoly;
pub mod quad;
pub mod report;
pub mod special;
pub mod spectra;
pub mod torsion;
pub mod verify;
pub mod zeta;

pub use error::{Error, Result};
