//! Variational numerics for `-Δu + A|x|^{-α} u = f(u)` in `R^N`.
//!
//! * [`exponents`]: threshold exponents, region classification, ν.
//! * [`nonlinearity`]: nonlinearities and hypothesis certificates.
//! * [`radial`]: radial ground states and level scaling.
//! * [`cylindrical`]: ground states in `H_K`, symmetry deviation, breaking sweeps.
//! * [`testfn`]: the angular-sector test function and its energy estimates.
//! * [`cli`]: command-line front end.

// `!(x > 0.0)` rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod cli;
pub mod config;
pub mod cylindrical;
pub mod error;
pub mod exponents;
pub mod fit;
pub mod mesh;
pub mod nehari;
pub mod nonlinearity;
pub mod params;
pub mod quadrature;
pub mod radial;
pub mod testfn;

pub use error::{Error, Result};
