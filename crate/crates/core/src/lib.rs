//! Finite-dimensional PT-symmetric matrix Hamiltonians: exact secular
//! polynomials, maximal exceptional points, reality domains and metrics.

pub mod cli;
pub mod error;
pub mod io;
pub mod mep;
pub mod metric;
pub mod model;
pub mod poly;
pub mod roots;
pub mod scalar;
pub mod secular;
pub mod spectra;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
pub struct ReadmeDoctests;
