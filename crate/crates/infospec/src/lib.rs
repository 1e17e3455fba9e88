//! Optimal error and correct-decoding exponents for hypothesis testing on
//! general sources, computed through large-deviation rate functions of the
//! normalized divergence density, with exact finite-blocklength oracles and
//! Monte Carlo spectrum estimation for validation.

pub mod cli;
pub mod error;
pub mod exponents;
pub mod ldp;
pub mod models;
pub mod oracle;

pub use error::{Error, Result};
