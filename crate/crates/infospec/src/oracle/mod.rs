//! Finite-blocklength ground truth: exact Neyman-Pearson trade-offs, best
//! fixed-length codes, Monte Carlo spectrum estimates, and a brute-force
//! simplex search.  These are the references the asymptotic engines are
//! validated against.

pub mod code;
pub mod grid;
pub mod np;
pub mod spectrum;

pub use code::{best_fixed_length_code, FixedLengthCode};
pub use grid::{simplex_grid_projection, SimplexGridOutcome};
pub use np::{finite_n_exponents, np_tradeoff, FiniteNExponents, NpOperatingPoint, NpTradeoff, RatioBlock};
pub use spectrum::{mc_spectrum, SpectrumEstimate};
