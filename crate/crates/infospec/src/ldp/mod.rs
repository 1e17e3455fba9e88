//! Large-deviation machinery: cumulant generating functions, Legendre
//! transforms, tilted laws, constrained I-projections, and the assembled
//! lower tail exponent of the divergence spectrum.

pub mod cgf;
pub mod eta;
pub mod legendre;
pub mod power;
pub mod projection;

pub use cgf::{cgf_for_problem, cgf_gaussian, cgf_iid, cgf_markov, CgfEvaluator, CgfMethod};
pub use eta::{
    eta_for_problem, eta_from_rate, eta_mixed, eta_point, eta_step, EtaFunction,
};
pub use legendre::{legendre, tilted_distribution, LegendrePoint, RateFunction};
pub use power::{log_spectral_radius, max_cycle_mean, min_cycle_mean, PerronTriple};
pub use projection::{
    constrained_i_projection, ConstraintSense, LinearConstraint, ProjectionOutcome,
};
