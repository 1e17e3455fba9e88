//! Exponent evaluation: scalar queries, parallel sweeps, and route selection.
//!
//! Each operation consumes a tail-exponent function (or the problem it came
//! from) and reports an extended-real value together with the minimizing
//! rate point and route diagnostics.  Routes are interchangeable where their
//! preconditions overlap, which the tests exploit for cross-checks.

mod ops;
mod routes;

pub use ops::{
    b_e, b_e_mixed_combinator, b_e_star, counting_problem, evaluate_query, r_e_coding,
    sigma_from_eta, spectral_inf_divergence, sweep,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which exponent a query asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentKind {
    /// Decay rate of the type-II error probability under a type-I constraint.
    Error,
    /// Decay rate of the type-II correct-decision probability.
    Correct,
    /// Fixed-length coding rate sustaining a prescribed error decay.
    Coding,
}

impl ExponentKind {
    pub fn label(&self) -> &'static str {
        match self {
            ExponentKind::Error => "error",
            ExponentKind::Correct => "correct",
            ExponentKind::Coding => "coding",
        }
    }

    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "error" => Ok(ExponentKind::Error),
            "correct" => Ok(ExponentKind::Correct),
            "coding" => Ok(ExponentKind::Coding),
            other => Err(Error::InvalidInput(format!(
                "unknown exponent kind {other:?}; expected error, correct, or coding"
            ))),
        }
    }
}

/// Requested evaluation route.  `Auto` picks the cheapest exact route the
/// representation supports; the others force a specific engine and fail when
/// its preconditions do not hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodHint {
    Auto,
    DualParameter,
    RGrid,
    PiecewiseExact,
    ClosedForm,
    Combinator,
}

impl MethodHint {
    pub fn label(&self) -> &'static str {
        match self {
            MethodHint::Auto => "auto",
            MethodHint::DualParameter => "dual-parameter",
            MethodHint::RGrid => "r-grid",
            MethodHint::PiecewiseExact => "piecewise-exact",
            MethodHint::ClosedForm => "closed-form",
            MethodHint::Combinator => "combinator",
        }
    }

    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "auto" => Ok(MethodHint::Auto),
            "dual-parameter" => Ok(MethodHint::DualParameter),
            "r-grid" => Ok(MethodHint::RGrid),
            "piecewise-exact" => Ok(MethodHint::PiecewiseExact),
            "closed-form" => Ok(MethodHint::ClosedForm),
            "combinator" => Ok(MethodHint::Combinator),
            other => Err(Error::InvalidInput(format!(
                "unknown method {other:?}"
            ))),
        }
    }
}

/// How the reported optimum relates to the feasible set.
///
/// `Interior` means the value is attained at the reported rate point.
/// `Boundary` means the infimum is only approached there, as a limit at the
/// feasibility edge or at the spectrum floor.  `Convention` marks fixed
/// endpoint values at r = 0, and `Empty` marks an empty feasible set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Attainment {
    Interior,
    Boundary,
    Convention,
    Empty,
}

impl Attainment {
    pub fn label(&self) -> &'static str {
        match self {
            Attainment::Interior => "interior",
            Attainment::Boundary => "boundary",
            Attainment::Convention => "convention",
            Attainment::Empty => "empty",
        }
    }
}

/// Numeric provenance attached to a scalar result.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub attainment: Attainment,
    /// Final grid spacing, for grid-based routes.
    pub grid_resolution: Option<f64>,
    /// Number of grid refinement rounds performed.
    pub refinement_depth: u32,
}

impl Diagnostics {
    pub(crate) fn exact(attainment: Attainment) -> Self {
        Diagnostics {
            attainment,
            grid_resolution: None,
            refinement_depth: 0,
        }
    }
}

/// A single exponent evaluation request.  `r` is in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentQuery {
    pub kind: ExponentKind,
    pub r: f64,
    pub method: MethodHint,
}

impl ExponentQuery {
    pub fn new(kind: ExponentKind, r: f64) -> Self {
        ExponentQuery {
            kind,
            r,
            method: MethodHint::Auto,
        }
    }

    pub fn with_method(mut self, method: MethodHint) -> Self {
        self.method = method;
        self
    }
}

/// Value of one exponent evaluation.  `value` is extended-real: plus
/// infinity is a legitimate answer at r = 0 for the error kind.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentResult {
    pub value: f64,
    /// Rate point realizing the reported value, when finite.  For boundary
    /// attainment this is the limit point, not a member of the feasible set.
    pub minimizing_r: Option<f64>,
    /// Route that produced the value; never `Auto`.
    pub method: MethodHint,
    pub diagnostics: Diagnostics,
}

/// One sweep entry: the query point and its outcome, errors kept in place.
#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub r: f64,
    pub outcome: Result<ExponentResult>,
}

/// Ordered sweep output tied back to the generating problem.
#[derive(Debug, Clone)]
pub struct ExponentCurve {
    pub kind: ExponentKind,
    pub points: Vec<CurvePoint>,
    /// Fingerprint of the problem the curve was computed from.
    pub fingerprint: u64,
    /// Logarithm base for presentation; values themselves are in nats.
    pub log_base: f64,
}

impl ExponentCurve {
    /// Successfully evaluated points in grid order.
    pub fn values(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.outcome.as_ref().ok().map(|res| (p.r, res.value)))
            .collect()
    }
}
