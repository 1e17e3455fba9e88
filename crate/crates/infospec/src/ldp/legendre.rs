//! Legendre-Fenchel transform of the cumulant generating function and the
//! exponentially tilted letter laws realizing each slope.

use crate::error::{Error, Result};
use crate::ldp::cgf::CgfEvaluator;
use crate::models::FiniteDistribution;

/// Target residual |phi(theta) - x| for the slope equation.
const SLOPE_TOLERANCE: f64 = 1e-10;
/// Slope interval narrower than this counts as a single-atom spectrum.
pub const DEGENERATE_SPREAD: f64 = 1e-12;
const THETA_CAP: f64 = 1e8;

/// Solution of sup_theta (theta x - Lambda(theta)).
#[derive(Debug, Clone, Copy)]
pub struct LegendrePoint {
    pub value: f64,
    /// Maximizing tilt; infinite at domain endpoints, meaningless when the
    /// value is infinite.
    pub theta: f64,
}

fn endpoint_tolerance(x: f64) -> f64 {
    1e-12 * (1.0 + x.abs())
}

/// Evaluate the convex rate function I(x) = sup_theta (theta x - Lambda).
///
/// Interior slopes are found by bracketing bisection on phi until the
/// residual drops below 1e-10 or the bracket collapses; endpoint slopes get
/// the limiting supremum.  Arguments outside the closed slope interval are
/// domain errors.
pub fn legendre(cgf: &CgfEvaluator, x: f64) -> Result<LegendrePoint> {
    let (lo, hi) = cgf.phi_range();
    if hi - lo <= DEGENERATE_SPREAD {
        let center = 0.5 * (lo + hi);
        if (x - center).abs() <= endpoint_tolerance(x) {
            return Ok(LegendrePoint {
                value: 0.0,
                theta: 0.0,
            });
        }
        return Ok(LegendrePoint {
            value: f64::INFINITY,
            theta: 0.0,
        });
    }
    if x < lo - endpoint_tolerance(x) || x > hi + endpoint_tolerance(x) {
        return Err(Error::Domain { x, lo, hi });
    }
    if x >= hi - endpoint_tolerance(x) && hi.is_finite() {
        return Ok(LegendrePoint {
            value: cgf.endpoint_rate(true)?,
            theta: f64::INFINITY,
        });
    }
    if x <= lo + endpoint_tolerance(x) && lo.is_finite() {
        return Ok(LegendrePoint {
            value: cgf.endpoint_rate(false)?,
            theta: f64::NEG_INFINITY,
        });
    }

    let mut t_lo = -1.0;
    let mut t_hi = 1.0;
    while cgf.phi(t_lo)? > x {
        t_lo *= 2.0;
        if t_lo < -THETA_CAP {
            return Ok(LegendrePoint {
                value: cgf.endpoint_rate(false)?,
                theta: f64::NEG_INFINITY,
            });
        }
    }
    while cgf.phi(t_hi)? < x {
        t_hi *= 2.0;
        if t_hi > THETA_CAP {
            return Ok(LegendrePoint {
                value: cgf.endpoint_rate(true)?,
                theta: f64::INFINITY,
            });
        }
    }
    let mut theta = 0.5 * (t_lo + t_hi);
    for _ in 0..400 {
        theta = 0.5 * (t_lo + t_hi);
        let slope = cgf.phi(theta)?;
        if (slope - x).abs() <= SLOPE_TOLERANCE {
            break;
        }
        if slope < x {
            t_lo = theta;
        } else {
            t_hi = theta;
        }
        if t_hi - t_lo <= 1e-14 * (1.0 + theta.abs()) {
            break;
        }
    }
    Ok(LegendrePoint {
        value: theta * x - cgf.lambda(theta)?,
        theta,
    })
}

/// Convex rate function of the divergence density with its zero location.
#[derive(Debug, Clone)]
pub struct RateFunction {
    cgf: CgfEvaluator,
    minimizer: f64,
}

impl RateFunction {
    pub fn new(cgf: CgfEvaluator) -> Result<Self> {
        let minimizer = cgf.phi(0.0)?;
        Ok(Self { cgf, minimizer })
    }

    pub fn cgf(&self) -> &CgfEvaluator {
        &self.cgf
    }

    /// Location where the rate vanishes: the law-of-large-numbers slope.
    pub fn minimizer(&self) -> f64 {
        self.minimizer
    }

    /// Closure of the slope interval where the rate is finite.
    pub fn domain(&self) -> (f64, f64) {
        self.cgf.phi_range()
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        Ok(legendre(&self.cgf, x)?.value)
    }
}

/// Letter law tilted to make the expected divergence density equal `r`;
/// series models only.
pub fn tilted_distribution(cgf: &CgfEvaluator, r: f64) -> Result<FiniteDistribution> {
    let point = legendre(cgf, r)?;
    if !point.value.is_finite() {
        let (lo, hi) = cgf.phi_range();
        return Err(Error::Domain { x: r, lo, hi });
    }
    let theta = if point.theta.is_finite() {
        point.theta
    } else if point.theta > 0.0 {
        THETA_CAP
    } else {
        -THETA_CAP
    };
    let weights = cgf.tilted_letters(theta).ok_or_else(|| {
        Error::Unsupported("tilted letter laws exist only for series models".into())
    })?;
    FiniteDistribution::new(weights)
}
