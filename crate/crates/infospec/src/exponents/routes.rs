//! Evaluation routes shared by the exponent operations.
//!
//! The dual-parameter route works on the cumulant-generating function of the
//! divergence density: with psi(t) = t phi(t) - Lambda(t) decreasing on the
//! negative axis, the optimal tilt is the solution of psi(t) = r capped at
//! t = -1, and the reported rate point is phi at that tilt.  The r-grid route
//! minimizes the defining objective directly on an adaptive grid and is the
//! only route available for projection-based tail exponents.  Piecewise and
//! closed-form routes are exact.

use crate::error::{Error, Result};
use crate::exponents::{Attainment, Diagnostics, ExponentResult, MethodHint};
use crate::ldp::{CgfEvaluator, EtaFunction};

const PSI_TOLERANCE: f64 = 1e-10;
const THETA_LIMIT: f64 = 1e8;
const INITIAL_POINTS: usize = 2048;
const REFINE_POINTS: usize = 256;
const TARGET_RESOLUTION: f64 = 1e-6;
const MIN_REFINEMENTS: u32 = 2;
const MAX_REFINEMENTS: u32 = 10;

/// Raw outcome of one evaluation route.
pub(crate) struct RouteOutcome {
    pub value: f64,
    pub minimizing_r: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl RouteOutcome {
    fn exact(value: f64, minimizing_r: f64, attainment: Attainment) -> Self {
        RouteOutcome {
            value: snap_zero(value),
            minimizing_r: Some(minimizing_r),
            diagnostics: Diagnostics::exact(attainment),
        }
    }

    pub(crate) fn into_result(self, method: MethodHint) -> ExponentResult {
        ExponentResult {
            value: self.value,
            minimizing_r: self.minimizing_r,
            method,
            diagnostics: self.diagnostics,
        }
    }
}

/// Collapse float dust around zero; true values this close to zero do not
/// occur away from the exact-zero regimes.
fn snap_zero(value: f64) -> f64 {
    if value.abs() < 1e-12 {
        0.0
    } else {
        value
    }
}

fn psi(cgf: &CgfEvaluator, theta: f64) -> Result<f64> {
    Ok(theta * cgf.phi(theta)? - cgf.lambda(theta)?)
}

/// Solve psi(theta) = r on the negative axis.  `None` means the equation has
/// no solution above the tilt cap, i.e. r is at or beyond the supremum of
/// the tail exponent.
fn solve_psi(cgf: &CgfEvaluator, r: f64) -> Result<Option<f64>> {
    let mut hi = 0.0_f64;
    let mut lo = -1.0_f64;
    loop {
        if psi(cgf, lo)? >= r {
            break;
        }
        hi = lo;
        lo *= 2.0;
        if lo < -THETA_LIMIT {
            return Ok(None);
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let p = psi(cgf, mid)?;
        if (p - r).abs() <= PSI_TOLERANCE * (1.0 + r) {
            return Ok(Some(mid));
        }
        if p >= r {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + mid.abs()) {
            return Ok(Some(mid));
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Error-exponent dual route: tilt capped below at -1; tilts past the cap
/// all map to the stationary point phi(-1).
pub(crate) fn dual_error(cgf: &CgfEvaluator, r: f64) -> Result<RouteOutcome> {
    match solve_psi(cgf, r)? {
        Some(t) if t >= -1.0 => {
            // infimum approached at the feasibility edge R_r = phi(t)
            let edge = cgf.phi(t)?;
            Ok(RouteOutcome::exact(edge + r, edge, Attainment::Boundary))
        }
        _ => {
            let value = -cgf.lambda(-1.0)?;
            Ok(RouteOutcome::exact(
                value,
                cgf.phi(-1.0)?,
                Attainment::Interior,
            ))
        }
    }
}

/// Correct-exponent dual route: tilt capped above at -1; when the equation
/// has no solution the optimum sits at the spectrum floor.
pub(crate) fn dual_correct(cgf: &CgfEvaluator, r: f64) -> Result<RouteOutcome> {
    match solve_psi(cgf, r)? {
        Some(t) if t <= -1.0 => {
            let kink = cgf.phi(t)?;
            Ok(RouteOutcome::exact(kink + r, kink, Attainment::Boundary))
        }
        Some(_) => {
            let value = -cgf.lambda(-1.0)?;
            Ok(RouteOutcome::exact(
                value,
                cgf.phi(-1.0)?,
                Attainment::Interior,
            ))
        }
        None => {
            let floor = cgf.phi_range().0;
            if !floor.is_finite() {
                return Err(Error::Numeric(
                    "tilt overflow before reaching the requested constraint".into(),
                ));
            }
            Ok(RouteOutcome::exact(floor + r, floor, Attainment::Boundary))
        }
    }
}

/// Exact error-exponent minimization over a piecewise-constant tail
/// exponent: each feasible piece contributes its left endpoint.
pub(crate) fn piecewise_error(pieces: &[(f64, f64)], r: f64) -> RouteOutcome {
    let mut edge: Option<f64> = None;
    let mut best: Option<(f64, f64)> = None;
    for &(start, value) in pieces {
        if value < r {
            if edge.is_none() {
                edge = Some(start);
            }
            let objective = start + value;
            if best.is_none_or(|(b, _)| objective < b) {
                best = Some((objective, start));
            }
        }
    }
    match best {
        None => RouteOutcome {
            value: f64::INFINITY,
            minimizing_r: None,
            diagnostics: Diagnostics::exact(Attainment::Empty),
        },
        Some((objective, start)) => {
            let attainment = if edge == Some(start) {
                Attainment::Boundary
            } else {
                Attainment::Interior
            };
            RouteOutcome::exact(objective, start, attainment)
        }
    }
}

/// Exact correct-exponent minimization over a piecewise-constant tail
/// exponent; the objective is closed, so every piece competes.
pub(crate) fn piecewise_correct(pieces: &[(f64, f64)], r: f64) -> RouteOutcome {
    let mut best: Option<(f64, usize)> = None;
    for (i, &(start, value)) in pieces.iter().enumerate() {
        let objective = start + value + (r - value).max(0.0);
        if best.is_none_or(|(b, _)| objective < b) {
            best = Some((objective, i));
        }
    }
    let (objective, i) = best.expect("piecewise tail exponents have at least one piece");
    let crosses = i > 0 && pieces[i - 1].1 >= r && pieces[i].1 <= r;
    let attainment = if i == 0 || crosses {
        Attainment::Boundary
    } else {
        Attainment::Interior
    };
    RouteOutcome::exact(objective, pieces[i].0, attainment)
}

/// Gaussian mean-shift error exponent in closed form.
pub(crate) fn closed_form_error(a: f64, r: f64) -> RouteOutcome {
    if r < a {
        RouteOutcome::exact(
            (r.sqrt() - a.sqrt()).powi(2),
            a - 2.0 * (a * r).sqrt(),
            Attainment::Boundary,
        )
    } else {
        RouteOutcome::exact(0.0, -a, Attainment::Interior)
    }
}

/// Gaussian mean-shift correct exponent in closed form.
pub(crate) fn closed_form_correct(a: f64, r: f64) -> RouteOutcome {
    if r > a {
        RouteOutcome::exact(
            (r.sqrt() - a.sqrt()).powi(2),
            a - 2.0 * (a * r).sqrt(),
            Attainment::Boundary,
        )
    } else {
        RouteOutcome::exact(0.0, -a, Attainment::Interior)
    }
}

struct Candidate {
    objective: f64,
    point: f64,
    at_edge: bool,
}

fn grid_objective(eta_value: f64, point: f64, r: f64, correct: bool) -> f64 {
    if correct {
        if eta_value.is_finite() {
            point + eta_value + (r - eta_value).max(0.0)
        } else {
            f64::INFINITY
        }
    } else if eta_value < r {
        point + eta_value
    } else {
        f64::INFINITY
    }
}

/// Adaptive grid minimization of the defining objective.  Feasibility edges
/// are located by bisection so the open-constraint infimum is captured as a
/// limit rather than at grid resolution.
pub(crate) fn grid_route(eta: &EtaFunction, r: f64, correct: bool) -> Result<RouteOutcome> {
    let d = eta.d_lower();
    let floor = eta.spectrum_floor();
    let mut hi = d + 1.0;
    let mut lo = if floor.is_finite() { floor - 1.0 } else { d - 1.0 };
    let mut width = (hi - lo).max(1.0);
    for _ in 0..120 {
        if !(eta.value(lo)? < r) {
            break;
        }
        lo -= width;
        width *= 2.0;
    }

    let mut best: Option<Candidate> = None;
    let consider = |objective: f64, point: f64, at_edge: bool, best: &mut Option<Candidate>| {
        if objective.is_finite()
            && best
                .as_ref()
                .is_none_or(|c| objective < c.objective)
        {
            *best = Some(Candidate {
                objective,
                point,
                at_edge,
            });
        }
    };

    // initial scan, widening the window when the optimum presses an edge
    let mut scan: Vec<(f64, f64)> = Vec::with_capacity(INITIAL_POINTS + 1);
    for _ in 0..4 {
        scan.clear();
        let step = (hi - lo) / INITIAL_POINTS as f64;
        for k in 0..=INITIAL_POINTS {
            let point = lo + step * k as f64;
            scan.push((point, eta.value(point)?));
        }
        let mut argmin: Option<(f64, usize)> = None;
        for (k, &(point, ev)) in scan.iter().enumerate() {
            let obj = grid_objective(ev, point, r, correct);
            if obj.is_finite() && argmin.is_none_or(|(b, _)| obj < b) {
                argmin = Some((obj, k));
            }
        }
        match argmin {
            Some((_, k)) if k == 0 => lo -= hi - lo,
            Some((_, k)) if k == INITIAL_POINTS => hi += hi - lo,
            _ => break,
        }
    }
    for &(point, ev) in &scan {
        let obj = grid_objective(ev, point, r, correct);
        consider(obj, point, false, &mut best);
    }
    if floor.is_finite() {
        let ev = eta.value(floor)?;
        consider(grid_objective(ev, floor, r, correct), floor, true, &mut best);
    }

    // locate feasibility edges: the strict constraint's infimum lives there
    let mut edges: Vec<f64> = Vec::new();
    if !correct {
        for k in 1..scan.len() {
            let infeasible_left = !(scan[k - 1].1 < r);
            let feasible_right = scan[k].1 < r;
            if infeasible_left && feasible_right {
                let (mut a, mut b) = (scan[k - 1].0, scan[k].0);
                let mut eta_b = scan[k].1;
                for _ in 0..100 {
                    let mid = 0.5 * (a + b);
                    let ev = eta.value(mid)?;
                    if ev < r {
                        b = mid;
                        eta_b = ev;
                    } else {
                        a = mid;
                    }
                    if b - a <= 1e-13 * (1.0 + b.abs()) {
                        break;
                    }
                }
                consider(b + eta_b, b, true, &mut best);
                edges.push(b);
                if edges.len() >= 8 {
                    break;
                }
            }
        }
    }

    let Some(mut current) = best.take() else {
        return Ok(RouteOutcome {
            value: f64::INFINITY,
            minimizing_r: None,
            diagnostics: Diagnostics {
                attainment: Attainment::Empty,
                grid_resolution: Some((hi - lo) / INITIAL_POINTS as f64),
                refinement_depth: 0,
            },
        });
    };

    // refine around the incumbent until the spacing is resolved
    let mut step = (hi - lo) / INITIAL_POINTS as f64;
    let mut depth = 0u32;
    loop {
        depth += 1;
        let wlo = (current.point - 2.0 * step).max(lo);
        let whi = (current.point + 2.0 * step).min(hi);
        step = (whi - wlo) / REFINE_POINTS as f64;
        for k in 0..=REFINE_POINTS {
            let point = wlo + step * k as f64;
            let obj = grid_objective(eta.value(point)?, point, r, correct);
            let mut slot = Some(current);
            consider(obj, point, false, &mut slot);
            current = slot.expect("incumbent persists");
        }
        if (depth >= MIN_REFINEMENTS && step <= TARGET_RESOLUTION) || depth >= MAX_REFINEMENTS {
            break;
        }
    }

    let attainment = if correct {
        let near_floor = floor.is_finite() && (current.point - floor).abs() <= 2.0 * step;
        let left = eta.value(current.point - 2.0 * step)?;
        let here = eta.value(current.point)?;
        if near_floor || current.at_edge || (!(left < r) && !(here > r)) {
            Attainment::Boundary
        } else {
            Attainment::Interior
        }
    } else if current.at_edge
        || edges
            .iter()
            .any(|e| (current.point - e).abs() <= 2.0 * step)
    {
        Attainment::Boundary
    } else {
        Attainment::Interior
    };

    Ok(RouteOutcome {
        value: snap_zero(current.objective),
        minimizing_r: Some(current.point),
        diagnostics: Diagnostics {
            attainment,
            grid_resolution: Some(step),
            refinement_depth: depth,
        },
    })
}
