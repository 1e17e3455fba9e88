//! Brute-force constrained divergence minimization on a simplex grid.
//!
//! Independent of the Newton machinery, so the two can check each other.
//! The returned bound is first-order: grid spacing times a gradient bound
//! at the reported minimizer.

use crate::error::{Error, Result};
use crate::ldp::LinearConstraint;
use crate::models::FiniteDistribution;

const POINT_BUDGET: f64 = 1e7;

/// Result of a grid search over the probability simplex.
#[derive(Debug, Clone)]
pub struct SimplexGridOutcome {
    pub value: f64,
    pub minimizer: Vec<f64>,
    /// first-order bound on the gap to the true constrained minimum
    pub error_bound: f64,
    /// number of grid points satisfying all constraints
    pub feasible_points: usize,
}

/// Minimize `D(q || base)` over the grid `q = counts / steps` subject to
/// the constraints.  Supports alphabets of size at most 3.
pub fn simplex_grid_projection(
    base: &FiniteDistribution,
    constraints: &[LinearConstraint],
    steps: usize,
) -> Result<SimplexGridOutcome> {
    let letters = base.len();
    if letters > 3 {
        return Err(Error::Unsupported(
            "the simplex grid search covers alphabets of size at most 3".into(),
        ));
    }
    if steps == 0 {
        return Err(Error::InvalidInput("grid must have at least one step".into()));
    }
    let points = match letters {
        1 => 1.0,
        2 => steps as f64 + 1.0,
        _ => (steps as f64 + 1.0) * (steps as f64 + 2.0) / 2.0,
    };
    if points > POINT_BUDGET {
        return Err(Error::ResourceBudget(format!(
            "{points:.0} grid points exceed the budget of 1e7"
        )));
    }

    let divergence = |q: &[f64]| -> f64 {
        let mut total = 0.0;
        for (i, &mass) in q.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            if base.mass(i) == 0.0 {
                return f64::INFINITY;
            }
            total += mass * (mass / base.mass(i)).ln();
        }
        total
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut feasible_points = 0usize;
    let mut visit = |q: &[f64]| {
        if !constraints.iter().all(|c| c.holds(c.inner(q))) {
            return;
        }
        feasible_points += 1;
        let value = divergence(q);
        if value.is_finite() && best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, q.to_vec()));
        }
    };

    let m = steps as f64;
    match letters {
        1 => visit(&[1.0]),
        2 => {
            for i in 0..=steps {
                visit(&[i as f64 / m, (steps - i) as f64 / m]);
            }
        }
        _ => {
            for i in 0..=steps {
                for j in 0..=steps - i {
                    visit(&[i as f64 / m, j as f64 / m, (steps - i - j) as f64 / m]);
                }
            }
        }
    }

    let Some((value, minimizer)) = best else {
        return Err(Error::Infeasible(
            "no grid point satisfies the constraints".into(),
        ));
    };
    let spacing = 1.0 / m;
    let gradient_bound = minimizer
        .iter()
        .enumerate()
        .filter(|(_, &q)| q > 0.0)
        .map(|(i, &q)| (q / base.mass(i)).ln().abs() + 1.0)
        .fold(0.0, f64::max);
    Ok(SimplexGridOutcome {
        value,
        minimizer,
        error_bound: spacing * gradient_bound * letters as f64,
        feasible_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldp::constrained_i_projection;

    #[test]
    fn binary_grid_matches_the_newton_projection() {
        let base = FiniteDistribution::new(vec![0.8, 0.2]).unwrap();
        let ratio = vec![0.8f64.ln() - 0.2f64.ln(), 0.2f64.ln() - 0.8f64.ln()];
        let constraints = [LinearConstraint::less_eq(ratio, 0.5)];
        let grid = simplex_grid_projection(&base, &constraints, 1_000_000).unwrap();
        let newton = constrained_i_projection(&base, &constraints, None).unwrap();
        assert!(
            (grid.value - newton.value).abs() < 1e-4,
            "grid {} vs newton {}",
            grid.value,
            newton.value
        );
        assert!(grid.error_bound < 1e-4);
    }

    #[test]
    fn ternary_grid_matches_the_newton_projection() {
        let base = FiniteDistribution::new(vec![0.5, 0.3, 0.2]).unwrap();
        let mean = vec![0.0, 1.0, 2.0];
        let constraints = [LinearConstraint::greater_eq(mean, 1.1)];
        let grid = simplex_grid_projection(&base, &constraints, 2_000).unwrap();
        let newton = constrained_i_projection(&base, &constraints, None).unwrap();
        assert!(
            (grid.value - newton.value).abs() < 5e-3,
            "grid {} vs newton {}",
            grid.value,
            newton.value
        );
        assert!((grid.value - newton.value).abs() <= grid.error_bound + 1e-9);
    }

    #[test]
    fn infeasible_constraints_are_reported() {
        let base = FiniteDistribution::new(vec![0.5, 0.5]).unwrap();
        let constraints = [LinearConstraint::greater_eq(vec![1.0, 1.0], 2.0)];
        assert!(matches!(
            simplex_grid_projection(&base, &constraints, 100),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn alphabet_and_budget_limits_hold() {
        let base4 = FiniteDistribution::uniform(4);
        assert!(matches!(
            simplex_grid_projection(&base4, &[], 10),
            Err(Error::Unsupported(_))
        ));
        let base3 = FiniteDistribution::uniform(3);
        assert!(matches!(
            simplex_grid_projection(&base3, &[], 10_000),
            Err(Error::ResourceBudget(_))
        ));
    }
}
