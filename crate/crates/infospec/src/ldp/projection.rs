//! Minimum relative entropy over the simplex under up to two linear
//! constraints, solved through the exponential-family dual.

use crate::error::{Error, Result};
use crate::models::FiniteDistribution;

const GRAD_TOLERANCE: f64 = 1e-10;
const FEASIBILITY_SLACK: f64 = 1e-9;
const MAX_NEWTON_STEPS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSense {
    LessEq,
    GreaterEq,
    Equal,
}

#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub coefficients: Vec<f64>,
    pub bound: f64,
    pub sense: ConstraintSense,
}

impl LinearConstraint {
    pub fn less_eq(coefficients: Vec<f64>, bound: f64) -> Self {
        Self {
            coefficients,
            bound,
            sense: ConstraintSense::LessEq,
        }
    }

    pub fn greater_eq(coefficients: Vec<f64>, bound: f64) -> Self {
        Self {
            coefficients,
            bound,
            sense: ConstraintSense::GreaterEq,
        }
    }

    pub fn equal(coefficients: Vec<f64>, bound: f64) -> Self {
        Self {
            coefficients,
            bound,
            sense: ConstraintSense::Equal,
        }
    }

    /// Whether an inner product satisfies the constraint, within slack.
    pub fn holds(&self, inner: f64) -> bool {
        let slack = FEASIBILITY_SLACK * (1.0 + self.bound.abs());
        match self.sense {
            ConstraintSense::LessEq => inner <= self.bound + slack,
            ConstraintSense::GreaterEq => inner >= self.bound - slack,
            ConstraintSense::Equal => (inner - self.bound).abs() <= slack,
        }
    }

    /// Inner product of the constraint's coefficients with a mass vector.
    pub fn inner(&self, masses: &[f64]) -> f64 {
        masses
            .iter()
            .zip(&self.coefficients)
            .map(|(m, c)| m * c)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct ProjectionOutcome {
    pub minimizer: FiniteDistribution,
    /// Relative entropy of the minimizer against the base law, nats.
    pub value: f64,
    /// Which input constraints bind at the minimizer.
    pub active: Vec<bool>,
    /// Relative entropy against the reference law, when one was supplied.
    pub value_to_ref: Option<f64>,
}

/// Solve for the exponential tilt of `base` restricted to `support` meeting
/// the listed constraints as equalities.  Returns letter weights on the full
/// alphabet, or None when the bounds cannot be met on this support.
fn solve_equalities(
    base: &FiniteDistribution,
    support: &[usize],
    active: &[&LinearConstraint],
) -> Option<Vec<f64>> {
    if support.is_empty() {
        return None;
    }
    if active.is_empty() {
        let mut q = vec![0.0; base.len()];
        let total: f64 = support.iter().map(|&i| base.mass(i)).sum();
        for &i in support {
            q[i] = base.mass(i) / total;
        }
        return Some(q);
    }

    // Bounds at the edge of the attainable interval force concentration on
    // the extreme letters; restrict the support and drop that constraint.
    for (k, c) in active.iter().enumerate() {
        let lo = support
            .iter()
            .map(|&i| c.coefficients[i])
            .fold(f64::INFINITY, f64::min);
        let hi = support
            .iter()
            .map(|&i| c.coefficients[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-12 * (1.0 + c.bound.abs());
        if c.bound < lo - tol || c.bound > hi + tol {
            return None;
        }
        for (edge, at_edge) in [(lo, c.bound <= lo + tol), (hi, c.bound >= hi - tol)] {
            if at_edge && hi - lo > tol {
                let narrowed: Vec<usize> = support
                    .iter()
                    .copied()
                    .filter(|&i| (c.coefficients[i] - edge).abs() <= tol)
                    .collect();
                let rest: Vec<&LinearConstraint> = active
                    .iter()
                    .enumerate()
                    .filter(|(m, _)| *m != k)
                    .map(|(_, c)| *c)
                    .collect();
                return solve_equalities(base, &narrowed, &rest);
            }
        }
        if hi - lo <= tol {
            // constant coefficient on this support: constraint is either
            // automatic (bound hit exactly) or impossible
            let rest: Vec<&LinearConstraint> = active
                .iter()
                .enumerate()
                .filter(|(m, _)| *m != k)
                .map(|(_, c)| *c)
                .collect();
            return solve_equalities(base, support, &rest);
        }
    }

    let m = active.len();
    let mut theta = vec![0.0f64; m];
    let log_base: Vec<f64> = support.iter().map(|&i| base.mass(i).ln()).collect();
    let coeff: Vec<Vec<f64>> = active
        .iter()
        .map(|c| support.iter().map(|&i| c.coefficients[i]).collect())
        .collect();
    let bounds: Vec<f64> = active.iter().map(|c| c.bound).collect();

    let dual = |theta: &[f64]| -> (f64, Vec<f64>, Vec<f64>) {
        // returns (dual value, tilted weights on support, expectations)
        let mut logits: Vec<f64> = log_base.clone();
        for (t, row) in theta.iter().zip(&coeff) {
            for (l, c) in logits.iter_mut().zip(row) {
                *l += t * c;
            }
        }
        let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        let weights: Vec<f64> = logits
            .iter()
            .map(|l| {
                let w = (l - top).exp();
                z += w;
                w
            })
            .collect();
        let weights: Vec<f64> = weights.iter().map(|w| w / z).collect();
        let log_partition = top + z.ln();
        let mut value = -log_partition;
        for (t, b) in theta.iter().zip(&bounds) {
            value += t * b;
        }
        let expectations: Vec<f64> = coeff
            .iter()
            .map(|row| row.iter().zip(&weights).map(|(c, w)| c * w).sum())
            .collect();
        (value, weights, expectations)
    };

    let (mut value, mut weights, mut expectations) = dual(&theta);
    for _ in 0..MAX_NEWTON_STEPS {
        let grad: Vec<f64> = bounds
            .iter()
            .zip(&expectations)
            .map(|(b, e)| b - e)
            .collect();
        let grad_norm = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        if grad_norm <= GRAD_TOLERANCE {
            let mut q = vec![0.0; base.len()];
            for (&i, &w) in support.iter().zip(&weights) {
                q[i] = w;
            }
            return Some(q);
        }
        // covariance of the active coefficients under the tilted law
        let mut cov = vec![vec![0.0f64; m]; m];
        for a in 0..m {
            for b in a..m {
                let mut s = 0.0;
                for ((ca, cb), w) in coeff[a].iter().zip(&coeff[b]).zip(&weights) {
                    s += (ca - expectations[a]) * (cb - expectations[b]) * w;
                }
                cov[a][b] = s;
                cov[b][a] = s;
            }
        }
        let step = match m {
            1 => {
                if cov[0][0] <= 1e-300 {
                    return None;
                }
                vec![grad[0] / cov[0][0]]
            }
            2 => {
                let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
                let scale = cov[0][0].abs().max(cov[1][1].abs());
                if det.abs() <= 1e-13 * scale.max(1e-300) * scale.max(1e-300) {
                    // coefficients linearly dependent under the tilt; nudge
                    // along the gradient instead
                    grad.iter().map(|g| g / scale.max(1e-12)).collect()
                } else {
                    vec![
                        (cov[1][1] * grad[0] - cov[0][1] * grad[1]) / det,
                        (cov[0][0] * grad[1] - cov[1][0] * grad[0]) / det,
                    ]
                }
            }
            _ => unreachable!("at most two constraints"),
        };
        let mut t = 1.0;
        loop {
            let candidate: Vec<f64> = theta.iter().zip(&step).map(|(th, s)| th + t * s).collect();
            let (v, w, e) = dual(&candidate);
            // non-strict acceptance: near the optimum the improvement per
            // step sits below double resolution
            if v >= value - 1e-15 * (1.0 + value.abs()) || t < 1e-12 {
                theta = candidate;
                value = v;
                weights = w;
                expectations = e;
                break;
            }
            t *= 0.5;
        }
        if theta.iter().any(|t| t.abs() > 1e6) {
            return None;
        }
    }
    None
}

/// I-projection of `base` onto the region cut out by at most two linear
/// constraints on letter expectations.  Inequalities are handled by
/// enumerating which of them bind; the reported value is in nats.
pub fn constrained_i_projection(
    base: &FiniteDistribution,
    constraints: &[LinearConstraint],
    objective_ref: Option<&FiniteDistribution>,
) -> Result<ProjectionOutcome> {
    if constraints.len() > 2 {
        return Err(Error::InvalidInput(
            "at most two linear constraints are supported".into(),
        ));
    }
    for (k, c) in constraints.iter().enumerate() {
        if c.coefficients.len() != base.len() {
            return Err(Error::AlphabetMismatch(format!(
                "constraint {k} has {} coefficients for {} letters",
                c.coefficients.len(),
                base.len()
            )));
        }
        for i in base.support() {
            if !c.coefficients[i].is_finite() {
                return Err(Error::InvalidInput(format!(
                    "constraint {k} has a non-finite coefficient at letter {i}"
                )));
            }
        }
        if !c.bound.is_finite() {
            return Err(Error::InvalidInput(format!(
                "constraint {k} has a non-finite bound"
            )));
        }
    }
    if let Some(r) = objective_ref {
        if r.len() != base.len() {
            return Err(Error::AlphabetMismatch(
                "reference law must share the base alphabet".into(),
            ));
        }
    }

    let support: Vec<usize> = base.support().collect();
    let inequality: Vec<usize> = constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| c.sense != ConstraintSense::Equal)
        .map(|(k, _)| k)
        .collect();
    let equality: Vec<usize> = (0..constraints.len())
        .filter(|k| !inequality.contains(k))
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0..(1usize << inequality.len()) {
        let mut active_idx: Vec<usize> = equality.clone();
        for (bit, &k) in inequality.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                active_idx.push(k);
            }
        }
        let active: Vec<&LinearConstraint> = active_idx.iter().map(|&k| &constraints[k]).collect();
        let Some(q) = solve_equalities(base, &support, &active) else {
            continue;
        };
        let feasible = constraints.iter().all(|c| {
            let inner: f64 = c.coefficients.iter().zip(&q).map(|(c, w)| c * w).sum();
            c.holds(inner)
        });
        if !feasible {
            continue;
        }
        let mut value = 0.0;
        for (i, &w) in q.iter().enumerate() {
            if w > 0.0 {
                value += w * (w / base.mass(i)).ln();
            }
        }
        if best.as_ref().map_or(true, |(v, _)| value < *v) {
            best = Some((value, q));
        }
    }

    let Some((value, q)) = best else {
        return Err(Error::Infeasible(
            "no distribution on the base support satisfies the constraints".into(),
        ));
    };
    let minimizer = FiniteDistribution::new(q)?;
    let active = constraints
        .iter()
        .map(|c| {
            let inner: f64 = c
                .coefficients
                .iter()
                .zip(minimizer.masses())
                .map(|(c, w)| c * w)
                .sum();
            (inner - c.bound).abs() <= 1e-8 * (1.0 + c.bound.abs())
        })
        .collect();
    let value_to_ref = objective_ref.map(|r| minimizer.relative_entropy(r));
    Ok(ProjectionOutcome {
        minimizer,
        value,
        active,
        value_to_ref,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldp::cgf::cgf_iid;
    use crate::ldp::legendre::tilted_distribution;
    use crate::models::TestingProblem;

    fn dist(masses: &[f64]) -> FiniteDistribution {
        FiniteDistribution::new(masses.to_vec()).unwrap()
    }

    #[test]
    fn unconstrained_projection_returns_base() {
        let base = dist(&[0.2, 0.3, 0.5]);
        let out = constrained_i_projection(&base, &[], None).unwrap();
        assert!(out.value.abs() < 1e-14);
        for i in 0..3 {
            assert!((out.minimizer.mass(i) - base.mass(i)).abs() < 1e-14);
        }
    }

    #[test]
    fn equality_constraint_matches_tilted_law() {
        let p = dist(&[0.5, 0.5]);
        let pb = dist(&[0.9, 0.1]);
        let problem = TestingProblem::iid(p.clone(), pb.clone()).unwrap();
        let cgf = cgf_iid(&problem).unwrap();
        let coeff: Vec<f64> = (0..2)
            .map(|i| (p.mass(i) / pb.mass(i)).ln())
            .collect();
        for r in [-0.25, 0.0, 0.2] {
            let expect = tilted_distribution(&cgf, r).unwrap();
            let out = constrained_i_projection(
                &p,
                &[LinearConstraint::equal(coeff.clone(), r)],
                None,
            )
            .unwrap();
            for i in 0..2 {
                assert!((out.minimizer.mass(i) - expect.mass(i)).abs() < 1e-8);
            }
            assert!((out.value - expect.relative_entropy(&p)).abs() < 1e-8);
            assert!(out.active[0]);
        }
    }

    #[test]
    fn binding_inequality_on_binary_alphabet() {
        let base = dist(&[0.5, 0.5]);
        let out = constrained_i_projection(
            &base,
            &[LinearConstraint::greater_eq(vec![1.0, 0.0], 0.8)],
            None,
        )
        .unwrap();
        assert!((out.minimizer.mass(0) - 0.8).abs() < 1e-9);
        let expect = 0.8 * (0.8f64 / 0.5).ln() + 0.2 * (0.2f64 / 0.5).ln();
        assert!((out.value - expect).abs() < 1e-9);
        assert!(out.active[0]);
    }

    #[test]
    fn slack_inequality_leaves_base_untouched() {
        let base = dist(&[0.5, 0.5]);
        let out = constrained_i_projection(
            &base,
            &[LinearConstraint::less_eq(vec![1.0, 0.0], 0.9)],
            None,
        )
        .unwrap();
        assert!(out.value.abs() < 1e-14);
        assert!(!out.active[0]);
    }

    #[test]
    fn unattainable_bound_is_infeasible() {
        let base = dist(&[0.5, 0.5]);
        let err = constrained_i_projection(
            &base,
            &[LinearConstraint::greater_eq(vec![1.0, 0.0], 2.0)],
            None,
        );
        assert!(matches!(err, Err(Error::Infeasible(_))));
    }

    #[test]
    fn boundary_bound_concentrates_support() {
        let base = dist(&[0.5, 0.5]);
        let out = constrained_i_projection(
            &base,
            &[LinearConstraint::equal(vec![1.0, 0.0], 1.0)],
            None,
        )
        .unwrap();
        assert!((out.minimizer.mass(0) - 1.0).abs() < 1e-12);
        assert!((out.value - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn two_constraints_with_reference_reporting() {
        let base = dist(&[0.25, 0.25, 0.25, 0.25]);
        let reference = dist(&[0.4, 0.3, 0.2, 0.1]);
        let out = constrained_i_projection(
            &base,
            &[
                LinearConstraint::greater_eq(vec![1.0, 1.0, 0.0, 0.0], 0.7),
                LinearConstraint::less_eq(vec![0.0, 1.0, 1.0, 0.0], 0.3),
            ],
            Some(&reference),
        )
        .unwrap();
        let q = &out.minimizer;
        assert!(q.mass(0) + q.mass(1) >= 0.7 - 1e-8);
        assert!(q.mass(1) + q.mass(2) <= 0.3 + 1e-8);
        let reported = out.value_to_ref.unwrap();
        assert!((reported - q.relative_entropy(&reference)).abs() < 1e-12);
    }
}
