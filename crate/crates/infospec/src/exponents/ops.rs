//! Public exponent operations built on the evaluation routes.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponents::routes::{
    closed_form_correct, closed_form_error, dual_correct, dual_error, grid_route, piecewise_correct,
    piecewise_error,
};
use crate::exponents::{
    Attainment, CurvePoint, Diagnostics, ExponentCurve, ExponentKind, ExponentQuery,
    ExponentResult, MethodHint,
};
use crate::ldp::{eta_for_problem, EtaFunction};
use crate::models::{
    check_theorem4_assumptions, mean_divergence, AlternativeMeasure, AssumptionsReport,
    MixtureComponent, SourceModel, TestingProblem,
};

fn validate_r(r: f64) -> Result<()> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidInput(format!(
            "constraint rate r = {r} must be a finite nonnegative real"
        )));
    }
    Ok(())
}

fn gaussian_rate_of(eta: &EtaFunction) -> Option<f64> {
    eta.rate().and_then(|rate| rate.cgf().gaussian_rate())
}

/// Pick the engine for a tail-exponent representation, honoring a forced
/// hint when its preconditions hold.
fn resolve_route(eta: &EtaFunction, hint: MethodHint) -> Result<MethodHint> {
    match hint {
        MethodHint::Auto => Ok(if eta.pieces().is_some() {
            MethodHint::PiecewiseExact
        } else if eta.is_projection_based() {
            MethodHint::RGrid
        } else {
            MethodHint::DualParameter
        }),
        MethodHint::DualParameter => {
            if eta.rate().is_some() {
                Ok(hint)
            } else {
                Err(Error::Unsupported(
                    "the dual-parameter route needs a cumulant representation of the spectrum"
                        .into(),
                ))
            }
        }
        MethodHint::RGrid => Ok(hint),
        MethodHint::PiecewiseExact => {
            if eta.pieces().is_some() {
                Ok(hint)
            } else {
                Err(Error::Unsupported(
                    "the piecewise route needs an exact staircase spectrum".into(),
                ))
            }
        }
        MethodHint::ClosedForm => {
            if gaussian_rate_of(eta).is_some() {
                Ok(hint)
            } else {
                Err(Error::Unsupported(
                    "closed forms are only available for the Gaussian mean shift".into(),
                ))
            }
        }
        MethodHint::Combinator => Err(Error::Unsupported(
            "the combinator evaluates whole mixture problems; query the problem, not a tail \
             exponent"
                .into(),
        )),
    }
}

fn convention(value: f64, method: MethodHint) -> ExponentResult {
    ExponentResult {
        value,
        minimizing_r: None,
        method,
        diagnostics: Diagnostics::exact(Attainment::Convention),
    }
}

/// Optimal error-probability decay under the constraint that the type-I
/// error decays faster than `exp(-n r)`; infinite at r = 0.
pub fn b_e(eta: &EtaFunction, r: f64, hint: MethodHint) -> Result<ExponentResult> {
    validate_r(r)?;
    let route = resolve_route(eta, hint)?;
    if r == 0.0 {
        return Ok(convention(f64::INFINITY, route));
    }
    let outcome = match route {
        MethodHint::PiecewiseExact => {
            piecewise_error(eta.pieces().expect("resolved piecewise"), r)
        }
        MethodHint::DualParameter => dual_error(eta.rate().expect("resolved dual").cgf(), r)?,
        MethodHint::ClosedForm => {
            closed_form_error(gaussian_rate_of(eta).expect("resolved closed form"), r)
        }
        MethodHint::RGrid => grid_route(eta, r, false)?,
        MethodHint::Auto | MethodHint::Combinator => unreachable!("resolved above"),
    };
    Ok(outcome.into_result(route))
}

/// Optimal correct-decoding decay when the test is forced to reject at rate
/// r; zero (or the alternative's total-mass floor) at r = 0.  Requires the
/// tail exponent's defining limit to exist and the support conditions
/// recorded in `assumptions` to hold.
pub fn b_e_star(
    eta: &EtaFunction,
    r: f64,
    assumptions: &AssumptionsReport,
    hint: MethodHint,
) -> Result<ExponentResult> {
    validate_r(r)?;
    assumptions.require_passed()?;
    if !eta.limit_exists() {
        return Err(Error::Unsupported(
            "correct-decoding exponents need the spectrum tail limit to exist, not just a lim inf"
                .into(),
        ));
    }
    let route = resolve_route(eta, hint)?;
    if r == 0.0 {
        let value = if assumptions.probability_alternative {
            0.0
        } else {
            assumptions.total_mass_exponent
        };
        return Ok(convention(value, route));
    }
    let mut outcome = match route {
        MethodHint::PiecewiseExact => {
            piecewise_correct(eta.pieces().expect("resolved piecewise"), r)
        }
        MethodHint::DualParameter => dual_correct(eta.rate().expect("resolved dual").cgf(), r)?,
        MethodHint::ClosedForm => {
            closed_form_correct(gaussian_rate_of(eta).expect("resolved closed form"), r)
        }
        MethodHint::RGrid => grid_route(eta, r, true)?,
        MethodHint::Auto | MethodHint::Combinator => unreachable!("resolved above"),
    };
    if assumptions.probability_alternative && outcome.value < 0.0 && outcome.value > -1e-12 {
        outcome.value = 0.0;
    }
    Ok(outcome.into_result(route))
}

/// The source paired against the counting measure on its own alphabet.
pub fn counting_problem(source: &SourceModel) -> Result<TestingProblem> {
    TestingProblem::new(
        source.clone(),
        AlternativeMeasure::Counting,
        std::f64::consts::E,
    )
}

fn coding_from_eta(eta: &EtaFunction, r: f64, hint: MethodHint) -> Result<ExponentResult> {
    let route = resolve_route(eta, hint)?;
    if r == 0.0 {
        return Ok(convention(0.0, route));
    }
    let inner = b_e(eta, r, hint)?;
    let mut value = -inner.value;
    if value < 0.0 && value > -1e-12 {
        value = 0.0;
    }
    Ok(ExponentResult {
        value,
        minimizing_r: inner.minimizing_r.map(|x| -x),
        method: inner.method,
        diagnostics: inner.diagnostics,
    })
}

/// Smallest fixed-length coding rate whose decoding-error probability can
/// decay faster than `exp(-n r)`: the sign-flipped error exponent of the
/// source against counting measure.  Zero at r = 0.
pub fn r_e_coding(source: &SourceModel, r: f64, hint: MethodHint) -> Result<ExponentResult> {
    validate_r(r)?;
    let problem = counting_problem(source)?;
    let eta = eta_for_problem(&problem)?;
    coding_from_eta(&eta, r, hint)
}

/// Source-coding tail exponent sigma(R): the counting-measure spectrum tail
/// read at -R.
pub fn sigma_from_eta(eta: &EtaFunction, rate_point: f64) -> Result<f64> {
    eta.value(-rate_point)
}

fn component_problem(
    component: &MixtureComponent,
    problem: &TestingProblem,
) -> Result<TestingProblem> {
    let null = match component {
        MixtureComponent::Iid(d) => SourceModel::Iid(d.clone()),
        MixtureComponent::Markov(m) => SourceModel::Markov(m.clone()),
    };
    TestingProblem::new(null, problem.alternative().clone(), problem.log_base())
}

/// Error exponent of a two-component mixture as the smaller of the two
/// component exponents against the shared alternative.
pub fn b_e_mixed_combinator(
    problem: &TestingProblem,
    r: f64,
    hint: MethodHint,
) -> Result<ExponentResult> {
    validate_r(r)?;
    let SourceModel::Mixed(mix) = problem.null() else {
        return Err(Error::Unsupported(
            "the combinator route needs a mixture null".into(),
        ));
    };
    let inner_hint = match hint {
        MethodHint::Auto | MethodHint::Combinator => MethodHint::Auto,
        other => other,
    };
    let mut best: Option<ExponentResult> = None;
    for component in mix.components() {
        let sub = component_problem(component, problem)?;
        let eta = eta_for_problem(&sub)?;
        let result = b_e(&eta, r, inner_hint)?;
        if best.as_ref().is_none_or(|b| result.value < b.value) {
            best = Some(result);
        }
    }
    let mut result = best.expect("mixtures have two components");
    result.method = MethodHint::Combinator;
    Ok(result)
}

/// First-order threshold of the divergence spectrum: where the tail
/// exponent hits zero.  Infinite when null mass escapes the alternative's
/// support.
pub fn spectral_inf_divergence(problem: &TestingProblem) -> Result<f64> {
    Ok(mean_divergence(problem)?.nats)
}

/// Evaluate one scalar query against a problem, building the tail exponent
/// and assumption report as the kind requires.
pub fn evaluate_query(problem: &TestingProblem, query: &ExponentQuery) -> Result<ExponentResult> {
    match query.kind {
        ExponentKind::Error => {
            if query.method == MethodHint::Combinator {
                b_e_mixed_combinator(problem, query.r, MethodHint::Auto)
            } else {
                let eta = eta_for_problem(problem)?;
                b_e(&eta, query.r, query.method)
            }
        }
        ExponentKind::Correct => {
            let report = check_theorem4_assumptions(problem)?;
            report.require_passed()?;
            let eta = eta_for_problem(problem)?;
            b_e_star(&eta, query.r, &report, query.method)
        }
        ExponentKind::Coding => r_e_coding(problem.null(), query.r, query.method),
    }
}

enum SweepEngine {
    Combinator,
    Error(EtaFunction),
    Correct(EtaFunction, AssumptionsReport),
    Coding(EtaFunction),
}

/// Evaluate a whole r grid in parallel.  The grid must be strictly
/// increasing and nonnegative; per-point failures are recorded in place.
pub fn sweep(
    problem: &TestingProblem,
    kind: ExponentKind,
    grid: &[f64],
    hint: MethodHint,
) -> Result<ExponentCurve> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("the r grid is empty".into()));
    }
    if grid.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::InvalidInput(
            "r grid entries must be finite nonnegative reals".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "the r grid must be strictly increasing".into(),
        ));
    }
    let engine = match kind {
        ExponentKind::Error if hint == MethodHint::Combinator => SweepEngine::Combinator,
        ExponentKind::Error => SweepEngine::Error(eta_for_problem(problem)?),
        ExponentKind::Correct => {
            let report = check_theorem4_assumptions(problem)?;
            SweepEngine::Correct(eta_for_problem(problem)?, report)
        }
        ExponentKind::Coding => {
            let counting = counting_problem(problem.null())?;
            SweepEngine::Coding(eta_for_problem(&counting)?)
        }
    };
    let points: Vec<CurvePoint> = grid
        .par_iter()
        .map(|&r| CurvePoint {
            r,
            outcome: match &engine {
                SweepEngine::Combinator => b_e_mixed_combinator(problem, r, MethodHint::Auto),
                SweepEngine::Error(eta) => b_e(eta, r, hint),
                SweepEngine::Correct(eta, report) => b_e_star(eta, r, report, hint),
                SweepEngine::Coding(eta) => coding_from_eta(eta, r, hint),
            },
        })
        .collect();
    Ok(ExponentCurve {
        kind,
        points,
        fingerprint: problem.fingerprint(),
        log_base: problem.log_base(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldp::eta_mixed;
    use crate::models::{FiniteDistribution, MixedPair};

    fn iid_problem(p: &[f64], q: &[f64]) -> TestingProblem {
        TestingProblem::iid(
            FiniteDistribution::new(p.to_vec()).unwrap(),
            FiniteDistribution::new(q.to_vec()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn error_exponent_is_infinite_at_zero_rate() {
        let problem = iid_problem(&[0.5, 0.5], &[0.9, 0.1]);
        let eta = eta_for_problem(&problem).unwrap();
        let res = b_e(&eta, 0.0, MethodHint::Auto).unwrap();
        assert!(res.value.is_infinite());
        assert!(res.minimizing_r.is_none());
        assert_eq!(res.diagnostics.attainment, Attainment::Convention);
    }

    #[test]
    fn small_rate_error_exponent_approaches_forward_divergence() {
        let problem = iid_problem(&[0.5, 0.5], &[0.9, 0.1]);
        let d: f64 = 0.5 * (0.5f64 / 0.9).ln() + 0.5 * (0.5f64 / 0.1).ln();
        let eta = eta_for_problem(&problem).unwrap();
        // the limit is approached at a sqrt(r) rate, so r must sit well below
        // the square of the wanted tolerance
        let res = b_e(&eta, 1e-10, MethodHint::Auto).unwrap();
        assert!(
            (res.value - d).abs() < 1e-4,
            "B_e(1e-10) = {} vs D = {d}",
            res.value
        );
        assert_eq!(res.method, MethodHint::DualParameter);
    }

    #[test]
    fn correct_exponent_conventions_at_zero_rate() {
        let problem = iid_problem(&[0.6, 0.4], &[0.3, 0.7]);
        let report = check_theorem4_assumptions(&problem).unwrap();
        let eta = eta_for_problem(&problem).unwrap();
        let res = b_e_star(&eta, 0.0, &report, MethodHint::Auto).unwrap();
        assert_eq!(res.value, 0.0);

        let counting =
            counting_problem(&SourceModel::Iid(FiniteDistribution::new(vec![0.6, 0.4]).unwrap()))
                .unwrap();
        let report = check_theorem4_assumptions(&counting).unwrap();
        let eta = eta_for_problem(&counting).unwrap();
        let res = b_e_star(&eta, 0.0, &report, MethodHint::Auto).unwrap();
        assert!((res.value + std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn forced_hints_fail_without_their_representation() {
        let problem = iid_problem(&[0.6, 0.4], &[0.3, 0.7]);
        let eta = eta_for_problem(&problem).unwrap();
        assert!(matches!(
            b_e(&eta, 0.1, MethodHint::PiecewiseExact),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            b_e(&eta, 0.1, MethodHint::ClosedForm),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn assumption_gate_blocks_correct_exponent() {
        let model = crate::models::StepSpectrumModel::base2(0.2).unwrap();
        let problem = TestingProblem::step(model).unwrap();
        let report = check_theorem4_assumptions(&problem).unwrap();
        let eta = eta_for_problem(&problem).unwrap();
        assert!(matches!(
            b_e_star(&eta, 0.1, &report, MethodHint::Auto),
            Err(Error::AssumptionsFailed { .. })
        ));
    }

    #[test]
    fn uniform_source_codes_at_one_bit_for_every_rate() {
        let source = SourceModel::Iid(FiniteDistribution::uniform(2));
        for r in [0.01, 0.1, 1.0] {
            let res = r_e_coding(&source, r, MethodHint::Auto).unwrap();
            assert!(
                (res.value - std::f64::consts::LN_2).abs() < 1e-12,
                "r={r}: {}",
                res.value
            );
            assert_eq!(res.minimizing_r, Some(std::f64::consts::LN_2));
        }
        let zero = r_e_coding(&source, 0.0, MethodHint::Auto).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn coding_rate_negates_the_counting_error_exponent() {
        let source = SourceModel::Iid(FiniteDistribution::new(vec![0.11, 0.89]).unwrap());
        let counting = counting_problem(&source).unwrap();
        let eta = eta_for_problem(&counting).unwrap();
        for r in [0.05, 0.2, 0.6] {
            let coding = r_e_coding(&source, r, MethodHint::Auto).unwrap();
            let be = b_e(&eta, r, MethodHint::Auto).unwrap();
            assert_eq!(coding.value, -be.value);
            let grid = b_e(&eta, r, MethodHint::RGrid).unwrap();
            assert!(
                (coding.value + grid.value).abs() < 1e-6,
                "r={r}: dual {} grid {}",
                coding.value,
                -grid.value
            );
        }
    }

    #[test]
    fn sigma_reads_the_spectrum_backwards() {
        let source = SourceModel::Iid(FiniteDistribution::uniform(2));
        let counting = counting_problem(&source).unwrap();
        let eta = eta_for_problem(&counting).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert_eq!(sigma_from_eta(&eta, 0.5 * ln2).unwrap(), 0.0);
        assert!(sigma_from_eta(&eta, 1.5 * ln2).unwrap().is_infinite());
    }

    #[test]
    fn combinator_tracks_the_projection_route() {
        let mix = MixedPair::iid(
            FiniteDistribution::new(vec![0.8, 0.2]).unwrap(),
            FiniteDistribution::new(vec![0.3, 0.7]).unwrap(),
            0.5,
            0.5,
        )
        .unwrap();
        let alt = FiniteDistribution::new(vec![0.5, 0.5]).unwrap();
        let problem = TestingProblem::mixed(mix.clone(), alt.clone()).unwrap();
        let weights: Vec<f64> = alt.masses().iter().map(|w| w.ln()).collect();
        let eta = eta_mixed(&mix, &weights).unwrap();
        for r in [0.05, 0.2] {
            let combo = b_e_mixed_combinator(&problem, r, MethodHint::Auto).unwrap();
            let grid = b_e(&eta, r, MethodHint::RGrid).unwrap();
            assert!(
                (combo.value - grid.value).abs() < 1e-3,
                "r={r}: combinator {} grid {}",
                combo.value,
                grid.value
            );
            assert_eq!(combo.method, MethodHint::Combinator);
        }
    }

    #[test]
    fn spectrum_threshold_matches_divergence_and_singularity() {
        let problem = iid_problem(&[0.5, 0.5], &[0.9, 0.1]);
        let d: f64 = 0.5 * (0.5f64 / 0.9).ln() + 0.5 * (0.5f64 / 0.1).ln();
        assert!((spectral_inf_divergence(&problem).unwrap() - d).abs() < 1e-12);

        let singular = TestingProblem::iid(
            FiniteDistribution::new(vec![0.5, 0.5]).unwrap(),
            FiniteDistribution::new(vec![1.0, 0.0]).unwrap(),
        )
        .unwrap();
        assert!(spectral_inf_divergence(&singular).unwrap().is_infinite());
    }

    #[test]
    fn sweep_validates_grid_and_preserves_order() {
        let problem = iid_problem(&[0.5, 0.5], &[0.9, 0.1]);
        assert!(matches!(
            sweep(&problem, ExponentKind::Error, &[], MethodHint::Auto),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            sweep(&problem, ExponentKind::Error, &[0.2, 0.1], MethodHint::Auto),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            sweep(&problem, ExponentKind::Error, &[-0.1, 0.2], MethodHint::Auto),
            Err(Error::InvalidInput(_))
        ));

        let grid: Vec<f64> = (1..=10).map(|k| 0.05 * k as f64).collect();
        let curve = sweep(&problem, ExponentKind::Error, &grid, MethodHint::Auto).unwrap();
        assert_eq!(curve.points.len(), 10);
        assert_eq!(curve.fingerprint, problem.fingerprint());
        let values = curve.values();
        assert_eq!(values.len(), 10);
        for w in values.windows(2) {
            assert!(
                w[1].1 <= w[0].1 + 1e-12,
                "error exponent must not increase: {w:?}"
            );
        }
    }

    #[test]
    fn correct_exponent_sweep_is_nondecreasing() {
        let problem = iid_problem(&[0.6, 0.4], &[0.3, 0.7]);
        let grid: Vec<f64> = (1..=10).map(|k| 0.08 * k as f64).collect();
        let curve = sweep(&problem, ExponentKind::Correct, &grid, MethodHint::Auto).unwrap();
        let values = curve.values();
        assert_eq!(values.len(), 10);
        for w in values.windows(2) {
            assert!(
                w[1].1 >= w[0].1 - 1e-12,
                "correct exponent must not decrease: {w:?}"
            );
        }
    }

    #[test]
    fn query_dispatch_covers_all_kinds() {
        let problem = iid_problem(&[0.6, 0.4], &[0.3, 0.7]);
        let err = evaluate_query(&problem, &ExponentQuery::new(ExponentKind::Error, 0.05)).unwrap();
        assert!(err.value > 0.0);
        let correct =
            evaluate_query(&problem, &ExponentQuery::new(ExponentKind::Correct, 0.5)).unwrap();
        assert!(correct.value >= 0.0);
        // below the critical rate the coding rate sits strictly between the
        // entropy and the full alphabet rate; above it, it pins at log 2
        let coding =
            evaluate_query(&problem, &ExponentQuery::new(ExponentKind::Coding, 0.01)).unwrap();
        let entropy: f64 = -(0.6 * 0.6f64.ln() + 0.4 * 0.4f64.ln());
        assert!(coding.value > entropy && coding.value < std::f64::consts::LN_2 - 1e-6);
        let saturated =
            evaluate_query(&problem, &ExponentQuery::new(ExponentKind::Coding, 0.1)).unwrap();
        assert!((saturated.value - std::f64::consts::LN_2).abs() < 1e-10);
    }
}
