//! The lower tail exponent of the divergence spectrum,
//! eta(R) = lim inf (1/n) log 1/Pr{density <= R}, assembled per model
//! family: convex-rate models evaluate the Legendre transform, staircase
//! models carry exact breakpoints, mixtures minimize over constrained
//! projections.

use crate::error::{Error, Result};
use crate::ldp::cgf::cgf_for_problem;
use crate::ldp::legendre::{RateFunction, DEGENERATE_SPREAD};
use crate::ldp::projection::{constrained_i_projection, LinearConstraint};
use crate::models::{
    FiniteDistribution, MixedPair, SourceModel, StepSpectrumModel, TestingProblem,
};

#[derive(Debug, Clone)]
enum EtaKind {
    /// eta(R) = I(R) on the decreasing branch, 0 beyond the zero of I.
    FromRate(RateFunction),
    /// Left-closed steps (start, value), +infinity before the first start.
    Piecewise { pieces: Vec<(f64, f64)> },
    /// Componentwise constrained projections, minimized across components.
    MixedProjection {
        components: [FiniteDistribution; 2],
        /// log P1(x) - log P2(x) on the common support
        cross_ratio: Vec<f64>,
        /// log P_i(x) - log alternative weight, per component
        alt_ratio: [Vec<f64>; 2],
    },
}

/// Evaluator of the spectrum's lower tail exponent.
#[derive(Debug, Clone)]
pub struct EtaFunction {
    kind: EtaKind,
    d_lower: f64,
    limit_exists: bool,
    floor: f64,
}

impl EtaFunction {
    /// Threshold above which eta vanishes: the spectral inf-divergence.
    pub fn d_lower(&self) -> f64 {
        self.d_lower
    }

    /// Whether the defining lim inf is a genuine limit at every R, which the
    /// correct-exponent representation requires.
    pub fn limit_exists(&self) -> bool {
        self.limit_exists
    }

    /// Greatest lower bound of the spectrum support; eta is infinite below.
    pub fn spectrum_floor(&self) -> f64 {
        self.floor
    }

    /// Exact steps when the representation is piecewise constant.
    pub fn pieces(&self) -> Option<&[(f64, f64)]> {
        match &self.kind {
            EtaKind::Piecewise { pieces } => Some(pieces),
            _ => None,
        }
    }

    /// Underlying convex rate function, when that is the representation.
    pub fn rate(&self) -> Option<&RateFunction> {
        match &self.kind {
            EtaKind::FromRate(rate) => Some(rate),
            _ => None,
        }
    }

    /// True when values come from per-point constrained projections with no
    /// cheaper closed form.
    pub fn is_projection_based(&self) -> bool {
        matches!(self.kind, EtaKind::MixedProjection { .. })
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        match &self.kind {
            EtaKind::FromRate(rate) => {
                if r >= self.d_lower {
                    return Ok(0.0);
                }
                let (lo, _) = rate.domain();
                if r < lo {
                    return Ok(f64::INFINITY);
                }
                rate.value(r)
            }
            EtaKind::Piecewise { pieces } => {
                let mut current = f64::INFINITY;
                for &(start, value) in pieces {
                    if r >= start {
                        current = value;
                    }
                }
                Ok(current)
            }
            EtaKind::MixedProjection {
                components,
                cross_ratio,
                alt_ratio,
            } => {
                let mut best = f64::INFINITY;
                for (i, base) in components.iter().enumerate() {
                    let sign = if i == 0 {
                        LinearConstraint::greater_eq(cross_ratio.clone(), 0.0)
                    } else {
                        LinearConstraint::less_eq(cross_ratio.clone(), 0.0)
                    };
                    let tail = LinearConstraint::less_eq(alt_ratio[i].clone(), r);
                    match constrained_i_projection(base, &[sign, tail], None) {
                        Ok(out) => best = best.min(out.value),
                        Err(Error::Infeasible(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
                Ok(best)
            }
        }
    }
}

/// Wrap a convex rate function; the tail exponent follows its decreasing
/// branch and vanishes past the zero.
pub fn eta_from_rate(rate: RateFunction) -> EtaFunction {
    let d_lower = rate.minimizer();
    let floor = rate.domain().0;
    EtaFunction {
        kind: EtaKind::FromRate(rate),
        d_lower,
        limit_exists: true,
        floor,
    }
}

/// Exact three-step tail exponent of the staircase spectrum, in nats.
pub fn eta_step(model: &StepSpectrumModel) -> EtaFunction {
    let scale = model.scale();
    let alpha = model.alpha();
    let pieces = vec![
        ((1.0 - 3.0 * alpha) * scale, 3.0 * alpha * scale),
        ((1.0 - 2.0 * alpha) * scale, alpha * scale),
        (scale, 0.0),
    ];
    EtaFunction {
        kind: EtaKind::Piecewise {
            pieces: pieces.clone(),
        },
        d_lower: scale,
        limit_exists: true,
        floor: pieces[0].0,
    }
}

/// Single-atom spectrum at `location` with tail exponent 0 from there on.
pub fn eta_point(location: f64) -> EtaFunction {
    EtaFunction {
        kind: EtaKind::Piecewise {
            pieces: vec![(location, 0.0)],
        },
        d_lower: location,
        limit_exists: true,
        floor: location,
    }
}

/// Tail exponent of a two-component mixture: the smaller of two constrained
/// projections, one per component, each keeping the empirical law on its own
/// side of the likelihood split.  `alt_log_weights` gives the per-letter log
/// weight of the alternative measure.
pub fn eta_mixed(mix: &MixedPair, alt_log_weights: &[f64]) -> Result<EtaFunction> {
    let Some([p1, p2]) = mix.iid_components() else {
        return Err(Error::Unsupported(
            "mixture tail exponents need memoryless components".into(),
        ));
    };
    if alt_log_weights.len() != mix.letters() {
        return Err(Error::AlphabetMismatch(format!(
            "{} alternative weights for {} letters",
            alt_log_weights.len(),
            mix.letters()
        )));
    }
    for i in 0..mix.letters() {
        let m1 = p1.mass(i);
        let m2 = p2.mass(i);
        if (m1 == 0.0) != (m2 == 0.0) {
            return Err(Error::SingularSupport {
                witness: format!("letter {i}"),
                null_mass: m1.min(m2),
                alt_mass: m1.max(m2),
            });
        }
        if m1 > 0.0 && alt_log_weights[i] == f64::NEG_INFINITY {
            return Err(Error::SingularSupport {
                witness: format!("letter {i}"),
                null_mass: m1,
                alt_mass: 0.0,
            });
        }
    }
    let letters = mix.letters();
    let cross_ratio: Vec<f64> = (0..letters)
        .map(|i| {
            if p1.mass(i) > 0.0 {
                p1.mass(i).ln() - p2.mass(i).ln()
            } else {
                0.0
            }
        })
        .collect();
    let alt_ratio = [p1, p2].map(|p| {
        (0..letters)
            .map(|i| {
                if p.mass(i) > 0.0 {
                    p.mass(i).ln() - alt_log_weights[i]
                } else {
                    0.0
                }
            })
            .collect::<Vec<f64>>()
    });
    let div = |p: &FiniteDistribution, ratio: &[f64]| -> f64 {
        p.support().map(|i| p.mass(i) * ratio[i]).sum()
    };
    let d1 = div(p1, &alt_ratio[0]);
    let d2 = div(p2, &alt_ratio[1]);
    let floor = alt_ratio
        .iter()
        .zip([p1, p2])
        .map(|(ratio, p)| {
            p.support()
                .map(|i| ratio[i])
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min);
    let limit_exists = p1.has_full_support()
        && p2.has_full_support()
        && alt_log_weights.iter().all(|w| *w > f64::NEG_INFINITY);
    Ok(EtaFunction {
        kind: EtaKind::MixedProjection {
            components: [p1.clone(), p2.clone()],
            cross_ratio,
            alt_ratio,
        },
        d_lower: d1.min(d2),
        limit_exists,
        floor,
    })
}

/// Build the tail exponent for a testing problem, routing each model family
/// to its representation.  Degenerate single-atom spectra become exact
/// one-piece staircases.
pub fn eta_for_problem(problem: &TestingProblem) -> Result<EtaFunction> {
    match problem.null() {
        SourceModel::Step(model) => Ok(eta_step(model)),
        SourceModel::Mixed(mix) => {
            let weights = problem
                .alternative()
                .letter_log_weights(mix.letters())
                .ok_or_else(|| {
                    Error::Unsupported(
                        "mixture tail exponents need a letter-factored alternative".into(),
                    )
                })?;
            eta_mixed(mix, &weights)
        }
        _ => {
            let cgf = cgf_for_problem(problem)?;
            if cgf.phi_spread() <= DEGENERATE_SPREAD {
                let (lo, hi) = cgf.phi_range();
                return Ok(eta_point(0.5 * (lo + hi)));
            }
            Ok(eta_from_rate(RateFunction::new(cgf)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::GaussianMeanShiftPair;

    fn dist(masses: &[f64]) -> FiniteDistribution {
        FiniteDistribution::new(masses.to_vec()).unwrap()
    }

    #[test]
    fn gaussian_tail_exponent_closed_form() {
        let pair = GaussianMeanShiftPair::new(0.0, 2.0, 1.0).unwrap();
        let problem = TestingProblem::gaussian(pair).unwrap();
        let eta = eta_for_problem(&problem).unwrap();
        assert!((eta.value(0.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(eta.value(2.0).unwrap().abs() < 1e-15);
        assert!(eta.value(5.0).unwrap().abs() < 1e-15);
        assert!((eta.d_lower() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn staircase_pieces_match_the_three_levels() {
        let model = StepSpectrumModel::base2(0.2).unwrap();
        let eta = eta_step(&model);
        let s = 2f64.ln();
        // base-2 queries converted to nats
        assert!((eta.value(0.5 * s).unwrap() - 0.6 * s).abs() < 1e-12);
        assert!(eta.value(1.5 * s).unwrap().abs() < 1e-15);
        assert!(eta.value(0.39 * s).unwrap().is_infinite());
        assert!((eta.d_lower() - s).abs() < 1e-15);
        assert_eq!(eta.pieces().unwrap().len(), 3);
    }

    #[test]
    fn convex_route_vanishes_past_the_mean() {
        let problem = TestingProblem::iid(dist(&[0.5, 0.5]), dist(&[0.9, 0.1])).unwrap();
        let eta = eta_for_problem(&problem).unwrap();
        let mean = crate::models::mean_divergence(&problem).unwrap().nats;
        assert!(eta.value(mean + 0.01).unwrap().abs() < 1e-15);
        let reverse = 0.9 * (0.9f64 / 0.5).ln() + 0.1 * (0.1f64 / 0.5).ln();
        assert!((eta.value(-reverse).unwrap() - reverse).abs() < 1e-8);
        assert!(eta.limit_exists());
    }

    #[test]
    fn tail_exponent_is_monotone_and_dominates_negative_r() {
        let problem = TestingProblem::iid(dist(&[0.5, 0.5]), dist(&[0.9, 0.1])).unwrap();
        let eta = eta_for_problem(&problem).unwrap();
        let mut previous = f64::INFINITY;
        let (floor, ceiling) = (-1.7, 0.6);
        let mut r = floor;
        while r <= ceiling {
            let v = eta.value(r).unwrap();
            assert!(v <= previous + 1e-10);
            // probability alternatives keep R + eta(R) nonnegative
            if v.is_finite() {
                assert!(r + v >= -1e-10);
            }
            previous = v;
            r += 0.05;
        }
    }

    #[test]
    fn identical_components_reduce_to_single_source() {
        let p = dist(&[0.8, 0.2]);
        let alt = dist(&[0.5, 0.5]);
        let mix = MixedPair::iid(p.clone(), p.clone(), 0.5, 0.5).unwrap();
        let weights: Vec<f64> = alt.masses().iter().map(|m| m.ln()).collect();
        let eta = eta_mixed(&mix, &weights).unwrap();

        let single = TestingProblem::iid(p.clone(), alt.clone()).unwrap();
        let eta_single = eta_for_problem(&single).unwrap();
        for r in [-0.4, -0.1, 0.0, 0.1, 0.3] {
            let a = eta.value(r).unwrap();
            let b = eta_single.value(r).unwrap();
            if a.is_finite() || b.is_finite() {
                assert!(
                    (a - b).abs() < 1e-7,
                    "mismatch at {r}: projection {a} vs rate {b}"
                );
            }
        }
    }

    #[test]
    fn mixture_vanishes_at_smaller_component_divergence() {
        let p1 = dist(&[0.8, 0.2]);
        let p2 = dist(&[0.3, 0.7]);
        let alt = dist(&[0.5, 0.5]);
        let mix = MixedPair::iid(p1.clone(), p2.clone(), 0.4, 0.6).unwrap();
        let weights: Vec<f64> = alt.masses().iter().map(|m| m.ln()).collect();
        let eta = eta_mixed(&mix, &weights).unwrap();
        let d1 = p1.relative_entropy(&alt);
        let d2 = p2.relative_entropy(&alt);
        assert!((eta.d_lower() - d1.min(d2)).abs() < 1e-12);
        assert!(eta.value(d1.min(d2) + 1e-9).unwrap() < 1e-8);
        assert!(eta.value(d1.min(d2) - 0.02).unwrap() > 1e-5);
        assert!(eta.limit_exists());
    }

    #[test]
    fn point_spectrum_has_single_piece() {
        let problem = TestingProblem::iid(dist(&[0.25; 4]), dist(&[0.25; 4])).unwrap();
        let eta = eta_for_problem(&problem).unwrap();
        assert_eq!(eta.pieces().unwrap(), &[(0.0, 0.0)]);
        assert!(eta.value(-0.1).unwrap().is_infinite());
        assert!(eta.value(0.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn uniform_against_counting_is_point_spectrum_at_log_alphabet() {
        let problem =
            TestingProblem::iid_vs_counting(FiniteDistribution::uniform(2)).unwrap();
        let eta = eta_for_problem(&problem).unwrap();
        let expect = -(2f64.ln());
        let pieces = eta.pieces().unwrap();
        assert_eq!(pieces.len(), 1);
        assert!((pieces[0].0 - expect).abs() < 1e-12);
    }
}
