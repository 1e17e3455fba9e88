//! Cumulant generating function of the per-letter divergence density,
//! Lambda(theta) = log E_P[(P/G)^theta], with exact derivatives for series
//! models and finite-difference derivatives for kernel models.

use crate::error::{Error, Result};
use crate::ldp::power::{log_spectral_radius, max_cycle_mean, min_cycle_mean};
use crate::models::{
    unifilar_expand, AlternativeMeasure, GaussianMeanShiftPair, MarkovPair, SourceModel,
    TestingProblem,
};

/// Finite-difference step for kernel-model derivatives.
const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgfMethod {
    SeriesSum,
    TiltedKernelEigenvalue,
    GaussianClosedForm,
}

impl CgfMethod {
    pub fn name(self) -> &'static str {
        match self {
            CgfMethod::SeriesSum => "series-sum",
            CgfMethod::TiltedKernelEigenvalue => "tilted-kernel-eigenvalue",
            CgfMethod::GaussianClosedForm => "gaussian-closed-form",
        }
    }
}

#[derive(Debug, Clone)]
enum CgfKind {
    /// Lambda(theta) = log sum_i exp(log_mass_i + theta * delta_i) over the
    /// null support.
    Series {
        log_mass: Vec<f64>,
        delta: Vec<f64>,
        letters: Vec<usize>,
        alphabet: usize,
    },
    /// Lambda(theta) = log spectral radius of the tilted kernel whose log
    /// entries are log_null + theta * delta on the null support graph.
    Kernel {
        log_null: Vec<Vec<f64>>,
        delta: Vec<Vec<f64>>,
        phi_lo: f64,
        phi_hi: f64,
    },
    /// Lambda(theta) = a (theta + theta^2) for divergence rate a.
    Gaussian { a: f64 },
}

#[derive(Debug, Clone)]
pub struct CgfEvaluator {
    kind: CgfKind,
    method: CgfMethod,
}

impl CgfEvaluator {
    pub fn method(&self) -> CgfMethod {
        self.method
    }

    /// Divergence rate of a Gaussian mean-shift cumulant; `None` otherwise.
    pub fn gaussian_rate(&self) -> Option<f64> {
        match &self.kind {
            CgfKind::Gaussian { a } => Some(*a),
            _ => None,
        }
    }

    pub fn lambda(&self, theta: f64) -> Result<f64> {
        match &self.kind {
            CgfKind::Series {
                log_mass, delta, ..
            } => {
                let mut m = f64::NEG_INFINITY;
                for (lm, d) in log_mass.iter().zip(delta) {
                    m = m.max(lm + theta * d);
                }
                let mut s = 0.0;
                for (lm, d) in log_mass.iter().zip(delta) {
                    s += (lm + theta * d - m).exp();
                }
                Ok(m + s.ln())
            }
            CgfKind::Kernel {
                log_null, delta, ..
            } => {
                let n = log_null.len();
                let mut entries = vec![vec![f64::NEG_INFINITY; n]; n];
                for i in 0..n {
                    for j in 0..n {
                        if log_null[i][j] > f64::NEG_INFINITY {
                            entries[i][j] = log_null[i][j] + theta * delta[i][j];
                        }
                    }
                }
                Ok(log_spectral_radius(&entries)?.log_radius)
            }
            CgfKind::Gaussian { a } => Ok(a * (theta + theta * theta)),
        }
    }

    /// First derivative: the mean of the tilted divergence density.
    pub fn phi(&self, theta: f64) -> Result<f64> {
        match &self.kind {
            CgfKind::Series { .. } => Ok(self.series_moments(theta).0),
            CgfKind::Kernel { .. } => {
                let hi = self.lambda(theta + FD_STEP)?;
                let lo = self.lambda(theta - FD_STEP)?;
                Ok((hi - lo) / (2.0 * FD_STEP))
            }
            CgfKind::Gaussian { a } => Ok(a * (1.0 + 2.0 * theta)),
        }
    }

    /// Second derivative: the variance of the tilted divergence density.
    pub fn lambda_second(&self, theta: f64) -> Result<f64> {
        match &self.kind {
            CgfKind::Series { .. } => Ok(self.series_moments(theta).1),
            CgfKind::Kernel { .. } => {
                let hi = self.lambda(theta + FD_STEP)?;
                let mid = self.lambda(theta)?;
                let lo = self.lambda(theta - FD_STEP)?;
                Ok((hi - 2.0 * mid + lo) / (FD_STEP * FD_STEP))
            }
            CgfKind::Gaussian { a } => Ok(2.0 * a),
        }
    }

    fn series_moments(&self, theta: f64) -> (f64, f64) {
        let CgfKind::Series {
            log_mass, delta, ..
        } = &self.kind
        else {
            unreachable!("series moments only for series kind");
        };
        let mut m = f64::NEG_INFINITY;
        for (lm, d) in log_mass.iter().zip(delta) {
            m = m.max(lm + theta * d);
        }
        let mut z = 0.0;
        let mut mean = 0.0;
        let mut second = 0.0;
        for (lm, d) in log_mass.iter().zip(delta) {
            let w = (lm + theta * d - m).exp();
            z += w;
            mean += w * d;
            second += w * d * d;
        }
        mean /= z;
        second /= z;
        (mean, (second - mean * mean).max(0.0))
    }

    /// Closure of the attainable slope interval (the spectrum support range).
    pub fn phi_range(&self) -> (f64, f64) {
        match &self.kind {
            CgfKind::Series { delta, .. } => {
                let lo = delta.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = delta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
            CgfKind::Kernel { phi_lo, phi_hi, .. } => (*phi_lo, *phi_hi),
            CgfKind::Gaussian { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Width of the slope interval; zero means a single-atom spectrum.
    pub fn phi_spread(&self) -> f64 {
        let (lo, hi) = self.phi_range();
        hi - lo
    }

    /// Limiting value of sup_theta (theta x - Lambda) at a finite domain
    /// endpoint x.  For series models this is exactly minus the log mass of
    /// the extreme atoms; kernel models approach it along doubling theta.
    pub fn endpoint_rate(&self, upper: bool) -> Result<f64> {
        let (lo, hi) = self.phi_range();
        let x = if upper { hi } else { lo };
        if !x.is_finite() {
            return Ok(f64::INFINITY);
        }
        match &self.kind {
            CgfKind::Series {
                log_mass, delta, ..
            } => {
                let mut mass = 0.0;
                for (lm, d) in log_mass.iter().zip(delta) {
                    if (d - x).abs() <= 1e-12 * (1.0 + x.abs()) {
                        mass += lm.exp();
                    }
                }
                Ok(-mass.ln())
            }
            CgfKind::Kernel { .. } => {
                let sign = if upper { 1.0 } else { -1.0 };
                let mut theta = 1.0;
                let mut value = sign * theta * x - self.lambda(sign * theta)?;
                loop {
                    theta *= 2.0;
                    if theta > 1e9 {
                        return Ok(value);
                    }
                    let next = sign * theta * x - self.lambda(sign * theta)?;
                    if (next - value).abs() <= 1e-9 {
                        return Ok(next);
                    }
                    value = next;
                }
            }
            CgfKind::Gaussian { .. } => Ok(f64::INFINITY),
        }
    }

    /// Tilted letter weights exp(log_mass + theta delta)/Z mapped back onto
    /// the full alphabet; series models only.
    pub fn tilted_letters(&self, theta: f64) -> Option<Vec<f64>> {
        let CgfKind::Series {
            log_mass,
            delta,
            letters,
            alphabet,
        } = &self.kind
        else {
            return None;
        };
        let mut m = f64::NEG_INFINITY;
        for (lm, d) in log_mass.iter().zip(delta) {
            m = m.max(lm + theta * d);
        }
        let mut out = vec![0.0; *alphabet];
        let mut z = 0.0;
        for ((lm, d), &letter) in log_mass.iter().zip(delta).zip(letters) {
            let w = (lm + theta * d - m).exp();
            z += w;
            out[letter] = w;
        }
        for v in &mut out {
            *v /= z;
        }
        Some(out)
    }
}

/// Series evaluator for an i.i.d. null against its letter-factored
/// alternative.  Probability alternatives must be mutually absolutely
/// continuous with the null; weight and counting alternatives only need to
/// cover the null support.
pub fn cgf_iid(problem: &TestingProblem) -> Result<CgfEvaluator> {
    let SourceModel::Iid(p) = problem.null() else {
        return Err(Error::Unsupported(
            "series cumulant evaluator needs a memoryless null".into(),
        ));
    };
    let weights = problem
        .alternative()
        .letter_log_weights(p.len())
        .expect("memoryless alternatives factor over letters");
    let probability = problem.alternative().is_probability();
    let mut log_mass = Vec::new();
    let mut delta = Vec::new();
    let mut letters = Vec::new();
    for i in 0..p.len() {
        let mass = p.mass(i);
        let w = weights[i];
        if mass > 0.0 {
            if w == f64::NEG_INFINITY {
                return Err(Error::SingularSupport {
                    witness: format!("letter {i}"),
                    null_mass: mass,
                    alt_mass: 0.0,
                });
            }
            log_mass.push(mass.ln());
            delta.push(mass.ln() - w);
            letters.push(i);
        } else if probability && w > f64::NEG_INFINITY {
            return Err(Error::SingularSupport {
                witness: format!("letter {i}"),
                null_mass: 0.0,
                alt_mass: w.exp(),
            });
        }
    }
    Ok(CgfEvaluator {
        kind: CgfKind::Series {
            log_mass,
            delta,
            letters,
            alphabet: p.len(),
        },
        method: CgfMethod::SeriesSum,
    })
}

/// Kernel evaluator for a Markov null.  `state_log_weights` supplies the
/// per-arrival-state log weight of a non-probability alternative; `None`
/// reads the paired alternative kernel.
pub fn cgf_markov(pair: &MarkovPair, state_log_weights: Option<&[f64]>) -> Result<CgfEvaluator> {
    let n = pair.states();
    if let Some(w) = state_log_weights {
        if w.len() != n {
            return Err(Error::AlphabetMismatch(format!(
                "weight vector has {} entries for {} states",
                w.len(),
                n
            )));
        }
    }
    let mut log_null = vec![vec![f64::NEG_INFINITY; n]; n];
    let mut delta = vec![vec![f64::NEG_INFINITY; n]; n];
    for i in 0..n {
        for j in 0..n {
            let p = pair.kernel_null()[i][j];
            if p == 0.0 {
                continue;
            }
            let alt_log = match state_log_weights {
                Some(w) => w[j],
                None => {
                    let q = pair.kernel_alt()[i][j];
                    if q == 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        q.ln()
                    }
                }
            };
            if alt_log == f64::NEG_INFINITY {
                return Err(Error::SingularSupport {
                    witness: format!("transition ({i},{j})"),
                    null_mass: p,
                    alt_mass: 0.0,
                });
            }
            log_null[i][j] = p.ln();
            delta[i][j] = p.ln() - alt_log;
        }
    }
    let phi_lo = min_cycle_mean(&delta)?;
    let phi_hi = max_cycle_mean(&delta)?;
    Ok(CgfEvaluator {
        kind: CgfKind::Kernel {
            log_null,
            delta,
            phi_lo,
            phi_hi,
        },
        method: CgfMethod::TiltedKernelEigenvalue,
    })
}

/// Closed-form evaluator for the Gaussian mean-shift pair.
pub fn cgf_gaussian(pair: &GaussianMeanShiftPair) -> CgfEvaluator {
    CgfEvaluator {
        kind: CgfKind::Gaussian {
            a: pair.divergence_rate(),
        },
        method: CgfMethod::GaussianClosedForm,
    }
}

/// Route a testing problem to its cumulant evaluator.  Mixture and staircase
/// models have no single convex cumulant and use dedicated spectrum paths.
pub fn cgf_for_problem(problem: &TestingProblem) -> Result<CgfEvaluator> {
    match problem.null() {
        SourceModel::Iid(_) => cgf_iid(problem),
        SourceModel::Markov(pair) => match problem.alternative() {
            AlternativeMeasure::Probability(_) => cgf_markov(pair, None),
            other => {
                let w = other
                    .letter_log_weights(pair.states())
                    .expect("counting and weight measures factor over letters");
                cgf_markov(pair, Some(&w))
            }
        },
        SourceModel::Unifilar(pair) => {
            let expanded = unifilar_expand(pair)?;
            match problem.alternative() {
                AlternativeMeasure::Probability(_) => cgf_markov(&expanded.pair, None),
                other => {
                    let letter_w = other
                        .letter_log_weights(pair.letters())
                        .expect("counting and weight measures factor over letters");
                    let symbol_w: Vec<f64> = expanded
                        .symbols
                        .iter()
                        .map(|s| letter_w[s.letter])
                        .collect();
                    cgf_markov(&expanded.pair, Some(&symbol_w))
                }
            }
        }
        SourceModel::Gaussian(pair) => Ok(cgf_gaussian(pair)),
        SourceModel::Mixed(_) | SourceModel::Step(_) => Err(Error::Unsupported(format!(
            "{} models use a dedicated spectrum path, not a single cumulant",
            problem.null().kind_name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{FiniteDistribution, Kernel};

    fn iid_problem(p: &[f64], q: &[f64]) -> TestingProblem {
        TestingProblem::iid(
            FiniteDistribution::new(p.to_vec()).unwrap(),
            FiniteDistribution::new(q.to_vec()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn identical_pair_has_zero_cumulant() {
        let problem = iid_problem(&[0.3, 0.7], &[0.3, 0.7]);
        let cgf = cgf_iid(&problem).unwrap();
        for theta in [-3.0, -1.0, 0.0, 0.5, 2.0] {
            assert!(cgf.lambda(theta).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn counting_alternative_at_theta_one_gives_collision_entropy() {
        let problem = TestingProblem::iid_vs_counting(
            FiniteDistribution::new(vec![0.5, 0.5]).unwrap(),
        )
        .unwrap();
        let cgf = cgf_iid(&problem).unwrap();
        assert!((cgf.lambda(1.0).unwrap() + 2f64.ln()).abs() < 1e-12);
        assert!(cgf.lambda(0.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn skewed_alternative_value_at_theta_one() {
        let problem = iid_problem(&[0.5, 0.5], &[0.9, 0.1]);
        let cgf = cgf_iid(&problem).unwrap();
        let expect = (0.25f64 / 0.9 + 0.25 / 0.1).ln();
        assert!((cgf.lambda(1.0).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn slope_at_zero_is_mean_divergence_and_curvature_nonnegative() {
        let problem = iid_problem(&[0.5, 0.5], &[0.9, 0.1]);
        let cgf = cgf_iid(&problem).unwrap();
        let mean = crate::models::mean_divergence(&problem).unwrap().nats;
        assert!((cgf.phi(0.0).unwrap() - mean).abs() < 1e-10);
        for theta in [-2.0, -1.0, 0.0, 1.0, 3.0] {
            assert!(cgf.lambda_second(theta).unwrap() >= 0.0);
        }
    }

    #[test]
    fn singular_support_is_rejected_in_both_directions() {
        let p = FiniteDistribution::new(vec![0.5, 0.5]).unwrap();
        let q = FiniteDistribution::new(vec![1.0, 0.0]).unwrap();
        let forward = TestingProblem::iid(p.clone(), q.clone()).unwrap();
        assert!(matches!(
            cgf_iid(&forward),
            Err(Error::SingularSupport { .. })
        ));
        let backward = TestingProblem::iid(q, p).unwrap();
        assert!(matches!(
            cgf_iid(&backward),
            Err(Error::SingularSupport { .. })
        ));
    }

    #[test]
    fn markov_cumulant_zero_at_origin_and_slope_matches_divergence() {
        let null: Kernel = vec![vec![0.9, 0.1], vec![0.2, 0.8]];
        let alt: Kernel = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let pair = MarkovPair::new(null, alt).unwrap();
        let cgf = cgf_markov(&pair, None).unwrap();
        assert!(cgf.lambda(0.0).unwrap().abs() < 1e-11);
        let mean = pair.conditional_divergence();
        assert!((cgf.phi(0.0).unwrap() - mean).abs() < 1e-6);
    }

    #[test]
    fn identical_markov_kernels_have_zero_cumulant() {
        let k: Kernel = vec![vec![0.6, 0.4], vec![0.3, 0.7]];
        let pair = MarkovPair::source_only(k).unwrap();
        let cgf = cgf_markov(&pair, None).unwrap();
        for theta in [-4.0, -1.0, 0.0, 2.0] {
            assert!(cgf.lambda(theta).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn markov_slope_interval_comes_from_cycle_means() {
        let null: Kernel = vec![vec![0.9, 0.1], vec![0.2, 0.8]];
        let pair = MarkovPair::source_only(null).unwrap();
        let problem = TestingProblem::markov_vs_counting(pair).unwrap();
        let cgf = cgf_for_problem(&problem).unwrap();
        let (lo, hi) = cgf.phi_range();
        // best repeatable transition is staying in state 0 (log 0.9), worst
        // is the 0->1->0 two-cycle (mean of log 0.1 and log 0.2)
        assert!((hi - 0.9f64.ln()).abs() < 1e-12);
        assert!((lo - (0.1f64.ln() + 0.2f64.ln()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_closed_form_matches_quadratic() {
        let pair = GaussianMeanShiftPair::new(0.0, 2.0, 1.0).unwrap();
        let cgf = cgf_gaussian(&pair);
        let a = 2.0;
        for theta in [-1.5, -1.0, 0.0, 0.7] {
            assert!((cgf.lambda(theta).unwrap() - a * (theta + theta * theta)).abs() < 1e-14);
        }
        assert!((cgf.phi(-0.5).unwrap() - 0.0).abs() < 1e-14);
        assert!((cgf.lambda_second(0.3).unwrap() - 2.0 * a).abs() < 1e-14);
    }

    #[test]
    fn endpoint_rate_matches_extreme_atom_mass() {
        let problem = iid_problem(&[0.5, 0.3, 0.2], &[0.2, 0.3, 0.5]);
        let cgf = cgf_iid(&problem).unwrap();
        // the largest density atom is letter 0 with mass 0.5
        assert!((cgf.endpoint_rate(true).unwrap() + 0.5f64.ln()).abs() < 1e-12);
    }
}
