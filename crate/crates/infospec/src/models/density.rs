use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::markov::stationary_distribution;
use crate::models::{unifilar_expand, AlternativeMeasure, SourceModel, TestingProblem};

/// A length-n observation: letters for discrete models, reals for Gaussian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Sequence {
    Discrete(Vec<usize>),
    Real(Vec<f64>),
}

impl Sequence {
    pub fn len(&self) -> usize {
        match self {
            Sequence::Discrete(v) => v.len(),
            Sequence::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_word(word: &[usize], letters: usize) -> Result<()> {
    for &x in word {
        if x >= letters {
            return Err(Error::AlphabetMismatch(format!(
                "letter {x} outside alphabet of size {letters}"
            )));
        }
    }
    Ok(())
}

/// log of the null-model probability of a word, in nats; -inf off support.
pub fn log_null_mass(model: &SourceModel, word: &[usize]) -> Result<f64> {
    match model {
        SourceModel::Iid(p) => {
            check_word(word, p.len())?;
            iid_log_mass(word, |x| p.mass(x), p.len())
        }
        SourceModel::Markov(pair) => {
            check_word(word, pair.states())?;
            markov_log_mass(word, pair.stationary_null(), pair.kernel_null())
        }
        SourceModel::Unifilar(pair) => pair.log_mass(word, false),
        SourceModel::Mixed(mix) => {
            check_word(word, mix.letters())?;
            let [w1, w2] = mix.weights();
            let parts: Vec<f64> = mix
                .components()
                .iter()
                .zip([w1, w2])
                .map(|(comp, w)| {
                    let sub = match comp {
                        crate::models::MixtureComponent::Iid(d) => {
                            log_null_mass(&SourceModel::Iid(d.clone()), word)
                        }
                        crate::models::MixtureComponent::Markov(m) => {
                            log_null_mass(&SourceModel::Markov(m.clone()), word)
                        }
                    }?;
                    Ok(w.ln() + sub)
                })
                .collect::<Result<_>>()?;
            let m = parts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if m == f64::NEG_INFINITY {
                return Ok(f64::NEG_INFINITY);
            }
            Ok(m + parts.iter().map(|&x| (x - m).exp()).sum::<f64>().ln())
        }
        SourceModel::Gaussian(_) => Err(Error::Unsupported(
            "Gaussian words are real-valued; per-word masses are densities".into(),
        )),
        SourceModel::Step(_) => Err(Error::Unsupported(
            "step-spectrum words are not materialised; use its finite-n atoms".into(),
        )),
    }
}

/// Letter-count based log mass: words of equal type share the exact float,
/// so exact-equality likelihood-ratio grouping works as intended.
fn iid_log_mass(word: &[usize], mass: impl Fn(usize) -> f64, letters: usize) -> Result<f64> {
    let mut counts = vec![0u32; letters];
    for &x in word {
        counts[x] += 1;
    }
    let mut total = 0.0;
    for (x, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let m = mass(x);
        if m == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        total += c as f64 * m.ln();
    }
    Ok(total)
}

/// Transition-count based log mass of a chain path; order-insensitive for
/// the same reason as `iid_log_mass`.
fn markov_log_mass(word: &[usize], initial: &[f64], kernel: &crate::models::Kernel) -> Result<f64> {
    let states = initial.len();
    let p1 = initial[word[0]];
    if p1 == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let mut counts = vec![0u32; states * states];
    for w in word.windows(2) {
        counts[w[0] * states + w[1]] += 1;
    }
    let mut total = p1.ln();
    for i in 0..states {
        for j in 0..states {
            let c = counts[i * states + j];
            if c == 0 {
                continue;
            }
            let step = kernel[i][j];
            if step == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            total += c as f64 * step.ln();
        }
    }
    Ok(total)
}

/// log of the alternative measure of a word, in nats.
pub fn log_alt_mass(problem: &TestingProblem, word: &[usize]) -> Result<f64> {
    match problem.alternative() {
        AlternativeMeasure::Counting => Ok(0.0),
        AlternativeMeasure::ScaledWeights(weights) => {
            check_word(word, weights.len())?;
            iid_log_mass(word, |x| weights[x], weights.len())
        }
        AlternativeMeasure::Probability(m) => match (problem.null(), m.as_ref()) {
            // paired marker: read the alternative side of the null pair
            (SourceModel::Markov(pair), SourceModel::Markov(_)) => {
                check_word(word, pair.states())?;
                let stat = stationary_distribution_checked(pair.kernel_alt())?;
                markov_log_mass(word, &stat, pair.kernel_alt())
            }
            (SourceModel::Unifilar(pair), SourceModel::Unifilar(_)) => pair.log_mass(word, true),
            (_, SourceModel::Iid(q)) => {
                check_word(word, q.len())?;
                iid_log_mass(word, |x| q.mass(x), q.len())
            }
            (_, other) => Err(Error::Unsupported(format!(
                "alternative mass for {} model",
                other.kind_name()
            ))),
        },
    }
}

fn stationary_distribution_checked(kernel: &crate::models::Kernel) -> Result<Vec<f64>> {
    if !crate::models::markov::is_irreducible(kernel) {
        return Err(Error::Degenerate(
            "alternative kernel is not irreducible; its stationary law is not unique".into(),
        ));
    }
    stationary_distribution(kernel)
}

/// Normalised log-likelihood ratio `(1/n) log(P_null(x) / G_alt(x))` in nats.
///
/// Off-support conventions: +inf when the alternative measure vanishes
/// (including on the common null set), -inf when only the null vanishes.
pub fn divergence_density(problem: &TestingProblem, sequence: &Sequence) -> Result<f64> {
    if sequence.is_empty() {
        return Err(Error::InvalidInput("empty sequence".into()));
    }
    match (problem.null(), sequence) {
        (SourceModel::Gaussian(pair), Sequence::Real(xs)) => {
            let total: f64 = xs.iter().map(|&x| pair.letter_log_ratio(x)).sum();
            Ok(total / xs.len() as f64)
        }
        (SourceModel::Gaussian(_), Sequence::Discrete(_)) => Err(Error::AlphabetMismatch(
            "Gaussian model takes real-valued sequences".into(),
        )),
        (SourceModel::Step(_), _) => Err(Error::Unsupported(
            "step-spectrum words are not materialised; use its analytic spectrum".into(),
        )),
        (null, Sequence::Discrete(word)) => {
            let ln_p = log_null_mass(null, word)?;
            let ln_g = log_alt_mass(problem, word)?;
            let n = word.len() as f64;
            if ln_g == f64::NEG_INFINITY {
                return Ok(f64::INFINITY);
            }
            if ln_p == f64::NEG_INFINITY {
                return Ok(f64::NEG_INFINITY);
            }
            Ok((ln_p - ln_g) / n)
        }
        (_, Sequence::Real(_)) => Err(Error::AlphabetMismatch(
            "discrete model takes letter sequences".into(),
        )),
    }
}

/// First-order divergence rate of the problem, together with a flag marking
/// support singularity (null mass escaping the alternative's support).
///
/// For ergodic models this is the almost-sure limit of the divergence
/// density; for the mixture and step models it is the infimum of the
/// spectrum's limiting support, which is what the exponent formulas consume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanDivergence {
    pub nats: f64,
    pub singular: bool,
}

pub fn mean_divergence(problem: &TestingProblem) -> Result<MeanDivergence> {
    let finite = |nats: f64| MeanDivergence {
        nats,
        singular: false,
    };
    let singular = MeanDivergence {
        nats: f64::INFINITY,
        singular: true,
    };
    match problem.null() {
        SourceModel::Iid(p) => {
            let weights = problem
                .alternative()
                .letter_log_weights(p.len())
                .expect("iid problems carry letter weights");
            let mut total = 0.0;
            for i in p.support() {
                if weights[i] == f64::NEG_INFINITY {
                    return Ok(singular);
                }
                total += p.mass(i) * (p.mass(i).ln() - weights[i]);
            }
            Ok(finite(total))
        }
        SourceModel::Gaussian(pair) => Ok(finite(pair.divergence_rate())),
        SourceModel::Step(model) => Ok(finite(model.scale())),
        SourceModel::Markov(pair) => {
            let d = markov_mean(pair, problem.alternative())?;
            Ok(MeanDivergence {
                nats: d,
                singular: d.is_infinite(),
            })
        }
        SourceModel::Unifilar(pair) => {
            let expanded = unifilar_expand(pair)?;
            let letter_of = |i: usize| expanded.symbols[i].letter;
            let d = markov_mean_with_letters(&expanded.pair, problem.alternative(), &letter_of)?;
            Ok(MeanDivergence {
                nats: d,
                singular: d.is_infinite(),
            })
        }
        SourceModel::Mixed(mix) => {
            let mut best = f64::INFINITY;
            let mut any_singular = false;
            for comp in mix.components() {
                let sub = match comp {
                    crate::models::MixtureComponent::Iid(d) => TestingProblem::new(
                        SourceModel::Iid(d.clone()),
                        problem.alternative().clone(),
                        problem.log_base(),
                    )?,
                    crate::models::MixtureComponent::Markov(m) => TestingProblem::new(
                        SourceModel::Markov(m.clone()),
                        match problem.alternative() {
                            AlternativeMeasure::Probability(_) => {
                                return Err(Error::Unsupported(
                                    "Markov mixture components need a counting or weight \
                                     alternative here"
                                        .into(),
                                ))
                            }
                            other => other.clone(),
                        },
                        problem.log_base(),
                    )?,
                };
                let md = mean_divergence(&sub)?;
                any_singular |= md.singular;
                best = best.min(md.nats);
            }
            Ok(MeanDivergence {
                nats: best,
                singular: any_singular && best.is_infinite(),
            })
        }
    }
}

fn markov_mean(pair: &crate::models::MarkovPair, alt: &AlternativeMeasure) -> Result<f64> {
    markov_mean_with_letters(pair, alt, &|i| i)
}

/// Stationary mean of the per-step log ratio.  `letter_of` maps a chain
/// symbol to the output letter whose alternative weight applies (identity
/// for plain chains, the emitted letter for lifted unifilar chains).
fn markov_mean_with_letters(
    pair: &crate::models::MarkovPair,
    alt: &AlternativeMeasure,
    letter_of: &dyn Fn(usize) -> usize,
) -> Result<f64> {
    let n = pair.states();
    let stat = pair.stationary_null();
    let mut total = 0.0;
    for i in 0..n {
        if stat[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            let p = pair.kernel_null()[i][j];
            if p == 0.0 {
                continue;
            }
            let alt_weight = match alt {
                AlternativeMeasure::Probability(_) => pair.kernel_alt()[i][j],
                AlternativeMeasure::Counting => 1.0,
                AlternativeMeasure::ScaledWeights(w) => w[letter_of(j)],
            };
            if alt_weight == 0.0 {
                return Ok(f64::INFINITY);
            }
            total += stat[i] * p * (p / alt_weight).ln();
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{FiniteDistribution, GaussianMeanShiftPair, MarkovPair};

    fn iid_problem(p: Vec<f64>, q: Vec<f64>) -> TestingProblem {
        TestingProblem::iid(
            FiniteDistribution::new(p).unwrap(),
            FiniteDistribution::new(q).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn density_of_repeated_letter_is_letter_log_ratio() {
        let prob = iid_problem(vec![0.5, 0.5], vec![0.9, 0.1]);
        let d = divergence_density(&prob, &Sequence::Discrete(vec![1, 1])).unwrap();
        assert!((d - 5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn density_concatenation_averages() {
        let prob = iid_problem(vec![0.5, 0.5], vec![0.9, 0.1]);
        let a = vec![0, 1, 1];
        let b = vec![1, 0];
        let da = divergence_density(&prob, &Sequence::Discrete(a.clone())).unwrap();
        let db = divergence_density(&prob, &Sequence::Discrete(b.clone())).unwrap();
        let mut ab = a.clone();
        ab.extend_from_slice(&b);
        let dab = divergence_density(&prob, &Sequence::Discrete(ab)).unwrap();
        let expect = (3.0 * da + 2.0 * db) / 5.0;
        assert!((dab - expect).abs() < 1e-14);
    }

    #[test]
    fn off_support_conventions() {
        let prob = iid_problem(vec![1.0, 0.0], vec![0.5, 0.5]);
        let d = divergence_density(&prob, &Sequence::Discrete(vec![1])).unwrap();
        assert_eq!(d, f64::NEG_INFINITY);
        let prob = iid_problem(vec![0.5, 0.5], vec![1.0, 0.0]);
        let d = divergence_density(&prob, &Sequence::Discrete(vec![1])).unwrap();
        assert_eq!(d, f64::INFINITY);
    }

    #[test]
    fn out_of_alphabet_letter_is_rejected() {
        let prob = iid_problem(vec![0.5, 0.5], vec![0.9, 0.1]);
        assert!(divergence_density(&prob, &Sequence::Discrete(vec![0, 2])).is_err());
    }

    #[test]
    fn mean_divergence_iid_is_relative_entropy() {
        let prob = iid_problem(vec![0.5, 0.5], vec![0.9, 0.1]);
        let expect = 0.5 * (0.5f64 / 0.9).ln() + 0.5 * (0.5f64 / 0.1).ln();
        let md = mean_divergence(&prob).unwrap();
        assert!((md.nats - expect).abs() < 1e-14);
        assert!((expect - 0.5108).abs() < 5e-5);
        assert!(!md.singular);
    }

    #[test]
    fn mean_divergence_flags_singular_support() {
        let prob = iid_problem(vec![0.5, 0.5], vec![1.0, 0.0]);
        let md = mean_divergence(&prob).unwrap();
        assert!(md.nats.is_infinite());
        assert!(md.singular);
    }

    #[test]
    fn mean_divergence_counting_is_negative_entropy() {
        let p = FiniteDistribution::new(vec![0.25, 0.75]).unwrap();
        let entropy = p.entropy();
        let prob = TestingProblem::iid_vs_counting(p).unwrap();
        let md = mean_divergence(&prob).unwrap();
        assert!((md.nats + entropy).abs() < 1e-14);
    }

    #[test]
    fn markov_mean_divergence_matches_conditional_divergence() {
        let p = vec![vec![0.9, 0.1], vec![0.4, 0.6]];
        let q = vec![vec![0.5, 0.5], vec![0.2, 0.8]];
        let pair = MarkovPair::new(p, q).unwrap();
        let expect = pair.conditional_divergence();
        let prob = TestingProblem::markov(pair).unwrap();
        let md = mean_divergence(&prob).unwrap();
        assert!((md.nats - expect).abs() < 1e-12);
    }

    #[test]
    fn gaussian_density_from_sum() {
        let pair = GaussianMeanShiftPair::new(0.0, 2.0, 1.0).unwrap();
        let prob = TestingProblem::gaussian(pair.clone()).unwrap();
        let xs = vec![0.5, -1.0, 2.0];
        let expect: f64 =
            xs.iter().map(|&x| pair.letter_log_ratio(x)).sum::<f64>() / xs.len() as f64;
        let d = divergence_density(&prob, &Sequence::Real(xs)).unwrap();
        assert!((d - expect).abs() < 1e-14);
    }
}
