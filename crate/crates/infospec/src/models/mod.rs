//! Source models and testing problems.
//!
//! A testing problem pairs a null-hypothesis source with an alternative
//! measure on the same sequence space.  The alternative is either a genuine
//! probability law or a nonnegative reference measure (counting, or i.i.d.
//! scaled weights); the latter turns hypothesis-testing exponents into
//! source-coding quantities.
//!
//! Pair-structured models (Markov, unifilar, Gaussian mean shift, step
//! spectrum) carry their alternative law inside the model itself, because the
//! engines need the two laws aligned transition by transition.  For those
//! models the problem's alternative field is the paired-probability marker
//! produced by the canonical constructors.

pub mod assumptions;
pub mod density;
pub mod dist;
pub mod gaussian;
pub mod markov;
pub mod mixed;
pub mod sampling;
pub mod step;
pub mod unifilar;

use serde::{Deserialize, Serialize};

pub use assumptions::{check_theorem4_assumptions, AssumptionsReport};
pub use density::{divergence_density, mean_divergence, MeanDivergence, Sequence};
pub use dist::FiniteDistribution;
pub use gaussian::GaussianMeanShiftPair;
pub use markov::{Kernel, MarkovPair};
pub use mixed::{MixedPair, MixtureComponent};
pub use sampling::sample_sequences;
pub use step::{SpectrumAtom, StepSpectrumModel};
pub use unifilar::{unifilar_expand, ExpandedUnifilar, LiftedSymbol, UnifilarPair};

use crate::error::{Error, Result};

/// Null-hypothesis process description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SourceModel {
    Iid(FiniteDistribution),
    Markov(MarkovPair),
    Unifilar(UnifilarPair),
    Gaussian(GaussianMeanShiftPair),
    Mixed(MixedPair),
    Step(StepSpectrumModel),
}

impl SourceModel {
    /// Alphabet size for discrete models; `None` for real-valued or abstract
    /// spectra.
    pub fn letters(&self) -> Option<usize> {
        match self {
            SourceModel::Iid(d) => Some(d.len()),
            SourceModel::Markov(m) => Some(m.states()),
            SourceModel::Unifilar(u) => Some(u.letters()),
            SourceModel::Mixed(m) => Some(m.letters()),
            SourceModel::Gaussian(_) | SourceModel::Step(_) => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SourceModel::Iid(_) => "iid",
            SourceModel::Markov(_) => "markov",
            SourceModel::Unifilar(_) => "unifilar",
            SourceModel::Gaussian(_) => "gaussian",
            SourceModel::Mixed(_) => "mixed",
            SourceModel::Step(_) => "step",
        }
    }
}

/// Reference measure playing the alternative role.
///
/// `Probability` wraps either an explicit i.i.d. law (for memoryless and
/// mixed nulls) or, for pair-structured nulls, a marker equal to the null
/// model meaning "the law paired inside the model".  `Counting` weighs every
/// word by one; `ScaledWeights` weighs a word by the product of per-letter
/// weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AlternativeMeasure {
    Probability(Box<SourceModel>),
    Counting,
    ScaledWeights(Vec<f64>),
}

impl AlternativeMeasure {
    pub fn is_probability(&self) -> bool {
        matches!(self, AlternativeMeasure::Probability(_))
    }

    /// Per-letter log weights for measure kinds that factor over letters.
    pub fn letter_log_weights(&self, letters: usize) -> Option<Vec<f64>> {
        match self {
            AlternativeMeasure::Probability(m) => match m.as_ref() {
                SourceModel::Iid(d) => Some(d.masses().iter().map(|&w| w.ln()).collect()),
                _ => None,
            },
            AlternativeMeasure::Counting => Some(vec![0.0; letters]),
            AlternativeMeasure::ScaledWeights(w) => Some(w.iter().map(|&x| x.ln()).collect()),
        }
    }

    /// Exponential growth floor of the total measure: the limit of
    /// `-(1/n) log G_n(X^n)` in nats.  Zero for probability laws, `-log A`
    /// for counting over `A` letters, `-log sum(w)` for scaled weights.
    pub fn total_mass_exponent(&self, letters: usize) -> f64 {
        match self {
            AlternativeMeasure::Probability(_) => 0.0,
            AlternativeMeasure::Counting => -(letters as f64).ln(),
            AlternativeMeasure::ScaledWeights(w) => -w.iter().sum::<f64>().ln(),
        }
    }
}

/// A null source, an alternative measure, and the logarithm base used when
/// formatting results.  All internal computation is in nats; `log_base`
/// only rescales values at input/output boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestingProblem {
    null: SourceModel,
    alternative: AlternativeMeasure,
    log_base: f64,
}

impl TestingProblem {
    pub fn new(null: SourceModel, alternative: AlternativeMeasure, log_base: f64) -> Result<Self> {
        if !(log_base.is_finite() && log_base > 1.0) {
            return Err(Error::InvalidInput(format!(
                "log base {log_base} must exceed 1"
            )));
        }
        match (&null, &alternative) {
            (SourceModel::Iid(p), AlternativeMeasure::Probability(m)) => match m.as_ref() {
                SourceModel::Iid(q) => {
                    if p.len() != q.len() {
                        return Err(Error::AlphabetMismatch(format!(
                            "null alphabet {} vs alternative alphabet {}",
                            p.len(),
                            q.len()
                        )));
                    }
                }
                other => {
                    return Err(Error::Unsupported(format!(
                        "i.i.d. null with {} alternative",
                        other.kind_name()
                    )))
                }
            },
            (SourceModel::Mixed(mix), AlternativeMeasure::Probability(m)) => match m.as_ref() {
                SourceModel::Iid(q) => {
                    if mix.letters() != q.len() {
                        return Err(Error::AlphabetMismatch(format!(
                            "mixture alphabet {} vs alternative alphabet {}",
                            mix.letters(),
                            q.len()
                        )));
                    }
                }
                other => {
                    return Err(Error::Unsupported(format!(
                        "mixed null with {} alternative",
                        other.kind_name()
                    )))
                }
            },
            (
                SourceModel::Markov(_)
                | SourceModel::Unifilar(_)
                | SourceModel::Gaussian(_)
                | SourceModel::Step(_),
                AlternativeMeasure::Probability(m),
            ) => {
                if m.as_ref() != &null {
                    return Err(Error::Unsupported(
                        "pair-structured nulls take their probability alternative from the \
                         pair itself; construct the problem with the paired marker"
                            .into(),
                    ));
                }
            }
            (
                SourceModel::Gaussian(_) | SourceModel::Step(_),
                AlternativeMeasure::Counting | AlternativeMeasure::ScaledWeights(_),
            ) => {
                return Err(Error::Unsupported(
                    "counting and weight measures need a finite alphabet".into(),
                ))
            }
            (_, AlternativeMeasure::Counting) => {}
            (_, AlternativeMeasure::ScaledWeights(w)) => {
                let letters = null.letters().expect("finite model");
                if w.len() != letters {
                    return Err(Error::AlphabetMismatch(format!(
                        "{} weights for alphabet of size {letters}",
                        w.len()
                    )));
                }
                if w.iter().any(|&x| !x.is_finite() || x < 0.0) {
                    return Err(Error::InvalidInput(
                        "scaled weights must be finite and nonnegative".into(),
                    ));
                }
                if w.iter().all(|&x| x == 0.0) {
                    return Err(Error::InvalidInput(
                        "scaled weights must not all vanish".into(),
                    ));
                }
            }
        }
        Ok(Self {
            null,
            alternative,
            log_base,
        })
    }

    pub fn iid(p: FiniteDistribution, q: FiniteDistribution) -> Result<Self> {
        Self::new(
            SourceModel::Iid(p),
            AlternativeMeasure::Probability(Box::new(SourceModel::Iid(q))),
            std::f64::consts::E,
        )
    }

    pub fn iid_vs_counting(p: FiniteDistribution) -> Result<Self> {
        Self::new(
            SourceModel::Iid(p),
            AlternativeMeasure::Counting,
            std::f64::consts::E,
        )
    }

    pub fn markov(pair: MarkovPair) -> Result<Self> {
        let marker = AlternativeMeasure::Probability(Box::new(SourceModel::Markov(pair.clone())));
        Self::new(SourceModel::Markov(pair), marker, std::f64::consts::E)
    }

    pub fn markov_vs_counting(pair: MarkovPair) -> Result<Self> {
        Self::new(
            SourceModel::Markov(pair),
            AlternativeMeasure::Counting,
            std::f64::consts::E,
        )
    }

    pub fn unifilar(pair: UnifilarPair) -> Result<Self> {
        let marker = AlternativeMeasure::Probability(Box::new(SourceModel::Unifilar(pair.clone())));
        Self::new(SourceModel::Unifilar(pair), marker, std::f64::consts::E)
    }

    pub fn gaussian(pair: GaussianMeanShiftPair) -> Result<Self> {
        let marker = AlternativeMeasure::Probability(Box::new(SourceModel::Gaussian(pair.clone())));
        Self::new(SourceModel::Gaussian(pair), marker, std::f64::consts::E)
    }

    pub fn mixed(mix: MixedPair, alt: FiniteDistribution) -> Result<Self> {
        Self::new(
            SourceModel::Mixed(mix),
            AlternativeMeasure::Probability(Box::new(SourceModel::Iid(alt))),
            std::f64::consts::E,
        )
    }

    /// Step-spectrum problem; the alternative is the uniform law baked into
    /// the model, and results default to the model's own logarithm base.
    pub fn step(model: StepSpectrumModel) -> Result<Self> {
        let base = model.log_base();
        let marker = AlternativeMeasure::Probability(Box::new(SourceModel::Step(model.clone())));
        Self::new(SourceModel::Step(model), marker, base)
    }

    pub fn with_log_base(mut self, log_base: f64) -> Result<Self> {
        if !(log_base.is_finite() && log_base > 1.0) {
            return Err(Error::InvalidInput(format!(
                "log base {log_base} must exceed 1"
            )));
        }
        self.log_base = log_base;
        Ok(self)
    }

    pub fn null(&self) -> &SourceModel {
        &self.null
    }

    pub fn alternative(&self) -> &AlternativeMeasure {
        &self.alternative
    }

    pub fn log_base(&self) -> f64 {
        self.log_base
    }

    /// Factor converting nats into `log_base` units.
    pub fn output_scale(&self) -> f64 {
        1.0 / self.log_base.ln()
    }

    /// Factor converting `log_base` units into nats.  Inputs must be scaled
    /// by multiplying with this factor, not by dividing by `output_scale`:
    /// the single rounding keeps boundary queries bitwise aligned with
    /// internally derived breakpoints such as the staircase spectrum's.
    pub fn input_scale(&self) -> f64 {
        self.log_base.ln()
    }

    pub fn letters(&self) -> Option<usize> {
        self.null.letters()
    }

    /// Total-measure exponent floor of the alternative, in nats.
    pub fn total_mass_exponent(&self) -> f64 {
        match self.letters() {
            Some(a) => self.alternative.total_mass_exponent(a),
            None => 0.0,
        }
    }

    /// Stable 64-bit fingerprint of the problem description, used to tie
    /// sweep outputs back to their inputs.
    pub fn fingerprint(&self) -> u64 {
        let encoded = serde_json::to_string(self).unwrap_or_default();
        // FNV-1a
        let mut h: u64 = 0xcbf29ce484222325;
        for b in encoded.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iid_constructor_checks_alphabets() {
        let p = FiniteDistribution::new(vec![0.5, 0.5]).unwrap();
        let q3 = FiniteDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert!(TestingProblem::iid(p.clone(), q3).is_err());
        let q = FiniteDistribution::new(vec![0.9, 0.1]).unwrap();
        assert!(TestingProblem::iid(p, q).is_ok());
    }

    #[test]
    fn counting_floor_is_negative_log_alphabet() {
        let p = FiniteDistribution::new(vec![0.25; 4]).unwrap();
        let prob = TestingProblem::iid_vs_counting(p).unwrap();
        assert!((prob.total_mass_exponent() + 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn weights_floor_uses_total_weight() {
        let p = FiniteDistribution::new(vec![0.5, 0.5]).unwrap();
        let prob = TestingProblem::new(
            SourceModel::Iid(p),
            AlternativeMeasure::ScaledWeights(vec![2.0, 3.0]),
            std::f64::consts::E,
        )
        .unwrap();
        assert!((prob.total_mass_exponent() + 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn gaussian_rejects_counting() {
        let g = GaussianMeanShiftPair::new(0.0, 1.0, 1.0).unwrap();
        let err = TestingProblem::new(
            SourceModel::Gaussian(g),
            AlternativeMeasure::Counting,
            std::f64::consts::E,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn fingerprint_distinguishes_problems() {
        let p = FiniteDistribution::new(vec![0.5, 0.5]).unwrap();
        let q = FiniteDistribution::new(vec![0.9, 0.1]).unwrap();
        let a = TestingProblem::iid(p.clone(), q.clone()).unwrap();
        let b = TestingProblem::iid(q, p).unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
    }
}
