//! Exact finite-blocklength Neyman-Pearson trade-off.
//!
//! Words of length n are enumerated (or, for the staircase model, read off
//! its three exact mass classes), aggregated into likelihood-ratio blocks,
//! and sorted by ratio.  Every optimal test is a threshold on that order
//! with randomization inside at most one block, so the trade-off curve is
//! the piecewise-linear interpolation of the block frontier.

use rayon::prelude::*;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::models::density::{log_alt_mass, log_null_mass};
use crate::models::{AlternativeMeasure, SourceModel, TestingProblem};

const ENUMERATION_BUDGET: f64 = (1u64 << 24) as f64;
const CHUNK: u64 = 1 << 16;
/// Word lists are materialised only below this count.
const WORD_STORE_LIMIT: u64 = 1 << 16;

/// Words sharing one exact likelihood-ratio value.
#[derive(Debug, Clone)]
pub struct RatioBlock {
    /// log of null mass over alternative mass; +inf where the alternative
    /// vanishes
    pub log_ratio: f64,
    /// total null probability of the block
    pub null_mass: f64,
    /// total alternative measure of the block
    pub alt_mass: f64,
    /// lexicographic word indices, kept only for small word counts
    pub words: Option<Vec<u64>>,
}

/// The exact trade-off between null rejection mass and accepted
/// alternative mass at one blocklength.
#[derive(Debug, Clone)]
pub struct NpTradeoff {
    n: usize,
    blocks: Vec<RatioBlock>,
    kappa: f64,
}

/// One operating point on the randomized trade-off curve.
#[derive(Debug, Clone, Copy)]
pub struct NpOperatingPoint {
    /// null rejection probability actually achieved
    pub mu: f64,
    /// accepted alternative mass
    pub lambda: f64,
    /// block split by the threshold, if the budget lands inside one
    pub threshold_block: Option<usize>,
    /// fraction of the threshold block accepted
    pub acceptance_fraction: f64,
}

impl NpTradeoff {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Ratio blocks in decreasing likelihood-ratio order.
    pub fn blocks(&self) -> &[RatioBlock] {
        &self.blocks
    }

    /// Total alternative measure of the whole word space.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Deterministic-test vertices, beginning at the empty acceptance
    /// region (mu = 1, lambda = 0).
    pub fn frontier(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.blocks.len() + 1);
        let mut mu = 1.0;
        let mut lambda = 0.0;
        out.push((mu, lambda));
        for block in &self.blocks {
            mu = (mu - block.null_mass).max(0.0);
            lambda += block.alt_mass;
            out.push((mu, lambda));
        }
        out
    }

    /// Least accepted alternative mass over tests whose null rejection
    /// probability stays within `budget`, randomizing at the threshold.
    pub fn lambda_at_mu_budget(&self, budget: f64) -> NpOperatingPoint {
        if budget >= 1.0 {
            return NpOperatingPoint {
                mu: 1.0,
                lambda: 0.0,
                threshold_block: None,
                acceptance_fraction: 0.0,
            };
        }
        let mut mu = 1.0;
        let mut lambda = 0.0;
        for (i, block) in self.blocks.iter().enumerate() {
            let mu_next = (mu - block.null_mass).max(0.0);
            if mu_next <= budget {
                let fraction = if block.null_mass > 0.0 {
                    ((mu - budget) / block.null_mass).clamp(0.0, 1.0)
                } else {
                    1.0
                };
                return NpOperatingPoint {
                    mu: mu - fraction * block.null_mass,
                    lambda: lambda + fraction * block.alt_mass,
                    threshold_block: Some(i),
                    acceptance_fraction: fraction,
                };
            }
            mu = mu_next;
            lambda += block.alt_mass;
        }
        NpOperatingPoint {
            mu,
            lambda,
            threshold_block: None,
            acceptance_fraction: 1.0,
        }
    }

    /// Sorted word indices of the first `block_count` blocks; `None` when
    /// word lists were not materialised.
    pub fn acceptance_set(&self, block_count: usize) -> Option<Vec<u64>> {
        let mut out = Vec::new();
        for block in &self.blocks[..block_count.min(self.blocks.len())] {
            out.extend(block.words.as_ref()?.iter().copied());
        }
        out.sort_unstable();
        Some(out)
    }
}

/// Finite-n exponent readings of the trade-off at rejection budget
/// `exp(-n r)`.
#[derive(Debug, Clone, Copy)]
pub struct FiniteNExponents {
    pub n: usize,
    pub r: f64,
    pub mu_budget: f64,
    pub lambda: f64,
    pub kappa: f64,
    /// -(1/n) log lambda; infinite when lambda = 0
    pub error_exponent: f64,
    /// -(1/n) log (kappa - lambda)
    pub correct_exponent: f64,
}

fn word_of(index: u64, n: usize, letters: u64, out: &mut Vec<usize>) {
    out.clear();
    out.resize(n, 0);
    let mut rem = index;
    for k in (0..n).rev() {
        out[k] = (rem % letters) as usize;
        rem /= letters;
    }
}

#[derive(Default)]
struct BlockAccum {
    null_mass: f64,
    alt_mass: f64,
    words: Vec<u64>,
}

fn enumerate_blocks(problem: &TestingProblem, n: usize) -> Result<Vec<RatioBlock>> {
    let letters = problem
        .letters()
        .expect("enumeration requires a finite alphabet") as u64;
    let total_f = (letters as f64).powi(n as i32);
    if total_f > ENUMERATION_BUDGET {
        return Err(Error::ResourceBudget(format!(
            "{letters}^{n} words exceed the exact enumeration budget of 2^24; \
             use the Monte Carlo spectrum estimator instead"
        )));
    }
    let total = letters.pow(n as u32);
    let store_words = total <= WORD_STORE_LIMIT;

    let chunk_count = total.div_ceil(CHUNK);
    let partials: Vec<HashMap<u64, BlockAccum>> = (0..chunk_count)
        .into_par_iter()
        .map(|c| -> Result<HashMap<u64, BlockAccum>> {
            let mut map: HashMap<u64, BlockAccum> = HashMap::new();
            let mut word = Vec::with_capacity(n);
            let end = ((c + 1) * CHUNK).min(total);
            for index in c * CHUNK..end {
                word_of(index, n, letters, &mut word);
                let lp = log_null_mass(problem.null(), &word)?;
                if lp == f64::NEG_INFINITY {
                    continue;
                }
                let lg = log_alt_mass(problem, &word)?;
                let ratio = lp - lg;
                let entry = map.entry(ratio.to_bits()).or_default();
                entry.null_mass += lp.exp();
                entry.alt_mass += lg.exp();
                if store_words {
                    entry.words.push(index);
                }
            }
            Ok(map)
        })
        .collect::<Result<_>>()?;

    // merge in chunk order so the mass sums are reproducible
    let mut merged: HashMap<u64, BlockAccum> = HashMap::new();
    for partial in partials {
        for (bits, accum) in partial {
            let entry = merged.entry(bits).or_default();
            entry.null_mass += accum.null_mass;
            entry.alt_mass += accum.alt_mass;
            entry.words.extend(accum.words);
        }
    }
    let mut blocks: Vec<RatioBlock> = merged
        .into_iter()
        .map(|(bits, mut accum)| {
            accum.words.sort_unstable();
            RatioBlock {
                log_ratio: f64::from_bits(bits),
                null_mass: accum.null_mass,
                alt_mass: accum.alt_mass,
                words: store_words.then_some(accum.words),
            }
        })
        .collect();
    blocks.sort_unstable_by(|a, b| b.log_ratio.partial_cmp(&a.log_ratio).unwrap());
    Ok(blocks)
}

fn step_blocks(model: &crate::models::StepSpectrumModel, n: usize) -> Result<Vec<RatioBlock>> {
    let atoms = model.finite_n_atoms(n)?;
    let mut blocks: Vec<RatioBlock> = atoms
        .iter()
        .map(|&(null_each, count, alt_each)| RatioBlock {
            log_ratio: null_each.ln() - alt_each.ln(),
            null_mass: null_each * count,
            alt_mass: alt_each * count,
            words: None,
        })
        .collect();
    blocks.sort_unstable_by(|a, b| b.log_ratio.partial_cmp(&a.log_ratio).unwrap());
    Ok(blocks)
}

fn total_alt_mass(problem: &TestingProblem, n: usize) -> f64 {
    match problem.alternative() {
        AlternativeMeasure::Probability(_) => 1.0,
        AlternativeMeasure::Counting => {
            let letters = problem.letters().expect("counting needs an alphabet");
            (letters as f64).powi(n as i32)
        }
        AlternativeMeasure::ScaledWeights(w) => w.iter().sum::<f64>().powi(n as i32),
    }
}

/// Build the exact trade-off for blocklength `n`.
pub fn np_tradeoff(problem: &TestingProblem, n: usize) -> Result<NpTradeoff> {
    if n == 0 {
        return Err(Error::InvalidInput("blocklength must be positive".into()));
    }
    let blocks = match problem.null() {
        SourceModel::Step(model) => step_blocks(model, n)?,
        SourceModel::Gaussian(_) => {
            return Err(Error::Unsupported(
                "real-valued words cannot be enumerated; use the Monte Carlo spectrum estimator"
                    .into(),
            ))
        }
        _ => enumerate_blocks(problem, n)?,
    };
    Ok(NpTradeoff {
        n,
        blocks,
        kappa: total_alt_mass(problem, n),
    })
}

/// Read the optimal finite-n exponent pair at rejection budget
/// `exp(-n r)`.
pub fn finite_n_exponents(problem: &TestingProblem, n: usize, r: f64) -> Result<FiniteNExponents> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidInput(format!(
            "constraint rate r = {r} must be a finite nonnegative real"
        )));
    }
    let tradeoff = np_tradeoff(problem, n)?;
    let nf = n as f64;
    let mu_budget = (-nf * r).exp();
    let op = tradeoff.lambda_at_mu_budget(mu_budget);
    let error_exponent = if op.lambda > 0.0 {
        -op.lambda.ln() / nf
    } else {
        f64::INFINITY
    };
    let residual = tradeoff.kappa - op.lambda;
    let correct_exponent = if residual > 0.0 {
        -residual.ln() / nf
    } else {
        f64::INFINITY
    };
    Ok(FiniteNExponents {
        n,
        r,
        mu_budget,
        lambda: op.lambda,
        kappa: tradeoff.kappa,
        error_exponent,
        correct_exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::sampling::rng_for;
    use crate::models::{FiniteDistribution, StepSpectrumModel};
    use rand::Rng;

    fn iid_problem(p: &[f64], q: &[f64]) -> TestingProblem {
        TestingProblem::iid(
            FiniteDistribution::new(p.to_vec()).unwrap(),
            FiniteDistribution::new(q.to_vec()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn frontier_runs_from_full_rejection_to_full_support() {
        let problem = iid_problem(&[0.5, 0.5], &[0.9, 0.1]);
        let tradeoff = np_tradeoff(&problem, 4).unwrap();
        let frontier = tradeoff.frontier();
        assert_eq!(frontier[0], (1.0, 0.0));
        let (mu_end, lambda_end) = *frontier.last().unwrap();
        assert!(mu_end.abs() < 1e-12);
        assert!((lambda_end - 1.0).abs() < 1e-12);
        for w in frontier.windows(2) {
            assert!(w[1].0 < w[0].0 + 1e-15, "mu must not increase: {w:?}");
            assert!(w[1].1 > w[0].1 - 1e-15, "lambda must not decrease: {w:?}");
        }
    }

    #[test]
    fn equal_ratio_words_merge_into_one_block() {
        // binary symmetric pair: the ratio depends only on the letter count
        let problem = iid_problem(&[0.5, 0.5], &[0.9, 0.1]);
        let tradeoff = np_tradeoff(&problem, 4).unwrap();
        assert_eq!(tradeoff.blocks().len(), 5);
        let sizes: Vec<usize> = tradeoff
            .blocks()
            .iter()
            .map(|b| b.words.as_ref().unwrap().len())
            .collect();
        let mut sorted = sizes.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![1, 1, 4, 4, 6]);
    }

    #[test]
    fn no_random_subset_beats_the_frontier() {
        let problem = iid_problem(&[0.6, 0.4], &[0.25, 0.75]);
        let n = 5;
        let tradeoff = np_tradeoff(&problem, n).unwrap();
        let words: Vec<(f64, f64)> = (0..(1u64 << n))
            .map(|index| {
                let mut word = Vec::new();
                word_of(index, n, 2, &mut word);
                (
                    log_null_mass(problem.null(), &word).unwrap().exp(),
                    log_alt_mass(&problem, &word).unwrap().exp(),
                )
            })
            .collect();
        let mut rng = rng_for(11, 0);
        for _ in 0..1000 {
            let mask: u32 = rng.random();
            let mut mu = 1.0;
            let mut lambda = 0.0;
            for (i, &(p, g)) in words.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    mu -= p;
                    lambda += g;
                }
            }
            let best = tradeoff.lambda_at_mu_budget(mu);
            assert!(
                lambda >= best.lambda - 1e-12,
                "subset ({mu}, {lambda}) undercuts the frontier value {}",
                best.lambda
            );
        }
    }

    #[test]
    fn singular_alternative_caps_lambda_below_one() {
        let problem = iid_problem(&[0.5, 0.5], &[1.0, 0.0]);
        let tradeoff = np_tradeoff(&problem, 3).unwrap();
        let (mu_end, lambda_end) = *tradeoff.frontier().last().unwrap();
        assert!(mu_end.abs() < 1e-12);
        // only the all-zero word carries alternative mass
        assert!((lambda_end - 1.0).abs() < 1e-12);
        let infinite_ratio = tradeoff
            .blocks()
            .iter()
            .filter(|b| b.log_ratio.is_infinite())
            .count();
        assert_eq!(infinite_ratio, 1);
    }

    #[test]
    fn staircase_tradeoff_follows_its_three_mass_classes() {
        let model = StepSpectrumModel::base2(0.2).unwrap();
        let problem = TestingProblem::step(model).unwrap();
        let n = 10;
        let tradeoff = np_tradeoff(&problem, n).unwrap();
        assert_eq!(tradeoff.blocks().len(), 3);
        let frontier = tradeoff.frontier();
        // after the top word: mu is the midset plus rare mass
        let midset = 2f64.powi(-2);
        let rare = 2f64.powi(-6);
        assert!((frontier[1].0 - (midset + rare)).abs() < 1e-12);
        assert!((frontier[1].1 - 2f64.powi(-(n as i32))).abs() < 1e-18);
        // randomized split inside the rare block
        let budget = 0.5 * rare;
        let op = tradeoff.lambda_at_mu_budget(budget);
        assert_eq!(op.threshold_block, Some(2));
        assert!((op.acceptance_fraction - 0.5).abs() < 1e-12);
        assert!((op.mu - budget).abs() < 1e-15);
    }

    #[test]
    fn zero_rate_budget_accepts_nothing() {
        let problem = iid_problem(&[0.5, 0.5], &[0.9, 0.1]);
        let out = finite_n_exponents(&problem, 6, 0.0).unwrap();
        assert_eq!(out.lambda, 0.0);
        assert!(out.error_exponent.is_infinite());
        assert!((out.kappa - 1.0).abs() < 1e-15);
        assert!(out.correct_exponent.abs() < 1e-12);
    }

    #[test]
    fn counting_kappa_grows_like_the_alphabet_power() {
        let p = FiniteDistribution::new(vec![0.11, 0.89]).unwrap();
        let problem = TestingProblem::iid_vs_counting(p).unwrap();
        let out = finite_n_exponents(&problem, 8, 0.0).unwrap();
        assert!((out.kappa - 256.0).abs() < 1e-9);
        // at r = 0 the correct-side exponent reads the total-mass floor
        assert!((out.correct_exponent + std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn oversized_blocklength_is_rejected_with_budget_error() {
        let problem = iid_problem(&[0.5, 0.5], &[0.9, 0.1]);
        assert!(matches!(
            np_tradeoff(&problem, 30),
            Err(Error::ResourceBudget(_))
        ));
    }

    #[test]
    fn markov_word_masses_cover_the_space() {
        let pair = crate::models::MarkovPair::new(
            vec![vec![0.9, 0.1], vec![0.2, 0.8]],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        )
        .unwrap();
        let problem = TestingProblem::markov(pair).unwrap();
        let tradeoff = np_tradeoff(&problem, 6).unwrap();
        let total_null: f64 = tradeoff.blocks().iter().map(|b| b.null_mass).sum();
        let total_alt: f64 = tradeoff.blocks().iter().map(|b| b.alt_mass).sum();
        assert!((total_null - 1.0).abs() < 1e-12);
        assert!((total_alt - 1.0).abs() < 1e-12);
    }
}
