//! Monte Carlo estimate of the divergence-density spectrum.
//!
//! Blocks are drawn from the null law in fixed-size chunks with per-chunk
//! derived seeds, so the estimate depends only on (problem, n, samples,
//! seed) and not on thread scheduling.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::density::divergence_density;
use crate::models::sampling::{rng_for, SequenceSampler};
use crate::models::TestingProblem;

const CHUNK: usize = 1 << 16;
/// Two-sided confidence level of the distribution-free band.
const BAND_LEVEL: f64 = 0.01;

/// Empirical divergence-density distribution at one blocklength.
#[derive(Debug, Clone)]
pub struct SpectrumEstimate {
    n: usize,
    sorted: Vec<f64>,
    /// half-width of the distribution-free confidence band on the
    /// empirical distribution function
    pub dkw_epsilon: f64,
}

impl SpectrumEstimate {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> usize {
        self.sorted.len()
    }

    /// Sampled density values, ascending.
    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// Empirical probability of the lower tail at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let count = self.sorted.partition_point(|v| *v <= x);
        count as f64 / self.sorted.len() as f64
    }

    /// Tail-exponent estimate: -(1/n) log of the empirical lower tail.
    pub fn eta_hat(&self, x: f64) -> f64 {
        let tail = self.cdf(x);
        if tail == 0.0 {
            f64::INFINITY
        } else {
            -tail.ln() / self.n as f64
        }
    }

    /// Interval containing the population tail exponent whenever the
    /// distribution function stays inside the confidence band.
    pub fn eta_band(&self, x: f64) -> (f64, f64) {
        let tail = self.cdf(x);
        let nf = self.n as f64;
        let lower_tail = (tail + self.dkw_epsilon).min(1.0);
        let upper_tail = tail - self.dkw_epsilon;
        let lo = if lower_tail > 0.0 {
            -lower_tail.ln() / nf
        } else {
            f64::INFINITY
        };
        let hi = if upper_tail > 0.0 {
            -upper_tail.ln() / nf
        } else {
            f64::INFINITY
        };
        (lo, hi)
    }
}

/// Sample the divergence density `samples` times at blocklength `n`.
pub fn mc_spectrum(
    problem: &TestingProblem,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<SpectrumEstimate> {
    if n == 0 {
        return Err(Error::InvalidInput("blocklength must be positive".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("sample count must be positive".into()));
    }
    let sampler = SequenceSampler::new(problem.null())?;
    let chunk_count = samples.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunk_count)
        .into_par_iter()
        .map(|chunk| -> Result<Vec<f64>> {
            let mut rng = rng_for(seed, chunk as u64);
            let count = CHUNK.min(samples - chunk * CHUNK);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let sequence = sampler.sample(&mut rng, n);
                out.push(divergence_density(problem, &sequence)?);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut sorted: Vec<f64> = parts.into_iter().flatten().collect();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let dkw_epsilon = ((2.0 / BAND_LEVEL).ln() / (2.0 * samples as f64)).sqrt();
    Ok(SpectrumEstimate {
        n,
        sorted,
        dkw_epsilon,
    })
}
