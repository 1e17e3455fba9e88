use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::dist::MASS_TOLERANCE;

/// Row-stochastic transition kernel over a common finite alphabet, stored as
/// `kernel[from][to]`.
pub type Kernel = Vec<Vec<f64>>;

pub fn validate_kernel(kernel: &Kernel, what: &str) -> Result<usize> {
    let n = kernel.len();
    if n == 0 {
        return Err(Error::InvalidInput(format!("{what}: empty kernel")));
    }
    for (i, row) in kernel.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidInput(format!(
                "{what}: row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        let mut total = 0.0;
        for (j, &p) in row.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "{what}: entry ({i},{j}) = {p} is not a finite nonnegative real"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "{what}: row {i} sums to {total}"
            )));
        }
    }
    Ok(n)
}

/// Strong connectivity of the positive-transition graph, checked by forward
/// and backward reachability closure from state 0.
pub fn is_irreducible(kernel: &Kernel) -> bool {
    let n = kernel.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(s) = stack.pop() {
            for t in 0..n {
                let edge = if forward { kernel[s][t] } else { kernel[t][s] };
                if edge > 0.0 && !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen.into_iter().all(|b| b)
    };
    reach(true) && reach(false)
}

/// Unique stationary distribution of an irreducible kernel.  Uses the lazy
/// chain (K + I)/2, which shares the stationary vector and is aperiodic, so
/// plain fixed-point iteration converges for periodic inputs as well.
pub fn stationary_distribution(kernel: &Kernel) -> Result<Vec<f64>> {
    let n = kernel.len();
    let mut p = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..200_000 {
        for x in next.iter_mut() {
            *x = 0.0;
        }
        for i in 0..n {
            let half = 0.5 * p[i];
            next[i] += half;
            for j in 0..n {
                next[j] += half * kernel[i][j];
            }
        }
        let total: f64 = next.iter().sum();
        for x in next.iter_mut() {
            *x /= total;
        }
        let gap: f64 = p
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .sum();
        std::mem::swap(&mut p, &mut next);
        if gap < 1e-15 {
            return Ok(p);
        }
    }
    Err(Error::Numeric(
        "stationary distribution iteration did not converge".into(),
    ))
}

/// Null/alternative pair of Markov transition kernels on a shared alphabet.
///
/// The null kernel must be irreducible so that a unique stationary law exists;
/// the stationary vector is computed once at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovPair {
    kernel_null: Kernel,
    kernel_alt: Kernel,
    stationary_null: Vec<f64>,
}

impl MarkovPair {
    pub fn new(kernel_null: Kernel, kernel_alt: Kernel) -> Result<Self> {
        let n = validate_kernel(&kernel_null, "null kernel")?;
        let m = validate_kernel(&kernel_alt, "alternative kernel")?;
        if n != m {
            return Err(Error::AlphabetMismatch(format!(
                "null kernel has {n} states, alternative kernel has {m}"
            )));
        }
        if !is_irreducible(&kernel_null) {
            return Err(Error::Degenerate(
                "null kernel is not irreducible (reachability closure is a strict subset)".into(),
            ));
        }
        let stationary_null = stationary_distribution(&kernel_null)?;
        Ok(Self {
            kernel_null,
            kernel_alt,
            stationary_null,
        })
    }

    /// Pair whose alternative equals the null kernel; used for plain sources
    /// in coding problems, where the alternative side is ignored.
    pub fn source_only(kernel: Kernel) -> Result<Self> {
        Self::new(kernel.clone(), kernel)
    }

    pub fn states(&self) -> usize {
        self.kernel_null.len()
    }

    pub fn kernel_null(&self) -> &Kernel {
        &self.kernel_null
    }

    pub fn kernel_alt(&self) -> &Kernel {
        &self.kernel_alt
    }

    pub fn stationary_null(&self) -> &[f64] {
        &self.stationary_null
    }

    /// Stationary distribution of the alternative kernel, when irreducible.
    pub fn stationary_alt(&self) -> Result<Vec<f64>> {
        if !is_irreducible(&self.kernel_alt) {
            return Err(Error::Degenerate(
                "alternative kernel is not irreducible".into(),
            ));
        }
        stationary_distribution(&self.kernel_alt)
    }

    /// Conditional relative entropy D(null || alt | stationary) in nats;
    /// +inf when some positive null transition has zero alternative mass.
    pub fn conditional_divergence(&self) -> f64 {
        let mut d = 0.0;
        for (i, &pi) in self.stationary_null.iter().enumerate() {
            for j in 0..self.states() {
                let p = self.kernel_null[i][j];
                if p == 0.0 || pi == 0.0 {
                    continue;
                }
                let q = self.kernel_alt[i][j];
                if q == 0.0 {
                    return f64::INFINITY;
                }
                d += pi * p * (p / q).ln();
            }
        }
        d
    }
}
