use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed between a mass vector and total probability one.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Probability distribution on a finite alphabet `{0, .., len-1}`.
///
/// Masses are kept exactly as supplied (no renormalisation), so a vector
/// produced by truncating a countable distribution keeps its sub-unit tail
/// as long as the deficit stays inside `MASS_TOLERANCE`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDistribution {
    masses: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidInput("empty alphabet".into()));
        }
        for (i, &m) in masses.iter().enumerate() {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "mass {m} at letter {i} is not a finite nonnegative real"
                )));
            }
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "masses sum to {total}, which is farther than {MASS_TOLERANCE} from 1"
            )));
        }
        Ok(Self { masses })
    }

    pub fn uniform(letters: usize) -> Self {
        let w = 1.0 / letters as f64;
        Self {
            masses: vec![w; letters],
        }
    }

    /// Truncate a countable distribution to a finite prefix holding at least
    /// `1 - MASS_TOLERANCE` of the mass.  Returns the truncated distribution
    /// together with the discarded tail mass.  The iterator must enumerate
    /// nonnegative masses summing to one.
    pub fn truncate_countable<I>(masses: I, max_letters: usize) -> Result<(Self, f64)>
    where
        I: IntoIterator<Item = f64>,
    {
        let mut kept = Vec::new();
        let mut total = 0.0;
        for m in masses {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "countable mass {m} is not a finite nonnegative real"
                )));
            }
            kept.push(m);
            total += m;
            if 1.0 - total <= MASS_TOLERANCE {
                break;
            }
            if kept.len() >= max_letters {
                return Err(Error::ResourceBudget(format!(
                    "countable truncation did not reach mass {} within {max_letters} letters",
                    1.0 - MASS_TOLERANCE
                )));
            }
        }
        let tail = (1.0 - total).max(0.0);
        let dist = Self::new(kept)?;
        Ok((dist, tail))
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn mass(&self, letter: usize) -> f64 {
        self.masses[letter]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.masses[i] > 0.0)
    }

    pub fn has_full_support(&self) -> bool {
        self.masses.iter().all(|&m| m > 0.0)
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .masses
            .iter()
            .filter(|&&m| m > 0.0)
            .map(|&m| m * m.ln())
            .sum::<f64>()
    }

    /// Relative entropy D(self || other) in nats; +inf when the support of
    /// `self` is not contained in the support of `other`.
    pub fn relative_entropy(&self, other: &FiniteDistribution) -> f64 {
        assert_eq!(self.len(), other.len(), "alphabet sizes differ");
        let mut d = 0.0;
        for i in 0..self.len() {
            let p = self.masses[i];
            if p == 0.0 {
                continue;
            }
            let q = other.masses[i];
            if q == 0.0 {
                return f64::INFINITY;
            }
            d += p * (p / q).ln();
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_and_unnormalised() {
        assert!(FiniteDistribution::new(vec![0.5, -0.5, 1.0]).is_err());
        assert!(FiniteDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(FiniteDistribution::new(vec![]).is_err());
        assert!(FiniteDistribution::new(vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn entropy_of_uniform_is_log_alphabet() {
        let u = FiniteDistribution::uniform(8);
        assert!((u.entropy() - (8.0f64).ln()).abs() < 1e-14);
    }

    #[test]
    fn relative_entropy_matches_direct_sum() {
        let p = FiniteDistribution::new(vec![0.8, 0.2]).unwrap();
        let q = FiniteDistribution::new(vec![0.5, 0.5]).unwrap();
        let expect = 0.8 * (0.8f64 / 0.5).ln() + 0.2 * (0.2f64 / 0.5).ln();
        assert!((p.relative_entropy(&q) - expect).abs() < 1e-15);
        assert!((expect - 0.1927).abs() < 5e-5);
    }

    #[test]
    fn singular_relative_entropy_is_infinite() {
        let p = FiniteDistribution::new(vec![1.0, 0.0]).unwrap();
        let q = FiniteDistribution::new(vec![0.0, 1.0]).unwrap();
        assert!(p.relative_entropy(&q).is_infinite());
    }

    #[test]
    fn truncation_reports_tail() {
        // geometric with ratio 1/2
        let geo = (0..200).map(|k| 0.5f64.powi(k + 1));
        let (dist, tail) = FiniteDistribution::truncate_countable(geo, 200).unwrap();
        assert!(tail <= MASS_TOLERANCE);
        assert!(dist.len() >= 40);
        let total: f64 = dist.masses().iter().sum();
        assert!((total - 1.0).abs() <= MASS_TOLERANCE);
    }
}
