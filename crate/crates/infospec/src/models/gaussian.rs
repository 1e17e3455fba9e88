use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pair of i.i.d. Gaussian laws sharing one variance and differing in mean.
///
/// The per-letter log-likelihood ratio is Gaussian, so the whole testing
/// problem is controlled by the single parameter
/// `a = (mean_null - mean_alt)^2 / (2 sigma^2)`,
/// which is simultaneously the relative entropy rate in both directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMeanShiftPair {
    mean_null: f64,
    mean_alt: f64,
    std_dev: f64,
}

impl GaussianMeanShiftPair {
    pub fn new(mean_null: f64, mean_alt: f64, std_dev: f64) -> Result<Self> {
        if !mean_null.is_finite() || !mean_alt.is_finite() {
            return Err(Error::InvalidInput("means must be finite".into()));
        }
        if !(std_dev.is_finite() && std_dev > 0.0) {
            return Err(Error::InvalidInput(format!(
                "standard deviation {std_dev} must be a positive real"
            )));
        }
        Ok(Self {
            mean_null,
            mean_alt,
            std_dev,
        })
    }

    pub fn mean_null(&self) -> f64 {
        self.mean_null
    }

    pub fn mean_alt(&self) -> f64 {
        self.mean_alt
    }

    pub fn std_dev(&self) -> f64 {
        self.std_dev
    }

    /// Divergence rate `a` in nats per letter.
    pub fn divergence_rate(&self) -> f64 {
        let shift = self.mean_null - self.mean_alt;
        shift * shift / (2.0 * self.std_dev * self.std_dev)
    }

    /// Per-letter log-likelihood ratio `ln(p_null(x) / p_alt(x))`.
    pub fn letter_log_ratio(&self, x: f64) -> f64 {
        let shift = self.mean_null - self.mean_alt;
        shift * (x - 0.5 * (self.mean_null + self.mean_alt)) / (self.std_dev * self.std_dev)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divergence_rate_examples() {
        let g = GaussianMeanShiftPair::new(0.0, 2.0, 1.0).unwrap();
        assert!((g.divergence_rate() - 2.0).abs() < 1e-15);
        let g = GaussianMeanShiftPair::new(1.0, -1.0, 0.5).unwrap();
        assert!((g.divergence_rate() - 8.0).abs() < 1e-15);
    }

    #[test]
    fn log_ratio_mean_under_null_is_divergence_rate() {
        // E_null[ratio] = shift * (mean_null - midpoint) / sigma^2 = a
        let g = GaussianMeanShiftPair::new(0.3, -0.9, 0.7).unwrap();
        let at_mean = g.letter_log_ratio(g.mean_null());
        assert!((at_mean - g.divergence_rate()).abs() < 1e-14);
    }

    #[test]
    fn rejects_zero_variance() {
        assert!(GaussianMeanShiftPair::new(0.0, 1.0, 0.0).is_err());
    }
}
