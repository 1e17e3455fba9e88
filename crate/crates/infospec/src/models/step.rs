use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One atom of a discrete divergence spectrum: the divergence-density value
/// `location` carries probability decaying like `base^(-n * mass_exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumAtom {
    pub location: f64,
    pub mass_exponent: f64,
}

/// Non-ergodic binary source whose divergence spectrum against the uniform
/// alternative consists of three atoms.
///
/// At blocklength n the null law puts mass `base^(-3 alpha n)` on one word,
/// total mass `base^(-alpha n)` on a set of words of individual probability
/// `base^(-2 alpha n)`, and the rest on a single high-probability word, while
/// the alternative is uniform (`base^(-n)` per word).  The induced spectrum
/// atoms sit at locations `1 - 3 alpha`, `1 - 2 alpha` and (asymptotically) 1,
/// with mass exponents `3 alpha`, `alpha` and 0, all in units of
/// `log(base)`.  The lower-tail decay rate is therefore a step function and
/// exercises every piecewise case of the exponent optimisers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSpectrumModel {
    alpha: f64,
    log_base: f64,
}

impl StepSpectrumModel {
    pub fn new(alpha: f64, log_base: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0 / 3.0) {
            return Err(Error::InvalidInput(format!(
                "step parameter alpha = {alpha} must lie in (0, 1/3) so the atoms stay ordered"
            )));
        }
        if !(log_base.is_finite() && log_base > 1.0) {
            return Err(Error::InvalidInput(format!(
                "log base {log_base} must exceed 1"
            )));
        }
        Ok(Self { alpha, log_base })
    }

    /// Base-2 construction matching the published exponent values verbatim.
    pub fn base2(alpha: f64) -> Result<Self> {
        Self::new(alpha, 2.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn log_base(&self) -> f64 {
        self.log_base
    }

    /// Nats per unit of the model's own logarithm base.
    pub fn scale(&self) -> f64 {
        self.log_base.ln()
    }

    /// Spectrum atoms in the model's own base units, lowest location first.
    pub fn atoms_base_units(&self) -> [SpectrumAtom; 3] {
        [
            SpectrumAtom {
                location: 1.0 - 3.0 * self.alpha,
                mass_exponent: 3.0 * self.alpha,
            },
            SpectrumAtom {
                location: 1.0 - 2.0 * self.alpha,
                mass_exponent: self.alpha,
            },
            SpectrumAtom {
                location: 1.0,
                mass_exponent: 0.0,
            },
        ]
    }

    /// Spectrum atoms in nats.
    pub fn atoms_nats(&self) -> [SpectrumAtom; 3] {
        let s = self.scale();
        self.atoms_base_units().map(|atom| SpectrumAtom {
            location: atom.location * s,
            mass_exponent: atom.mass_exponent * s,
        })
    }

    /// Exact blocklength-n atom decomposition: (null mass per word, word
    /// count, alternative mass per word) for the three likelihood-ratio
    /// classes, highest ratio first.  The count of the middle class is
    /// `base^(alpha n)` and need not be an integer; only aggregate masses
    /// enter the finite-blocklength trade-off.
    pub fn finite_n_atoms(&self, n: usize) -> Result<[(f64, f64, f64); 3]> {
        let nf = n as f64;
        let b = self.log_base;
        let alt_each = b.powf(-nf);
        let midset_each = b.powf(-2.0 * self.alpha * nf);
        let midset_count = b.powf(self.alpha * nf);
        let rare = b.powf(-3.0 * self.alpha * nf);
        let top = 1.0 - midset_each * midset_count - rare;
        if top <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "blocklength {n} too small for alpha = {}: residual mass {top}",
                self.alpha
            )));
        }
        Ok([
            (top, 1.0, alt_each),
            (midset_each, midset_count, alt_each),
            (rare, 1.0, alt_each),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_follow_alpha() {
        let m = StepSpectrumModel::base2(0.2).unwrap();
        let atoms = m.atoms_base_units();
        assert!((atoms[0].location - 0.4).abs() < 1e-15);
        assert!((atoms[0].mass_exponent - 0.6).abs() < 1e-15);
        assert!((atoms[1].location - 0.6).abs() < 1e-15);
        assert!((atoms[1].mass_exponent - 0.2).abs() < 1e-15);
        assert!((atoms[2].location - 1.0).abs() < 1e-15);
    }

    #[test]
    fn finite_n_masses_sum_to_one() {
        let m = StepSpectrumModel::base2(0.2).unwrap();
        let atoms = m.finite_n_atoms(10).unwrap();
        let total: f64 = atoms.iter().map(|(each, count, _)| each * count).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // middle class: per-word mass 2^(-2 alpha n) = 2^-4, count 2^2
        assert!((atoms[1].0 - 2f64.powi(-4)).abs() < 1e-15);
        assert!((atoms[1].1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_alpha_outside_open_third() {
        assert!(StepSpectrumModel::base2(0.0).is_err());
        assert!(StepSpectrumModel::base2(1.0 / 3.0).is_err());
        assert!(StepSpectrumModel::base2(0.25).is_ok());
    }
}
