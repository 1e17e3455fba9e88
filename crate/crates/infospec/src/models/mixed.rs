use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::dist::FiniteDistribution;
use crate::models::markov::MarkovPair;

/// One mixture component: a memoryless law or a stationary Markov chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MixtureComponent {
    Iid(FiniteDistribution),
    Markov(MarkovPair),
}

impl MixtureComponent {
    pub fn letters(&self) -> usize {
        match self {
            MixtureComponent::Iid(d) => d.len(),
            MixtureComponent::Markov(m) => m.states(),
        }
    }
}

/// Convex mixture of two component sources taken at the sequence level:
/// the n-fold null law is `w1 * P1^n + w2 * P2^n`, which is stationary but
/// not ergodic, so its divergence spectrum splits across the components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedPair {
    component_1: MixtureComponent,
    component_2: MixtureComponent,
    weight_1: f64,
    weight_2: f64,
}

impl MixedPair {
    pub fn new(
        component_1: MixtureComponent,
        component_2: MixtureComponent,
        weight_1: f64,
        weight_2: f64,
    ) -> Result<Self> {
        if component_1.letters() != component_2.letters() {
            return Err(Error::AlphabetMismatch(format!(
                "components use alphabets of size {} and {}",
                component_1.letters(),
                component_2.letters()
            )));
        }
        if !(weight_1.is_finite() && weight_2.is_finite() && weight_1 > 0.0 && weight_2 > 0.0) {
            return Err(Error::InvalidInput(
                "mixture weights must be strictly positive".into(),
            ));
        }
        if (weight_1 + weight_2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "mixture weights sum to {}",
                weight_1 + weight_2
            )));
        }
        Ok(Self {
            component_1,
            component_2,
            weight_1,
            weight_2,
        })
    }

    pub fn iid(
        p1: FiniteDistribution,
        p2: FiniteDistribution,
        weight_1: f64,
        weight_2: f64,
    ) -> Result<Self> {
        Self::new(
            MixtureComponent::Iid(p1),
            MixtureComponent::Iid(p2),
            weight_1,
            weight_2,
        )
    }

    pub fn letters(&self) -> usize {
        self.component_1.letters()
    }

    pub fn components(&self) -> [&MixtureComponent; 2] {
        [&self.component_1, &self.component_2]
    }

    pub fn weights(&self) -> [f64; 2] {
        [self.weight_1, self.weight_2]
    }

    /// Both components as memoryless laws, when the mixture is memoryless.
    pub fn iid_components(&self) -> Option<[&FiniteDistribution; 2]> {
        match (&self.component_1, &self.component_2) {
            (MixtureComponent::Iid(a), MixtureComponent::Iid(b)) => Some([a, b]),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_weights_and_mismatched_alphabets() {
        let p = FiniteDistribution::new(vec![0.5, 0.5]).unwrap();
        let q = FiniteDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert!(MixedPair::iid(p.clone(), q, 0.5, 0.5).is_err());
        let r = FiniteDistribution::new(vec![0.9, 0.1]).unwrap();
        assert!(MixedPair::iid(p.clone(), r.clone(), 0.7, 0.7).is_err());
        assert!(MixedPair::iid(p.clone(), r.clone(), 0.0, 1.0).is_err());
        assert!(MixedPair::iid(p, r, 0.25, 0.75).is_ok());
    }
}
