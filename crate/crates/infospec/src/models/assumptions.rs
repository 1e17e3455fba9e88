use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::models::{AlternativeMeasure, MixtureComponent, SourceModel, TestingProblem};

/// Outcome of the support conditions guarding the correct-decoding exponent.
///
/// The correct exponent formula needs the reversed divergence spectrum to
/// have uniformly decaying upper tails, which on finite alphabets reduces to
/// a support condition: no letter (or transition) may carry alternative mass
/// while the null law gives it probability zero.  Counting measures are
/// exempt, and the Gaussian mean-shift family always qualifies because its
/// reversed tail rate `(K - a)^2 / (4a)` grows without bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionsReport {
    pub passed: bool,
    pub witness: Option<String>,
    pub detail: String,
    /// Whether the alternative is a probability law (as opposed to a
    /// counting or weight measure).
    pub probability_alternative: bool,
    /// Growth floor of the alternative's total mass, in nats; the correct
    /// exponent at r = 0 equals this value for generalized measures.
    pub total_mass_exponent: f64,
}

impl AssumptionsReport {
    fn pass(detail: &str, problem: &TestingProblem) -> Self {
        Self {
            passed: true,
            witness: None,
            detail: detail.to_string(),
            probability_alternative: problem.alternative().is_probability(),
            total_mass_exponent: problem.total_mass_exponent(),
        }
    }

    fn fail(witness: String, detail: &str, problem: &TestingProblem) -> Self {
        Self {
            passed: false,
            witness: Some(witness),
            detail: detail.to_string(),
            probability_alternative: problem.alternative().is_probability(),
            total_mass_exponent: problem.total_mass_exponent(),
        }
    }

    /// Error carrying the witness when the report failed.
    pub fn require_passed(&self) -> Result<()> {
        if self.passed {
            return Ok(());
        }
        Err(crate::error::Error::AssumptionsFailed {
            witness: self
                .witness
                .clone()
                .unwrap_or_else(|| self.detail.clone()),
        })
    }
}

fn letter_weights(problem: &TestingProblem, letters: usize) -> Option<Vec<f64>> {
    match problem.alternative() {
        AlternativeMeasure::Counting => None,
        other => other
            .letter_log_weights(letters)
            .map(|ws| ws.iter().map(|w| w.exp()).collect()),
    }
}

/// Decide whether the correct-decoding exponent formula applies to the
/// problem.  Always returns a report; failing reports name a witness letter,
/// transition or state.
pub fn check_theorem4_assumptions(problem: &TestingProblem) -> Result<AssumptionsReport> {
    const SUPPORT_DETAIL: &str =
        "support condition: every letter with alternative mass keeps positive null mass";

    if matches!(problem.alternative(), AlternativeMeasure::Counting) {
        return Ok(AssumptionsReport::pass(
            "counting measures over finite alphabets qualify unconditionally",
            problem,
        ));
    }

    match problem.null() {
        SourceModel::Gaussian(_) => Ok(AssumptionsReport::pass(
            "Gaussian mean shift: reversed tail rate grows quadratically, no support gaps",
            problem,
        )),
        SourceModel::Step(_) => Ok(AssumptionsReport::fail(
            "null mass vanishes on all but exponentially few words of the uniform alternative"
                .into(),
            "the uniform alternative charges words outside the null support, so the reversed \
             spectrum has no decaying upper tail",
            problem,
        )),
        SourceModel::Iid(p) => {
            let weights =
                letter_weights(problem, p.len()).expect("iid alternatives factor over letters");
            for (i, &w) in weights.iter().enumerate() {
                if p.mass(i) == 0.0 && w > 0.0 {
                    return Ok(AssumptionsReport::fail(
                        format!("letter {i}"),
                        SUPPORT_DETAIL,
                        problem,
                    ));
                }
            }
            Ok(AssumptionsReport::pass(SUPPORT_DETAIL, problem))
        }
        SourceModel::Markov(pair) => {
            let n = pair.states();
            let weights = letter_weights(problem, n);
            for i in 0..n {
                for j in 0..n {
                    let null = pair.kernel_null()[i][j];
                    let alt = match &weights {
                        Some(w) => w[j],
                        None => pair.kernel_alt()[i][j],
                    };
                    if null == 0.0 && alt > 0.0 {
                        return Ok(AssumptionsReport::fail(
                            format!("transition ({i},{j})"),
                            SUPPORT_DETAIL,
                            problem,
                        ));
                    }
                }
            }
            Ok(AssumptionsReport::pass(SUPPORT_DETAIL, problem))
        }
        SourceModel::Unifilar(pair) => {
            let weights = letter_weights(problem, pair.letters());
            for &s in pair.reachable_states() {
                for x in 0..pair.letters() {
                    let null = pair.emission_null()[s][x];
                    let alt = match &weights {
                        Some(w) => w[x],
                        None => pair.emission_alt()[s][x],
                    };
                    if null == 0.0 && alt > 0.0 {
                        return Ok(AssumptionsReport::fail(
                            format!("state {s} letter {x}"),
                            SUPPORT_DETAIL,
                            problem,
                        ));
                    }
                }
            }
            Ok(AssumptionsReport::pass(SUPPORT_DETAIL, problem))
        }
        SourceModel::Mixed(mix) => {
            // Both components must individually cover the alternative's
            // support: the spectrum splits across components and each branch
            // needs its own decaying reversed tail.
            let weights = letter_weights(problem, mix.letters());
            for (c, comp) in mix.components().iter().enumerate() {
                match comp {
                    MixtureComponent::Iid(d) => {
                        for i in 0..d.len() {
                            let alt = weights.as_ref().map(|w| w[i]).unwrap_or(1.0);
                            if d.mass(i) == 0.0 && alt > 0.0 {
                                return Ok(AssumptionsReport::fail(
                                    format!("component {} letter {i}", c + 1),
                                    "each mixture component must cover the alternative support",
                                    problem,
                                ));
                            }
                        }
                    }
                    MixtureComponent::Markov(m) => {
                        for i in 0..m.states() {
                            for j in 0..m.states() {
                                let alt = weights.as_ref().map(|w| w[j]).unwrap_or(1.0);
                                if m.kernel_null()[i][j] == 0.0 && alt > 0.0 {
                                    return Ok(AssumptionsReport::fail(
                                        format!("component {} transition ({i},{j})", c + 1),
                                        "each mixture component must cover the alternative support",
                                        problem,
                                    ));
                                }
                            }
                        }
                    }
                }
            }
            Ok(AssumptionsReport::pass(
                "every mixture component covers the alternative support",
                problem,
            ))
        }
    }
}
