//! JSON problem configurations and their assembly into testing problems.
//!
//! Parsing is fail-closed: the file must carry `"version": 1`, and unknown
//! keys are rejected at every level.  Model descriptions are validated by
//! the model constructors themselves, so a config that parses can still be
//! refused for carrying, say, masses that do not sum to one.

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::models::{
    AlternativeMeasure, FiniteDistribution, GaussianMeanShiftPair, MarkovPair, MixedPair,
    MixtureComponent, SourceModel, StepSpectrumModel, TestingProblem, UnifilarPair,
};

/// Logarithm base applied to rates and exponents at the input/output
/// boundary.  Everything internal stays in nats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum LogBase {
    #[serde(rename = "e")]
    Natural,
    #[serde(rename = "2")]
    Two,
}

impl LogBase {
    pub fn base(self) -> f64 {
        match self {
            LogBase::Natural => std::f64::consts::E,
            LogBase::Two => 2.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LogBase::Natural => "e",
            LogBase::Two => "2",
        }
    }

    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "e" => Ok(LogBase::Natural),
            "2" => Ok(LogBase::Two),
            other => Err(Error::InvalidInput(format!(
                "unknown log base {other:?}; expected e or 2"
            ))),
        }
    }
}

/// Null-side model description.
#[derive(Debug, Clone, PartialEq)]
pub enum NullSpec {
    Iid {
        masses: Vec<f64>,
    },
    Markov {
        transition: Vec<Vec<f64>>,
    },
    Unifilar {
        emission: Vec<Vec<f64>>,
        next_state: Vec<Vec<usize>>,
        initial_state: usize,
    },
    Gaussian {
        mean: f64,
        sigma: f64,
    },
    Mixed {
        components: Vec<ComponentSpec>,
        weights: Vec<f64>,
    },
    Step {
        alpha: f64,
    },
}

/// One source inside a two-component mixture.
#[derive(Debug, Clone, PartialEq)]
pub enum ComponentSpec {
    Iid { masses: Vec<f64> },
    Markov { transition: Vec<Vec<f64>> },
}

/// Alternative-side measure description.
#[derive(Debug, Clone, PartialEq)]
pub enum AlternativeSpec {
    Iid { masses: Vec<f64> },
    Markov { transition: Vec<Vec<f64>> },
    Unifilar { emission: Vec<Vec<f64>> },
    Gaussian { mean: f64 },
    Counting,
    Weights { weights: Vec<f64> },
}

/// Parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub null: NullSpec,
    /// Absent only for step models, which carry their own alternative.
    pub alternative: Option<AlternativeSpec>,
    pub log_base: Option<LogBase>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: u32,
    null: Value,
    #[serde(default)]
    alternative: Option<Value>,
    #[serde(default)]
    log_base: Option<LogBase>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IidParams {
    masses: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkovParams {
    transition: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UnifilarNullParams {
    emission: Vec<Vec<f64>>,
    next_state: Vec<Vec<usize>>,
    initial_state: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UnifilarAltParams {
    emission: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianNullParams {
    mean: f64,
    sigma: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianAltParams {
    mean: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MixedParams {
    components: Vec<Value>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StepParams {
    alpha: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsParams {
    weights: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmptyParams {}

/// Split a `{"type": "...", ...params}` object into its tag and the
/// remaining fields.
fn tagged_object(value: &Value, what: &str) -> Result<(String, Value)> {
    let Some(obj) = value.as_object() else {
        return Err(Error::InvalidInput(format!("{what} must be a JSON object")));
    };
    let Some(kind) = obj.get("type").and_then(Value::as_str) else {
        return Err(Error::InvalidInput(format!(
            "{what} needs a string \"type\" field"
        )));
    };
    let mut rest = obj.clone();
    rest.remove("type");
    Ok((kind.to_string(), Value::Object(rest)))
}

fn params<T: serde::de::DeserializeOwned>(rest: Value, what: &str) -> Result<T> {
    serde_json::from_value(rest).map_err(|e| Error::InvalidInput(format!("{what}: {e}")))
}

impl NullSpec {
    fn from_value(value: &Value) -> Result<Self> {
        let (kind, rest) = tagged_object(value, "null model")?;
        match kind.as_str() {
            "iid" => {
                let p: IidParams = params(rest, "null iid model")?;
                Ok(NullSpec::Iid { masses: p.masses })
            }
            "markov" => {
                let p: MarkovParams = params(rest, "null markov model")?;
                Ok(NullSpec::Markov {
                    transition: p.transition,
                })
            }
            "unifilar" => {
                let p: UnifilarNullParams = params(rest, "null unifilar model")?;
                Ok(NullSpec::Unifilar {
                    emission: p.emission,
                    next_state: p.next_state,
                    initial_state: p.initial_state,
                })
            }
            "gaussian" => {
                let p: GaussianNullParams = params(rest, "null gaussian model")?;
                Ok(NullSpec::Gaussian {
                    mean: p.mean,
                    sigma: p.sigma,
                })
            }
            "mixed" => {
                let p: MixedParams = params(rest, "null mixed model")?;
                if p.components.len() != 2 {
                    return Err(Error::InvalidInput(format!(
                        "mixed models take exactly two components, got {}",
                        p.components.len()
                    )));
                }
                let components = p
                    .components
                    .iter()
                    .map(ComponentSpec::from_value)
                    .collect::<Result<Vec<_>>>()?;
                Ok(NullSpec::Mixed {
                    components,
                    weights: p.weights,
                })
            }
            "step" => {
                let p: StepParams = params(rest, "null step model")?;
                Ok(NullSpec::Step { alpha: p.alpha })
            }
            other => Err(Error::InvalidInput(format!(
                "unknown null model type {other:?}"
            ))),
        }
    }
}

impl ComponentSpec {
    fn from_value(value: &Value) -> Result<Self> {
        let (kind, rest) = tagged_object(value, "mixture component")?;
        match kind.as_str() {
            "iid" => {
                let p: IidParams = params(rest, "iid mixture component")?;
                Ok(ComponentSpec::Iid { masses: p.masses })
            }
            "markov" => {
                let p: MarkovParams = params(rest, "markov mixture component")?;
                Ok(ComponentSpec::Markov {
                    transition: p.transition,
                })
            }
            other => Err(Error::InvalidInput(format!(
                "unknown mixture component type {other:?}"
            ))),
        }
    }

    fn build(&self) -> Result<MixtureComponent> {
        match self {
            ComponentSpec::Iid { masses } => Ok(MixtureComponent::Iid(FiniteDistribution::new(
                masses.clone(),
            )?)),
            ComponentSpec::Markov { transition } => Ok(MixtureComponent::Markov(MarkovPair::new(
                transition.clone(),
                transition.clone(),
            )?)),
        }
    }
}

impl AlternativeSpec {
    fn from_value(value: &Value) -> Result<Self> {
        let (kind, rest) = tagged_object(value, "alternative measure")?;
        match kind.as_str() {
            "iid" => {
                let p: IidParams = params(rest, "iid alternative")?;
                Ok(AlternativeSpec::Iid { masses: p.masses })
            }
            "markov" => {
                let p: MarkovParams = params(rest, "markov alternative")?;
                Ok(AlternativeSpec::Markov {
                    transition: p.transition,
                })
            }
            "unifilar" => {
                let p: UnifilarAltParams = params(rest, "unifilar alternative")?;
                Ok(AlternativeSpec::Unifilar {
                    emission: p.emission,
                })
            }
            "gaussian" => {
                let p: GaussianAltParams = params(rest, "gaussian alternative")?;
                Ok(AlternativeSpec::Gaussian { mean: p.mean })
            }
            "counting" => {
                let _: EmptyParams = params(rest, "counting alternative")?;
                Ok(AlternativeSpec::Counting)
            }
            "weights" => {
                let p: WeightsParams = params(rest, "weight-measure alternative")?;
                Ok(AlternativeSpec::Weights { weights: p.weights })
            }
            other => Err(Error::InvalidInput(format!(
                "unknown alternative type {other:?}"
            ))),
        }
    }
}

fn unsupported_pairing(null: &str, alt: &AlternativeSpec) -> Error {
    let alt_name = match alt {
        AlternativeSpec::Iid { .. } => "iid",
        AlternativeSpec::Markov { .. } => "markov",
        AlternativeSpec::Unifilar { .. } => "unifilar",
        AlternativeSpec::Gaussian { .. } => "gaussian",
        AlternativeSpec::Counting => "counting",
        AlternativeSpec::Weights { .. } => "weights",
    };
    Error::Unsupported(format!("{null} null with {alt_name} alternative"))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        if raw.version != 1 {
            return Err(Error::InvalidInput(format!(
                "unsupported config version {}; expected 1",
                raw.version
            )));
        }
        let null = NullSpec::from_value(&raw.null)?;
        let alternative = raw
            .alternative
            .as_ref()
            .map(AlternativeSpec::from_value)
            .transpose()?;
        Ok(RunConfig {
            null,
            alternative,
            log_base: raw.log_base,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidInput(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    /// Base actually in effect: command-line flag, then config field, then
    /// natural logarithms.
    pub fn effective_log_base(&self, flag: Option<LogBase>) -> LogBase {
        flag.or(self.log_base).unwrap_or(LogBase::Natural)
    }

    /// Assemble the configured testing problem, applying an optional base
    /// override from the command line.
    pub fn problem(&self, flag: Option<LogBase>) -> Result<TestingProblem> {
        let base = self.effective_log_base(flag).base();
        let problem = match (&self.null, &self.alternative) {
            (NullSpec::Step { alpha }, None) => {
                TestingProblem::step(StepSpectrumModel::new(*alpha, base)?)?
            }
            (NullSpec::Step { .. }, Some(_)) => {
                return Err(Error::InvalidInput(
                    "step models carry their own alternative; omit the alternative field".into(),
                ))
            }
            (_, None) => {
                return Err(Error::InvalidInput(
                    "an alternative measure is required".into(),
                ))
            }
            (NullSpec::Iid { masses }, Some(alt)) => {
                let p = FiniteDistribution::new(masses.clone())?;
                match alt {
                    AlternativeSpec::Iid { masses } => {
                        TestingProblem::iid(p, FiniteDistribution::new(masses.clone())?)?
                    }
                    AlternativeSpec::Counting => TestingProblem::iid_vs_counting(p)?,
                    AlternativeSpec::Weights { weights } => TestingProblem::new(
                        SourceModel::Iid(p),
                        AlternativeMeasure::ScaledWeights(weights.clone()),
                        std::f64::consts::E,
                    )?,
                    other => return Err(unsupported_pairing("iid", other)),
                }
            }
            (NullSpec::Markov { transition }, Some(alt)) => match alt {
                AlternativeSpec::Markov { transition: alt_t } => {
                    TestingProblem::markov(MarkovPair::new(transition.clone(), alt_t.clone())?)?
                }
                AlternativeSpec::Counting => TestingProblem::markov_vs_counting(MarkovPair::new(
                    transition.clone(),
                    transition.clone(),
                )?)?,
                AlternativeSpec::Weights { weights } => TestingProblem::new(
                    SourceModel::Markov(MarkovPair::new(transition.clone(), transition.clone())?),
                    AlternativeMeasure::ScaledWeights(weights.clone()),
                    std::f64::consts::E,
                )?,
                other => return Err(unsupported_pairing("markov", other)),
            },
            (
                NullSpec::Unifilar {
                    emission,
                    next_state,
                    initial_state,
                },
                Some(alt),
            ) => {
                let pair = |alt_emission: Vec<Vec<f64>>| {
                    UnifilarPair::new(
                        emission.clone(),
                        alt_emission,
                        next_state.clone(),
                        *initial_state,
                    )
                };
                match alt {
                    AlternativeSpec::Unifilar { emission: alt_e } => {
                        TestingProblem::unifilar(pair(alt_e.clone())?)?
                    }
                    AlternativeSpec::Counting => TestingProblem::new(
                        SourceModel::Unifilar(pair(emission.clone())?),
                        AlternativeMeasure::Counting,
                        std::f64::consts::E,
                    )?,
                    AlternativeSpec::Weights { weights } => TestingProblem::new(
                        SourceModel::Unifilar(pair(emission.clone())?),
                        AlternativeMeasure::ScaledWeights(weights.clone()),
                        std::f64::consts::E,
                    )?,
                    other => return Err(unsupported_pairing("unifilar", other)),
                }
            }
            (NullSpec::Gaussian { mean, sigma }, Some(alt)) => match alt {
                AlternativeSpec::Gaussian { mean: alt_mean } => {
                    TestingProblem::gaussian(GaussianMeanShiftPair::new(*mean, *alt_mean, *sigma)?)?
                }
                other => return Err(unsupported_pairing("gaussian", other)),
            },
            (
                NullSpec::Mixed {
                    components,
                    weights,
                },
                Some(alt),
            ) => {
                if weights.len() != 2 {
                    return Err(Error::InvalidInput(format!(
                        "mixed models take exactly two weights, got {}",
                        weights.len()
                    )));
                }
                let mix = MixedPair::new(
                    components[0].build()?,
                    components[1].build()?,
                    weights[0],
                    weights[1],
                )?;
                match alt {
                    AlternativeSpec::Iid { masses } => {
                        TestingProblem::mixed(mix, FiniteDistribution::new(masses.clone())?)?
                    }
                    AlternativeSpec::Counting => TestingProblem::new(
                        SourceModel::Mixed(mix),
                        AlternativeMeasure::Counting,
                        std::f64::consts::E,
                    )?,
                    AlternativeSpec::Weights { weights } => TestingProblem::new(
                        SourceModel::Mixed(mix),
                        AlternativeMeasure::ScaledWeights(weights.clone()),
                        std::f64::consts::E,
                    )?,
                    other => return Err(unsupported_pairing("mixed", other)),
                }
            }
        };
        problem.with_log_base(base)
    }
}
