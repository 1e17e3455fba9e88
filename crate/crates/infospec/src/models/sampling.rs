use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::models::{MixtureComponent, Sequence, SourceModel};

/// Mix a base seed with a stream index into an independent-looking seed.
/// SplitMix64 finaliser; deterministic across platforms.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9e3779b97f4a7c15))
        .wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(seed, stream))
}

fn cumulative(masses: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(masses.len());
    for &m in masses {
        acc += m;
        out.push(acc);
    }
    if let Some(last) = out.last_mut() {
        *last = f64::max(*last, 1.0);
    }
    out
}

fn draw(cdf: &[f64], u: f64) -> usize {
    match cdf.binary_search_by(|probe| probe.partial_cmp(&u).unwrap()) {
        Ok(i) => (i + 1).min(cdf.len() - 1),
        Err(i) => i.min(cdf.len() - 1),
    }
}

enum SamplerKind {
    Iid {
        cdf: Vec<f64>,
    },
    Markov {
        init_cdf: Vec<f64>,
        row_cdf: Vec<Vec<f64>>,
    },
    Unifilar {
        row_cdf: Vec<Vec<f64>>,
        next_state: Vec<Vec<usize>>,
        initial: usize,
    },
    Mixed {
        weight_1: f64,
        parts: [Box<SamplerKind>; 2],
    },
    Gaussian {
        normal: Normal<f64>,
    },
}

/// Draws i.i.d.-in-time blocks from a source model.  Construction
/// precomputes cumulative tables so repeated draws stay cheap.
pub struct SequenceSampler {
    kind: SamplerKind,
}

impl SequenceSampler {
    pub fn new(model: &SourceModel) -> Result<Self> {
        Ok(Self {
            kind: Self::build(model)?,
        })
    }

    fn build(model: &SourceModel) -> Result<SamplerKind> {
        match model {
            SourceModel::Iid(p) => Ok(SamplerKind::Iid {
                cdf: cumulative(p.masses()),
            }),
            SourceModel::Markov(pair) => Ok(SamplerKind::Markov {
                init_cdf: cumulative(pair.stationary_null()),
                row_cdf: pair.kernel_null().iter().map(|r| cumulative(r)).collect(),
            }),
            SourceModel::Unifilar(pair) => Ok(SamplerKind::Unifilar {
                row_cdf: pair.emission_null().iter().map(|r| cumulative(r)).collect(),
                next_state: (0..pair.states())
                    .map(|s| (0..pair.letters()).map(|x| pair.next_state(s, x)).collect())
                    .collect(),
                initial: pair.initial_state(),
            }),
            SourceModel::Mixed(mix) => {
                let build_part = |comp: &MixtureComponent| -> Result<Box<SamplerKind>> {
                    let sub = match comp {
                        MixtureComponent::Iid(d) => SourceModel::Iid(d.clone()),
                        MixtureComponent::Markov(m) => SourceModel::Markov(m.clone()),
                    };
                    Ok(Box::new(Self::build(&sub)?))
                };
                let [c1, c2] = mix.components();
                Ok(SamplerKind::Mixed {
                    weight_1: mix.weights()[0],
                    parts: [build_part(c1)?, build_part(c2)?],
                })
            }
            SourceModel::Gaussian(pair) => Ok(SamplerKind::Gaussian {
                normal: Normal::new(pair.mean_null(), pair.std_dev())
                    .map_err(|e| Error::InvalidInput(format!("normal law: {e}")))?,
            }),
            SourceModel::Step(_) => Err(Error::Unsupported(
                "step-spectrum sources do not expose per-word sampling".into(),
            )),
        }
    }

    pub fn is_real_valued(&self) -> bool {
        matches!(self.kind, SamplerKind::Gaussian { .. })
    }

    pub fn sample_discrete_into(&self, rng: &mut ChaCha12Rng, n: usize, out: &mut Vec<usize>) {
        out.clear();
        Self::fill_discrete(&self.kind, rng, n, out);
    }

    fn fill_discrete(kind: &SamplerKind, rng: &mut ChaCha12Rng, n: usize, out: &mut Vec<usize>) {
        match kind {
            SamplerKind::Iid { cdf } => {
                for _ in 0..n {
                    out.push(draw(cdf, rng.random::<f64>()));
                }
            }
            SamplerKind::Markov { init_cdf, row_cdf } => {
                let mut s = draw(init_cdf, rng.random::<f64>());
                out.push(s);
                for _ in 1..n {
                    s = draw(&row_cdf[s], rng.random::<f64>());
                    out.push(s);
                }
            }
            SamplerKind::Unifilar {
                row_cdf,
                next_state,
                initial,
            } => {
                let mut s = *initial;
                for _ in 0..n {
                    let x = draw(&row_cdf[s], rng.random::<f64>());
                    out.push(x);
                    s = next_state[s][x];
                }
            }
            SamplerKind::Mixed { weight_1, parts } => {
                let pick = if rng.random::<f64>() < *weight_1 {
                    &parts[0]
                } else {
                    &parts[1]
                };
                Self::fill_discrete(pick, rng, n, out);
            }
            SamplerKind::Gaussian { .. } => unreachable!("gaussian draws are real-valued"),
        }
    }

    pub fn sample_real_into(&self, rng: &mut ChaCha12Rng, n: usize, out: &mut Vec<f64>) {
        out.clear();
        match &self.kind {
            SamplerKind::Gaussian { normal } => {
                for _ in 0..n {
                    out.push(normal.sample(rng));
                }
            }
            _ => unreachable!("discrete models emit letters"),
        }
    }

    pub fn sample(&self, rng: &mut ChaCha12Rng, n: usize) -> Sequence {
        if self.is_real_valued() {
            let mut buf = Vec::with_capacity(n);
            self.sample_real_into(rng, n, &mut buf);
            Sequence::Real(buf)
        } else {
            let mut buf = Vec::with_capacity(n);
            self.sample_discrete_into(rng, n, &mut buf);
            Sequence::Discrete(buf)
        }
    }
}

/// Draw `count` independent length-`n` blocks from the null law of `model`.
/// Identical `(model, n, count, seed)` inputs yield identical output on any
/// platform.
pub fn sample_sequences(
    model: &SourceModel,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Sequence>> {
    if n == 0 {
        return Err(Error::InvalidInput("blocklength must be positive".into()));
    }
    let sampler = SequenceSampler::new(model)?;
    let mut rng = rng_for(seed, 0);
    Ok((0..count).map(|_| sampler.sample(&mut rng, n)).collect())
}
