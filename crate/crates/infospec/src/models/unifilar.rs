use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::markov::{validate_kernel, Kernel, MarkovPair};

/// Finite-state source with deterministic state evolution: starting from
/// `initial_state`, each output letter `x` is emitted with probability
/// `emission[s][x]` and drives the transition `s' = next_state[s][x]`.
/// The alternative hypothesis shares the state machine and differs only in
/// its emission matrix, so both laws factor over the same state sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnifilarPair {
    emission_null: Kernel,
    emission_alt: Kernel,
    next_state: Vec<Vec<usize>>,
    initial_state: usize,
    reachable: Vec<usize>,
}

impl UnifilarPair {
    pub fn new(
        emission_null: Kernel,
        emission_alt: Kernel,
        next_state: Vec<Vec<usize>>,
        initial_state: usize,
    ) -> Result<Self> {
        let states = validate_kernel(&emission_null, "null emission matrix")?;
        let states_alt = validate_kernel(&emission_alt, "alternative emission matrix")?;
        if states != states_alt {
            return Err(Error::AlphabetMismatch(format!(
                "null emissions have {states} states, alternative has {states_alt}"
            )));
        }
        let letters = emission_null[0].len();
        if next_state.len() != states {
            return Err(Error::InvalidInput(format!(
                "next-state table has {} rows, expected {states}",
                next_state.len()
            )));
        }
        for (s, row) in next_state.iter().enumerate() {
            if row.len() != letters {
                return Err(Error::InvalidInput(format!(
                    "next-state row {s} has {} entries, expected {letters}",
                    row.len()
                )));
            }
            for (x, &t) in row.iter().enumerate() {
                if t >= states {
                    return Err(Error::InvalidInput(format!(
                        "next_state[{s}][{x}] = {t} is not a state below {states}"
                    )));
                }
            }
        }
        if initial_state >= states {
            return Err(Error::InvalidInput(format!(
                "initial state {initial_state} is not a state below {states}"
            )));
        }

        // Reachability closure from the initial state along positive-probability
        // emissions of the null law.
        let mut seen = vec![false; states];
        let mut stack = vec![initial_state];
        seen[initial_state] = true;
        while let Some(s) = stack.pop() {
            for x in 0..letters {
                if emission_null[s][x] > 0.0 {
                    let t = next_state[s][x];
                    if !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
        }
        let reachable = (0..states).filter(|&s| seen[s]).collect();

        Ok(Self {
            emission_null,
            emission_alt,
            next_state,
            initial_state,
            reachable,
        })
    }

    pub fn source_only(
        emission: Kernel,
        next_state: Vec<Vec<usize>>,
        initial_state: usize,
    ) -> Result<Self> {
        Self::new(emission.clone(), emission, next_state, initial_state)
    }

    pub fn states(&self) -> usize {
        self.emission_null.len()
    }

    pub fn letters(&self) -> usize {
        self.emission_null[0].len()
    }

    pub fn emission_null(&self) -> &Kernel {
        &self.emission_null
    }

    pub fn emission_alt(&self) -> &Kernel {
        &self.emission_alt
    }

    pub fn next_state(&self, state: usize, letter: usize) -> usize {
        self.next_state[state][letter]
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    pub fn reachable_states(&self) -> &[usize] {
        &self.reachable
    }

    /// State trajectory `s_1 .. s_n` induced by an output sequence.
    pub fn state_path(&self, word: &[usize]) -> Result<Vec<usize>> {
        let mut s = self.initial_state;
        let mut path = Vec::with_capacity(word.len());
        for &x in word {
            if x >= self.letters() {
                return Err(Error::AlphabetMismatch(format!(
                    "letter {x} outside alphabet of size {}",
                    self.letters()
                )));
            }
            path.push(s);
            s = self.next_state[s][x];
        }
        Ok(path)
    }

    /// log of the null (or alternative) probability of a word, in nats.
    pub fn log_mass(&self, word: &[usize], alternative: bool) -> Result<f64> {
        let emission = if alternative {
            &self.emission_alt
        } else {
            &self.emission_null
        };
        let mut s = self.initial_state;
        let mut total = 0.0;
        for &x in word {
            if x >= self.letters() {
                return Err(Error::AlphabetMismatch(format!(
                    "letter {x} outside alphabet of size {}",
                    self.letters()
                )));
            }
            let p = emission[s][x];
            if p == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            total += p.ln();
            s = self.next_state[s][x];
        }
        Ok(total)
    }
}

/// One symbol of the lifted chain: the emitted letter together with the state
/// it was emitted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LiftedSymbol {
    pub letter: usize,
    pub state: usize,
}

/// Result of lifting a unifilar pair to a first-order Markov pair on
/// letter/state symbols.
#[derive(Debug, Clone)]
pub struct ExpandedUnifilar {
    /// Markov pair over the lifted alphabet; transition `(x,s) -> (x',s')`
    /// carries probability `emission[s'][x']` when `s' = next_state[s][x]`.
    pub pair: MarkovPair,
    /// Lifted alphabet in index order.
    pub symbols: Vec<LiftedSymbol>,
    /// Per-symbol divergence weight `ln(emission_null[s][x] / emission_alt[s][x])`.
    pub weights: Vec<f64>,
}

impl ExpandedUnifilar {
    pub fn symbol_index(&self, letter: usize, state: usize) -> Option<usize> {
        self.symbols
            .iter()
            .position(|sym| sym.letter == letter && sym.state == state)
    }
}

/// Lift a unifilar pair to an ordinary Markov pair on (letter, state) symbols.
///
/// Only symbols reachable from the initial state with positive null
/// probability are materialised.  Fails with a degeneracy error when the
/// lifted null chain is not irreducible, since the spectral engine needs a
/// unique Perron root.
pub fn unifilar_expand(source: &UnifilarPair) -> Result<ExpandedUnifilar> {
    let letters = source.letters();

    // Collect reachable (letter, state) symbols breadth-first so indices are
    // stable for a given machine.
    let mut symbols: Vec<LiftedSymbol> = Vec::new();
    let mut queue: Vec<LiftedSymbol> = Vec::new();
    let s1 = source.initial_state();
    for x in 0..letters {
        if source.emission_null()[s1][x] > 0.0 {
            let sym = LiftedSymbol {
                letter: x,
                state: s1,
            };
            symbols.push(sym);
            queue.push(sym);
        }
    }
    let mut head = 0;
    while head < queue.len() {
        let sym = queue[head];
        head += 1;
        let next = source.next_state(sym.state, sym.letter);
        for x in 0..letters {
            if source.emission_null()[next][x] > 0.0 {
                let cand = LiftedSymbol {
                    letter: x,
                    state: next,
                };
                if !symbols.contains(&cand) {
                    symbols.push(cand);
                    queue.push(cand);
                }
            }
        }
    }
    if symbols.is_empty() {
        return Err(Error::Degenerate(
            "no positive-probability emission from the initial state".into(),
        ));
    }
    symbols.sort_by_key(|sym| (sym.state, sym.letter));

    let m = symbols.len();
    let index = |letter: usize, state: usize| {
        symbols
            .iter()
            .position(|sym| sym.letter == letter && sym.state == state)
    };

    let mut kernel_null = vec![vec![0.0; m]; m];
    let mut kernel_alt = vec![vec![0.0; m]; m];
    for (i, sym) in symbols.iter().enumerate() {
        let next = source.next_state(sym.state, sym.letter);
        for x in 0..letters {
            let p = source.emission_null()[next][x];
            let q = source.emission_alt()[next][x];
            if let Some(j) = index(x, next) {
                kernel_null[i][j] = p;
                kernel_alt[i][j] = q;
            } else if q > 0.0 {
                // Letter x is emitted by the alternative but unreachable under
                // the null; its alternative mass has no lifted column.  The
                // row then sums below one, which the Markov pair rejects, so
                // spread the deficit onto a null-impossible entry is wrong;
                // instead reject here with a clearer message.
                return Err(Error::Degenerate(format!(
                    "alternative emits letter {x} in state {next} where the null law is zero; \
                     the lifted alternative kernel would not be stochastic"
                )));
            }
        }
    }

    let pair = MarkovPair::new(kernel_null, kernel_alt)?;
    let weights = symbols
        .iter()
        .map(|sym| {
            let p = source.emission_null()[sym.state][sym.letter];
            let q = source.emission_alt()[sym.state][sym.letter];
            if q == 0.0 {
                f64::INFINITY
            } else {
                (p / q).ln()
            }
        })
        .collect();

    Ok(ExpandedUnifilar {
        pair,
        symbols,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two-state shift register: the state is the previous letter.
    fn shift_register() -> UnifilarPair {
        let emission_null = vec![vec![0.8, 0.2], vec![0.3, 0.7]];
        let emission_alt = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let next_state = vec![vec![0, 1], vec![0, 1]];
        UnifilarPair::new(emission_null, emission_alt, next_state, 0).unwrap()
    }

    #[test]
    fn expansion_rows_are_stochastic_and_weights_match() {
        let src = shift_register();
        let exp = unifilar_expand(&src).unwrap();
        assert_eq!(exp.symbols.len(), 4);
        for row in exp.pair.kernel_null() {
            let total: f64 = row.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        for (i, sym) in exp.symbols.iter().enumerate() {
            let expect = (src.emission_null()[sym.state][sym.letter]
                / src.emission_alt()[sym.state][sym.letter])
                .ln();
            assert!((exp.weights[i] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn lifted_chain_preserves_word_probabilities() {
        let src = shift_register();
        let exp = unifilar_expand(&src).unwrap();
        for n in 1..=8usize {
            for code in 0..(1u32 << n) {
                let word: Vec<usize> = (0..n).map(|i| ((code >> i) & 1) as usize).collect();
                let direct = src.log_mass(&word, false).unwrap();

                // walk the lifted chain: initial symbol mass, then kernel steps
                let path = src.state_path(&word).unwrap();
                let mut lifted = src.emission_null()[path[0]][word[0]].ln();
                for i in 1..n {
                    let a = exp.symbol_index(word[i - 1], path[i - 1]).unwrap();
                    let b = exp.symbol_index(word[i], path[i]).unwrap();
                    lifted += exp.pair.kernel_null()[a][b].ln();
                }
                assert!(
                    (direct - lifted).abs() < 1e-12,
                    "word {word:?}: direct {direct}, lifted {lifted}"
                );
            }
        }
    }

    #[test]
    fn unreachable_states_are_reported() {
        let emission = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
        let next_state = vec![vec![0, 1], vec![0, 1]];
        let src = UnifilarPair::source_only(emission, next_state, 0).unwrap();
        assert_eq!(src.reachable_states(), &[0]);
    }
}
