//! Best fixed-length block code of a given size: the acceptance set of the
//! counting-measure likelihood-ratio test, materialised word by word.

use crate::error::{Error, Result};
use crate::models::density::log_null_mass;
use crate::models::SourceModel;

const ENUMERATION_BUDGET: f64 = (1u64 << 24) as f64;

/// A codebook of the `size` most probable words and its decoding error.
#[derive(Debug, Clone)]
pub struct FixedLengthCode {
    pub n: usize,
    /// lexicographic indices of the coded words, ascending
    pub words: Vec<u64>,
    /// probability mass left outside the codebook
    pub error: f64,
}

/// Pick the `size` most probable length-`n` words, breaking probability
/// ties lexicographically.
pub fn best_fixed_length_code(source: &SourceModel, n: usize, size: u64) -> Result<FixedLengthCode> {
    if n == 0 {
        return Err(Error::InvalidInput("blocklength must be positive".into()));
    }
    let Some(letters) = source.letters() else {
        return Err(Error::Unsupported(
            "fixed-length codes need a finite alphabet".into(),
        ));
    };
    let total_f = (letters as f64).powi(n as i32);
    if total_f > ENUMERATION_BUDGET {
        return Err(Error::ResourceBudget(format!(
            "{letters}^{n} words exceed the exact enumeration budget of 2^24"
        )));
    }
    let total = (letters as u64).pow(n as u32);
    if size > total {
        return Err(Error::InvalidInput(format!(
            "codebook size {size} exceeds the {total} words of length {n}"
        )));
    }
    let mut ranked: Vec<(f64, u64)> = Vec::with_capacity(total as usize);
    let mut word = Vec::with_capacity(n);
    for index in 0..total {
        word.clear();
        word.resize(n, 0);
        let mut rem = index;
        for k in (0..n).rev() {
            word[k] = (rem % letters as u64) as usize;
            rem /= letters as u64;
        }
        ranked.push((log_null_mass(source, &word)?, index));
    }
    ranked.sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    ranked.truncate(size as usize);
    let covered: f64 = ranked.iter().map(|(lp, _)| lp.exp()).sum();
    let mut words: Vec<u64> = ranked.into_iter().map(|(_, index)| index).collect();
    words.sort_unstable();
    Ok(FixedLengthCode {
        n,
        words,
        error: (1.0 - covered).max(0.0),
    })
}
