//! Autocorrelation of column-parity sequences.
//!
//! A first look an analyst would take for a hidden parity code: collect
//! the parity of every inked column and see whether the autocorrelation
//! changes shape after embedding.

use std::fmt::Write as _;

use thiserror::Error;

use crate::codec::{CodecError, StripLayout};
use crate::image::BinaryImage;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SteganalysisError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("autocorrelation of an empty sequence")]
    EmptySequence,
    #[error("max lag {max_lag} must be below the sequence length {len}")]
    LagTooLarge { max_lag: usize, len: usize },
    #[error("lag sets differ")]
    LagMismatch,
}

/// Parities of every column with at least one black pixel, strip by strip
/// in coding order. Unlike the codec this includes unfit columns.
pub fn parity_sequence(img: &BinaryImage, step: usize) -> Result<Vec<u8>, CodecError> {
    let layout = StripLayout::new(img.height(), step)?;
    let mut seq = Vec::new();
    for k in 0..layout.strip_count {
        let top = layout.top(k);
        for x in 0..img.width() {
            let n = img.column_count(x, top, step);
            if n > 0 {
                seq.push((n % 2) as u8);
            }
        }
    }
    Ok(seq)
}

/// Unnormalized autocorrelation for lags `0..=max_lag`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcorrValues {
    pub lags: Vec<(usize, u64)>,
}

impl AcorrValues {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lag,value\n");
        for (k, v) in &self.lags {
            writeln!(out, "{k},{v}").unwrap();
        }
        out
    }
}

/// `ACorr[k] = sum_i seq[i] * seq[i + k]` for `k` in `0..=max_lag`.
///
/// The sequence is packed into 64-bit words and each lag is a popcount of
/// the sequence ANDed with itself shifted by `k`.
pub fn autocorr(seq: &[u8], max_lag: usize) -> Result<AcorrValues, SteganalysisError> {
    if seq.is_empty() {
        return Err(SteganalysisError::EmptySequence);
    }
    if max_lag >= seq.len() {
        return Err(SteganalysisError::LagTooLarge {
            max_lag,
            len: seq.len(),
        });
    }
    let words = pack(seq);
    let lags = (0..=max_lag).map(|k| (k, lag_product(&words, k))).collect();
    Ok(AcorrValues { lags })
}

fn pack(seq: &[u8]) -> Vec<u64> {
    let mut words = vec![0u64; seq.len().div_ceil(64)];
    for (i, &v) in seq.iter().enumerate() {
        words[i / 64] |= ((v & 1) as u64) << (i % 64);
    }
    words
}

/// Popcount of `w & (w >> k)` over the packed sequence.
fn lag_product(words: &[u64], k: usize) -> u64 {
    let (q, r) = (k / 64, k % 64);
    let mut total = 0u64;
    for j in 0..words.len().saturating_sub(q) {
        let lo = words[j + q];
        let shifted = if r == 0 {
            lo
        } else {
            let hi = words.get(j + q + 1).copied().unwrap_or(0);
            (lo >> r) | (hi << (64 - r))
        };
        total += (words[j] & shifted).count_ones() as u64;
    }
    total
}

/// `after - before` lag by lag.
pub fn acorr_diff(
    before: &AcorrValues,
    after: &AcorrValues,
) -> Result<Vec<(usize, i64)>, SteganalysisError> {
    if before.lags.len() != after.lags.len()
        || before.lags.iter().zip(&after.lags).any(|(b, a)| b.0 != a.0)
    {
        return Err(SteganalysisError::LagMismatch);
    }
    Ok(before
        .lags
        .iter()
        .zip(&after.lags)
        .map(|(&(k, b), &(_, a))| (k, a as i64 - b as i64))
        .collect())
}

/// `lag,diff` with a header row.
pub fn diff_to_csv(diff: &[(usize, i64)]) -> String {
    let mut out = String::from("lag,diff\n");
    for (k, d) in diff {
        writeln!(out, "{k},{d}").unwrap();
    }
    out
}
