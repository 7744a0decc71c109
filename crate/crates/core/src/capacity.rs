//! How many bits a page carries for a given strip height, and picking a
//! strip height that serves a whole corpus.

use std::fmt::Write as _;

use thiserror::Error;

use crate::codec::{CodecError, FitColumns};
use crate::image::BinaryImage;

/// Longest payload the ledger is expected to embed, in bits.
pub const DEFAULT_REQUIRED_BITS: usize = 1300;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CapacityError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("no images or no candidate steps given")]
    EmptyInput,
    #[error("no candidate step gives every image at least {required_bits} bits")]
    NoFeasibleStep { required_bits: usize },
}

/// Number of fit columns over all full strips, which is the longest
/// watermark [`crate::codec::embed`] accepts.
pub fn capacity_bits(img: &BinaryImage, step: usize) -> Result<usize, CodecError> {
    Ok(FitColumns::new(img, step)?.count())
}

/// `(step, capacity)` pairs with strictly increasing steps.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CapacityCurve {
    pub entries: Vec<(usize, usize)>,
}

impl CapacityCurve {
    pub fn get(&self, step: usize) -> Option<usize> {
        self.entries
            .binary_search_by_key(&step, |&(s, _)| s)
            .ok()
            .map(|i| self.entries[i].1)
    }

    /// `step,d` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,d\n");
        for (step, d) in &self.entries {
            writeln!(out, "{step},{d}").unwrap();
        }
        out
    }
}

/// Capacity at each of `steps`. Steps are sorted and deduplicated.
pub fn capacity_curve(img: &BinaryImage, steps: &[usize]) -> Result<CapacityCurve, CodecError> {
    let mut steps = steps.to_vec();
    steps.sort_unstable();
    steps.dedup();
    let entries = steps
        .into_iter()
        .map(|s| Ok((s, capacity_bits(img, s)?)))
        .collect::<Result<_, CodecError>>()?;
    Ok(CapacityCurve { entries })
}

/// The candidate step on which all `images` have the most similar
/// capacities, among steps where every image holds `required_bits`.
///
/// Similarity is the spread `max_i D_i - min_i D_i`; ties go to the
/// smallest step.
pub fn recommend_step(
    images: &[BinaryImage],
    steps: &[usize],
    required_bits: usize,
) -> Result<usize, CapacityError> {
    if images.is_empty() || steps.is_empty() {
        return Err(CapacityError::EmptyInput);
    }
    let curves = images
        .iter()
        .map(|img| capacity_curve(img, steps))
        .collect::<Result<Vec<_>, _>>()?;
    let mut best: Option<(usize, usize)> = None;
    for &(step, _) in &curves[0].entries {
        let ds: Vec<usize> = curves.iter().map(|c| c.get(step).unwrap()).collect();
        let lo = *ds.iter().min().unwrap();
        let hi = *ds.iter().max().unwrap();
        if lo < required_bits {
            continue;
        }
        // Entries are ascending, so strict < keeps the smallest step.
        if best.is_none_or(|(_, spread)| hi - lo < spread) {
            best = Some((step, hi - lo));
        }
    }
    best.map(|(step, _)| step)
        .ok_or(CapacityError::NoFeasibleStep { required_bits })
}
