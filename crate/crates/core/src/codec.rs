//! Column-parity watermark codec.
//!
//! The page is cut into horizontal strips of `step` rows, starting at the
//! top; rows below the last full strip are never read or written. Each
//! vertical column inside a strip is a [`Line`]. A line is *fit* for coding
//! when at least half of its pixels are black, and a fit line carries one
//! watermark bit as the parity of its black-pixel count. When the parity
//! disagrees with the bit, exactly one pixel of the line is toggled at a
//! position chosen by [`get_position`] so that the line stays fit, which
//! is what lets the extractor find the same lines again without the
//! original page.
//!
//! Strips are scanned top to bottom and, within a strip, columns left to
//! right. Every fit column consumes a bit whether or not it needs a toggle.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::BinaryImage;

/// Strip height used throughout when nothing else is configured.
pub const DEFAULT_STEP: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("strip height {step} is too small (need at least 2)")]
    InvalidStep { step: usize },
    #[error("image can carry {available} bits but {required} are required")]
    Capacity { available: usize, required: usize },
    #[error("position {pos} is outside a line of length {len}")]
    PositionOutOfRange { pos: usize, len: usize },
}

/// How a page of a given height is cut into strips.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StripLayout {
    pub step: usize,
    pub strip_count: usize,
    pub leftover_rows: usize,
}

impl StripLayout {
    pub fn new(height: usize, step: usize) -> Result<Self, CodecError> {
        if step < 2 {
            return Err(CodecError::InvalidStep { step });
        }
        Ok(Self {
            step,
            strip_count: height / step,
            leftover_rows: height % step,
        })
    }

    /// First row of strip `k`.
    pub fn top(&self, k: usize) -> usize {
        k * self.step
    }
}

/// Which way a line's count moves when it is changed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineOp {
    /// A white pixel becomes black.
    Insert,
    /// A black pixel becomes white.
    Delete,
}

/// Verdict on one line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitnessResult {
    Unfit,
    Fit { parity: u8, pos: usize, op: LineOp },
}

impl FitnessResult {
    /// `-1` for an unfit line, else the parity of the black count.
    pub fn flag(&self) -> i8 {
        match self {
            Self::Unfit => -1,
            Self::Fit { parity, .. } => *parity as i8,
        }
    }

    pub fn pos(&self) -> Option<usize> {
        match self {
            Self::Unfit => None,
            Self::Fit { pos, .. } => Some(*pos),
        }
    }

    pub fn is_fit(&self) -> bool {
        matches!(self, Self::Fit { .. })
    }
}

/// Decides whether `line` can carry a bit and where it would be changed.
///
/// With `S = line.len()` and `N` black pixels:
///
/// * `2N < S`: unfit.
/// * `3N > 2S`: delete the topmost black pixel.
/// * otherwise insert a black pixel at the middle (`(A + B) / 2`) of the
///   longest run of white pixels lying strictly between two black pixels,
///   taking the leftmost run on ties; without such a run, at the first
///   white pixel.
///
/// Both changes keep the line fit: deleting from `3N > 2S` leaves
/// `2(N - 1) >= S`, and inserting only raises `N`.
pub fn get_position(line: &[u8]) -> FitnessResult {
    debug_assert!(
        line.len() >= 2,
        "lines shorter than 2 pixels are not supported"
    );
    let s = line.len();
    let n: usize = line.iter().map(|&b| b as usize).sum();
    if 2 * n < s {
        return FitnessResult::Unfit;
    }
    let parity = (n % 2) as u8;
    if 3 * n > 2 * s {
        let pos = line.iter().position(|&b| b == 1).expect("fit line has ink");
        return FitnessResult::Fit {
            parity,
            pos,
            op: LineOp::Delete,
        };
    }
    let pos = longest_gap(line)
        .map(|(a, b)| (a + b) / 2)
        .unwrap_or_else(|| {
            line.iter()
                .position(|&b| b == 0)
                .expect("3N <= 2S leaves a white pixel")
        });
    FitnessResult::Fit {
        parity,
        pos,
        op: LineOp::Insert,
    }
}

/// Inclusive bounds of the longest interior white run, leftmost on ties.
fn longest_gap(line: &[u8]) -> Option<(usize, usize)> {
    let first = line.iter().position(|&b| b == 1)?;
    let last = line.iter().rposition(|&b| b == 1)?;
    let mut best: Option<(usize, usize)> = None;
    let mut run_start = None;
    for (i, &b) in line.iter().enumerate().take(last + 1).skip(first) {
        match (b, run_start) {
            (0, None) => run_start = Some(i),
            (1, Some(a)) => {
                let len = i - a;
                if best.is_none_or(|(ba, bb)| len > bb - ba + 1) {
                    best = Some((a, i - 1));
                }
                run_start = None;
            }
            _ => {}
        }
    }
    best
}

/// One column restricted to one strip.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Line {
    bits: Vec<u8>,
}

impl Line {
    /// # Panics
    ///
    /// Panics if any element is not 0 or 1.
    pub fn new(bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "line bits must be 0 or 1");
        Self { bits }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn num_black(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    pub fn fitness(&self) -> FitnessResult {
        get_position(&self.bits)
    }
}

impl FromStr for Line {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Line::new(parse_bit_string(s)?))
    }
}

/// `line` with the pixel at `pos` toggled.
pub fn change_line(line: &Line, pos: usize) -> Result<Line, CodecError> {
    if pos >= line.bits.len() {
        return Err(CodecError::PositionOutOfRange {
            pos,
            len: line.bits.len(),
        });
    }
    let mut bits = line.bits.clone();
    bits[pos] ^= 1;
    Ok(Line { bits })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid bit character {found:?} at index {index}")]
pub struct ParseBitsError {
    pub index: usize,
    pub found: char,
}

fn parse_bit_string(s: &str) -> Result<Vec<u8>, ParseBitsError> {
    s.chars()
        .enumerate()
        .map(|(index, c)| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            found => Err(ParseBitsError { index, found }),
        })
        .collect()
}

/// Ordered watermark payload bits.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct WatermarkBits(Vec<u8>);

impl WatermarkBits {
    /// # Panics
    ///
    /// Panics if any element is not 0 or 1.
    pub fn new(bits: Vec<u8>) -> Self {
        assert!(
            bits.iter().all(|&b| b <= 1),
            "watermark bits must be 0 or 1"
        );
        Self(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.0
    }

    /// MSB-first serialization of `bytes`.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        Self(
            bytes
                .iter()
                .flat_map(|&byte| (0..8).rev().map(move |i| (byte >> i) & 1))
                .collect(),
        )
    }

    /// Packs MSB-first; `None` unless the length is a multiple of 8.
    pub fn to_bytes(&self) -> Option<Vec<u8>> {
        if !self.0.len().is_multiple_of(8) {
            return None;
        }
        Some(
            self.0
                .chunks_exact(8)
                .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b))
                .collect(),
        )
    }
}

impl FromStr for WatermarkBits {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Self(parse_bit_string(s)?))
    }
}

impl fmt::Display for WatermarkBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// UTF-8 bytes of `text`, each byte most significant bit first.
pub fn text_to_bits(text: &str) -> WatermarkBits {
    WatermarkBits::from_bytes(text.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeFailure {
    #[error("bit count {0} is not a multiple of 8")]
    Length(usize),
    #[error("payload is not valid UTF-8")]
    Utf8,
}

pub fn bits_to_text(bits: &WatermarkBits) -> Result<String, DecodeFailure> {
    let bytes = bits.to_bytes().ok_or(DecodeFailure::Length(bits.len()))?;
    String::from_utf8(bytes).map_err(|_| DecodeFailure::Utf8)
}

/// A fit column found during a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitColumn {
    pub strip_index: usize,
    pub column_x: usize,
    pub parity: u8,
    /// Absolute image row that a change would toggle.
    pub row: usize,
    pub op: LineOp,
}

/// Iterates fit columns in coding order: strips top to bottom, columns
/// left to right.
pub struct FitColumns<'a> {
    img: &'a BinaryImage,
    layout: StripLayout,
    strip: usize,
    x: usize,
    buf: Vec<u8>,
}

impl<'a> FitColumns<'a> {
    pub fn new(img: &'a BinaryImage, step: usize) -> Result<Self, CodecError> {
        let layout = StripLayout::new(img.height(), step)?;
        Ok(Self {
            img,
            layout,
            strip: 0,
            x: 0,
            buf: Vec::with_capacity(step),
        })
    }
}

impl Iterator for FitColumns<'_> {
    type Item = FitColumn;

    fn next(&mut self) -> Option<FitColumn> {
        let step = self.layout.step;
        while self.strip < self.layout.strip_count {
            let top = self.layout.top(self.strip);
            while self.x < self.img.width() {
                let x = self.x;
                self.x += 1;
                // Cheap pre-check; get_position repeats it on the segment.
                if 2 * self.img.column_count(x, top, step) < step {
                    continue;
                }
                self.img.column_segment(x, top, step, &mut self.buf);
                if let FitnessResult::Fit { parity, pos, op } = get_position(&self.buf) {
                    return Some(FitColumn {
                        strip_index: self.strip,
                        column_x: x,
                        parity,
                        row: top + pos,
                        op,
                    });
                }
            }
            self.strip += 1;
            self.x = 0;
        }
        None
    }
}

/// One consumed column in an [`EmbedReport`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsumedColumn {
    pub strip_index: usize,
    pub column_x: usize,
    pub bit: u8,
    pub modified: bool,
    /// Absolute image row of the toggled pixel, if any.
    pub toggled_row: Option<usize>,
}

/// What [`embed`] did to the page.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedReport {
    pub consumed: Vec<ConsumedColumn>,
    pub strips_used: usize,
    pub pixels_toggled: usize,
}

impl EmbedReport {
    /// Pretty JSON with a stable field order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Toggled pixels as `(x, y)`, in row-major order.
    pub fn toggled_positions(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = self
            .consumed
            .iter()
            .filter_map(|c| c.toggled_row.map(|y| (c.column_x, y)))
            .collect();
        v.sort_by_key(|&(x, y)| (y, x));
        v
    }
}

/// Writes `wm` into the column parities of a copy of `img`.
pub fn embed(
    img: &BinaryImage,
    wm: &WatermarkBits,
    step: usize,
) -> Result<(BinaryImage, EmbedReport), CodecError> {
    let mut out = img.clone();
    let mut report = EmbedReport::default();
    let bits = wm.as_slice();
    // Columns never overlap, so scanning the original sees the same lines
    // the output would.
    let mut columns = FitColumns::new(img, step)?;
    while report.consumed.len() < bits.len() {
        let Some(col) = columns.next() else {
            return Err(CodecError::Capacity {
                available: report.consumed.len(),
                required: bits.len(),
            });
        };
        let bit = bits[report.consumed.len()];
        let modified = bit != col.parity;
        if modified {
            out.toggle(col.column_x, col.row);
            report.pixels_toggled += 1;
        }
        report.strips_used = col.strip_index + 1;
        report.consumed.push(ConsumedColumn {
            strip_index: col.strip_index,
            column_x: col.column_x,
            bit,
            modified,
            toggled_row: modified.then_some(col.row),
        });
    }
    Ok((out, report))
}

/// Reads the first `nbits` parity bits back from `img`.
pub fn extract_bits(
    img: &BinaryImage,
    nbits: usize,
    step: usize,
) -> Result<WatermarkBits, CodecError> {
    let bits: Vec<u8> = FitColumns::new(img, step)?
        .take(nbits)
        .map(|c| c.parity)
        .collect();
    if bits.len() < nbits {
        return Err(CodecError::Capacity {
            available: bits.len(),
            required: nbits,
        });
    }
    Ok(WatermarkBits(bits))
}

/// True iff `img` carries exactly `wm` at `step`. Every failure is `false`.
pub fn verify_watermark(img: &BinaryImage, wm: &WatermarkBits, step: usize) -> bool {
    extract_bits(img, wm.len(), step).is_ok_and(|got| &got == wm)
}
