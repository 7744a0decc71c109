//! Reference implementations used as test oracles. They are written
//! independently of the library code paths they check: plain nested loops
//! over owned vectors, no shared helpers.

#![allow(dead_code)]

use colparity::synth::{generate_with, SplitMix64, SynthParams};
use colparity::BinaryImage;

/// Fitness of a column as `(flag, pos)`, with `(-1, -1)` for unfit.
pub fn ref_get_position(col: &[u8]) -> (i32, i32) {
    let len = col.len() as i64;
    let mut num = 0i64;
    for &b in col {
        num += b as i64;
    }
    // num < len/2 and num > 2*len/3, compared without division.
    if num * 2 < len {
        return (-1, -1);
    }
    let num2 = (num % 2) as i32;
    if num * 3 > len * 2 {
        for (x, &b) in col.iter().enumerate() {
            if b == 1 {
                return (num2, x as i32);
            }
        }
        unreachable!();
    }
    // Every white run bounded by black on both sides.
    let mut gaps: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < col.len() {
        if col[i] == 0 {
            let a = i;
            while i < col.len() && col[i] == 0 {
                i += 1;
            }
            let b = i - 1;
            if a > 0 && i < col.len() {
                gaps.push((a, b));
            }
        } else {
            i += 1;
        }
    }
    if gaps.is_empty() {
        for (x, &b) in col.iter().enumerate() {
            if b == 0 {
                return (num2, x as i32);
            }
        }
        unreachable!();
    }
    let mut best = gaps[0];
    for &g in &gaps[1..] {
        if g.1 - g.0 > best.1 - best.0 {
            best = g;
        }
    }
    (num2, ((best.0 + best.1) / 2) as i32)
}

fn to_rows(img: &BinaryImage) -> Vec<Vec<u8>> {
    img.grid().chunks(img.width()).map(|r| r.to_vec()).collect()
}

fn column(rows: &[Vec<u8>], x: usize, top: usize, step: usize) -> Vec<u8> {
    (top..top + step).map(|y| rows[y][x]).collect()
}

/// Rows after embedding, and the toggled `(x, y)` positions.
pub type Embedded = (Vec<Vec<u8>>, Vec<(usize, usize)>);

/// Straight simulation of the embedding loop. Returns the new rows and the
/// toggled `(x, y)` positions, or `None` when the page runs out of lines.
pub fn ref_embed(img: &BinaryImage, bits: &[u8], step: usize) -> Option<Embedded> {
    let mut rows = to_rows(img);
    let mut toggles = Vec::new();
    let mut count = 0;
    let strips = img.height() / step;
    for k in 0..strips {
        for x in 0..img.width() {
            if count == bits.len() {
                return Some((rows, toggles));
            }
            let col = column(&rows, x, k * step, step);
            let (flag, pos) = ref_get_position(&col);
            if flag == -1 {
                continue;
            }
            let bit = bits[count];
            count += 1;
            if bit as i32 != flag {
                let y = k * step + pos as usize;
                rows[y][x] ^= 1;
                toggles.push((x, y));
            }
        }
    }
    (count == bits.len()).then_some((rows, toggles))
}

/// Parity of every fit column, in scan order.
pub fn ref_extract_all(img: &BinaryImage, step: usize) -> Vec<u8> {
    let rows = to_rows(img);
    let mut out = Vec::new();
    for k in 0..img.height() / step {
        for x in 0..img.width() {
            let (flag, _) = ref_get_position(&column(&rows, x, k * step, step));
            if flag >= 0 {
                out.push(flag as u8);
            }
        }
    }
    out
}

/// Exhaustive Otsu: rescans the histogram for every threshold and compares
/// scores as exact fractions. Totals must stay below 2^16.
pub fn ref_otsu(hist: &[u64; 256]) -> u8 {
    let total: u64 = hist.iter().sum();
    assert!(total > 0 && total < 1 << 16);
    let populated: Vec<usize> = (0..256).filter(|&i| hist[i] > 0).collect();
    if populated.len() == 1 {
        return populated[0] as u8;
    }
    // Score (mu0 - mu1)^2 * n0 * n1 as num/den with
    // num = (s0*n1 - s1*n0)^2 and den = n0*n1.
    let mut best_t = 0u8;
    let mut best: Option<(u128, u128)> = None;
    for t in 0..256usize {
        let (mut n0, mut s0, mut n1, mut s1) = (0u128, 0u128, 0u128, 0u128);
        for (i, &c) in hist.iter().enumerate() {
            if i <= t {
                n0 += c as u128;
                s0 += c as u128 * i as u128;
            } else {
                n1 += c as u128;
                s1 += c as u128 * i as u128;
            }
        }
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let d = (s0 * n1).abs_diff(s1 * n0);
        let (num, den) = (d * d, n0 * n1);
        let better = match best {
            None => true,
            Some((bn, bd)) => num * bd > bn * den,
        };
        if better {
            best = Some((num, den));
            best_t = t as u8;
        }
    }
    best_t
}

pub fn ref_autocorr(seq: &[u8], max_lag: usize) -> Vec<u64> {
    (0..=max_lag)
        .map(|k| {
            let mut acc = 0u64;
            for i in 0..seq.len() - k {
                acc += seq[i] as u64 * seq[i + k] as u64;
            }
            acc
        })
        .collect()
}

/// Bit-at-a-time CRC-16/CCITT-FALSE.
pub fn ref_crc16(data: &[u8]) -> u16 {
    let mut crc: u16 = 0xFFFF;
    for &byte in data {
        crc ^= (byte as u16) << 8;
        for _ in 0..8 {
            crc = if crc & 0x8000 != 0 {
                (crc << 1) ^ 0x1021
            } else {
                crc << 1
            };
        }
    }
    crc
}

/// Page texture presets used across corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Texture {
    /// Many short, thin strokes: dense small script.
    SmallScript,
    /// Default stroke shapes.
    Regular,
    /// Few long, thick strokes: large sprawling script.
    LargeScript,
}

impl Texture {
    pub const ALL: [Texture; 3] = [Texture::SmallScript, Texture::Regular, Texture::LargeScript];

    /// Stroke parameters scaled to a page of `area` pixels.
    pub fn params(self, area: usize) -> SynthParams {
        match self {
            Texture::SmallScript => SynthParams {
                stroke_count: area / 850,
                min_segment: 6,
                max_segment: 24,
                max_thickness: 2,
                max_vertices: 6,
            },
            Texture::Regular => SynthParams::with_strokes(area / 1000),
            Texture::LargeScript => SynthParams {
                stroke_count: area / 6000,
                min_segment: 40,
                max_segment: 140,
                max_thickness: 3,
                max_vertices: 4,
            },
        }
    }

    pub fn page(self, width: usize, height: usize, seed: u64) -> BinaryImage {
        generate_with(width, height, &self.params(width * height), seed)
    }
}

pub fn random_bits(rng: &mut SplitMix64, n: usize) -> Vec<u8> {
    (0..n).map(|_| (rng.next_u64() >> 63) as u8).collect()
}
