//! Deterministic synthetic "handwritten" pages for tests and experiments.
//!
//! Pages are white with random thick polyline strokes. Every random draw
//! comes from [`SplitMix64`] in a fixed order, so any implementation that
//! follows the recipe below reproduces the same pixels for the same
//! arguments:
//!
//! ```text
//! rng = SplitMix64(seed)
//! uniform(lo, hi) = lo + rng.next() % (hi - lo + 1)        (inclusive)
//! repeat stroke_count times:
//!     x = uniform(0, w-1); y = uniform(0, h-1)
//!     thickness = uniform(1, max_thickness)
//!     vertices  = uniform(2, max_vertices)
//!     repeat vertices-1 times:
//!         len  = uniform(min_segment, max_segment)
//!         kind = uniform(0, 3); sx = uniform(0, 1)*2-1; sy = uniform(0, 1)*2-1
//!         kind 0,1: dx = uniform(0, len/2) - len/4; dy = sy*len      (near vertical)
//!         kind 2:   dx = sx*len; dy = uniform(0, len/2) - len/4      (near horizontal)
//!         kind 3:   dx = sx*(len/2); dy = sy*len                     (slanted)
//!         (nx, ny) = clamp((x+dx, y+dy)) to the page
//!         Bresenham line (x,y)->(nx,ny); at each point paint the
//!             thickness x thickness square whose top-left corner is the point
//!         (x, y) = (nx, ny)
//! ```
//!
//! All divisions truncate toward zero.

use crate::image::BinaryImage;

/// SplitMix64 generator (Steele, Lea and Flood).
///
/// ```text
/// state += 0x9E3779B97F4A7C15
/// z = state
/// z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
/// z = (z ^ (z >> 27)) * 0x94D049BB133111EB
/// return z ^ (z >> 31)
/// ```
///
/// All arithmetic wraps modulo 2^64.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from `lo..=hi` by reduction modulo the range size.
    pub fn uniform(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + (self.next_u64() % span) as i64
    }
}

/// Stroke shape parameters. [`generate_synthetic`] uses the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthParams {
    pub stroke_count: usize,
    pub min_segment: i64,
    pub max_segment: i64,
    pub max_thickness: i64,
    pub max_vertices: i64,
}

impl SynthParams {
    pub fn with_strokes(stroke_count: usize) -> Self {
        Self {
            stroke_count,
            min_segment: 8,
            max_segment: 60,
            max_thickness: 3,
            max_vertices: 5,
        }
    }
}

/// Synthetic page with default stroke shapes.
pub fn generate_synthetic(
    width: usize,
    height: usize,
    stroke_count: usize,
    seed: u64,
) -> BinaryImage {
    generate_with(
        width,
        height,
        &SynthParams::with_strokes(stroke_count),
        seed,
    )
}

/// Synthetic page with explicit stroke shapes.
///
/// # Panics
///
/// Panics if `width` or `height` is zero or a parameter range is empty.
pub fn generate_with(width: usize, height: usize, params: &SynthParams, seed: u64) -> BinaryImage {
    assert!(params.min_segment >= 1 && params.min_segment <= params.max_segment);
    assert!(params.max_thickness >= 1 && params.max_vertices >= 2);
    let mut img = BinaryImage::new(width, height).expect("positive dimensions");
    let mut rng = SplitMix64::new(seed);
    let (w, h) = (width as i64, height as i64);

    for _ in 0..params.stroke_count {
        let mut x = rng.uniform(0, w - 1);
        let mut y = rng.uniform(0, h - 1);
        let thickness = rng.uniform(1, params.max_thickness);
        let vertices = rng.uniform(2, params.max_vertices);
        for _ in 1..vertices {
            let len = rng.uniform(params.min_segment, params.max_segment);
            let kind = rng.uniform(0, 3);
            let sx = rng.uniform(0, 1) * 2 - 1;
            let sy = rng.uniform(0, 1) * 2 - 1;
            let (dx, dy) = match kind {
                0 | 1 => (rng.uniform(0, len / 2) - len / 4, sy * len),
                2 => (sx * len, rng.uniform(0, len / 2) - len / 4),
                _ => (sx * (len / 2), sy * len),
            };
            let nx = (x + dx).clamp(0, w - 1);
            let ny = (y + dy).clamp(0, h - 1);
            draw_line(&mut img, (x, y), (nx, ny), thickness);
            x = nx;
            y = ny;
        }
    }
    img
}

fn stamp(img: &mut BinaryImage, x: i64, y: i64, thickness: i64) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    for py in y..(y + thickness).min(h) {
        for px in x..(x + thickness).min(w) {
            img.set(px as usize, py as usize, true);
        }
    }
}

fn draw_line(img: &mut BinaryImage, from: (i64, i64), to: (i64, i64), thickness: i64) {
    let (mut x, mut y) = from;
    let dx = (to.0 - x).abs();
    let dy = -(to.1 - y).abs();
    let sx = if x < to.0 { 1 } else { -1 };
    let sy = if y < to.1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        stamp(img, x, y, thickness);
        if (x, y) == to {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}
