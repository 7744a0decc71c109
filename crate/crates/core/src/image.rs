//! Binary and grayscale raster values.
//!
//! Both image types are row-major. In a [`BinaryImage`] a `1` is a black
//! (ink) pixel and a `0` is white paper.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImageError {
    #[error("image dimensions must be positive, got {width}x{height}")]
    ZeroDimension { width: usize, height: usize },
    #[error("grid length {len} does not match {width}x{height}")]
    GridLength {
        width: usize,
        height: usize,
        len: usize,
    },
    #[error("grid value {value} at index {index} is not a bit")]
    NotABit { index: usize, value: u8 },
    #[error("dimension mismatch: {a_width}x{a_height} vs {b_width}x{b_height}")]
    DimensionMismatch {
        a_width: usize,
        a_height: usize,
        b_width: usize,
        b_height: usize,
    },
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<(), ImageError> {
    if width == 0 || height == 0 {
        return Err(ImageError::ZeroDimension { width, height });
    }
    if width.checked_mul(height) != Some(len) {
        return Err(ImageError::GridLength { width, height, len });
    }
    Ok(())
}

/// A bilevel image, the watermark container.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    grid: Vec<u8>,
}

impl BinaryImage {
    /// All-white image.
    pub fn new(width: usize, height: usize) -> Result<Self, ImageError> {
        let len = width
            .checked_mul(height)
            .ok_or(ImageError::ZeroDimension { width, height })?;
        Self::from_grid(width, height, vec![0; len])
    }

    pub fn from_grid(width: usize, height: usize, grid: Vec<u8>) -> Result<Self, ImageError> {
        check_dims(width, height, grid.len())?;
        if let Some((index, &value)) = grid.iter().enumerate().find(|(_, &v)| v > 1) {
            return Err(ImageError::NotABit { index, value });
        }
        Ok(Self {
            width,
            height,
            grid,
        })
    }

    /// Builds an image from column-major data, one slice per column.
    ///
    /// Handy for fixtures that are easier to read column by column.
    pub fn from_columns(columns: &[&[u8]]) -> Result<Self, ImageError> {
        let width = columns.len();
        let height = columns.first().map_or(0, |c| c.len());
        let mut grid = vec![0u8; width * height];
        for (x, col) in columns.iter().enumerate() {
            if col.len() != height {
                return Err(ImageError::GridLength {
                    width,
                    height,
                    len: col.len() * width,
                });
            }
            for (y, &v) in col.iter().enumerate() {
                grid[y * width + x] = v;
            }
        }
        Self::from_grid(width, height, grid)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn grid(&self) -> &[u8] {
        &self.grid
    }

    pub fn into_grid(self) -> Vec<u8> {
        self.grid
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.grid[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, bit: bool) {
        self.grid[y * self.width + x] = bit as u8;
    }

    /// Flips the pixel at `(x, y)`.
    #[inline]
    pub fn toggle(&mut self, x: usize, y: usize) {
        self.grid[y * self.width + x] ^= 1;
    }

    /// Copies rows `[y0, y0 + len)` of column `x` into `out`.
    pub fn column_segment(&self, x: usize, y0: usize, len: usize, out: &mut Vec<u8>) {
        out.clear();
        out.extend((y0..y0 + len).map(|y| self.grid[y * self.width + x]));
    }

    /// Number of black pixels in rows `[y0, y0 + len)` of column `x`.
    pub fn column_count(&self, x: usize, y0: usize, len: usize) -> usize {
        (y0..y0 + len)
            .map(|y| self.grid[y * self.width + x] as usize)
            .sum()
    }

    pub fn count_black(&self) -> usize {
        self.grid.iter().map(|&b| b as usize).sum()
    }
}

/// An 8-bit grayscale image (0 = black, 255 = white).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    grid: Vec<u8>,
}

impl GrayImage {
    pub fn from_grid(width: usize, height: usize, grid: Vec<u8>) -> Result<Self, ImageError> {
        check_dims(width, height, grid.len())?;
        Ok(Self {
            width,
            height,
            grid,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn grid(&self) -> &[u8] {
        &self.grid
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.grid[y * self.width + x]
    }
}

/// Positions `(x, y)` where `a` and `b` differ, in row-major order.
pub fn pixel_diff(a: &BinaryImage, b: &BinaryImage) -> Result<Vec<(usize, usize)>, ImageError> {
    if a.width != b.width || a.height != b.height {
        return Err(ImageError::DimensionMismatch {
            a_width: a.width,
            a_height: a.height,
            b_width: b.width,
            b_height: b.height,
        });
    }
    let w = a.width;
    Ok(a.grid
        .iter()
        .zip(&b.grid)
        .enumerate()
        .filter(|(_, (p, q))| p != q)
        .map(|(i, _)| (i % w, i / w))
        .collect())
}
