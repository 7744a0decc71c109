//! Netpbm bitmap (P1/P4) and graymap (P2/P5) codecs.
//!
//! Output is canonical: the magic number, width and height, and (for
//! graymaps) maxval are separated by single `\n` / ` ` characters with no
//! comments. P4 rows are packed most-significant bit first and padded with
//! zero bits to a whole byte. The canonical P4 bytes are what the ledger
//! hashes, so [`save_pbm`] must never change its layout.

use thiserror::Error;

use crate::image::{BinaryImage, GrayImage};

/// Largest pixel count accepted from a file header.
pub const MAX_PIXELS: usize = 1 << 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PnmError {
    #[error("parse error at byte {offset}: {reason}")]
    Parse { offset: usize, reason: &'static str },
    #[error("unsupported maxval {maxval} (at most 255)")]
    UnsupportedDepth { maxval: u32 },
}

fn parse_err<T>(offset: usize, reason: &'static str) -> Result<T, PnmError> {
    Err(PnmError::Parse { offset, reason })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbmFormat {
    /// Plain ASCII bitmap.
    P1,
    /// Packed binary bitmap.
    P4,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn magic(&mut self) -> Result<u8, PnmError> {
        match self.data {
            [b'P', d @ b'1'..=b'6', ..] => {
                self.pos = 2;
                Ok(d - b'0')
            }
            _ => parse_err(0, "bad magic number"),
        }
    }

    /// Skips whitespace and `#` comments.
    fn skip_ws(&mut self) {
        while let Some(&c) = self.data.get(self.pos) {
            if c == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<u32, PnmError> {
        self.skip_ws();
        let start = self.pos;
        let mut value: u32 = 0;
        while let Some(&c) = self.data.get(self.pos) {
            if !c.is_ascii_digit() {
                break;
            }
            value = match value
                .checked_mul(10)
                .and_then(|v| v.checked_add((c - b'0') as u32))
            {
                Some(v) => v,
                None => return parse_err(start, "number overflows"),
            };
            self.pos += 1;
        }
        if self.pos == start {
            return if self.pos >= self.data.len() {
                parse_err(self.pos, "unexpected end of data")
            } else {
                parse_err(self.pos, "expected a decimal number")
            };
        }
        Ok(value)
    }

    fn dimensions(&mut self) -> Result<(usize, usize), PnmError> {
        let offset = self.pos;
        let width = self.number()? as usize;
        let height = self.number()? as usize;
        if width == 0 || height == 0 {
            return parse_err(offset, "zero image dimension");
        }
        match width.checked_mul(height) {
            Some(n) if n <= MAX_PIXELS => Ok((width, height)),
            _ => parse_err(offset, "image dimensions overflow"),
        }
    }

    /// Consumes the single whitespace byte that ends a binary header.
    fn raster_separator(&mut self) -> Result<(), PnmError> {
        match self.data.get(self.pos) {
            Some(c) if c.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => parse_err(self.pos, "expected whitespace before raster"),
            None => parse_err(self.pos, "unexpected end of data"),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], PnmError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len());
        match end {
            Some(end) => {
                let slice = &self.data[self.pos..end];
                self.pos = end;
                Ok(slice)
            }
            None => parse_err(self.data.len(), "truncated raster"),
        }
    }
}

/// Decodes a P1 or P4 bitmap.
pub fn load_pbm(bytes: &[u8]) -> Result<BinaryImage, PnmError> {
    let mut cur = Cursor::new(bytes);
    let magic = cur.magic()?;
    if magic != 1 && magic != 4 {
        return parse_err(0, "not a bitmap (expected P1 or P4)");
    }
    let (width, height) = cur.dimensions()?;
    let mut grid = Vec::with_capacity(width * height);
    if magic == 1 {
        // Plain bitmaps may omit whitespace between pixels.
        while grid.len() < width * height {
            cur.skip_ws();
            match cur.data.get(cur.pos) {
                Some(b'0') => grid.push(0),
                Some(b'1') => grid.push(1),
                Some(_) => return parse_err(cur.pos, "expected 0 or 1"),
                None => return parse_err(cur.pos, "truncated raster"),
            }
            cur.pos += 1;
        }
    } else {
        cur.raster_separator()?;
        let row_bytes = width.div_ceil(8);
        for _ in 0..height {
            let row = cur.take(row_bytes)?;
            grid.extend((0..width).map(|x| (row[x / 8] >> (7 - x % 8)) & 1));
        }
    }
    Ok(BinaryImage::from_grid(width, height, grid).expect("validated dimensions"))
}

/// Encodes `img` canonically.
pub fn save_pbm(img: &BinaryImage, format: PbmFormat) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    match format {
        PbmFormat::P1 => {
            let mut out = format!("P1\n{w} {h}\n").into_bytes();
            out.reserve(2 * w * h);
            for row in img.grid().chunks_exact(w) {
                for (x, &bit) in row.iter().enumerate() {
                    if x > 0 {
                        out.push(b' ');
                    }
                    out.push(b'0' + bit);
                }
                out.push(b'\n');
            }
            out
        }
        PbmFormat::P4 => {
            let mut out = format!("P4\n{w} {h}\n").into_bytes();
            let row_bytes = w.div_ceil(8);
            out.reserve(row_bytes * h);
            for row in img.grid().chunks_exact(w) {
                for chunk in row.chunks(8) {
                    let byte = chunk
                        .iter()
                        .enumerate()
                        .fold(0u8, |acc, (i, &bit)| acc | (bit << (7 - i)));
                    out.push(byte);
                }
            }
            out
        }
    }
}

/// Decodes a P2 or P5 graymap with maxval at most 255. Samples are kept
/// as stored, without rescaling to 255.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage, PnmError> {
    let mut cur = Cursor::new(bytes);
    let magic = cur.magic()?;
    if magic != 2 && magic != 5 {
        return parse_err(0, "not a graymap (expected P2 or P5)");
    }
    let (width, height) = cur.dimensions()?;
    let maxval_at = cur.pos;
    let maxval = cur.number()?;
    if maxval == 0 {
        return parse_err(maxval_at, "maxval must be positive");
    }
    if maxval > 255 {
        return Err(PnmError::UnsupportedDepth { maxval });
    }
    let n = width * height;
    let grid = if magic == 2 {
        let mut grid = Vec::with_capacity(n);
        for _ in 0..n {
            cur.skip_ws();
            let at = cur.pos;
            let v = cur.number()?;
            if v > maxval {
                return parse_err(at, "sample exceeds maxval");
            }
            grid.push(v as u8);
        }
        grid
    } else {
        cur.raster_separator()?;
        let start = cur.pos;
        let raw = cur.take(n)?;
        if let Some(i) = raw.iter().position(|&v| v as u32 > maxval) {
            return parse_err(start + i, "sample exceeds maxval");
        }
        raw.to_vec()
    };
    Ok(GrayImage::from_grid(width, height, grid).expect("validated dimensions"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    P2,
    P5,
}

/// Encodes `img` canonically with maxval 255.
pub fn save_pgm(img: &GrayImage, format: PgmFormat) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    match format {
        PgmFormat::P2 => {
            let mut out = format!("P2\n{w} {h}\n255\n").into_bytes();
            for row in img.grid().chunks_exact(w) {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
            out
        }
        PgmFormat::P5 => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(img.grid());
            out
        }
    }
}
