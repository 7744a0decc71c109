//! Self-delimiting watermark payloads.
//!
//! A frame is `len: u16 BE ‖ utf-8 bytes ‖ crc: u16 BE`, serialized most
//! significant bit first. The CRC is CRC-16/CCITT-FALSE (poly 0x1021,
//! init 0xFFFF, no reflection, no final xor) over the text bytes only.
//! Framing lets a verifier read the payload blind and tell a damaged
//! watermark apart from a watermark that merely disagrees with the
//! metadata.

use thiserror::Error;

use crate::codec::{extract_bits, CodecError, WatermarkBits};
use crate::image::BinaryImage;

/// Frame header and trailer size in bits.
pub const FRAME_OVERHEAD_BITS: usize = 32;

const CRC_TABLE: [u16; 256] = {
    let mut table = [0u16; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = (i as u16) << 8;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & 0x8000 != 0 {
                (crc << 1) ^ 0x1021
            } else {
                crc << 1
            };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
};

/// CRC-16/CCITT-FALSE of `data`.
pub fn crc16_ccitt_false(data: &[u8]) -> u16 {
    data.iter().fold(0xFFFF, |crc, &b| {
        (crc << 8) ^ CRC_TABLE[(((crc >> 8) as u8) ^ b) as usize]
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("metadata is {len} bytes; frames hold at most 65535")]
    PayloadTooLarge { len: usize },
    #[error("frame length does not match its header")]
    BadLength,
    #[error("frame checksum mismatch")]
    BadCrc,
    #[error("frame payload is not valid UTF-8")]
    BadUtf8,
}

/// Frames `metadata` as watermark bits.
pub fn framed_bits(metadata: &str) -> Result<WatermarkBits, FrameError> {
    let text = metadata.as_bytes();
    let len =
        u16::try_from(text.len()).map_err(|_| FrameError::PayloadTooLarge { len: text.len() })?;
    let mut bytes = Vec::with_capacity(text.len() + 4);
    bytes.extend_from_slice(&len.to_be_bytes());
    bytes.extend_from_slice(text);
    bytes.extend_from_slice(&crc16_ccitt_false(text).to_be_bytes());
    Ok(WatermarkBits::from_bytes(&bytes))
}

/// Frame size in bits for a payload of `text_len` bytes.
pub fn frame_len_bits(text_len: usize) -> usize {
    FRAME_OVERHEAD_BITS + 8 * text_len
}

/// Parses a complete frame; the bit count must match the header exactly.
pub fn unframe(bits: &WatermarkBits) -> Result<String, FrameError> {
    if bits.len() < 16 {
        return Err(FrameError::BadLength);
    }
    let header = header_value(&bits.as_slice()[..16]);
    if bits.len() != frame_len_bits(header as usize) {
        return Err(FrameError::BadLength);
    }
    let bytes = bits
        .to_bytes()
        .expect("frame length is a whole number of bytes");
    let (text, crc) = bytes[2..].split_at(bytes.len() - 4);
    if crc16_ccitt_false(text).to_be_bytes() != crc {
        return Err(FrameError::BadCrc);
    }
    String::from_utf8(text.to_vec()).map_err(|_| FrameError::BadUtf8)
}

fn header_value(bits: &[u8]) -> u16 {
    bits.iter().fold(0u16, |acc, &b| (acc << 1) | b as u16)
}

/// Why a framed watermark could not be read from an image.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReadFrameError {
    #[error("watermark not detected: {0}")]
    Codec(#[from] CodecError),
    #[error("watermark not detected: {0}")]
    Frame(#[from] FrameError),
}

/// Reads a frame blind: the 16 header bits say how many more to extract.
pub fn extract_framed(img: &BinaryImage, step: usize) -> Result<String, ReadFrameError> {
    let header = extract_bits(img, 16, step)?;
    let len = header_value(header.as_slice()) as usize;
    let bits = extract_bits(img, frame_len_bits(len), step)?;
    Ok(unframe(&bits)?)
}
