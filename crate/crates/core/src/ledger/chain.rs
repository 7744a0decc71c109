use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};

use super::frame::{extract_framed, framed_bits};
use super::LedgerError;
use crate::codec::{embed, EmbedReport};
use crate::image::BinaryImage;
use crate::pnm::{load_pbm, save_pbm, PbmFormat};

/// A SHA-256 digest, shown as lowercase hex.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub const ZERO: Digest = Digest([0; 32]);

    pub fn of(data: &[u8]) -> Self {
        Digest(Sha256::digest(data).into())
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({self})")
    }
}

impl FromStr for Digest {
    type Err = hex::FromHexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out)?;
        Ok(Digest(out))
    }
}

impl Serialize for Digest {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Digest {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Block hash over
/// `index: u64 BE ‖ prev_hash ‖ step: u32 BE ‖ len(metadata): u32 BE ‖ metadata ‖ image`,
/// where `image` is the canonical P4 encoding of the watermarked page.
pub fn block_hash(
    index: u64,
    prev_hash: &Digest,
    step: usize,
    metadata: &str,
    image_p4: &[u8],
) -> Digest {
    let mut h = Sha256::new();
    h.update(index.to_be_bytes());
    h.update(prev_hash.0);
    h.update((step as u32).to_be_bytes());
    h.update((metadata.len() as u32).to_be_bytes());
    h.update(metadata.as_bytes());
    h.update(image_p4);
    Digest(h.finalize().into())
}

/// A watermarked page together with the text it carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainRecord {
    pub image: BinaryImage,
    pub metadata: String,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub index: u64,
    pub prev_hash: Digest,
    pub record_hash: Digest,
    pub payload: ChainRecord,
}

impl Block {
    pub fn compute_hash(&self) -> Digest {
        let p = &self.payload;
        block_hash(
            self.index,
            &self.prev_hash,
            p.step,
            &p.metadata,
            &save_pbm(&p.image, PbmFormat::P4),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TamperKind {
    Intact,
    /// The page no longer carries a readable watermark.
    ImageTampered,
    /// The page carries a valid watermark that differs from the metadata.
    MetadataTampered,
    /// A stored hash or link does not match the block contents.
    ChainLinkBroken,
}

impl fmt::Display for TamperKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Intact => "intact",
            Self::ImageTampered => "image-tampered",
            Self::MetadataTampered => "metadata-tampered",
            Self::ChainLinkBroken => "chain-link-broken",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TamperVerdict {
    pub kind: TamperKind,
    pub block_index: u64,
    pub detail: String,
}

impl TamperVerdict {
    fn new(kind: TamperKind, block_index: u64, detail: impl Into<String>) -> Self {
        Self {
            kind,
            block_index,
            detail: detail.into(),
        }
    }
}

/// Checks that the page and the metadata still authenticate each other.
///
/// No readable watermark means the page changed; a readable watermark
/// that differs from the metadata means the metadata changed.
pub fn classify_tamper(block_index: u64, record: &ChainRecord) -> TamperVerdict {
    match extract_framed(&record.image, record.step) {
        Err(e) => TamperVerdict::new(TamperKind::ImageTampered, block_index, e.to_string()),
        Ok(text) if text != record.metadata => TamperVerdict::new(
            TamperKind::MetadataTampered,
            block_index,
            format!("watermark reads {text:?}"),
        ),
        Ok(_) => TamperVerdict::new(TamperKind::Intact, block_index, "ok"),
    }
}

/// Stored fields of one block, as read back for auditing.
pub(crate) struct StoredBlock<'a> {
    pub index: u64,
    pub prev_hash: Digest,
    pub record_hash: Digest,
    pub step: usize,
    pub metadata: &'a str,
    pub image_bytes: &'a [u8],
}

/// Audits one block at `position` whose predecessor's stored hash is
/// `expected_prev` (`None` when the predecessor could not be read).
pub(crate) fn audit_block(
    position: u64,
    expected_prev: Option<&Digest>,
    b: &StoredBlock<'_>,
) -> TamperVerdict {
    let broken = |detail: String| TamperVerdict::new(TamperKind::ChainLinkBroken, position, detail);
    if b.index != position {
        return broken(format!("index field is {}", b.index));
    }
    let recomputed = block_hash(b.index, &b.prev_hash, b.step, b.metadata, b.image_bytes);
    if recomputed != b.record_hash {
        return broken("record hash does not match contents".into());
    }
    match expected_prev {
        None => return broken("previous block is unreadable".into()),
        Some(prev) if *prev != b.prev_hash => {
            return broken("prev_hash does not match the previous block".into())
        }
        Some(_) => {}
    }
    let image = match load_pbm(b.image_bytes) {
        Ok(img) => img,
        Err(e) => {
            return TamperVerdict::new(
                TamperKind::ImageTampered,
                position,
                format!("image unreadable: {e}"),
            )
        }
    };
    let record = ChainRecord {
        image,
        metadata: b.metadata.to_owned(),
        step: b.step,
    };
    classify_tamper(position, &record)
}

/// Watermarks `raw_image` with the framed `metadata` and seals the result
/// into a block following `prev_hash`.
pub fn seal_record(
    index: u64,
    prev_hash: Digest,
    raw_image: &BinaryImage,
    metadata: &str,
    step: usize,
) -> Result<(Block, EmbedReport), LedgerError> {
    let bits = framed_bits(metadata)?;
    let (image, report) = embed(raw_image, &bits, step)?;
    let payload = ChainRecord {
        image,
        metadata: metadata.to_owned(),
        step,
    };
    let mut block = Block {
        index,
        prev_hash,
        record_hash: Digest::ZERO,
        payload,
    };
    block.record_hash = block.compute_hash();
    Ok((block, report))
}

/// An in-memory chain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Chain {
    blocks: Vec<Block>,
}

impl Chain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_blocks(blocks: Vec<Block>) -> Self {
        Self { blocks }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Direct access to stored blocks, bypassing sealing.
    pub fn blocks_mut(&mut self) -> &mut [Block] {
        &mut self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn head_hash(&self) -> Digest {
        self.blocks.last().map_or(Digest::ZERO, |b| b.record_hash)
    }

    pub fn append_record(
        &mut self,
        raw_image: &BinaryImage,
        metadata: &str,
        step: usize,
    ) -> Result<(&Block, EmbedReport), LedgerError> {
        let (block, report) = seal_record(
            self.blocks.len() as u64,
            self.head_hash(),
            raw_image,
            metadata,
            step,
        )?;
        self.blocks.push(block);
        Ok((self.blocks.last().unwrap(), report))
    }

    /// One verdict per block, in order.
    pub fn verify(&self) -> Vec<TamperVerdict> {
        let mut prev = Digest::ZERO;
        self.blocks
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let image_bytes = save_pbm(&b.payload.image, PbmFormat::P4);
                let stored = StoredBlock {
                    index: b.index,
                    prev_hash: b.prev_hash,
                    record_hash: b.record_hash,
                    step: b.payload.step,
                    metadata: &b.payload.metadata,
                    image_bytes: &image_bytes,
                };
                let verdict = audit_block(i as u64, Some(&prev), &stored);
                prev = b.record_hash;
                verdict
            })
            .collect()
    }
}
