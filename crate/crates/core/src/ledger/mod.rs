//! Hash-chained record ledger.
//!
//! Every record pairs a page with a metadata string, and the metadata is
//! embedded into the page as a framed watermark before the block is
//! hashed. The hash chain catches edits to stored bytes; the watermark
//! tells whether a re-signed record had its page or its metadata swapped.

mod chain;
mod frame;
mod store;

use thiserror::Error;

use crate::codec::CodecError;

pub use chain::{
    block_hash, classify_tamper, seal_record, Block, Chain, ChainRecord, Digest, TamperKind,
    TamperVerdict,
};
pub use frame::{
    crc16_ccitt_false, extract_framed, frame_len_bits, framed_bits, unframe, FrameError,
    ReadFrameError, FRAME_OVERHEAD_BITS,
};
pub use store::{ChainEntry, ChainStore};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("storage error: {0}")]
    Storage(String),
}
