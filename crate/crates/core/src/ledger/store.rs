//! On-disk chain: a JSON-lines file plus one canonical P4 file per block.
//!
//! Each line of the chain file is an object with the fields `index`,
//! `prev_hash`, `record_hash`, `metadata`, `image_path` and `step`. Digests
//! are lowercase hex. `image_path` is relative to the directory holding
//! the chain file; pages live in a sibling directory named after the chain
//! file with an `.images` suffix.

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::chain::{
    audit_block, seal_record, Block, Digest, StoredBlock, TamperKind, TamperVerdict,
};
use super::LedgerError;
use crate::codec::EmbedReport;
use crate::image::BinaryImage;
use crate::pnm::{save_pbm, PbmFormat};

/// One line of the chain file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainEntry {
    pub index: u64,
    pub prev_hash: Digest,
    pub record_hash: Digest,
    pub metadata: String,
    pub image_path: String,
    pub step: usize,
}

#[derive(Debug, Clone)]
pub struct ChainStore {
    path: PathBuf,
}

fn storage(context: &str, path: &Path, e: io::Error) -> LedgerError {
    LedgerError::Storage(format!("{context} {}: {e}", path.display()))
}

impl ChainStore {
    /// Creates an empty chain file. Fails if it already exists.
    pub fn init(path: impl Into<PathBuf>) -> Result<Self, LedgerError> {
        let store = Self { path: path.into() };
        OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&store.path)
            .map_err(|e| storage("cannot create", &store.path, e))?;
        let dir = store.images_dir();
        fs::create_dir_all(&dir).map_err(|e| storage("cannot create", &dir, e))?;
        Ok(store)
    }

    /// Opens an existing chain file.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, LedgerError> {
        let store = Self { path: path.into() };
        if !store.path.is_file() {
            return Err(LedgerError::Storage(format!(
                "no chain file at {}",
                store.path.display()
            )));
        }
        Ok(store)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn base_dir(&self) -> PathBuf {
        self.path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default()
    }

    fn images_dir_name(&self) -> String {
        let name = self
            .path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "chain".into());
        format!("{name}.images")
    }

    fn images_dir(&self) -> PathBuf {
        self.base_dir().join(self.images_dir_name())
    }

    /// Resolves an entry's `image_path`.
    pub fn image_file(&self, entry: &ChainEntry) -> PathBuf {
        self.base_dir().join(&entry.image_path)
    }

    fn read_lines(&self) -> Result<Vec<String>, LedgerError> {
        let text = fs::read(&self.path).map_err(|e| storage("cannot read", &self.path, e))?;
        // Invalid UTF-8 is kept as replacement characters so the line fails
        // to parse rather than sinking the whole audit.
        Ok(String::from_utf8_lossy(&text)
            .lines()
            .map(str::to_owned)
            .collect())
    }

    /// Every line of the chain file, parsed independently.
    pub fn entries(&self) -> Result<Vec<Result<ChainEntry, String>>, LedgerError> {
        Ok(self
            .read_lines()?
            .iter()
            .map(|l| serde_json::from_str(l).map_err(|e| e.to_string()))
            .collect())
    }

    /// Watermarks `raw_image` with `metadata` and appends the block.
    pub fn append_record(
        &self,
        raw_image: &BinaryImage,
        metadata: &str,
        step: usize,
    ) -> Result<(Block, EmbedReport), LedgerError> {
        let entries = self.entries()?;
        let prev_hash = match entries.last() {
            None => Digest::ZERO,
            Some(Ok(e)) => e.record_hash,
            Some(Err(e)) => {
                return Err(LedgerError::Storage(format!(
                    "last chain entry is malformed: {e}"
                )))
            }
        };
        let index = entries.len() as u64;
        let (block, report) = seal_record(index, prev_hash, raw_image, metadata, step)?;

        let image_path = format!("{}/{index:06}.pbm", self.images_dir_name());
        let image_file = self.base_dir().join(&image_path);
        let dir = self.images_dir();
        fs::create_dir_all(&dir).map_err(|e| storage("cannot create", &dir, e))?;
        fs::write(&image_file, save_pbm(&block.payload.image, PbmFormat::P4))
            .map_err(|e| storage("cannot write", &image_file, e))?;

        let entry = ChainEntry {
            index,
            prev_hash: block.prev_hash,
            record_hash: block.record_hash,
            metadata: metadata.to_owned(),
            image_path,
            step,
        };
        let mut line = serde_json::to_string(&entry).expect("entry serializes");
        line.push('\n');
        let mut file = OpenOptions::new()
            .append(true)
            .open(&self.path)
            .map_err(|e| storage("cannot open", &self.path, e))?;
        file.write_all(line.as_bytes())
            .and_then(|_| file.flush())
            .map_err(|e| storage("cannot append to", &self.path, e))?;
        Ok((block, report))
    }

    /// One verdict per line of the chain file.
    ///
    /// Hashes cover the stored image bytes as they are on disk, so any
    /// byte edit to a page surfaces as a broken link.
    pub fn audit(&self) -> Result<Vec<TamperVerdict>, LedgerError> {
        let mut prev = Some(Digest::ZERO);
        let mut verdicts = Vec::new();
        for (i, entry) in self.entries()?.into_iter().enumerate() {
            let position = i as u64;
            let broken = |detail: String| TamperVerdict {
                kind: TamperKind::ChainLinkBroken,
                block_index: position,
                detail,
            };
            let entry = match entry {
                Ok(e) => e,
                Err(e) => {
                    verdicts.push(broken(format!("malformed entry: {e}")));
                    prev = None;
                    continue;
                }
            };
            let image_file = self.image_file(&entry);
            let verdict = match fs::read(&image_file) {
                Ok(bytes) => audit_block(
                    position,
                    prev.as_ref(),
                    &StoredBlock {
                        index: entry.index,
                        prev_hash: entry.prev_hash,
                        record_hash: entry.record_hash,
                        step: entry.step,
                        metadata: &entry.metadata,
                        image_bytes: &bytes,
                    },
                ),
                Err(e) if e.kind() == io::ErrorKind::NotFound => {
                    broken(format!("image {} is missing", entry.image_path))
                }
                Err(e) => return Err(storage("cannot read", &image_file, e)),
            };
            verdicts.push(verdict);
            prev = Some(entry.record_hash);
        }
        Ok(verdicts)
    }
}
