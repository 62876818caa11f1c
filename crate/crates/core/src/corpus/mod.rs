//! Corpus preparation: scan raw sources, drop near-duplicates via MinHash
//! with exact-Jaccard confirmation, extract module blocks from prose, cut
//! overlapping windows, and export training examples.

mod blocks;
mod dedup;
mod export;
mod minhash;
mod scan;
mod windows;

pub use blocks::{extract_verilog_blocks, VerilogBlock};
pub use dedup::{deduplicate, DedupConfig, DedupOutcome, DropRecord};
pub use export::export_training_set;
pub use minhash::{
    estimate_jaccard, jaccard_exact, minhash_signature, normalize_whitespace, shingle_set,
    MinHashSignature,
};
pub use scan::{scan_sources, ScanReport, ScanStats, SkipEntry};
pub use windows::{sliding_windows, TrainingExample};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Where a corpus file came from; drives per-origin filter rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CorpusOrigin {
    /// A checked-out repository tree of `.v` sources.
    RepoTree,
    /// A plain-text book dump, one file per book.
    BookText,
}

impl CorpusOrigin {
    fn id_tag(self) -> &'static str {
        match self {
            CorpusOrigin::RepoTree => "repo",
            CorpusOrigin::BookText => "book",
        }
    }
}

/// One text file that survived the scan filters.
#[derive(Debug, Clone, Serialize)]
pub struct CorpusFile {
    /// Stable identifier: origin tag + relative path.
    pub id: String,
    pub origin: CorpusOrigin,
    pub relative_path: String,
    #[serde(skip)]
    pub text: String,
    pub char_count: usize,
    /// Hex SHA-256 of the decoded text.
    pub content_hash: String,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus root {path}: {source}")]
    Root {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("window and stride must both be at least 1 (got window {window}, stride {stride})")]
    WindowParams { window: usize, stride: usize },
    #[error("signature parameters differ: {0}")]
    ParamMismatch(String),
    #[error("writing {path}: {source}")]
    Export {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
