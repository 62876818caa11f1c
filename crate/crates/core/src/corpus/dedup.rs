//! Near-duplicate removal: MinHash candidate pairs confirmed by exact
//! Jaccard, keep-first policy in input order.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use super::minhash::{estimate_jaccard, jaccard_exact, minhash_signature, shingle_set};
use super::{CorpusError, CorpusFile};

#[derive(Debug, Clone)]
pub struct DedupConfig {
    /// Similarity at or above which a later file is dropped.
    pub threshold: f64,
    pub k_shingle: usize,
    pub num_hashes: usize,
    pub seed: u64,
    /// Extra slack subtracted from the threshold during the signature
    /// candidate pass. Zero keeps the literal candidate rule; a small
    /// positive margin makes the pass robust to estimator noise on pairs
    /// sitting exactly at the threshold (exact Jaccard still decides).
    pub candidate_margin: f64,
}

impl Default for DedupConfig {
    fn default() -> Self {
        DedupConfig {
            threshold: 0.85,
            k_shingle: 7,
            num_hashes: 256,
            seed: 0x5eed_c0de,
            candidate_margin: 0.0,
        }
    }
}

/// Evidence for one dropped file.
#[derive(Debug, Clone, Serialize)]
pub struct DropRecord {
    pub duplicate_id: String,
    /// The earlier kept file it collided with.
    pub kept_id: String,
    pub estimated_similarity: f64,
    pub exact_similarity: f64,
}

#[derive(Debug)]
pub struct DedupOutcome {
    pub kept: Vec<CorpusFile>,
    pub dropped: Vec<DropRecord>,
}

/// Deduplicate `files` in order: a file is dropped iff its signature
/// similarity to an already-kept file reaches the candidate threshold and
/// exact Jaccard on the shingle sets confirms `>= threshold`. The first
/// file of any duplicate cluster is always kept, and input order is
/// preserved in the output.
pub fn deduplicate(
    files: Vec<CorpusFile>,
    config: &DedupConfig,
) -> Result<DedupOutcome, CorpusError> {
    // Shingling and signatures are independent per file; compute in
    // parallel, keeping input order.
    let prepared: Vec<(HashSet<u64>, super::MinHashSignature)> = files
        .par_iter()
        .map(|f| {
            let shingles = shingle_set(&f.text, config.k_shingle);
            let sig =
                minhash_signature(&shingles, config.k_shingle, config.num_hashes, config.seed);
            (shingles, sig)
        })
        .collect();

    let candidate_floor = config.threshold - config.candidate_margin;
    let mut kept: Vec<CorpusFile> = Vec::with_capacity(files.len());
    let mut kept_prepared: Vec<&(HashSet<u64>, super::MinHashSignature)> = Vec::new();
    let mut dropped: Vec<DropRecord> = Vec::new();

    for (file, prep) in files.iter().zip(&prepared) {
        let mut verdict: Option<DropRecord> = None;
        for (kept_file, kept_prep) in kept.iter().zip(&kept_prepared) {
            let estimate = estimate_jaccard(&prep.1, &kept_prep.1)?;
            if estimate < candidate_floor {
                continue;
            }
            let exact = jaccard_exact(&prep.0, &kept_prep.0);
            if exact >= config.threshold {
                verdict = Some(DropRecord {
                    duplicate_id: file.id.clone(),
                    kept_id: kept_file.id.clone(),
                    estimated_similarity: estimate,
                    exact_similarity: exact,
                });
                break;
            }
        }
        match verdict {
            Some(record) => dropped.push(record),
            None => {
                kept.push(file.clone());
                kept_prepared.push(prep);
            }
        }
    }
    Ok(DedupOutcome { kept, dropped })
}
