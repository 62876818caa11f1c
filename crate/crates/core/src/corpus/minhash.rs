//! Character-shingle Jaccard similarity and its MinHash estimator.
//!
//! Texts are whitespace-collapsed, cut into overlapping k-character
//! shingles, and each shingle is hashed to a `u64`. A MinHash signature
//! keeps, for each of K seeded hash functions, the minimum hash over the
//! shingle set; the fraction of positions where two signatures agree is an
//! unbiased estimate of the Jaccard similarity with standard error
//! `sqrt(J(1-J)/K)`.

use std::collections::HashSet;

use super::CorpusError;

/// Collapse every run of whitespace to a single space and trim the ends,
/// so formatting-only differences do not perturb similarity.
pub fn normalize_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_ws = false;
    for c in text.chars() {
        if c.is_whitespace() {
            in_ws = true;
        } else {
            if in_ws && !out.is_empty() {
                out.push(' ');
            }
            in_ws = false;
            out.push(c);
        }
    }
    out
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a, hand-rolled so shingle hashes stay stable across toolchain
/// upgrades (the std hasher makes no such promise).
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// The k-shingle set of `text` after whitespace normalization. A text
/// shorter than `k` characters (including the empty text) degrades to a
/// single shingle over the whole normalized text, so every file has a
/// non-empty set and exact-duplicate short files still collide.
pub fn shingle_set(text: &str, k: usize) -> HashSet<u64> {
    assert!(k >= 1, "shingle size must be at least 1");
    let normalized = normalize_whitespace(text);
    let char_starts: Vec<usize> = normalized
        .char_indices()
        .map(|(byte_idx, _)| byte_idx)
        .chain(std::iter::once(normalized.len()))
        .collect();
    let n_chars = char_starts.len() - 1;
    let mut set = HashSet::new();
    if n_chars < k {
        set.insert(fnv1a(normalized.as_bytes()));
        return set;
    }
    for i in 0..=(n_chars - k) {
        let bytes = &normalized.as_bytes()[char_starts[i]..char_starts[i + k]];
        set.insert(fnv1a(bytes));
    }
    set
}

/// Exact Jaccard similarity |A∩B| / |A∪B|. Two empty sets count as
/// identical (1.0); shingle sets produced here are never empty.
pub fn jaccard_exact(a: &HashSet<u64>, b: &HashSet<u64>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let intersection = a.intersection(b).count();
    let union = a.len() + b.len() - intersection;
    intersection as f64 / union as f64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinHashSignature {
    pub mins: Vec<u64>,
    pub k_shingle: usize,
    pub seed: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    mix64(*state)
}

fn mix64(x: u64) -> u64 {
    let mut z = x;
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// MinHash signature of a shingle set under K hash functions derived from
/// `seed`. Deterministic: same set, k, K, and seed give the same signature
/// regardless of set iteration order.
pub fn minhash_signature(
    shingles: &HashSet<u64>,
    k_shingle: usize,
    num_hashes: usize,
    seed: u64,
) -> MinHashSignature {
    assert!(num_hashes >= 1, "need at least one hash function");
    let mut state = seed;
    let hash_seeds: Vec<u64> = (0..num_hashes).map(|_| splitmix64(&mut state)).collect();
    let mut mins = vec![u64::MAX; num_hashes];
    for &shingle in shingles {
        for (slot, &hash_seed) in mins.iter_mut().zip(&hash_seeds) {
            let h = mix64(shingle ^ hash_seed);
            if h < *slot {
                *slot = h;
            }
        }
    }
    MinHashSignature { mins, k_shingle, seed }
}

/// Estimated Jaccard similarity: the fraction of signature positions on
/// which the two signatures agree. Signatures must have been produced with
/// identical parameters.
pub fn estimate_jaccard(a: &MinHashSignature, b: &MinHashSignature) -> Result<f64, CorpusError> {
    if a.mins.len() != b.mins.len() || a.seed != b.seed || a.k_shingle != b.k_shingle {
        return Err(CorpusError::ParamMismatch(format!(
            "K {} vs {}, seed {} vs {}, k_shingle {} vs {}",
            a.mins.len(),
            b.mins.len(),
            a.seed,
            b.seed,
            a.k_shingle,
            b.k_shingle
        )));
    }
    let equal = a.mins.iter().zip(&b.mins).filter(|(x, y)| x == y).count();
    Ok(equal as f64 / a.mins.len() as f64)
}
