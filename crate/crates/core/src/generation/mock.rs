//! Deterministic offline provider driven by a fixture table.
//!
//! Fixtures map a prompt digest (optionally qualified by temperature) to a
//! list of completion texts. Runs against the mock are exactly
//! reproducible, which makes it the backbone of scoring tests and dry-run
//! sweeps.
//!
//! Fixture JSON shape — each value is either a bare list of texts or an
//! object with pacing metadata:
//!
//! ```json
//! {
//!   "<sha256-of-prompt>@0.5": ["module top(); ..."],
//!   "<sha256-of-prompt>": { "completions": ["..."], "latency_ms": 5 },
//!   "*": ["endmodule"]
//! }
//! ```
//!
//! Lookup order: `<digest>@<temperature>`, then `<digest>`, then the `"*"`
//! fallback. A call for `n` completions cycles through the matched list,
//! so completion `i` always receives `texts[i % len]`.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::{CallError, GenerationError, GenerationRequest, Provider, RawCompletion};

/// Lowercase hex SHA-256 of the prompt text — the fixture key form.
pub fn prompt_digest(prompt: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(prompt.as_bytes());
    hex::encode(hasher.finalize())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Texts(Vec<String>),
    Detailed {
        completions: Vec<String>,
        #[serde(default)]
        latency_ms: u64,
    },
}

#[derive(Debug, Clone)]
struct Entry {
    completions: Vec<String>,
    latency_ms: u64,
}

impl From<RawEntry> for Entry {
    fn from(raw: RawEntry) -> Self {
        match raw {
            RawEntry::Texts(completions) => Entry { completions, latency_ms: 0 },
            RawEntry::Detailed { completions, latency_ms } => Entry { completions, latency_ms },
        }
    }
}

/// Fixture-backed [`Provider`]. Serves unlimited `n` per call by default,
/// so completion indices map straight onto fixture positions.
#[derive(Debug)]
pub struct MockProvider {
    id: String,
    entries: BTreeMap<String, Entry>,
    max_n_per_call: usize,
}

impl MockProvider {
    fn from_entries(entries: BTreeMap<String, Entry>) -> Self {
        MockProvider { id: "mock".to_string(), entries, max_n_per_call: usize::MAX }
    }

    /// Parses fixture JSON; `label` names the source in errors.
    pub fn from_fixture_json(label: &str, json: &str) -> Result<Self, GenerationError> {
        let raw: BTreeMap<String, RawEntry> =
            serde_json::from_str(json).map_err(|e| GenerationError::Fixture {
                path: label.to_string(),
                message: e.to_string(),
            })?;
        let entries: BTreeMap<String, Entry> =
            raw.into_iter().map(|(k, v)| (k, Entry::from(v))).collect();
        for (key, entry) in &entries {
            if entry.completions.is_empty() {
                return Err(GenerationError::Fixture {
                    path: label.to_string(),
                    message: format!("entry {key:?} has an empty completion list"),
                });
            }
        }
        Ok(Self::from_entries(entries))
    }

    pub fn from_fixture_file(path: impl AsRef<Path>) -> Result<Self, GenerationError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| GenerationError::Fixture {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_fixture_json(&path.display().to_string(), &text)
    }

    /// Provider answering every prompt with the given texts (a `"*"` entry).
    pub fn fallback<I, S>(texts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::from_entries(BTreeMap::new()).with_entry("*", texts)
    }

    pub fn with_entry<I, S>(mut self, key: impl Into<String>, texts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let completions: Vec<String> = texts.into_iter().map(Into::into).collect();
        assert!(!completions.is_empty(), "fixture entry needs at least one completion");
        self.entries.insert(key.into(), Entry { completions, latency_ms: 0 });
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_max_n_per_call(mut self, cap: usize) -> Self {
        self.max_n_per_call = cap;
        self
    }

    fn lookup(&self, request: &GenerationRequest) -> Option<&Entry> {
        let digest = prompt_digest(&request.prompt);
        let qualified = format!("{digest}@{}", request.temperature);
        let found = [qualified.as_str(), digest.as_str(), "*"]
            .into_iter()
            .find_map(|key| self.entries.get(key));
        found
    }
}

impl Provider for MockProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn max_n_per_call(&self) -> usize {
        self.max_n_per_call
    }

    fn call(
        &self,
        request: &GenerationRequest,
        n: usize,
    ) -> Result<Vec<RawCompletion>, CallError> {
        let Some(entry) = self.lookup(request) else {
            return Err(CallError::fatal(format!(
                "no fixture entry for digest {} at temperature {} and no \"*\" fallback",
                prompt_digest(&request.prompt),
                request.temperature,
            )));
        };
        if entry.latency_ms > 0 {
            std::thread::sleep(Duration::from_millis(entry.latency_ms));
        }
        Ok((0..n)
            .map(|i| RawCompletion {
                text: entry.completions[i % entry.completions.len()].clone(),
                finish_reason: "stop".to_string(),
            })
            .collect())
    }
}
