//! Append-only record store: one JSON line per [`EvalRecord`], preceded by
//! a schema-version header line. Reopening an existing store indexes the
//! records already present so a sweep can resume where it stopped.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::EvalRecord;

pub const STORE_SCHEMA: &str = "eval-records";
pub const STORE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
struct StoreHeader {
    schema: String,
    version: u32,
}

/// Identity of one record within a sweep. Two records with equal keys are
/// the same evaluation; the store refuses to hold both.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RecordKey {
    pub problem_id: String,
    pub detail: crate::problems::Detail,
    pub temperature_bits: u64,
    pub provider_id: String,
    pub completion_index: usize,
}

impl EvalRecord {
    pub fn key(&self) -> RecordKey {
        RecordKey {
            problem_id: self.problem_id.clone(),
            detail: self.detail,
            temperature_bits: self.temperature.0.to_bits(),
            provider_id: self.provider_id.clone(),
            completion_index: self.completion_index,
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("store {path}: bad header: {message}")]
    Header { path: PathBuf, message: String },
    #[error("store {path}: malformed record on line {line_no}: {message}")]
    Malformed { path: PathBuf, line_no: usize, message: String },
    #[error("store {path}: duplicate record for {key:?}")]
    Duplicate { path: PathBuf, key: Box<RecordKey> },
}

/// An open store holding its append handle and the key index of everything
/// already persisted.
#[derive(Debug)]
pub struct RecordStore {
    path: PathBuf,
    file: File,
    keys: HashSet<RecordKey>,
}

impl RecordStore {
    /// Opens `path`, creating it with a header when absent. An incomplete
    /// final line (a crash mid-append) is trimmed away; any other damage is
    /// an error rather than silent data loss.
    pub fn open(path: &Path) -> Result<Self, StoreError> {
        let io_err = |source| StoreError::Io { path: path.to_path_buf(), source };
        if !path.exists() {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent).map_err(io_err)?;
                }
            }
            let header = serde_json::to_string(&StoreHeader {
                schema: STORE_SCHEMA.to_string(),
                version: STORE_VERSION,
            })
            .expect("header serializes");
            let mut file = File::create(path).map_err(io_err)?;
            writeln!(file, "{header}").map_err(io_err)?;
            let file =
                OpenOptions::new().append(true).open(path).map_err(io_err)?;
            return Ok(RecordStore { path: path.to_path_buf(), file, keys: HashSet::new() });
        }

        let (records, repair) = read_store(path)?;
        match repair {
            Repair::None => {}
            Repair::TruncateTo(len) => {
                let file = OpenOptions::new().write(true).open(path).map_err(io_err)?;
                file.set_len(len).map_err(io_err)?;
            }
            Repair::AppendNewline => {
                let mut file =
                    OpenOptions::new().append(true).open(path).map_err(io_err)?;
                file.write_all(b"\n").map_err(io_err)?;
            }
        }
        let mut keys = HashSet::with_capacity(records.len());
        for record in &records {
            let key = record.key();
            if !keys.insert(key.clone()) {
                return Err(StoreError::Duplicate {
                    path: path.to_path_buf(),
                    key: Box::new(key),
                });
            }
        }
        let file = OpenOptions::new().append(true).open(path).map_err(io_err)?;
        Ok(RecordStore { path: path.to_path_buf(), file, keys })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Number of records already persisted.
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn contains(&self, key: &RecordKey) -> bool {
        self.keys.contains(key)
    }

    pub fn append(&mut self, record: &EvalRecord) -> Result<(), StoreError> {
        let key = record.key();
        if self.keys.contains(&key) {
            return Err(StoreError::Duplicate {
                path: self.path.clone(),
                key: Box::new(key),
            });
        }
        let line = serde_json::to_string(record).map_err(|e| StoreError::Malformed {
            path: self.path.clone(),
            line_no: self.keys.len() + 2,
            message: e.to_string(),
        })?;
        writeln!(self.file, "{line}")
            .map_err(|source| StoreError::Io { path: self.path.clone(), source })?;
        self.keys.insert(key);
        Ok(())
    }

    /// Reads every record from a store file without opening it for append.
    pub fn load_records(path: &Path) -> Result<Vec<EvalRecord>, StoreError> {
        Ok(read_store(path)?.0)
    }
}

enum Repair {
    None,
    /// Drop a trailing half-written line by truncating the file to this length.
    TruncateTo(u64),
    /// The final record parsed but the newline is missing; add it.
    AppendNewline,
}

fn read_store(path: &Path) -> Result<(Vec<EvalRecord>, Repair), StoreError> {
    let io_err = |source| StoreError::Io { path: path.to_path_buf(), source };
    let content = std::fs::read_to_string(path).map_err(io_err)?;

    let mut records = Vec::new();
    let mut repair = Repair::None;
    let mut offset = 0usize;
    let mut line_no = 0usize;
    for chunk in content.split_inclusive('\n') {
        line_no += 1;
        let complete = chunk.ends_with('\n');
        let line = chunk.trim_end_matches(['\n', '\r']);
        let at_end = offset + chunk.len() == content.len();
        if line_no == 1 {
            let header: StoreHeader =
                serde_json::from_str(line).map_err(|e| StoreError::Header {
                    path: path.to_path_buf(),
                    message: e.to_string(),
                })?;
            if header.schema != STORE_SCHEMA || header.version != STORE_VERSION {
                return Err(StoreError::Header {
                    path: path.to_path_buf(),
                    message: format!(
                        "schema {:?} version {} (expected {STORE_SCHEMA:?} version {STORE_VERSION})",
                        header.schema, header.version
                    ),
                });
            }
        } else if !line.is_empty() {
            match serde_json::from_str::<EvalRecord>(line) {
                Ok(record) => records.push(record),
                Err(_) if !complete && at_end => {
                    // Half-written tail from an interrupted append: drop it.
                    repair = Repair::TruncateTo(offset as u64);
                    break;
                }
                Err(e) => {
                    return Err(StoreError::Malformed {
                        path: path.to_path_buf(),
                        line_no,
                        message: e.to_string(),
                    })
                }
            }
        }
        if !complete && at_end && matches!(repair, Repair::None) {
            repair = Repair::AppendNewline;
        }
        offset += chunk.len();
    }
    Ok((records, repair))
}
