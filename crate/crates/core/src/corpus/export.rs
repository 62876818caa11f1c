//! Training-set export: line-delimited JSON, written atomically so a
//! failed export never leaves a half-written file behind.

use std::io::Write;
use std::path::Path;

use super::{CorpusError, TrainingExample};

/// Write `examples` to `out_path` as one JSON object per line
/// (`{"source_id","start","end","text"}`) and return the number written.
/// The serialization is deterministic: the same examples produce the same
/// bytes. On any I/O failure the destination is left untouched.
pub fn export_training_set(
    examples: &[TrainingExample],
    out_path: &Path,
) -> Result<usize, CorpusError> {
    let io_err = |source| CorpusError::Export { path: out_path.to_path_buf(), source };
    let dir = out_path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    for example in examples {
        let line = serde_json::to_string(example)
            .map_err(|e| io_err(std::io::Error::other(e)))?;
        tmp.write_all(line.as_bytes()).map_err(io_err)?;
        tmp.write_all(b"\n").map_err(io_err)?;
    }
    tmp.flush().map_err(io_err)?;
    tmp.persist(out_path).map_err(|e| io_err(e.error))?;
    Ok(examples.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::sliding_windows;

    #[test]
    fn round_trips_through_jsonl() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("train.jsonl");
        let examples = sliding_windows("repo:a.v", "module m; endmodule", 8, 4).unwrap();
        let n = export_training_set(&examples, &out).unwrap();
        assert_eq!(n, examples.len());

        let text = std::fs::read_to_string(&out).unwrap();
        let parsed: Vec<TrainingExample> = text
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(parsed, examples);
    }

    #[test]
    fn export_bytes_are_deterministic() {
        let tmp = tempfile::tempdir().unwrap();
        let a = tmp.path().join("a.jsonl");
        let b = tmp.path().join("b.jsonl");
        let examples = sliding_windows("src", &"xyz".repeat(40), 16, 8).unwrap();
        export_training_set(&examples, &a).unwrap();
        export_training_set(&examples, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn failed_export_leaves_no_partial_file() {
        let tmp = tempfile::tempdir().unwrap();
        let missing_dir = tmp.path().join("no-such-dir/out.jsonl");
        let examples = sliding_windows("src", "abcdefgh", 4, 2).unwrap();
        assert!(export_training_set(&examples, &missing_dir).is_err());
        assert!(!missing_dir.exists());
        // temp files are cleaned up too
        let leftovers: Vec<_> = std::fs::read_dir(tmp.path()).unwrap().collect();
        assert!(leftovers.is_empty());
    }

    #[test]
    fn empty_export_writes_empty_file() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("empty.jsonl");
        assert_eq!(export_training_set(&[], &out).unwrap(), 0);
        assert_eq!(std::fs::read_to_string(&out).unwrap(), "");
    }
}
