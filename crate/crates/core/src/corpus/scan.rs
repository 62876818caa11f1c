//! Source scanning: walk a corpus root, decode, and apply the keep filters
//! (extension for repo trees, module/endmodule pair, size ceiling).

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use crate::postprocess::scan_modules;

use super::{CorpusError, CorpusFile, CorpusOrigin};

/// Files at or above this many characters are filtered out.
pub const MAX_CHARS: usize = 20_000;

#[derive(Debug, Clone, Serialize)]
pub struct SkipEntry {
    pub relative_path: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ScanStats {
    /// Regular files visited.
    pub scanned: usize,
    pub kept: usize,
    /// Non-`.v` files under a RepoTree root.
    pub filtered_extension: usize,
    /// No `module` keyword followed by an `endmodule` (comments and
    /// strings masked).
    pub filtered_no_module: usize,
    /// `char_count` at or above the ceiling.
    pub filtered_large: usize,
    /// Unreadable files (I/O errors), detailed in `skipped`.
    pub unreadable: usize,
}

#[derive(Debug)]
pub struct ScanReport {
    pub files: Vec<CorpusFile>,
    pub stats: ScanStats,
    pub skipped: Vec<SkipEntry>,
    /// (relative path, number of U+FFFD replacements) for files that were
    /// not valid UTF-8 and were decoded lossily.
    pub replacements: Vec<(String, usize)>,
}

/// Walk `root` and return the files that pass the corpus filters, in
/// deterministic path order. Individual unreadable files are skipped and
/// reported, never fatal; an unreadable root is an error.
pub fn scan_sources(root: &Path, origin: CorpusOrigin) -> Result<ScanReport, CorpusError> {
    // Surface a missing/unreadable root eagerly with a clear error.
    std::fs::read_dir(root)
        .map_err(|source| CorpusError::Root { path: root.to_path_buf(), source })?;

    let mut report = ScanReport {
        files: Vec::new(),
        stats: ScanStats::default(),
        skipped: Vec::new(),
        replacements: Vec::new(),
    };

    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = match entry {
            Ok(e) => e,
            Err(err) => {
                let path = err
                    .path()
                    .map(|p| relative_to(root, p))
                    .unwrap_or_else(|| "<unknown>".to_string());
                report.stats.unreadable += 1;
                report.skipped.push(SkipEntry {
                    relative_path: path,
                    reason: format!("walk error: {err}"),
                });
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        report.stats.scanned += 1;
        let rel = relative_to(root, entry.path());

        if origin == CorpusOrigin::RepoTree
            && entry.path().extension().map(|e| e != "v").unwrap_or(true)
        {
            report.stats.filtered_extension += 1;
            continue;
        }

        let bytes = match std::fs::read(entry.path()) {
            Ok(b) => b,
            Err(err) => {
                report.stats.unreadable += 1;
                report.skipped.push(SkipEntry {
                    relative_path: rel,
                    reason: format!("read error: {err}"),
                });
                continue;
            }
        };

        let valid_utf8 = std::str::from_utf8(&bytes).is_ok();
        let text = String::from_utf8_lossy(&bytes).into_owned();
        if !valid_utf8 {
            let n = text.matches('\u{FFFD}').count();
            report.replacements.push((rel.clone(), n));
        }

        if !scan_modules(&text).pair_seen {
            report.stats.filtered_no_module += 1;
            continue;
        }

        let char_count = text.chars().count();
        if char_count >= MAX_CHARS {
            report.stats.filtered_large += 1;
            continue;
        }

        let content_hash = hex::encode(Sha256::digest(text.as_bytes()));
        report.stats.kept += 1;
        report.files.push(CorpusFile {
            id: format!("{}:{}", origin.id_tag(), rel),
            origin,
            relative_path: rel,
            text,
            char_count,
            content_hash,
        });
    }
    Ok(report)
}

fn relative_to(root: &Path, path: &Path) -> String {
    path.strip_prefix(root)
        .unwrap_or(path)
        .to_string_lossy()
        .replace(std::path::MAIN_SEPARATOR, "/")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    const GOOD: &str = "// adder\nmodule add(input a, input b, output y);\n  assign y = a ^ b;\nendmodule\n";

    #[test]
    fn keeps_dot_v_with_module_pair() {
        let tmp = tempfile::tempdir().unwrap();
        fs::write(tmp.path().join("add.v"), GOOD).unwrap();
        fs::write(tmp.path().join("notes.txt"), GOOD).unwrap();
        let report = scan_sources(tmp.path(), CorpusOrigin::RepoTree).unwrap();
        assert_eq!(report.files.len(), 1);
        assert_eq!(report.files[0].relative_path, "add.v");
        assert_eq!(report.files[0].id, "repo:add.v");
        assert_eq!(report.stats.filtered_extension, 1);
        assert_eq!(report.files[0].char_count, GOOD.chars().count());
        // content hash is the sha256 of the text
        assert_eq!(
            report.files[0].content_hash,
            hex::encode(Sha256::digest(GOOD.as_bytes()))
        );
    }

    #[test]
    fn book_text_ignores_extension_rule() {
        let tmp = tempfile::tempdir().unwrap();
        fs::write(tmp.path().join("chapter1.txt"), GOOD).unwrap();
        let report = scan_sources(tmp.path(), CorpusOrigin::BookText).unwrap();
        assert_eq!(report.files.len(), 1);
        assert_eq!(report.files[0].id, "book:chapter1.txt");
    }

    #[test]
    fn module_pair_must_be_outside_comments() {
        let tmp = tempfile::tempdir().unwrap();
        fs::write(tmp.path().join("fake.v"), "// module x endmodule\nwire w;\n").unwrap();
        fs::write(tmp.path().join("real.v"), GOOD).unwrap();
        let report = scan_sources(tmp.path(), CorpusOrigin::RepoTree).unwrap();
        assert_eq!(report.files.len(), 1);
        assert_eq!(report.files[0].relative_path, "real.v");
        assert_eq!(report.stats.filtered_no_module, 1);
    }

    #[test]
    fn endmodule_must_follow_module() {
        let tmp = tempfile::tempdir().unwrap();
        fs::write(tmp.path().join("rev.v"), "endmodule\nmodule tail(input a);\n").unwrap();
        let report = scan_sources(tmp.path(), CorpusOrigin::RepoTree).unwrap();
        assert!(report.files.is_empty());
        assert_eq!(report.stats.filtered_no_module, 1);
    }

    #[test]
    fn large_files_are_filtered() {
        let tmp = tempfile::tempdir().unwrap();
        let big = format!("module big;\n{}endmodule\n", "// padding line\n".repeat(1600));
        assert!(big.chars().count() >= MAX_CHARS);
        fs::write(tmp.path().join("big.v"), &big).unwrap();
        fs::write(tmp.path().join("small.v"), GOOD).unwrap();
        let report = scan_sources(tmp.path(), CorpusOrigin::RepoTree).unwrap();
        assert_eq!(report.files.len(), 1);
        assert_eq!(report.stats.filtered_large, 1);
    }

    #[test]
    fn invalid_utf8_is_decoded_lossily_and_counted() {
        let tmp = tempfile::tempdir().unwrap();
        let mut bytes = GOOD.as_bytes().to_vec();
        bytes.extend_from_slice(b"// tail \xFF\xFE\n");
        fs::write(tmp.path().join("messy.v"), &bytes).unwrap();
        let report = scan_sources(tmp.path(), CorpusOrigin::RepoTree).unwrap();
        assert_eq!(report.files.len(), 1);
        assert_eq!(report.replacements.len(), 1);
        assert_eq!(report.replacements[0].0, "messy.v");
        assert_eq!(report.replacements[0].1, 2);
        assert!(report.files[0].text.contains('\u{FFFD}'));
    }

    #[test]
    fn missing_root_is_an_error() {
        let tmp = tempfile::tempdir().unwrap();
        let gone = tmp.path().join("never-created");
        assert!(matches!(
            scan_sources(&gone, CorpusOrigin::RepoTree),
            Err(CorpusError::Root { .. })
        ));
    }

    #[test]
    fn walk_is_deterministic_and_recursive() {
        let tmp = tempfile::tempdir().unwrap();
        fs::create_dir_all(tmp.path().join("sub/inner")).unwrap();
        fs::write(tmp.path().join("b.v"), GOOD).unwrap();
        fs::write(tmp.path().join("sub/a.v"), GOOD).unwrap();
        fs::write(tmp.path().join("sub/inner/c.v"), GOOD).unwrap();
        let first = scan_sources(tmp.path(), CorpusOrigin::RepoTree).unwrap();
        let second = scan_sources(tmp.path(), CorpusOrigin::RepoTree).unwrap();
        let paths: Vec<_> = first.files.iter().map(|f| f.relative_path.clone()).collect();
        let again: Vec<_> = second.files.iter().map(|f| f.relative_path.clone()).collect();
        assert_eq!(paths, again);
        assert_eq!(paths.len(), 3);
    }
}
