//! Manifest discovery and loading.
//!
//! A problem lives in its own directory as a `manifest.toml` (or
//! `manifest.json`) next to the prompt fragments, testbench, and reference
//! it names. Loading is pure: the same directory bytes always produce the
//! same `ProblemSet`, ordered by problem id.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use walkdir::WalkDir;

use crate::postprocess::{scan_modules, tokenize, TokenKind};

use super::{Detail, Problem, ProblemError, ProblemSet, ProblemSetId};

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Require the canonical Set I shape: exactly 17 problems split
    /// 4 Basic / 8 Intermediate / 5 Advanced. Off by default so trimmed
    /// sets (smoke tests, custom suites) load too.
    pub enforce_set1_shape: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    id: String,
    set: ProblemSetId,
    difficulty: super::Difficulty,
    title: String,
    module_name: String,
    #[serde(default)]
    notes: Option<String>,
    prompts: ManifestPrompts,
    files: ManifestAssets,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestPrompts {
    low: String,
    medium: String,
    high: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestAssets {
    testbench: String,
    reference: String,
}

pub fn load_problem_set(dir: &Path) -> Result<ProblemSet, ProblemError> {
    load_problem_set_with(dir, LoadOptions::default())
}

pub fn load_problem_set_with(dir: &Path, opts: LoadOptions) -> Result<ProblemSet, ProblemError> {
    let mut manifest_paths: Vec<PathBuf> = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| ProblemError::Io {
            path: e.path().map(Path::to_path_buf).unwrap_or_else(|| dir.to_path_buf()),
            source: e.into_io_error().unwrap_or_else(|| std::io::Error::other("walk error")),
        })?;
        if entry.file_type().is_file()
            && matches!(
                entry.file_name().to_str(),
                Some("manifest.toml") | Some("manifest.json")
            )
        {
            manifest_paths.push(entry.into_path());
        }
    }
    if manifest_paths.is_empty() {
        return Err(ProblemError::EmptyDirectory(dir.to_path_buf()));
    }

    let mut problems = Vec::with_capacity(manifest_paths.len());
    for path in manifest_paths {
        problems.push(load_one(&path)?);
    }
    problems.sort_by(|a, b| a.id.cmp(&b.id));
    for pair in problems.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(ProblemError::DuplicateId(pair[0].id.clone()));
        }
    }
    if opts.enforce_set1_shape {
        check_set1_shape(&problems)?;
    }
    Ok(ProblemSet { problems })
}

fn load_one(manifest_path: &Path) -> Result<Problem, ProblemError> {
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let raw = read_text(manifest_path)?;
    let manifest: ManifestFile = if manifest_path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&raw).map_err(|e| ProblemError::Manifest {
            path: manifest_path.to_path_buf(),
            message: e.to_string(),
        })?
    } else {
        toml::from_str(&raw).map_err(|e| ProblemError::Manifest {
            path: manifest_path.to_path_buf(),
            message: e.to_string(),
        })?
    };

    let id = manifest.id;
    let set1_band = manifest.difficulty.is_set1_band();
    let band_ok = match manifest.set {
        ProblemSetId::SetI => set1_band,
        ProblemSetId::SetII => !set1_band,
    };
    if !band_ok {
        return Err(ProblemError::BandMismatch {
            id,
            set: manifest.set,
            difficulty: manifest.difficulty,
        });
    }

    let mut prompts = BTreeMap::new();
    for (detail, rel) in [
        (Detail::L, &manifest.prompts.low),
        (Detail::M, &manifest.prompts.medium),
        (Detail::H, &manifest.prompts.high),
    ] {
        let path = base.join(rel);
        let text = read_asset(&id, "prompt", &path)?;
        let scan = scan_modules(&text);
        if scan.net != 1 || scan.dipped_negative {
            return Err(ProblemError::PromptShape { id, detail, net: scan.net });
        }
        if !opens_module_named(&text, &manifest.module_name) {
            return Err(ProblemError::ModuleNameMismatch {
                id,
                module_name: manifest.module_name,
                what: "prompt",
            });
        }
        prompts.insert(detail, text);
    }
    for (lower, higher) in [(Detail::L, Detail::M), (Detail::M, Detail::H)] {
        if !prompts[&higher].starts_with(&prompts[&lower]) {
            return Err(ProblemError::PrefixViolation { id, lower, higher });
        }
    }

    let reference_path = base.join(&manifest.files.reference);
    let reference_text = read_asset(&id, "reference", &reference_path)?;
    let ref_scan = scan_modules(&reference_text);
    if ref_scan.net != 0 || !ref_scan.pair_seen || ref_scan.dipped_negative {
        return Err(ProblemError::Manifest {
            path: reference_path,
            message: format!(
                "reference for {id} is not a balanced module (net depth {})",
                ref_scan.net
            ),
        });
    }

    let testbench_path = base.join(&manifest.files.testbench);
    let testbench_text = read_asset(&id, "testbench", &testbench_path)?;
    if !mentions_identifier(&testbench_text, &manifest.module_name) {
        return Err(ProblemError::ModuleNameMismatch {
            id,
            module_name: manifest.module_name,
            what: "testbench",
        });
    }

    Ok(Problem {
        id,
        set: manifest.set,
        difficulty: manifest.difficulty,
        title: manifest.title,
        module_name: manifest.module_name,
        prompts,
        testbench_path,
        reference_path,
        reference_text,
        notes: manifest.notes,
    })
}

fn check_set1_shape(problems: &[Problem]) -> Result<(), ProblemError> {
    use super::Difficulty::{Advanced, Basic, Intermediate};
    let set1: Vec<_> = problems.iter().filter(|p| p.set == ProblemSetId::SetI).collect();
    let count = |d| set1.iter().filter(|p| p.difficulty == d).count();
    let shape = (set1.len(), count(Basic), count(Intermediate), count(Advanced));
    if shape != (17, 4, 8, 5) {
        return Err(ProblemError::SetShape(format!(
            "expected 17 Set I problems split 4 Basic / 8 Intermediate / 5 Advanced, \
             found {} split {} / {} / {}",
            shape.0, shape.1, shape.2, shape.3
        )));
    }
    Ok(())
}

fn read_text(path: &Path) -> Result<String, ProblemError> {
    std::fs::read_to_string(path)
        .map_err(|source| ProblemError::Io { path: path.to_path_buf(), source })
}

fn read_asset(id: &str, what: &'static str, path: &Path) -> Result<String, ProblemError> {
    match std::fs::read_to_string(path) {
        Ok(text) if !text.trim().is_empty() => Ok(text),
        Ok(_) => Err(ProblemError::MissingAsset {
            id: id.to_string(),
            what,
            path: path.to_path_buf(),
        }),
        Err(_) => Err(ProblemError::MissingAsset {
            id: id.to_string(),
            what,
            path: path.to_path_buf(),
        }),
    }
}

/// True when some `module` keyword is directly followed (ignoring trivia)
/// by an identifier equal to `name`.
fn opens_module_named(text: &str, name: &str) -> bool {
    let tokens = tokenize(text);
    let mut idx = 0;
    while idx < tokens.len() {
        if tokens[idx].kind == TokenKind::Keyword && tokens[idx].text == "module" {
            let mut next = idx + 1;
            while next < tokens.len()
                && matches!(
                    tokens[next].kind,
                    TokenKind::Whitespace | TokenKind::CommentLine | TokenKind::CommentBlock
                )
            {
                next += 1;
            }
            if next < tokens.len()
                && tokens[next].kind == TokenKind::Identifier
                && tokens[next].text == name
            {
                return true;
            }
        }
        idx += 1;
    }
    false
}

/// True when `name` appears as a standalone identifier token (e.g. the
/// testbench instantiating the module under test).
fn mentions_identifier(text: &str, name: &str) -> bool {
    tokenize(text).iter().any(|t| t.kind == TokenKind::Identifier && t.text == name)
}
