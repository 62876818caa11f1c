//! Problem registry: difficulty-tiered prompt fragments, reference
//! solutions, and self-checking testbenches, loaded from per-problem
//! manifests on disk.

mod load;
mod validate;

pub use load::{load_problem_set, load_problem_set_with, LoadOptions};
pub use validate::{validate_references, ReferenceReport, ReferenceRow};

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Prompt detail tier: low (header comment + ports + internal signals),
/// medium (adds behavioral comments on the named signals), high (adds
/// pseudo-code). Each tier is a line-prefix of the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Detail {
    L,
    M,
    H,
}

impl Detail {
    pub const ALL: [Detail; 3] = [Detail::L, Detail::M, Detail::H];

    pub fn as_str(self) -> &'static str {
        match self {
            Detail::L => "L",
            Detail::M => "M",
            Detail::H => "H",
        }
    }
}

impl fmt::Display for Detail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
#[error("unknown detail tier {0:?} (expected L, M, or H)")]
pub struct ParseDetailError(String);

impl FromStr for Detail {
    type Err = ParseDetailError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "L" => Ok(Detail::L),
            "M" => Ok(Detail::M),
            "H" => Ok(Detail::H),
            _ => Err(ParseDetailError(s.to_string())),
        }
    }
}

/// Which catalog a problem belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemSetId {
    SetI,
    SetII,
}

/// Difficulty label. Set I uses the three-band scale; Set II problems are
/// labeled by the ladder rung they seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Difficulty {
    Basic,
    Intermediate,
    Advanced,
    GettingStarted,
    VerilogLanguage,
    CircuitsCombinational,
    CircuitsSequential,
    VerifyBugs,
}

impl Difficulty {
    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Basic => "Basic",
            Difficulty::Intermediate => "Intermediate",
            Difficulty::Advanced => "Advanced",
            Difficulty::GettingStarted => "GettingStarted",
            Difficulty::VerilogLanguage => "VerilogLanguage",
            Difficulty::CircuitsCombinational => "CircuitsCombinational",
            Difficulty::CircuitsSequential => "CircuitsSequential",
            Difficulty::VerifyBugs => "VerifyBugs",
        }
    }

    /// True for the bands a Set I problem may carry.
    pub fn is_set1_band(self) -> bool {
        matches!(self, Difficulty::Basic | Difficulty::Intermediate | Difficulty::Advanced)
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One benchmark problem, fully resolved: prompt texts inlined, file-backed
/// assets kept as paths for the harness.
#[derive(Debug, Clone)]
pub struct Problem {
    pub id: String,
    pub set: ProblemSetId,
    pub difficulty: Difficulty,
    pub title: String,
    /// Name of the module the prompts open and the testbench instantiates.
    pub module_name: String,
    prompts: BTreeMap<Detail, String>,
    pub testbench_path: PathBuf,
    pub reference_path: PathBuf,
    pub reference_text: String,
    /// Free-form contract notes (reset polarity, timing interpretation).
    pub notes: Option<String>,
}

impl Problem {
    /// The exact prompt text submitted to a provider for `detail`.
    pub fn prompt_for(&self, detail: Detail) -> &str {
        &self.prompts[&detail]
    }
}

/// An ordered, validated collection of problems.
#[derive(Debug, Clone)]
pub struct ProblemSet {
    pub problems: Vec<Problem>,
}

impl ProblemSet {
    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Problem> {
        self.problems.iter().find(|p| p.id == id)
    }

    pub fn ids(&self) -> Vec<String> {
        self.problems.iter().map(|p| p.id.clone()).collect()
    }

    /// Problems carrying a given difficulty band, in set order.
    pub fn by_difficulty(&self, difficulty: Difficulty) -> Vec<&Problem> {
        self.problems.iter().filter(|p| p.difficulty == difficulty).collect()
    }
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("problem directory {0} contains no manifests")]
    EmptyDirectory(PathBuf),
    #[error("failed reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("duplicate problem id {0}")]
    DuplicateId(String),
    #[error("problem {id}: prompt {lower} is not a prefix of prompt {higher}")]
    PrefixViolation { id: String, lower: Detail, higher: Detail },
    #[error("problem {id}: {detail} prompt must open exactly one module (net {net})")]
    PromptShape { id: String, detail: Detail, net: i64 },
    #[error("problem {id}: {what} file {path} is missing or empty")]
    MissingAsset { id: String, what: &'static str, path: PathBuf },
    #[error("problem {id}: difficulty {difficulty} is not valid for {set:?}")]
    BandMismatch { id: String, set: ProblemSetId, difficulty: Difficulty },
    #[error("problem {id}: module name {module_name} not found in {what}")]
    ModuleNameMismatch { id: String, module_name: String, what: &'static str },
    #[error("problem set shape: {0}")]
    SetShape(String),
}
