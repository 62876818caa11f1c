//! Evaluation harness: compile a candidate with the external toolchain,
//! simulate it against the problem's testbench, and classify the result
//! into one of four statuses.

mod exec;
pub mod store;
pub mod sweep;
mod toolchain;

pub use store::{RecordKey, RecordStore, StoreError};
pub use sweep::{run_sweep, SweepConfig, SweepError, SweepSummary};
pub use toolchain::{
    Toolchain, DEFAULT_COMPILE_TEMPLATE, DEFAULT_SIMULATE_TEMPLATE, TB_RESULT_PREFIX,
};

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generation::Temperature;
use crate::problems::Detail;

use toolchain::{CompileOutcome, SimOutcome};

/// Where an evaluation ended up. Exactly one of these per candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Status {
    Success,
    CompileError,
    SimulationError,
    Incorrect,
}

impl Status {
    pub const ALL: [Status; 4] =
        [Status::Success, Status::CompileError, Status::SimulationError, Status::Incorrect];

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Success => "Success",
            Status::CompileError => "CompileError",
            Status::SimulationError => "SimulationError",
            Status::Incorrect => "Incorrect",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classified result of one candidate. `mismatches` is present exactly when
/// the simulation ran to completion (Success or Incorrect).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub status: Status,
    pub mismatches: Option<u64>,
    pub compile_stderr: String,
    pub sim_stdout: String,
}

/// One line of the record store: where the candidate came from plus how its
/// evaluation went and how long each stage took.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub problem_id: String,
    pub detail: Detail,
    pub temperature: Temperature,
    pub completion_index: usize,
    pub provider_id: String,
    pub outcome: EvalOutcome,
    pub gen_latency_seconds: f64,
    pub compile_seconds: f64,
    pub sim_seconds: f64,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("required tool {program:?} was not found on PATH")]
    ToolNotFound { program: String },
    #[error("bad toolchain template: {0}")]
    Template(String),
    #[error("failed to launch {program:?}: {source}")]
    Spawn {
        program: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scratch directory error: {0}")]
    Scratch(#[source] std::io::Error),
}

/// Pure classification step, split out so the taxonomy is testable without
/// any subprocess. `sim` must be present exactly when the compile succeeded.
fn classify(compile: &CompileOutcome, sim: Option<&SimOutcome>) -> EvalOutcome {
    debug_assert_eq!(compile.ok, sim.is_some());
    match sim {
        None => EvalOutcome {
            status: Status::CompileError,
            mismatches: None,
            compile_stderr: compile.stderr.clone(),
            sim_stdout: String::new(),
        },
        Some(sim) => {
            let (status, mismatches) = match sim.mismatches {
                Some(0) => (Status::Success, Some(0)),
                Some(k) => (Status::Incorrect, Some(k)),
                None => (Status::SimulationError, None),
            };
            EvalOutcome {
                status,
                mismatches,
                compile_stderr: compile.stderr.clone(),
                sim_stdout: sim.stdout.clone(),
            }
        }
    }
}

/// Timings and classification for one candidate, plus the scratch directory
/// path when it was retained for debugging.
#[derive(Debug)]
pub struct Evaluation {
    pub outcome: EvalOutcome,
    pub compile_seconds: f64,
    pub sim_seconds: f64,
    pub kept_scratch: Option<PathBuf>,
}

/// Compile-and-simulate service around a [`Toolchain`].
#[derive(Debug, Clone)]
pub struct Harness {
    toolchain: Toolchain,
    sim_timeout: Duration,
    compile_timeout: Duration,
    keep_scratch_on_failure: bool,
    scratch_root: Option<PathBuf>,
}

impl Default for Harness {
    fn default() -> Self {
        Harness::new(Toolchain::default())
    }
}

impl Harness {
    pub fn new(toolchain: Toolchain) -> Self {
        Harness {
            toolchain,
            sim_timeout: Duration::from_secs(10),
            compile_timeout: Duration::from_secs(30),
            keep_scratch_on_failure: false,
            scratch_root: None,
        }
    }

    pub fn with_sim_timeout(mut self, timeout: Duration) -> Self {
        self.sim_timeout = timeout;
        self
    }

    pub fn with_compile_timeout(mut self, timeout: Duration) -> Self {
        self.compile_timeout = timeout;
        self
    }

    /// Retain the scratch directory of any non-Success evaluation.
    pub fn with_keep_scratch_on_failure(mut self, keep: bool) -> Self {
        self.keep_scratch_on_failure = keep;
        self
    }

    /// Parent directory for scratch directories (system temp by default).
    pub fn with_scratch_root(mut self, root: PathBuf) -> Self {
        self.scratch_root = Some(root);
        self
    }

    pub fn sim_timeout(&self) -> Duration {
        self.sim_timeout
    }

    /// Fails fast when either external tool is missing.
    pub fn preflight(&self) -> Result<(), HarnessError> {
        self.toolchain.preflight()
    }

    /// Runs one candidate through compile + simulate in a private scratch
    /// directory. Tool-level failures classify into the outcome; only
    /// environment problems (missing tool, unusable scratch) are errors.
    pub fn evaluate(
        &self,
        source_text: &str,
        testbench: &Path,
    ) -> Result<Evaluation, HarnessError> {
        let scratch = self.make_scratch()?;
        let candidate = scratch.path().join("candidate.v");
        std::fs::write(&candidate, source_text).map_err(HarnessError::Scratch)?;
        let image = scratch.path().join("sim.out");

        let compile = self.toolchain.compile(
            &[candidate.as_path(), testbench],
            &image,
            self.compile_timeout,
        )?;
        let (sim, sim_seconds) = if compile.ok {
            let sim = self.toolchain.simulate(&image, self.sim_timeout)?;
            let seconds = sim.seconds;
            (Some(sim), seconds)
        } else {
            (None, 0.0)
        };

        let outcome = classify(&compile, sim.as_ref());
        let kept_scratch = if outcome.status != Status::Success && self.keep_scratch_on_failure
        {
            Some(scratch.keep())
        } else {
            None
        };
        Ok(Evaluation {
            outcome,
            compile_seconds: compile.seconds,
            sim_seconds,
            kept_scratch,
        })
    }

    fn make_scratch(&self) -> Result<tempfile::TempDir, HarnessError> {
        let mut builder = tempfile::Builder::new();
        builder.prefix("vbench-eval-");
        match &self.scratch_root {
            Some(root) => {
                std::fs::create_dir_all(root).map_err(HarnessError::Scratch)?;
                builder.tempdir_in(root).map_err(HarnessError::Scratch)
            }
            None => builder.tempdir().map_err(HarnessError::Scratch),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn compile_ok() -> CompileOutcome {
        CompileOutcome { ok: true, stderr: String::new(), seconds: 0.01 }
    }

    #[test]
    fn classification_covers_the_four_statuses() {
        let failed = CompileOutcome { ok: false, stderr: "syntax error".into(), seconds: 0.01 };
        let out = classify(&failed, None);
        assert_eq!(out.status, Status::CompileError);
        assert_eq!(out.mismatches, None);
        assert_eq!(out.compile_stderr, "syntax error");

        let sim =
            |mismatches| SimOutcome { mismatches, stdout: String::new(), seconds: 0.02 };
        assert_eq!(classify(&compile_ok(), Some(&sim(Some(0)))).status, Status::Success);
        assert_eq!(classify(&compile_ok(), Some(&sim(Some(0)))).mismatches, Some(0));
        assert_eq!(classify(&compile_ok(), Some(&sim(Some(3)))).status, Status::Incorrect);
        assert_eq!(classify(&compile_ok(), Some(&sim(Some(3)))).mismatches, Some(3));
        assert_eq!(classify(&compile_ok(), Some(&sim(None))).status, Status::SimulationError);
        assert_eq!(classify(&compile_ok(), Some(&sim(None))).mismatches, None);
    }

    fn problems_dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems")
    }

    #[test]
    fn reference_wire_module_evaluates_to_success() {
        let dir = problems_dir().join("set1/p01");
        let source = std::fs::read_to_string(dir.join("reference.v")).unwrap();
        let eval = Harness::default().evaluate(&source, &dir.join("testbench.v")).unwrap();
        assert_eq!(eval.outcome.status, Status::Success);
        assert_eq!(eval.outcome.mismatches, Some(0));
        assert!(eval.compile_seconds >= 0.0 && eval.sim_seconds >= 0.0);
        assert!(eval.kept_scratch.is_none());
    }

    #[test]
    fn deleted_semicolon_is_a_compile_error_with_diagnostics() {
        let dir = problems_dir().join("set1/p01");
        let source = std::fs::read_to_string(dir.join("reference.v"))
            .unwrap()
            .replace("assign y = a;", "assign y = a");
        let eval = Harness::default().evaluate(&source, &dir.join("testbench.v")).unwrap();
        assert_eq!(eval.outcome.status, Status::CompileError);
        assert!(!eval.outcome.compile_stderr.is_empty());
    }

    #[test]
    fn empty_candidate_is_a_compile_error() {
        let dir = problems_dir().join("set1/p01");
        let eval = Harness::default().evaluate("", &dir.join("testbench.v")).unwrap();
        assert_eq!(eval.outcome.status, Status::CompileError);
    }

    #[test]
    fn planted_counter_bug_is_incorrect() {
        let mutant = Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/fixtures/mutants/set1_p06.v");
        let source = std::fs::read_to_string(mutant).unwrap();
        let tb = problems_dir().join("set1/p06/testbench.v");
        let eval = Harness::default().evaluate(&source, &tb).unwrap();
        assert_eq!(eval.outcome.status, Status::Incorrect);
        assert!(eval.outcome.mismatches.unwrap() > 0);
        assert!(eval.outcome.sim_stdout.contains("MISMATCH"));
    }

    #[test]
    fn runaway_simulation_times_out_as_simulation_error() {
        // A testbench whose clock never stops and which never reaches a
        // summary line.
        let tb_dir = tempfile::tempdir().unwrap();
        let tb = tb_dir.path().join("tb.v");
        std::fs::write(
            &tb,
            "module tb;\n  reg clk;\n  looper dut(.clk(clk));\n  initial clk = 0;\n  always #1 clk = ~clk;\nendmodule\n",
        )
        .unwrap();
        let source = "module looper(input clk);\nendmodule\n";
        let harness = Harness::default().with_sim_timeout(Duration::from_millis(300));
        let started = std::time::Instant::now();
        let eval = harness.evaluate(source, &tb).unwrap();
        assert_eq!(eval.outcome.status, Status::SimulationError);
        assert_eq!(eval.outcome.mismatches, None);
        assert!(started.elapsed() < Duration::from_secs(20));
    }

    #[test]
    fn clean_exit_without_summary_line_is_a_simulation_error() {
        let tb_dir = tempfile::tempdir().unwrap();
        let tb = tb_dir.path().join("tb.v");
        std::fs::write(
            &tb,
            "module tb;\n  wire y;\n  quiet dut(.y(y));\n  initial begin #1; $finish; end\nendmodule\n",
        )
        .unwrap();
        let source = "module quiet(output y);\n  assign y = 1'b0;\nendmodule\n";
        let eval = Harness::default().evaluate(source, &tb).unwrap();
        assert_eq!(eval.outcome.status, Status::SimulationError);
    }

    #[test]
    fn failure_scratch_is_kept_only_when_asked() {
        let scratch_root = tempfile::tempdir().unwrap();
        let dir = problems_dir().join("set1/p01");
        let harness = Harness::default()
            .with_keep_scratch_on_failure(true)
            .with_scratch_root(scratch_root.path().to_path_buf());
        let eval = harness.evaluate("module broken(", &dir.join("testbench.v")).unwrap();
        assert_eq!(eval.outcome.status, Status::CompileError);
        let kept = eval.kept_scratch.expect("scratch retained on failure");
        assert!(kept.join("candidate.v").is_file());

        // Success never retains scratch, even with the flag set.
        let source = std::fs::read_to_string(dir.join("reference.v")).unwrap();
        let eval = harness.evaluate(&source, &dir.join("testbench.v")).unwrap();
        assert_eq!(eval.outcome.status, Status::Success);
        assert!(eval.kept_scratch.is_none());
    }
}
