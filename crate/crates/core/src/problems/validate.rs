//! Registry self-check: run every problem's reference solution through
//! the real toolchain and demand a clean pass. A reference that fails its
//! own testbench would silently poison every score computed against it.

use rayon::prelude::*;

use crate::harness::{Harness, HarnessError, Status};

use super::ProblemSet;

/// One problem's reference verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceRow {
    pub problem_id: String,
    pub status: Status,
    pub mismatches: Option<u64>,
}

/// All verdicts, in set order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceReport {
    pub rows: Vec<ReferenceRow>,
}

impl ReferenceReport {
    pub fn all_success(&self) -> bool {
        self.rows.iter().all(|r| r.status == Status::Success)
    }

    pub fn failures(&self) -> Vec<&ReferenceRow> {
        self.rows.iter().filter(|r| r.status != Status::Success).collect()
    }
}

/// Evaluates every reference against its own testbench. Tool-level
/// failures become rows, not errors; only a broken environment (missing
/// compiler, unusable scratch space) aborts.
pub fn validate_references(
    set: &ProblemSet,
    harness: &Harness,
) -> Result<ReferenceReport, HarnessError> {
    harness.preflight()?;
    let rows = set
        .problems
        .par_iter()
        .map(|problem| {
            harness.evaluate(&problem.reference_text, &problem.testbench_path).map(
                |evaluation| ReferenceRow {
                    problem_id: problem.id.clone(),
                    status: evaluation.outcome.status,
                    mismatches: evaluation.outcome.mismatches,
                },
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ReferenceReport { rows })
}
