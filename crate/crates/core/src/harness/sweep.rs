//! Sweep orchestration: walk the problem × detail × temperature grid,
//! generate candidates, evaluate them in parallel, and append records to
//! a resumable store. Cells already fully recorded are skipped without
//! spending a single generation call.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::generation::{
    CompletionService, GenerationError, GenerationRequest, SystemPromptMode, Temperature,
};
use crate::postprocess::{CandidateSource, CompletionRef, PostprocessError};
use crate::problems::{Detail, ProblemSet};

use super::store::{RecordKey, RecordStore, StoreError};
use super::{EvalRecord, Harness, HarnessError, Status};

/// The grid to run plus the sampling parameters shared by every cell.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub problem_ids: Vec<String>,
    pub details: Vec<Detail>,
    pub temperatures: Vec<Temperature>,
    /// Completions per cell.
    pub n: usize,
    /// When set, the wired service must identify as this provider; guards
    /// against resuming a store with records keyed to someone else.
    pub expected_provider: Option<String>,
    pub system_prompt_mode: SystemPromptMode,
    pub max_tokens: u32,
    /// Worker threads for compile + simulate.
    pub parallelism: usize,
}

impl SweepConfig {
    pub fn new(
        problem_ids: Vec<String>,
        details: Vec<Detail>,
        temperatures: Vec<Temperature>,
        n: usize,
    ) -> Self {
        SweepConfig {
            problem_ids,
            details,
            temperatures,
            n,
            expected_provider: None,
            system_prompt_mode: SystemPromptMode::None,
            max_tokens: 300,
            parallelism: 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep config: {0}")]
    Config(String),
    #[error("unknown problem id {id:?}")]
    UnknownProblem { id: String },
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Postprocess(#[from] PostprocessError),
}

/// What a sweep did, cell by cell and record by record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSummary {
    /// Grid cells visited (problems × details × temperatures).
    pub cells: usize,
    /// Candidates evaluated and appended this run.
    pub evaluated: usize,
    /// Candidates already present in the store and left alone.
    pub skipped: usize,
    /// Tally of this run's new records by outcome.
    pub by_status: BTreeMap<Status, usize>,
    /// Records in the store after the run, resumed ones included.
    pub store_len: usize,
}

fn validate(config: &SweepConfig, provider_id: &str) -> Result<(), SweepError> {
    fn unique<T: PartialEq>(items: &[T]) -> bool {
        items.iter().enumerate().all(|(i, a)| items[..i].iter().all(|b| b != a))
    }
    if config.problem_ids.is_empty() {
        return Err(SweepError::Config("no problems selected".into()));
    }
    if config.details.is_empty() {
        return Err(SweepError::Config("no detail levels selected".into()));
    }
    if config.temperatures.is_empty() {
        return Err(SweepError::Config("no temperatures selected".into()));
    }
    if config.n == 0 {
        return Err(SweepError::Config("n must be at least 1".into()));
    }
    if config.parallelism == 0 {
        return Err(SweepError::Config("parallelism must be at least 1".into()));
    }
    if !unique(&config.problem_ids) || !unique(&config.details) {
        return Err(SweepError::Config("duplicate grid dimension entries".into()));
    }
    if !unique(&config.temperatures) {
        return Err(SweepError::Config("duplicate temperatures".into()));
    }
    if config.temperatures.iter().any(|t| !t.value().is_finite() || t.value() < 0.0) {
        return Err(SweepError::Config("temperatures must be finite and non-negative".into()));
    }
    if let Some(expected) = &config.expected_provider {
        if expected != provider_id {
            return Err(SweepError::Config(format!(
                "provider mismatch: config expects {expected:?}, service is {provider_id:?}"
            )));
        }
    }
    Ok(())
}

/// Runs the grid, appending one record per newly evaluated candidate.
///
/// Resumption is per candidate: a cell with every index already stored is
/// skipped outright (no generation call); a partially stored cell
/// regenerates its full batch — completions are positional, so index `i`
/// reproduces — but evaluates and appends only the missing indices.
pub fn run_sweep(
    set: &ProblemSet,
    service: &dyn CompletionService,
    harness: &Harness,
    store: &mut RecordStore,
    config: &SweepConfig,
) -> Result<SweepSummary, SweepError> {
    let provider_id = service.provider_id().to_string();
    validate(config, &provider_id)?;

    let problems: Vec<_> = config
        .problem_ids
        .iter()
        .map(|id| set.get(id).ok_or_else(|| SweepError::UnknownProblem { id: id.clone() }))
        .collect::<Result<_, _>>()?;

    harness.preflight()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| SweepError::Config(format!("worker pool: {e}")))?;

    let mut summary = SweepSummary {
        cells: 0,
        evaluated: 0,
        skipped: 0,
        by_status: BTreeMap::new(),
        store_len: 0,
    };

    for problem in &problems {
        for &detail in &config.details {
            for &temperature in &config.temperatures {
                summary.cells += 1;
                let key_for = |index: usize| RecordKey {
                    problem_id: problem.id.clone(),
                    detail,
                    temperature_bits: temperature.0.to_bits(),
                    provider_id: provider_id.clone(),
                    completion_index: index,
                };
                let missing: Vec<usize> =
                    (0..config.n).filter(|&i| !store.contains(&key_for(i))).collect();
                summary.skipped += config.n - missing.len();
                if missing.is_empty() {
                    continue;
                }

                let prompt = problem.prompt_for(detail);
                let mut request =
                    GenerationRequest::new(prompt, temperature, config.n);
                request.max_tokens = config.max_tokens;
                request.system_prompt_mode = config.system_prompt_mode;
                let completions = service.generate(&request)?;

                let candidates: Vec<(usize, f64, CandidateSource)> = missing
                    .iter()
                    .map(|&i| {
                        let completion = &completions[i];
                        let candidate = CandidateSource::build(
                            &problem.id,
                            detail,
                            CompletionRef { temperature, index: i },
                            prompt,
                            &completion.raw_text,
                        )?;
                        Ok((i, completion.latency_seconds, candidate))
                    })
                    .collect::<Result<_, PostprocessError>>()?;

                let mut results: Vec<(usize, f64, super::Evaluation)> = pool.install(|| {
                    candidates
                        .par_iter()
                        .map(|(i, latency, candidate)| {
                            harness
                                .evaluate(&candidate.source_text, &problem.testbench_path)
                                .map(|evaluation| (*i, *latency, evaluation))
                        })
                        .collect::<Result<_, HarnessError>>()
                })?;
                results.sort_by_key(|(i, _, _)| *i);

                for (index, latency, evaluation) in results {
                    *summary.by_status.entry(evaluation.outcome.status).or_insert(0) += 1;
                    store.append(&EvalRecord {
                        problem_id: problem.id.clone(),
                        detail,
                        temperature,
                        completion_index: index,
                        provider_id: provider_id.clone(),
                        outcome: evaluation.outcome,
                        gen_latency_seconds: latency,
                        compile_seconds: evaluation.compile_seconds,
                        sim_seconds: evaluation.sim_seconds,
                    })?;
                    summary.evaluated += 1;
                }
            }
        }
    }

    summary.store_len = store.len();
    Ok(summary)
}
