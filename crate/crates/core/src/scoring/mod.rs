//! Pass@(scenario·n) scoring over a loaded record store, best-temperature
//! selection, and table emission.
//!
//! The metric is the plain proportion: of the `problems × n` completions a
//! scenario covers (times the number of detail levels when a scenario
//! pools them), the fraction whose outcome satisfies the predicate.
//! Scoring refuses to run over an incomplete grid — a missing record is a
//! coverage error naming the gaps, never a silently smaller denominator.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::generation::Temperature;
use crate::harness::{EvalRecord, Status};
use crate::problems::{Detail, Difficulty, ProblemSet};

/// What counts as a pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predicate {
    /// The candidate got past the compiler (any status but CompileError).
    Compiles,
    /// The candidate simulated cleanly with zero mismatches.
    PassesTests,
}

impl Predicate {
    pub fn satisfied_by(self, status: Status) -> bool {
        match self {
            Predicate::Compiles => status != Status::CompileError,
            Predicate::PassesTests => status == Status::Success,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Predicate::Compiles => "compiles",
            Predicate::PassesTests => "passes",
        }
    }
}

/// A pool of problems to score together, optionally pinned to one detail
/// level (pinned = that level only; unpinned = pooled across all three).
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub problem_ids: BTreeSet<String>,
    pub detail: Option<Detail>,
    pub predicate: Predicate,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        problem_ids: impl IntoIterator<Item = impl Into<String>>,
        detail: Option<Detail>,
        predicate: Predicate,
    ) -> Self {
        Scenario {
            name: name.into(),
            problem_ids: problem_ids.into_iter().map(Into::into).collect(),
            detail,
            predicate,
        }
    }

    fn details(&self) -> Vec<Detail> {
        match self.detail {
            Some(d) => vec![d],
            None => Detail::ALL.to_vec(),
        }
    }
}

/// One scored cell. `score` is exact at full precision; tables render it
/// to three decimals.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreCell {
    pub provider_id: String,
    pub scenario: String,
    pub detail: Option<Detail>,
    pub temperature: Temperature,
    pub n: usize,
    pub numerator: usize,
    pub denominator: usize,
}

impl ScoreCell {
    pub fn score(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("scenario {0:?} selects no problems")]
    EmptyScenario(String),
    #[error("scenario {scenario:?} is missing {} record(s): {}", gaps.len(), summarize(gaps))]
    Coverage { scenario: String, gaps: Vec<String> },
    #[error("no records for provider {provider_id:?} match scenario {scenario:?}")]
    NoTemperatures { provider_id: String, scenario: String },
    #[error("store holds no records")]
    EmptyStore,
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn summarize(gaps: &[String]) -> String {
    const SHOWN: usize = 8;
    let mut s = gaps.iter().take(SHOWN).cloned().collect::<Vec<_>>().join(", ");
    if gaps.len() > SHOWN {
        let _ = write!(s, ", … ({} more)", gaps.len() - SHOWN);
    }
    s
}

/// Scores one (scenario, temperature) cell for one provider.
pub fn pass_at_scenario_n(
    records: &[EvalRecord],
    provider_id: &str,
    scenario: &Scenario,
    temperature: Temperature,
    n: usize,
) -> Result<ScoreCell, ScoreError> {
    if scenario.problem_ids.is_empty() {
        return Err(ScoreError::EmptyScenario(scenario.name.clone()));
    }
    let details = scenario.details();

    let mut found: BTreeMap<(&str, Detail, usize), Status> = BTreeMap::new();
    for record in records {
        if record.provider_id == provider_id
            && record.temperature == temperature
            && record.completion_index < n
            && details.contains(&record.detail)
            && scenario.problem_ids.contains(&record.problem_id)
        {
            found.insert(
                (record.problem_id.as_str(), record.detail, record.completion_index),
                record.outcome.status,
            );
        }
    }

    let mut numerator = 0usize;
    let mut gaps = Vec::new();
    for problem_id in &scenario.problem_ids {
        for &detail in &details {
            for index in 0..n {
                match found.get(&(problem_id.as_str(), detail, index)) {
                    Some(status) => {
                        if scenario.predicate.satisfied_by(*status) {
                            numerator += 1;
                        }
                    }
                    None => gaps.push(format!("{problem_id} {detail} t={temperature} #{index}")),
                }
            }
        }
    }
    if !gaps.is_empty() {
        return Err(ScoreError::Coverage { scenario: scenario.name.clone(), gaps });
    }

    Ok(ScoreCell {
        provider_id: provider_id.to_string(),
        scenario: scenario.name.clone(),
        detail: scenario.detail,
        temperature,
        n,
        numerator,
        denominator: scenario.problem_ids.len() * n * details.len(),
    })
}

/// Distinct temperatures this provider swept for the scenario's problems,
/// ascending.
fn swept_temperatures(
    records: &[EvalRecord],
    provider_id: &str,
    scenario: &Scenario,
) -> Vec<Temperature> {
    let details = scenario.details();
    let mut bits: BTreeSet<u64> = BTreeSet::new();
    for record in records {
        if record.provider_id == provider_id
            && details.contains(&record.detail)
            && scenario.problem_ids.contains(&record.problem_id)
        {
            bits.insert(record.temperature.0.to_bits());
        }
    }
    let mut temps: Vec<Temperature> =
        bits.into_iter().map(|b| Temperature(f64::from_bits(b))).collect();
    temps.sort_by(|a, b| a.0.total_cmp(&b.0));
    temps
}

/// Picks the temperature maximizing the scenario's score; ties go to the
/// lowest temperature. Every swept temperature must be fully covered.
pub fn best_temperature(
    records: &[EvalRecord],
    provider_id: &str,
    scenario: &Scenario,
    n: usize,
) -> Result<(Temperature, ScoreCell), ScoreError> {
    let temps = swept_temperatures(records, provider_id, scenario);
    if temps.is_empty() {
        return Err(ScoreError::NoTemperatures {
            provider_id: provider_id.to_string(),
            scenario: scenario.name.clone(),
        });
    }
    let mut best: Option<(Temperature, ScoreCell)> = None;
    for temperature in temps {
        let cell = pass_at_scenario_n(records, provider_id, scenario, temperature, n)?;
        let better = match &best {
            None => true,
            // Strict improvement only: an equal later (higher) temperature
            // never displaces the earlier one.
            Some((_, incumbent)) => cell.score() > incumbent.score(),
        };
        if better {
            best = Some((temperature, cell));
        }
    }
    Ok(best.expect("at least one temperature"))
}

/// Which of the two report shapes to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableLayout {
    /// Compile-rate cells per difficulty band, pooled over detail levels.
    CompileTable,
    /// Test-pass cells per (difficulty band × detail level), plus mean
    /// generation latency.
    FunctionalTable,
}

impl TableLayout {
    fn predicate(self) -> Predicate {
        match self {
            TableLayout::CompileTable => Predicate::Compiles,
            TableLayout::FunctionalTable => Predicate::PassesTests,
        }
    }

    fn basename(self) -> &'static str {
        match self {
            TableLayout::CompileTable => "compile_table",
            TableLayout::FunctionalTable => "functional_table",
        }
    }

    fn title(self) -> &'static str {
        match self {
            TableLayout::CompileTable => "Pass@(scenario·n): compiled completions",
            TableLayout::FunctionalTable => "Pass@(scenario·n): test-passing completions",
        }
    }
}

/// Paths of the emitted pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableFiles {
    pub text: PathBuf,
    pub csv: PathBuf,
}

const BANDS: [Difficulty; 3] =
    [Difficulty::Basic, Difficulty::Intermediate, Difficulty::Advanced];

fn band_scenarios(set: &ProblemSet, layout: TableLayout) -> Vec<Scenario> {
    let mut scenarios = Vec::new();
    for band in BANDS {
        let ids: Vec<String> =
            set.by_difficulty(band).iter().map(|p| p.id.clone()).collect();
        if ids.is_empty() {
            continue;
        }
        match layout {
            TableLayout::CompileTable => {
                scenarios.push(Scenario::new(band.as_str(), ids, None, layout.predicate()));
            }
            TableLayout::FunctionalTable => {
                for detail in Detail::ALL {
                    scenarios.push(Scenario::new(
                        format!("{band}-{detail}"),
                        ids.clone(),
                        Some(detail),
                        layout.predicate(),
                    ));
                }
            }
        }
    }
    scenarios
}

fn render_score(value: f64) -> String {
    format!("{value:.3}")
}

/// Computes every (provider × scenario) cell at its best temperature and
/// writes the aligned text table and the CSV next to each other.
pub fn emit_tables(
    set: &ProblemSet,
    records: &[EvalRecord],
    layout: TableLayout,
    n: usize,
    out_dir: &Path,
) -> Result<TableFiles, ScoreError> {
    if records.is_empty() {
        return Err(ScoreError::EmptyStore);
    }
    let providers: BTreeSet<&str> =
        records.iter().map(|r| r.provider_id.as_str()).collect();
    let scenarios = band_scenarios(set, layout);

    // provider → cells in scenario order.
    let mut rows: Vec<(&str, Vec<ScoreCell>, Option<f64>)> = Vec::new();
    for provider in providers {
        let mut cells = Vec::new();
        for scenario in &scenarios {
            let (_, cell) = best_temperature(records, provider, scenario, n)?;
            cells.push(cell);
        }
        let latency = match layout {
            TableLayout::CompileTable => None,
            TableLayout::FunctionalTable => Some(mean_latency(records, provider, set, n)),
        };
        rows.push((provider, cells, latency));
    }

    let text = render_text(layout, &scenarios, &rows, n);
    let csv = render_csv(&rows);

    std::fs::create_dir_all(out_dir)
        .map_err(|source| ScoreError::Io { path: out_dir.to_path_buf(), source })?;
    let text_path = out_dir.join(format!("{}.txt", layout.basename()));
    let csv_path = out_dir.join(format!("{}.csv", layout.basename()));
    std::fs::write(&text_path, text)
        .map_err(|source| ScoreError::Io { path: text_path.clone(), source })?;
    std::fs::write(&csv_path, csv)
        .map_err(|source| ScoreError::Io { path: csv_path.clone(), source })?;
    Ok(TableFiles { text: text_path, csv: csv_path })
}

/// Mean per-completion generation latency across every record feeding the
/// table: all banded problems, all details and temperatures, indices < n.
fn mean_latency(records: &[EvalRecord], provider: &str, set: &ProblemSet, n: usize) -> f64 {
    let banded: BTreeSet<&str> = BANDS
        .iter()
        .flat_map(|&band| set.by_difficulty(band))
        .map(|p| p.id.as_str())
        .collect();
    let latencies: Vec<f64> = records
        .iter()
        .filter(|r| {
            r.provider_id == provider
                && r.completion_index < n
                && banded.contains(r.problem_id.as_str())
        })
        .map(|r| r.gen_latency_seconds)
        .collect();
    if latencies.is_empty() {
        return 0.0;
    }
    latencies.iter().sum::<f64>() / latencies.len() as f64
}

fn render_text(
    layout: TableLayout,
    scenarios: &[Scenario],
    rows: &[(&str, Vec<ScoreCell>, Option<f64>)],
    n: usize,
) -> String {
    let mut headers: Vec<String> = vec!["provider".to_string()];
    headers.extend(scenarios.iter().map(|s| s.name.clone()));
    if matches!(layout, TableLayout::FunctionalTable) {
        headers.push("mean latency (s)".to_string());
    }

    let mut body: Vec<Vec<String>> = Vec::new();
    for (provider, cells, latency) in rows {
        let mut row = vec![provider.to_string()];
        row.extend(cells.iter().map(|c| render_score(c.score())));
        if let Some(latency) = latency {
            row.push(render_score(*latency));
        }
        body.push(row);
    }

    let mut widths: Vec<usize> = headers.iter().map(String::len).collect();
    for row in &body {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }

    let render_row = |cells: &[String]| -> String {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("{c:<width$}", width = widths[i])
                } else {
                    format!("{c:>width$}", width = widths[i])
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
    };

    let mut out = String::new();
    let _ = writeln!(out, "{} (n={n})", layout.title());
    let _ = writeln!(out, "{}", render_row(&headers));
    let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    for row in &body {
        let _ = writeln!(out, "{}", render_row(row));
    }
    out.push('\n');
    let _ = writeln!(out, "Each cell: best score across swept temperatures (ties to the lowest).");
    match layout {
        TableLayout::CompileTable => {
            let _ = writeln!(
                out,
                "Pooled cells: denominator = problems in band × n × 3 detail levels."
            );
        }
        TableLayout::FunctionalTable => {
            let _ = writeln!(out, "Cell denominator = problems in band × n.");
            let _ = writeln!(
                out,
                "Mean latency averages all of the provider's banded records at any \
                 temperature and detail."
            );
        }
    }
    out
}

fn render_csv(rows: &[(&str, Vec<ScoreCell>, Option<f64>)]) -> String {
    let mut out = String::from("provider,scenario,detail,temperature,n,numerator,denominator,score\n");
    for (provider, cells, _) in rows {
        for cell in cells {
            let detail = cell.detail.map(|d| d.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                provider,
                cell.scenario,
                detail,
                cell.temperature,
                cell.n,
                cell.numerator,
                cell.denominator,
                cell.score(),
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::EvalOutcome;

    fn record(
        provider: &str,
        problem: &str,
        detail: Detail,
        temp: f64,
        index: usize,
        status: Status,
    ) -> EvalRecord {
        EvalRecord {
            problem_id: problem.to_string(),
            detail,
            temperature: Temperature(temp),
            completion_index: index,
            provider_id: provider.to_string(),
            outcome: EvalOutcome {
                status,
                mismatches: match status {
                    Status::Success => Some(0),
                    Status::Incorrect => Some(3),
                    _ => None,
                },
                compile_stderr: String::new(),
                sim_stdout: String::new(),
            },
            gen_latency_seconds: 0.25,
            compile_seconds: 0.0,
            sim_seconds: 0.0,
        }
    }

    /// `counts[problem] = (successes, incorrects, compile_errors)` at one
    /// temperature and detail, n = sum per problem.
    fn planted(
        provider: &str,
        detail: Detail,
        temp: f64,
        counts: &[(&str, usize, usize, usize)],
    ) -> Vec<EvalRecord> {
        let mut records = Vec::new();
        for &(problem, ok, wrong, broken) in counts {
            let mut index = 0;
            for _ in 0..ok {
                records.push(record(provider, problem, detail, temp, index, Status::Success));
                index += 1;
            }
            for _ in 0..wrong {
                records.push(record(provider, problem, detail, temp, index, Status::Incorrect));
                index += 1;
            }
            for _ in 0..broken {
                records.push(record(provider, problem, detail, temp, index, Status::CompileError));
                index += 1;
            }
        }
        records
    }

    fn scenario(ids: &[&str], detail: Option<Detail>, predicate: Predicate) -> Scenario {
        Scenario::new("s", ids.iter().copied(), detail, predicate)
    }

    #[test]
    fn twenty_of_forty_successes_score_exactly_half() {
        let records = planted(
            "p",
            Detail::L,
            0.5,
            &[("a", 5, 5, 0), ("b", 5, 5, 0), ("c", 5, 5, 0), ("d", 5, 5, 0)],
        );
        let cell = pass_at_scenario_n(
            &records,
            "p",
            &scenario(&["a", "b", "c", "d"], Some(Detail::L), Predicate::PassesTests),
            Temperature(0.5),
            10,
        )
        .unwrap();
        assert_eq!((cell.numerator, cell.denominator), (20, 40));
        assert_eq!(cell.score(), 0.5);
    }

    #[test]
    fn all_success_scores_one() {
        let records = planted("p", Detail::M, 0.1, &[("a", 10, 0, 0)]);
        let cell = pass_at_scenario_n(
            &records,
            "p",
            &scenario(&["a"], Some(Detail::M), Predicate::PassesTests),
            Temperature(0.1),
            10,
        )
        .unwrap();
        assert_eq!(cell.score(), 1.0);
    }

    #[test]
    fn seven_of_ten_compiling_per_problem_scores_point_seven() {
        // Per problem: 4 Success + 3 Incorrect compile (7), 3 CompileError.
        let records = planted(
            "p",
            Detail::L,
            0.5,
            &[("a", 4, 3, 3), ("b", 4, 3, 3), ("c", 4, 3, 3), ("d", 4, 3, 3)],
        );
        let cell = pass_at_scenario_n(
            &records,
            "p",
            &scenario(&["a", "b", "c", "d"], Some(Detail::L), Predicate::Compiles),
            Temperature(0.5),
            10,
        )
        .unwrap();
        assert_eq!((cell.numerator, cell.denominator), (28, 40));
        assert_eq!(render_score(cell.score()), "0.700");
    }

    #[test]
    fn pooled_scenario_multiplies_the_denominator_by_detail_count() {
        let mut records = Vec::new();
        for detail in Detail::ALL {
            records.extend(planted("p", detail, 0.5, &[("a", 3, 2, 0), ("b", 5, 0, 0)]));
        }
        let cell = pass_at_scenario_n(
            &records,
            "p",
            &scenario(&["a", "b"], None, Predicate::PassesTests),
            Temperature(0.5),
            5,
        )
        .unwrap();
        assert_eq!((cell.numerator, cell.denominator), (24, 30));
    }

    #[test]
    fn missing_records_are_a_coverage_error_naming_the_gaps() {
        let mut records = planted("p", Detail::L, 0.5, &[("a", 10, 0, 0)]);
        records.retain(|r| r.completion_index != 7);
        let err = pass_at_scenario_n(
            &records,
            "p",
            &scenario(&["a", "b"], Some(Detail::L), Predicate::PassesTests),
            Temperature(0.5),
            10,
        )
        .unwrap_err();
        match err {
            ScoreError::Coverage { gaps, .. } => {
                assert_eq!(gaps.len(), 11, "one dropped index plus all of b");
                assert!(gaps.contains(&"a L t=0.5 #7".to_string()), "gaps: {gaps:?}");
                assert!(gaps.contains(&"b L t=0.5 #0".to_string()));
            }
            other => panic!("expected Coverage, got {other:?}"),
        }
    }

    #[test]
    fn other_providers_and_out_of_range_indices_are_invisible() {
        let mut records = planted("p", Detail::L, 0.5, &[("a", 10, 0, 0)]);
        // Noise that must not affect the cell.
        records.extend(planted("other", Detail::L, 0.5, &[("a", 0, 0, 10)]));
        records.push(record("p", "a", Detail::L, 0.5, 10, Status::CompileError));
        let cell = pass_at_scenario_n(
            &records,
            "p",
            &scenario(&["a"], Some(Detail::L), Predicate::PassesTests),
            Temperature(0.5),
            10,
        )
        .unwrap();
        assert_eq!(cell.score(), 1.0);
    }

    #[test]
    fn best_temperature_breaks_ties_toward_the_lowest() {
        let mut records = Vec::new();
        records.extend(planted("p", Detail::L, 0.1, &[("a", 9, 1, 0)]));
        records.extend(planted("p", Detail::L, 0.3, &[("a", 9, 1, 0)]));
        records.extend(planted("p", Detail::L, 0.5, &[("a", 7, 3, 0)]));
        let (temp, cell) = best_temperature(
            &records,
            "p",
            &scenario(&["a"], Some(Detail::L), Predicate::PassesTests),
            10,
        )
        .unwrap();
        assert_eq!(temp, Temperature(0.1));
        assert_eq!(cell.score(), 0.9);
    }

    #[test]
    fn best_temperature_finds_a_strict_maximum_anywhere() {
        let mut records = Vec::new();
        records.extend(planted("p", Detail::L, 0.1, &[("a", 2, 8, 0)]));
        records.extend(planted("p", Detail::L, 0.5, &[("a", 6, 4, 0)]));
        records.extend(planted("p", Detail::L, 1.0, &[("a", 4, 6, 0)]));
        let (temp, cell) = best_temperature(
            &records,
            "p",
            &scenario(&["a"], Some(Detail::L), Predicate::PassesTests),
            10,
        )
        .unwrap();
        assert_eq!(temp, Temperature(0.5));
        assert_eq!(cell.score(), 0.6);
    }

    #[test]
    fn no_matching_records_is_a_distinct_error() {
        let records = planted("p", Detail::L, 0.5, &[("a", 1, 0, 0)]);
        let err = best_temperature(
            &records,
            "ghost",
            &scenario(&["a"], Some(Detail::L), Predicate::PassesTests),
            1,
        )
        .unwrap_err();
        assert!(matches!(err, ScoreError::NoTemperatures { .. }));
    }

    #[test]
    fn dominance_compiles_never_below_passes() {
        let records = planted(
            "p",
            Detail::L,
            0.5,
            &[("a", 2, 5, 3), ("b", 0, 0, 10), ("c", 10, 0, 0)],
        );
        let compiles = pass_at_scenario_n(
            &records,
            "p",
            &scenario(&["a", "b", "c"], Some(Detail::L), Predicate::Compiles),
            Temperature(0.5),
            10,
        )
        .unwrap();
        let passes = pass_at_scenario_n(
            &records,
            "p",
            &scenario(&["a", "b", "c"], Some(Detail::L), Predicate::PassesTests),
            Temperature(0.5),
            10,
        )
        .unwrap();
        assert!(compiles.score() >= passes.score());
        assert_eq!((compiles.numerator, passes.numerator), (17, 12));
    }

    mod tables {
        use super::*;
        use std::path::Path as StdPath;

        fn shipped_set() -> ProblemSet {
            let root = StdPath::new(env!("CARGO_MANIFEST_DIR")).join("../../problems");
            crate::problems::load_problem_set(&root).unwrap()
        }

        /// Full Set I grid at one temperature: `alpha` all Success,
        /// `beta` all CompileError.
        fn two_provider_records(set: &ProblemSet, n: usize) -> Vec<EvalRecord> {
            let mut records = Vec::new();
            for band in BANDS {
                for problem in set.by_difficulty(band) {
                    for detail in Detail::ALL {
                        for index in 0..n {
                            records.push(record(
                                "alpha", &problem.id, detail, 0.5, index, Status::Success,
                            ));
                            records.push(record(
                                "beta",
                                &problem.id,
                                detail,
                                0.5,
                                index,
                                Status::CompileError,
                            ));
                        }
                    }
                }
            }
            records
        }

        #[test]
        fn compile_table_renders_three_banded_columns() {
            let set = shipped_set();
            let records = two_provider_records(&set, 2);
            let dir = tempfile::tempdir().unwrap();
            let files =
                emit_tables(&set, &records, TableLayout::CompileTable, 2, dir.path()).unwrap();

            let text = std::fs::read_to_string(&files.text).unwrap();
            assert!(text.contains("Basic"), "{text}");
            assert!(text.contains("Intermediate"));
            assert!(text.contains("Advanced"));
            let alpha_line = text.lines().find(|l| l.starts_with("alpha")).unwrap();
            assert_eq!(alpha_line.matches("1.000").count(), 3, "{alpha_line}");
            let beta_line = text.lines().find(|l| l.starts_with("beta")).unwrap();
            assert_eq!(beta_line.matches("0.000").count(), 3, "{beta_line}");
            assert!(text.contains("3 detail levels"));

            let csv = std::fs::read_to_string(&files.csv).unwrap();
            let mut lines = csv.lines();
            assert_eq!(
                lines.next().unwrap(),
                "provider,scenario,detail,temperature,n,numerator,denominator,score"
            );
            // Basic band: 4 problems × n=2 × 3 details = 24.
            assert_eq!(lines.next().unwrap(), "alpha,Basic,,0.5,2,24,24,1");
            assert!(csv.contains("beta,Basic,,0.5,2,0,24,0"));
        }

        #[test]
        fn functional_table_has_nine_cells_and_a_latency_column() {
            let set = shipped_set();
            let records = two_provider_records(&set, 2);
            let dir = tempfile::tempdir().unwrap();
            let files =
                emit_tables(&set, &records, TableLayout::FunctionalTable, 2, dir.path())
                    .unwrap();

            let text = std::fs::read_to_string(&files.text).unwrap();
            assert!(text.contains("Basic-L"));
            assert!(text.contains("Advanced-H"));
            assert!(text.contains("mean latency (s)"));
            let alpha_line = text.lines().find(|l| l.starts_with("alpha")).unwrap();
            // Nine score cells plus the 0.250 latency column.
            assert_eq!(alpha_line.matches("1.000").count(), 9, "{alpha_line}");
            assert!(alpha_line.contains("0.250"));

            let csv = std::fs::read_to_string(&files.csv).unwrap();
            // Basic-L for alpha: 4 problems × n=2, detail pinned.
            assert!(csv.contains("alpha,Basic-L,L,0.5,2,8,8,1"), "{csv}");
        }

        #[test]
        fn emission_is_deterministic() {
            let set = shipped_set();
            let records = two_provider_records(&set, 1);
            let dir_a = tempfile::tempdir().unwrap();
            let dir_b = tempfile::tempdir().unwrap();
            let a = emit_tables(&set, &records, TableLayout::CompileTable, 1, dir_a.path())
                .unwrap();
            let b = emit_tables(&set, &records, TableLayout::CompileTable, 1, dir_b.path())
                .unwrap();
            assert_eq!(
                std::fs::read_to_string(&a.text).unwrap(),
                std::fs::read_to_string(&b.text).unwrap()
            );
            assert_eq!(
                std::fs::read_to_string(&a.csv).unwrap(),
                std::fs::read_to_string(&b.csv).unwrap()
            );
        }

        #[test]
        fn empty_store_is_refused() {
            let set = shipped_set();
            let dir = tempfile::tempdir().unwrap();
            let err = emit_tables(&set, &[], TableLayout::CompileTable, 1, dir.path())
                .unwrap_err();
            assert!(matches!(err, ScoreError::EmptyStore));
        }

        #[test]
        fn incomplete_grid_propagates_the_coverage_error() {
            let set = shipped_set();
            let mut records = two_provider_records(&set, 2);
            records.retain(|r| {
                !(r.provider_id == "beta" && r.problem_id == "set1/p09")
            });
            let dir = tempfile::tempdir().unwrap();
            let err = emit_tables(&set, &records, TableLayout::CompileTable, 2, dir.path())
                .unwrap_err();
            match err {
                ScoreError::Coverage { scenario, gaps } => {
                    assert_eq!(scenario, "Intermediate");
                    assert!(gaps.iter().all(|g| g.contains("set1/p09")));
                }
                other => panic!("expected Coverage, got {other:?}"),
            }
        }
    }
}
