//! Dataset files, batch search runs, and evaluation reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{
    ChainedBackend, Endpoint, EnumBackend, Enumerate, OracleBackend, RemoteBackend, RemoteError,
};
use crate::domain::{parse_subgoals, Dc, Domain, Rf};
use crate::search::{exedec_search, nosubgoal_search, Backend, Mode, Role, SearchConfig};
use crate::split::{DomainKind, Side, Split, SplitKind};
use crate::taskgen::{decompose, Generate, RecordError, TaskRecord, TaskgenError, Trace};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Json {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Taskgen(#[from] TaskgenError),
    #[error(transparent)]
    Remote(#[from] RemoteError),
    #[error("results and dataset do not line up: {0}")]
    Mismatch(String),
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Reads one JSON value per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let file = File::open(path).map_err(io_error(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_error(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|source| HarnessError::Json {
                path: path.display().to_string(),
                line: i + 1,
                source,
            })?,
        );
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item).expect("records serialize");
        w.write_all(b"\n").map_err(io_error(path))?;
    }
    w.flush().map_err(io_error(path))
}

// ------------------------------------------------------------- generation

pub fn generate_record<D: Generate>(
    split: Split,
    side: Side,
    seed: u64,
) -> Result<TaskRecord, TaskgenError> {
    let task = D::generate(split, side, seed)?;
    let trace = decompose(&task.spec, &task.program)?;
    Ok(TaskRecord::new(&task, &trace))
}

/// Generates one task per seed in parallel; results are in seed order.
pub fn generate_records(
    split: Split,
    side: Side,
    seeds: Range<u64>,
) -> Vec<Result<TaskRecord, TaskgenError>> {
    seeds
        .into_par_iter()
        .map(|seed| match split.domain {
            DomainKind::RobustFill => generate_record::<Rf>(split, side, seed),
            DomainKind::DeepCoder => generate_record::<Dc>(split, side, seed),
        })
        .collect()
}

// ---------------------------------------------------------------- search

/// Which proposal sources a run uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendKind {
    /// Ground-truth replay for every role.
    Oracle,
    /// Ground-truth subgoals with the enumerative synthesizer.
    Enum,
    /// An external server for every role.
    Remote(Endpoint),
}

impl BackendKind {
    pub fn name(&self) -> &'static str {
        match self {
            BackendKind::Oracle => "oracle",
            BackendKind::Enum => "enum",
            BackendKind::Remote(_) => "remote",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub mode: Mode,
    pub backend: BackendKind,
    pub beam_size: usize,
    /// Defaults to the domain's maximum when `None`.
    pub max_steps: Option<usize>,
    pub timeout: Option<Duration>,
    pub enum_budget: Duration,
    pub remote_timeout: Duration,
}

impl RunOptions {
    pub fn new(mode: Mode, backend: BackendKind, beam_size: usize) -> Self {
        RunOptions {
            mode,
            backend,
            beam_size,
            max_steps: None,
            timeout: None,
            enum_budget: EnumBackend::<Rf>::DEFAULT_BUDGET,
            remote_timeout: Duration::from_secs(30),
        }
    }

    fn config<D: Domain>(&self) -> SearchConfig {
        let mut c = SearchConfig::new(
            self.beam_size,
            self.max_steps.unwrap_or_else(D::default_max_steps),
        );
        c.timeout = self.timeout;
        c
    }
}

/// One line of a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub domain: DomainKind,
    pub split: SplitKind,
    pub side: Side,
    pub seed: u64,
    pub mode: Mode,
    pub backend: String,
    pub beam_size: usize,
    pub solved: bool,
    pub program: Option<String>,
    pub score: Option<f64>,
    /// Subprograms in the returned program, or rounds searched on failure.
    pub steps: usize,
    pub wall_ms: f64,
}

fn run_task<D: Enumerate>(
    record: &TaskRecord,
    opts: &RunOptions,
) -> Result<ResultRecord, HarnessError> {
    let task = record.task::<D>()?;
    let trace = decompose(&task.spec, &task.program)?;
    let config = opts.config::<D>();
    let oracle =
        |role| -> Box<dyn Backend<D> + Send + Sync> { Box::new(OracleBackend::new(&trace, role)) };
    let remote = |endpoint: &Endpoint, role| -> Box<dyn Backend<D> + Send + Sync> {
        Box::new(RemoteBackend::<D>::new(
            endpoint.clone(),
            role,
            opts.remote_timeout,
        ))
    };
    let start = Instant::now();
    let outcome = match (opts.mode, &opts.backend) {
        (Mode::Exedec, kind) => {
            let (subgoal, synthesizer) = match kind {
                BackendKind::Oracle => (oracle(Role::Subgoal), oracle(Role::Synthesizer)),
                BackendKind::Enum => (
                    oracle(Role::Subgoal),
                    Box::new(EnumBackend::<D>::new(opts.enum_budget)) as Box<_>,
                ),
                BackendKind::Remote(e) => (remote(e, Role::Subgoal), remote(e, Role::Synthesizer)),
            };
            exedec_search(&task.spec, &*subgoal, &*synthesizer, &config, &mut ())
        }
        (Mode::Nosubgoal, kind) => {
            let combined = match kind {
                BackendKind::Oracle => oracle(Role::Combined),
                BackendKind::Enum => Box::new(ChainedBackend::new(
                    OracleBackend::new(&trace, Role::Subgoal),
                    EnumBackend::<D>::new(opts.enum_budget),
                )) as Box<_>,
                BackendKind::Remote(e) => remote(e, Role::Combined),
            };
            nosubgoal_search(&task.spec, &*combined, &config, &mut ())
        }
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut result = ResultRecord {
        domain: record.domain,
        split: record.split,
        side: record.side,
        seed: record.seed,
        mode: opts.mode,
        backend: opts.backend.name().to_owned(),
        beam_size: opts.beam_size,
        solved: false,
        program: None,
        score: None,
        steps: config.max_steps,
        wall_ms,
    };
    if let Ok(solutions) = outcome {
        let best = &solutions[0];
        result.solved = true;
        result.program = Some(best.program.to_string());
        result.score = Some(best.score);
        result.steps = best.steps.len();
    }
    Ok(result)
}

/// Runs the configured search on one dataset task.
pub fn run_record(record: &TaskRecord, opts: &RunOptions) -> Result<ResultRecord, HarnessError> {
    match record.domain {
        DomainKind::RobustFill => run_task::<Rf>(record, opts),
        DomainKind::DeepCoder => run_task::<Dc>(record, opts),
    }
}

// ------------------------------------------------------------ evaluation

/// Whether `program` parses and reproduces every example of the task.
pub fn verify(record: &TaskRecord, program: &str) -> bool {
    fn check<D: Domain>(record: &TaskRecord, program: &str) -> bool {
        let Ok(spec) = record.spec::<D>() else {
            return false;
        };
        D::parse_program(program).is_ok_and(|p| spec.satisfied_by(&p))
    }
    match record.domain {
        DomainKind::RobustFill => check::<Rf>(record, program),
        DomainKind::DeepCoder => check::<Dc>(record, program),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub domain: DomainKind,
    pub split: SplitKind,
    /// Absent when there were no results at all.
    pub mode: Option<Mode>,
    pub backend: Option<String>,
    pub beam_size: Option<usize>,
    pub solved: usize,
    pub total: usize,
    pub success_rate: f64,
    pub mean_wall_ms: Option<f64>,
}

/// A result that claimed a solution which failed re-execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flagged {
    pub domain: DomainKind,
    pub split: SplitKind,
    pub side: Side,
    pub seed: u64,
    pub program: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepAccuracy {
    pub domain: DomainKind,
    pub role: Role,
    pub backend: String,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub groups: Vec<GroupReport>,
    pub flagged: Vec<Flagged>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub step_accuracy: Vec<StepAccuracy>,
}

type TaskKey = (DomainKind, SplitKind, Side, u64);
type RunKey = (Mode, String, usize);

fn task_key(domain: DomainKind, split: SplitKind, side: Side, seed: u64) -> TaskKey {
    (domain, split, side, seed)
}

fn rate(solved: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        solved as f64 / total as f64
    }
}

/// Scores results against the dataset, re-executing every claimed solution.
/// Tasks without a result line count as unsolved; result lines for tasks
/// not in the dataset (or repeated) are an error.
pub fn evaluate(
    results: &[ResultRecord],
    dataset: &[TaskRecord],
) -> Result<EvalReport, HarnessError> {
    let mut tasks: BTreeMap<TaskKey, &TaskRecord> = BTreeMap::new();
    for r in dataset {
        if tasks
            .insert(task_key(r.domain, r.split, r.side, r.seed), r)
            .is_some()
        {
            return Err(HarnessError::Mismatch(format!(
                "dataset has two {} {} {} tasks with seed {}",
                r.domain, r.split, r.side, r.seed
            )));
        }
    }
    let mut seen = BTreeSet::new();
    for r in results {
        let key = task_key(r.domain, r.split, r.side, r.seed);
        if !tasks.contains_key(&key) {
            return Err(HarnessError::Mismatch(format!(
                "result for {} {} {} seed {} has no dataset task",
                r.domain, r.split, r.side, r.seed
            )));
        }
        if !seen.insert((key, r.mode, r.backend.clone(), r.beam_size)) {
            return Err(HarnessError::Mismatch(format!(
                "duplicate result for {} {} {} seed {}",
                r.domain, r.split, r.side, r.seed
            )));
        }
    }

    let verified: Vec<bool> = results
        .par_iter()
        .map(|r| {
            let task = tasks[&task_key(r.domain, r.split, r.side, r.seed)];
            r.solved && r.program.as_deref().is_some_and(|p| verify(task, p))
        })
        .collect();

    let mut totals: BTreeMap<(DomainKind, SplitKind), usize> = BTreeMap::new();
    for r in dataset {
        *totals.entry((r.domain, r.split)).or_default() += 1;
    }
    let runs: BTreeSet<RunKey> = results
        .iter()
        .map(|r| (r.mode, r.backend.clone(), r.beam_size))
        .collect();

    let mut report = EvalReport::default();
    #[derive(Default)]
    struct Acc {
        solved: usize,
        wall: f64,
        n: usize,
    }
    let mut acc: BTreeMap<(DomainKind, SplitKind, RunKey), Acc> = BTreeMap::new();
    for (r, ok) in results.iter().zip(&verified) {
        let a = acc
            .entry((r.domain, r.split, (r.mode, r.backend.clone(), r.beam_size)))
            .or_default();
        a.n += 1;
        a.wall += r.wall_ms;
        if *ok {
            a.solved += 1;
        } else if r.solved {
            report.flagged.push(Flagged {
                domain: r.domain,
                split: r.split,
                side: r.side,
                seed: r.seed,
                program: r.program.clone(),
            });
        }
    }
    for (&(domain, split), &total) in &totals {
        if runs.is_empty() {
            report.groups.push(GroupReport {
                domain,
                split,
                mode: None,
                backend: None,
                beam_size: None,
                solved: 0,
                total,
                success_rate: 0.0,
                mean_wall_ms: None,
            });
        }
        for run in &runs {
            let a = acc.get(&(domain, split, run.clone()));
            let solved = a.map_or(0, |a| a.solved);
            report.groups.push(GroupReport {
                domain,
                split,
                mode: Some(run.0),
                backend: Some(run.1.clone()),
                beam_size: Some(run.2),
                solved,
                total,
                success_rate: rate(solved, total),
                mean_wall_ms: a.filter(|a| a.n > 0).map(|a| a.wall / a.n as f64),
            });
        }
    }
    Ok(report)
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per (domain, mode, backend, beam size); one column per split
    /// plus the mean over the generalization splits.
    pub fn to_table(&self) -> String {
        type Row = (DomainKind, Option<Mode>, Option<String>, Option<usize>);
        let mut rows: BTreeMap<Row, BTreeMap<SplitKind, f64>> = BTreeMap::new();
        for g in &self.groups {
            rows.entry((g.domain, g.mode, g.backend.clone(), g.beam_size))
                .or_default()
                .insert(g.split, g.success_rate);
        }
        let mut header = vec![
            "domain".to_string(),
            "mode".into(),
            "backend".into(),
            "beam".into(),
        ];
        header.extend(SplitKind::ALL.iter().map(|k| k.as_str().to_owned()));
        header.push("GenAvg".into());
        let pct = |x: f64| format!("{:.1}", 100.0 * x);
        let dash = || "-".to_string();
        let mut lines = vec![header];
        for ((domain, mode, backend, beam), cells) in &rows {
            let mut line = vec![
                domain.as_str().to_owned(),
                mode.map_or_else(dash, |m| m.to_string()),
                backend.clone().unwrap_or_else(dash),
                beam.map_or_else(dash, |b| b.to_string()),
            ];
            line.extend(
                SplitKind::ALL
                    .iter()
                    .map(|k| cells.get(k).copied().map_or_else(dash, pct)),
            );
            let gen: Vec<f64> = cells
                .iter()
                .filter(|(k, _)| **k != SplitKind::NoGeneralization)
                .map(|(_, v)| *v)
                .collect();
            line.push(if gen.is_empty() {
                dash()
            } else {
                pct(gen.iter().sum::<f64>() / gen.len() as f64)
            });
            lines.push(line);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for line in &lines {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (cell, w))| {
                    if i < 4 {
                        format!("{cell:<w$}")
                    } else {
                        format!("{cell:>w$}")
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        if !self.flagged.is_empty() {
            let _ = writeln!(
                out,
                "\n{} claimed solutions failed re-execution",
                self.flagged.len()
            );
        }
        for s in &self.step_accuracy {
            let _ = writeln!(
                out,
                "single-step {} {} ({}): {}/{} = {}%",
                s.domain,
                s.role,
                s.backend,
                s.correct,
                s.total,
                pct(s.accuracy)
            );
        }
        out
    }
}

/// Output format for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "table" => Ok(Format::Table),
            _ => Err(format!("unknown format {s:?} (json or table)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Table => "table",
        })
    }
}

// ---------------------------------------------------- single-step accuracy

/// Whether the backend's top proposal for a teacher-forced step is right:
/// exact subgoals for the subgoal role, the ground-truth behavior for the
/// synthesizer and combined roles.
pub fn step_correct<D: Domain>(
    step: &crate::taskgen::TraceStep<D>,
    backend: &dyn Backend<D>,
) -> bool {
    match backend.role() {
        Role::Subgoal => backend
            .propose(&step.spec, 1)
            .first()
            .and_then(|p| parse_subgoals::<D>(&p.text, step.spec.len()))
            .is_some_and(|v| v == step.subgoals),
        role => {
            let query = if role == Role::Synthesizer {
                step.spec.with_outputs(&step.subgoals)
            } else {
                step.spec.clone()
            };
            backend
                .propose(&query, 1)
                .first()
                .and_then(|p| D::parse_subprogram(&p.text).ok())
                .and_then(|sub| step.spec.run(&sub).ok())
                .is_some_and(|v| v == step.subgoals)
        }
    }
}

/// Top-1 accuracy over every step of every trace, with one backend per
/// trace (oracles are built from their trace).
pub fn single_step_accuracy<D, B>(
    traces: &[Trace<D>],
    role: Role,
    backend_name: &str,
    make: impl Fn(&Trace<D>) -> B + Sync,
) -> StepAccuracy
where
    D: Domain,
    B: Backend<D>,
{
    let (correct, total) = traces
        .par_iter()
        .map(|t| {
            let b = make(t);
            assert_eq!(b.role(), role, "backend role");
            let ok = t.steps.iter().filter(|s| step_correct(s, &b)).count();
            (ok, t.steps.len())
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    StepAccuracy {
        domain: D::KIND,
        role,
        backend: backend_name.to_owned(),
        correct,
        total,
        accuracy: rate(correct, total),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::Proposal;
    use crate::split::Split;

    fn dataset() -> Vec<TaskRecord> {
        let split = Split::new(DomainKind::DeepCoder, SplitKind::Length);
        generate_records(split, Side::Test, 0..4)
            .into_iter()
            .map(Result::unwrap)
            .collect()
    }

    #[test]
    fn generation_is_ordered_and_deterministic() {
        let a = dataset();
        assert_eq!(a.iter().map(|r| r.seed).collect::<Vec<_>>(), [0, 1, 2, 3]);
        assert_eq!(a, dataset());
    }

    #[test]
    fn oracle_run_then_evaluate() {
        let data = dataset();
        let opts = RunOptions::new(Mode::Exedec, BackendKind::Oracle, 1);
        let mut results: Vec<ResultRecord> =
            data.iter().map(|r| run_record(r, &opts).unwrap()).collect();
        assert!(results.iter().all(|r| r.solved));
        let report = evaluate(&results, &data).unwrap();
        assert_eq!(report.groups.len(), 1);
        assert_eq!(report.groups[0].success_rate, 1.0);
        results.reverse();
        assert_eq!(evaluate(&results, &data).unwrap().groups[0].solved, 4);

        // a forged claim is counted unsolved and flagged
        results[0].program = Some("x0 = INPUT | x1 = Sort x0".into());
        let report = evaluate(&results, &data).unwrap();
        assert_eq!(report.groups[0].solved, 3);
        assert_eq!(report.flagged.len(), 1);
        assert!(report.to_table().contains("75.0"));

        let mut stray = results[1].clone();
        stray.seed = 99;
        results.push(stray);
        assert!(matches!(
            evaluate(&results, &data),
            Err(HarnessError::Mismatch(_))
        ));
    }

    #[test]
    fn empty_results_give_zero() {
        let data = dataset();
        let report = evaluate(&[], &data).unwrap();
        assert_eq!(report.groups[0].total, 4);
        assert_eq!(report.groups[0].success_rate, 0.0);
        let table = report.to_table();
        assert!(table.lines().next().unwrap().ends_with("GenAvg"));
        assert!(table.contains("0.0"));
    }

    #[test]
    fn jsonl_round_trip() {
        let data = dataset();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        write_jsonl(&path, &data).unwrap();
        let back: Vec<TaskRecord> = read_jsonl(&path).unwrap();
        assert_eq!(back, data);
    }

    struct Silent;

    impl Backend<Dc> for Silent {
        fn role(&self) -> Role {
            Role::Synthesizer
        }
        fn propose(&self, _: &crate::domain::Spec<Dc>, _: usize) -> Vec<Proposal> {
            Vec::new()
        }
    }

    #[test]
    fn step_accuracy_extremes() {
        let traces: Vec<Trace<Dc>> = dataset()
            .iter()
            .map(|r| {
                let t = r.task::<Dc>().unwrap();
                decompose(&t.spec, &t.program).unwrap()
            })
            .collect();
        for role in [Role::Subgoal, Role::Synthesizer, Role::Combined] {
            let acc =
                single_step_accuracy(&traces, role, "oracle", |t| OracleBackend::new(t, role));
            assert_eq!(acc.accuracy, 1.0);
            assert_eq!(
                acc.total,
                traces.iter().map(|t| t.steps.len()).sum::<usize>()
            );
        }
        let acc = single_step_accuracy(&traces, Role::Synthesizer, "enum", |_| {
            EnumBackend::<Dc>::default()
        });
        assert_eq!(acc.accuracy, 1.0);
        let acc = single_step_accuracy(&traces, Role::Synthesizer, "silent", |_| Silent);
        assert_eq!(acc.accuracy, 0.0);
    }
}
