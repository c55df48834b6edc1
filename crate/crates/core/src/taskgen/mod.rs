//! Benchmark task construction and ground-truth decomposition traces.

pub mod dc;
mod packed;
mod record;
pub mod rf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::domain::{Dc, Domain, Rf, Spec};
use crate::split::{Side, Split, SplitKind};

pub use record::{ExampleRecord, RecordError, SpecExampleRecord, TaskRecord, TraceStepRecord};

#[derive(Debug, Error)]
pub enum TaskgenError {
    #[error("gave up generating a {split} {side} task for seed {seed} after {attempts} attempts")]
    GenerationTimeout {
        split: Split,
        side: Side,
        seed: u64,
        attempts: usize,
    },
    #[error("enumeration exceeded its budget of {0} states")]
    BudgetExceeded(usize),
    #[error("inputs outside what the enumerator supports: {0}")]
    Unsupported(String),
    #[error("solution does not decompose: {0}")]
    InconsistentSolution(String),
}

/// One programming-by-example problem with its ground-truth solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Task<D: Domain> {
    pub split: Split,
    pub side: Side,
    pub seed: u64,
    pub spec: Spec<D>,
    pub program: D::Program,
}

/// One teacher-forcing step: the spec before the step, the values the step
/// produced, and the subprogram that produced them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TraceStep<D: Domain> {
    pub spec: Spec<D>,
    pub subgoals: Vec<D::Value>,
    pub subprogram: D::Subprogram,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trace<D: Domain> {
    pub steps: Vec<TraceStep<D>>,
}

/// Generators for one domain.
pub trait Generate: Domain {
    fn generate(split: Split, side: Side, seed: u64) -> Result<Task<Self>, TaskgenError>;

    /// Extra domain-specific checks beyond [`check_task`] (may be expensive).
    fn deep_check(_task: &Task<Self>) -> Result<(), String> {
        Ok(())
    }
}

impl Generate for Rf {
    fn generate(split: Split, side: Side, seed: u64) -> Result<Task<Rf>, TaskgenError> {
        rf::sample_task(split, side, seed)
    }
}

impl Generate for Dc {
    fn generate(split: Split, side: Side, seed: u64) -> Result<Task<Dc>, TaskgenError> {
        dc::build_task(split, side, seed)
    }

    fn deep_check(task: &Task<Dc>) -> Result<(), String> {
        if task.side == Side::Test {
            dc::check_minimal_solutions(task)
        } else {
            Ok(())
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// The generator stream for one task; distinct per (seed, domain, split, side).
pub fn task_rng(split: Split, side: Side, seed: u64) -> ChaCha8Rng {
    let kind = SplitKind::ALL
        .iter()
        .position(|k| *k == split.kind)
        .unwrap_or(0) as u64;
    let tag = (split.domain as u64) << 16 | kind << 8 | side as u64;
    ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(tag)))
}

/// Splits the solution into subprograms and replays them through the
/// specification updates, recording what each step sees and produces.
pub fn decompose<D: Domain>(
    spec: &Spec<D>,
    program: &D::Program,
) -> Result<Trace<D>, TaskgenError> {
    let parts = D::parts(program);
    let mut spec = spec.clone();
    let mut steps = Vec::with_capacity(parts.len());
    for (i, part) in parts.iter().enumerate() {
        let results = spec
            .run(part)
            .map_err(|e| TaskgenError::InconsistentSolution(format!("step {}: {e}", i + 1)))?;
        let next = spec.update(&results).ok_or_else(|| {
            TaskgenError::InconsistentSolution(format!("step {} does not fit the output", i + 1))
        })?;
        let done = next
            .examples
            .iter()
            .zip(&results)
            .all(|(e, r)| D::finished(e, r));
        let last = i + 1 == parts.len();
        if done != last {
            return Err(TaskgenError::InconsistentSolution(format!(
                "step {} of {} {} the task",
                i + 1,
                parts.len(),
                if done {
                    "already completes"
                } else {
                    "does not complete"
                }
            )));
        }
        steps.push(TraceStep {
            spec: std::mem::replace(&mut spec, next),
            subgoals: results,
            subprogram: part.clone(),
        });
    }
    Ok(Trace { steps })
}

/// Checks the invariants every emitted task must satisfy.
pub fn check_task<D: Generate>(task: &Task<D>) -> Result<(), String> {
    let expected = match D::KIND {
        crate::DomainKind::RobustFill => 4,
        crate::DomainKind::DeepCoder => 3,
    };
    if task.spec.len() != expected {
        return Err(format!(
            "expected {expected} examples, got {}",
            task.spec.len()
        ));
    }
    if task.split.domain != D::KIND {
        return Err("split domain does not match the task domain".into());
    }
    if !task.spec.satisfied_by(&task.program) {
        return Err(format!(
            "solution {} does not reproduce the outputs",
            task.program
        ));
    }
    if !task
        .split
        .contains(task.side, &crate::split::SplitProgram::parts(&task.program))
    {
        return Err(format!(
            "solution {} is outside the {} {} distribution",
            task.program, task.split, task.side
        ));
    }
    decompose(&task.spec, &task.program).map_err(|e| e.to_string())?;
    D::deep_check(task)
}
