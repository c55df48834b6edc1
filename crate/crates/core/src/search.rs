//! Subgoal-driven beam search and its no-subgoal ablation.
//!
//! Both variants run one long beam over partial rollouts. Each round extends
//! every active candidate by one subprogram; invalid extensions are dropped,
//! completed candidates are frozen, and the survivors are ranked by their
//! summed log-probabilities, deduplicated by functionality, and truncated.

use std::time::{Duration, Instant};

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{parse_subgoals, Domain, Spec};

/// What a proposal backend predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Per-example values of the next subprogram, as a JSON array of strings.
    Subgoal,
    /// A subprogram for a spec whose outputs are the subgoals.
    Synthesizer,
    /// A subprogram for the current spec directly.
    Combined,
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Role::Subgoal => "subgoal",
            Role::Synthesizer => "synthesizer",
            Role::Combined => "combined",
        })
    }
}

/// One scored proposal in surface syntax. Parsing is the search's job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub text: String,
    pub logp: f64,
}

impl Proposal {
    pub fn new(text: impl Into<String>, logp: f64) -> Self {
        Proposal {
            text: text.into(),
            logp,
        }
    }
}

/// A source of proposals: a trained model, an oracle, an enumerator.
pub trait Backend<D: Domain> {
    fn role(&self) -> Role;

    /// Up to `k` proposals, best first, with log-probabilities at most 0.
    fn propose(&self, spec: &Spec<D>, k: usize) -> Vec<Proposal>;
}

impl<D: Domain, B: Backend<D> + ?Sized> Backend<D> for &B {
    fn role(&self) -> Role {
        (**self).role()
    }

    fn propose(&self, spec: &Spec<D>, k: usize) -> Vec<Proposal> {
        (**self).propose(spec, k)
    }
}

impl<D: Domain, B: Backend<D> + ?Sized> Backend<D> for Box<B> {
    fn role(&self) -> Role {
        (**self).role()
    }

    fn propose(&self, spec: &Spec<D>, k: usize) -> Vec<Proposal> {
        (**self).propose(spec, k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exedec,
    Nosubgoal,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Exedec => "exedec",
            Mode::Nosubgoal => "nosubgoal",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub beam_size: usize,
    pub max_steps: usize,
    /// Drop candidates functionally equal to a higher-scoring one.
    pub dedup: bool,
    /// Wall-clock budget for the whole search.
    pub timeout: Option<Duration>,
}

impl SearchConfig {
    pub fn new(beam_size: usize, max_steps: usize) -> Self {
        assert!(beam_size >= 1 && max_steps >= 1);
        SearchConfig {
            beam_size,
            max_steps,
            dedup: true,
            timeout: None,
        }
    }

    pub fn for_domain<D: Domain>(beam_size: usize) -> Self {
        SearchConfig::new(beam_size, D::default_max_steps())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("no solution found within {steps} steps")]
    NoSolution { steps: usize },
    #[error("search timed out after {0:?}")]
    Timeout(Duration),
    #[error("backend has role {found}, expected {expected}")]
    WrongRole { expected: Role, found: Role },
}

/// One step of a rollout.
#[derive(Debug, Clone, PartialEq)]
pub struct Step<D: Domain> {
    /// Predicted subgoals and their log-probability (absent without subgoals).
    pub subgoals: Option<(Vec<D::Value>, f64)>,
    pub subprogram: D::Subprogram,
    pub subprogram_logp: f64,
    /// What the subprogram actually produced on each example.
    pub results: Vec<D::Value>,
}

impl<D: Domain> Step<D> {
    pub fn logp(&self) -> f64 {
        self.subgoals.as_ref().map_or(0.0, |(_, lp)| *lp) + self.subprogram_logp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Active,
    Solved,
}

/// A partial rollout on the beam.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<D: Domain> {
    pub steps: Vec<Step<D>>,
    pub score: f64,
    /// The task spec updated by every step so far. Equal specs mean equal
    /// cumulative execution results on every example, so this doubles as
    /// the functional signature.
    pub spec: Spec<D>,
    pub status: Status,
}

impl<D: Domain> Candidate<D> {
    fn root(spec: &Spec<D>) -> Self {
        Candidate {
            steps: Vec::new(),
            score: 0.0,
            spec: spec.clone(),
            status: Status::Active,
        }
    }

    pub fn signature(&self) -> &Spec<D> {
        &self.spec
    }

    pub fn subprograms(&self) -> Vec<D::Subprogram> {
        self.steps.iter().map(|s| s.subprogram.clone()).collect()
    }

    pub fn program(&self) -> D::Program {
        D::combine(&self.spec.examples[0].input, &self.subprograms())
    }

    /// The score recomputed from the per-step log-probabilities.
    pub fn recomputed_score(&self) -> f64 {
        self.steps.iter().map(Step::logp).sum()
    }
}

/// Why an extension was discarded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Invalid {
    ParseSubgoals,
    ParseSubprogram,
    Execution,
    /// The result does not fit the remaining output.
    Update,
    NoOp,
    OutOfSteps,
}

/// Hooks for inspecting a search as it runs.
pub trait Observer<D: Domain> {
    fn invalid(&mut self, _reason: &Invalid) {}
    /// Called after each round with the surviving beam.
    fn round(&mut self, _step: usize, _beam: &[Candidate<D>]) {}
}

impl<D: Domain> Observer<D> for () {}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<D: Domain> {
    pub program: D::Program,
    pub score: f64,
    pub steps: Vec<Step<D>>,
}

/// Executes a proposed subprogram and applies it to the candidate.
fn extend<D: Domain>(
    cand: &Candidate<D>,
    subgoals: Option<(Vec<D::Value>, f64)>,
    proposal: &Proposal,
    max_steps: usize,
) -> Result<Candidate<D>, Invalid> {
    let sub = D::parse_subprogram(&proposal.text).map_err(|_| Invalid::ParseSubprogram)?;
    let results = cand.spec.run(&sub).map_err(|_| Invalid::Execution)?;
    let spec = cand.spec.update(&results).ok_or(Invalid::Update)?;
    let solved = spec
        .examples
        .iter()
        .zip(&results)
        .all(|(e, r)| D::finished(e, r));
    if !solved {
        if D::is_noop(&cand.spec, &results) {
            return Err(Invalid::NoOp);
        }
        if cand.steps.len() + 1 >= max_steps {
            return Err(Invalid::OutOfSteps);
        }
    }
    let mut steps = cand.steps.clone();
    let step = Step {
        subgoals,
        subprogram: sub,
        subprogram_logp: proposal.logp,
        results,
    };
    let score = cand.score + step.logp();
    steps.push(step);
    Ok(Candidate {
        steps,
        score,
        spec,
        status: if solved {
            Status::Solved
        } else {
            Status::Active
        },
    })
}

/// Keeps the best `beam_size` candidates; stable, so ties keep insertion order.
fn prune<D: Domain>(mut pool: Vec<Candidate<D>>, config: &SearchConfig) -> Vec<Candidate<D>> {
    pool.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut beam: Vec<Candidate<D>> = Vec::with_capacity(config.beam_size);
    for cand in pool {
        if beam.len() == config.beam_size {
            break;
        }
        if config.dedup && beam.iter().any(|b| b.spec == cand.spec) {
            continue;
        }
        beam.push(cand);
    }
    beam
}

enum Proposer<'a, D: Domain> {
    Decomposed {
        subgoal: &'a dyn Backend<D>,
        synthesizer: &'a dyn Backend<D>,
    },
    Combined(&'a dyn Backend<D>),
}

fn expected_role<D: Domain>(backend: &dyn Backend<D>, role: Role) -> Result<(), SearchError> {
    if backend.role() == role {
        Ok(())
    } else {
        Err(SearchError::WrongRole {
            expected: role,
            found: backend.role(),
        })
    }
}

fn run<D: Domain>(
    spec: &Spec<D>,
    proposer: Proposer<'_, D>,
    config: &SearchConfig,
    observer: &mut dyn Observer<D>,
) -> Result<Vec<Solution<D>>, SearchError> {
    let start = Instant::now();
    let k = config.beam_size;
    let mut beam = vec![Candidate::root(spec)];
    let mut timed_out = false;
    for step in 1..=config.max_steps {
        if beam.iter().all(|c| c.status == Status::Solved) {
            break;
        }
        let mut pool = Vec::new();
        for cand in &beam {
            if config.timeout.is_some_and(|t| start.elapsed() > t) {
                timed_out = true;
                break;
            }
            if cand.status == Status::Solved {
                pool.push(cand.clone());
                continue;
            }
            let mut push = |r: Result<Candidate<D>, Invalid>| match r {
                Ok(c) => pool.push(c),
                Err(reason) => observer.invalid(&reason),
            };
            match &proposer {
                Proposer::Decomposed {
                    subgoal,
                    synthesizer,
                } => {
                    for sg in subgoal.propose(&cand.spec, k).iter().take(k) {
                        let Some(values) = parse_subgoals::<D>(&sg.text, cand.spec.len()) else {
                            push(Err(Invalid::ParseSubgoals));
                            continue;
                        };
                        let target = cand.spec.with_outputs(&values);
                        for sp in synthesizer.propose(&target, k).iter().take(k) {
                            push(extend(
                                cand,
                                Some((values.clone(), sg.logp)),
                                sp,
                                config.max_steps,
                            ));
                        }
                    }
                }
                Proposer::Combined(backend) => {
                    for p in backend.propose(&cand.spec, k).iter().take(k) {
                        push(extend(cand, None, p, config.max_steps));
                    }
                }
            }
        }
        if timed_out {
            // keep whatever already finished
            pool.extend(beam.iter().filter(|c| c.status == Status::Solved).cloned());
        }
        beam = prune(pool, config);
        observer.round(step, &beam);
        debug!(
            "round {step}: {} candidates, {} solved",
            beam.len(),
            beam.iter().filter(|c| c.status == Status::Solved).count()
        );
        if timed_out || beam.is_empty() {
            break;
        }
    }
    let mut solutions = Vec::new();
    for cand in beam.into_iter().filter(|c| c.status == Status::Solved) {
        let program = cand.program();
        if !spec.satisfied_by(&program) {
            // would indicate a bug in update/finished/combine
            warn!("discarding solved candidate that fails re-execution: {program}");
            continue;
        }
        solutions.push(Solution {
            program,
            score: cand.score,
            steps: cand.steps,
        });
    }
    if solutions.is_empty() {
        return Err(if timed_out {
            SearchError::Timeout(start.elapsed())
        } else {
            SearchError::NoSolution {
                steps: config.max_steps,
            }
        });
    }
    Ok(solutions)
}

/// Searches with separate subgoal and synthesizer backends.
pub fn exedec_search<D: Domain>(
    spec: &Spec<D>,
    subgoal: &dyn Backend<D>,
    synthesizer: &dyn Backend<D>,
    config: &SearchConfig,
    observer: &mut dyn Observer<D>,
) -> Result<Vec<Solution<D>>, SearchError> {
    expected_role(subgoal, Role::Subgoal)?;
    expected_role(synthesizer, Role::Synthesizer)?;
    run(
        spec,
        Proposer::Decomposed {
            subgoal,
            synthesizer,
        },
        config,
        observer,
    )
}

/// The ablation: one backend proposes subprograms for the whole remaining spec.
pub fn nosubgoal_search<D: Domain>(
    spec: &Spec<D>,
    backend: &dyn Backend<D>,
    config: &SearchConfig,
    observer: &mut dyn Observer<D>,
) -> Result<Vec<Solution<D>>, SearchError> {
    expected_role(backend, Role::Combined)?;
    run(spec, Proposer::Combined(backend), config, observer)
}
