use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Task, Trace};
use crate::domain::{Domain, Example, Spec};
use crate::error::ParseError;
use crate::split::{DomainKind, Side, Split, SplitKind};

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("record for seed {seed} is a {found} task, expected {expected}")]
    WrongDomain {
        seed: u64,
        found: DomainKind,
        expected: DomainKind,
    },
    #[error("record for seed {seed}: {source}")]
    Parse {
        seed: u64,
        #[source]
        source: ParseError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub inputs: Vec<String>,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecExampleRecord {
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bindings: Vec<(String, String)>,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStepRecord {
    pub spec: Vec<SpecExampleRecord>,
    pub subgoals: Vec<String>,
    pub subprogram: String,
}

/// One line of a dataset file. Values use DSL surface syntax.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub domain: DomainKind,
    pub split: SplitKind,
    pub side: Side,
    pub seed: u64,
    pub examples: Vec<ExampleRecord>,
    pub program: String,
    #[serde(default)]
    pub trace: Vec<TraceStepRecord>,
}

fn spec_record<D: Domain>(spec: &Spec<D>) -> Vec<SpecExampleRecord> {
    spec.examples
        .iter()
        .map(|e: &Example<D>| SpecExampleRecord {
            inputs: D::render_input(&e.input),
            bindings: D::render_bindings(&e.state),
            output: D::render_value(&e.output),
        })
        .collect()
}

impl TaskRecord {
    pub fn new<D: Domain>(task: &Task<D>, trace: &Trace<D>) -> Self {
        TaskRecord {
            domain: D::KIND,
            split: task.split.kind,
            side: task.side,
            seed: task.seed,
            examples: task
                .spec
                .examples
                .iter()
                .map(|e| ExampleRecord {
                    inputs: D::render_input(&e.input),
                    output: D::render_value(&e.output),
                })
                .collect(),
            program: task.program.to_string(),
            trace: trace_record(trace),
        }
    }

    pub fn spec<D: Domain>(&self) -> Result<Spec<D>, RecordError> {
        if self.domain != D::KIND {
            return Err(RecordError::WrongDomain {
                seed: self.seed,
                found: self.domain,
                expected: D::KIND,
            });
        }
        let parse = |source| RecordError::Parse {
            seed: self.seed,
            source,
        };
        let pairs = self
            .examples
            .iter()
            .map(|e| Ok((D::parse_input(&e.inputs)?, D::parse_value(&e.output)?)))
            .collect::<Result<Vec<_>, ParseError>>()
            .map_err(parse)?;
        Ok(Spec::new(pairs))
    }

    pub fn task<D: Domain>(&self) -> Result<Task<D>, RecordError> {
        let spec = self.spec::<D>()?;
        let program = D::parse_program(&self.program).map_err(|source| RecordError::Parse {
            seed: self.seed,
            source,
        })?;
        Ok(Task {
            split: Split::new(self.domain, self.split),
            side: self.side,
            seed: self.seed,
            spec,
            program,
        })
    }
}

pub(crate) fn trace_record<D: Domain>(trace: &Trace<D>) -> Vec<TraceStepRecord> {
    trace
        .steps
        .iter()
        .map(|s| TraceStepRecord {
            spec: spec_record(&s.spec),
            subgoals: s.subgoals.iter().map(D::render_value).collect(),
            subprogram: s.subprogram.to_string(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Dc, Rf};
    use crate::taskgen::decompose;

    #[test]
    fn dc_record_round_trip() {
        let program: crate::deepcoder::DcProgram = "x4 = INPUT | x1 = Map (**2) x4 | x6 = Sort x1"
            .parse()
            .unwrap();
        let inputs = [vec![5, 3, -4], vec![-2], vec![3, 7, 1, 4]];
        let spec: Spec<Dc> = Spec::new(inputs.iter().map(|xs| {
            let input = vec![crate::deepcoder::DcValue::List(xs.clone())];
            let out = program.execute(&input).unwrap();
            (input, out)
        }));
        let task = Task {
            split: Split::new(DomainKind::DeepCoder, SplitKind::Length),
            side: Side::Train,
            seed: 7,
            spec,
            program,
        };
        let trace = decompose(&task.spec, &task.program).unwrap();
        let record = TaskRecord::new(&task, &trace);
        let line = serde_json::to_string(&record).unwrap();
        assert!(line.contains(r#""output":"[1, 9, 16, 49]""#));
        assert!(line.contains(r#""bindings":[["x0","[5, 3, -4]"],["x1","[25, 9, 16]"]]"#));
        let back: TaskRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, record);
        assert_eq!(back.task::<Dc>().unwrap(), task);
        assert!(back.task::<Rf>().is_err());
    }
}
