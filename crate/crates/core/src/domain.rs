//! The per-DSL hooks the search, backends and generators are generic over.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use crate::deepcoder::{self, DcCall, DcProgram, DcState, DcStatement, DcValue, Var};
use crate::error::{ExecError, ParseError};
use crate::robustfill::{self, RfExpression, RfProgram};
use crate::split::{DomainKind, SplitProgram};

/// One DSL, seen as a sequence of subprograms that each produce a value.
///
/// Implemented by the zero-sized markers [`Rf`] and [`Dc`].
pub trait Domain:
    Debug + Clone + Copy + PartialEq + Eq + Hash + Default + Send + Sync + 'static
{
    const KIND: DomainKind;

    /// Original inputs of one example.
    type Input: Debug + Clone + PartialEq + Eq + Hash + Send + Sync;
    /// Outputs and subgoals.
    type Value: Debug + Clone + PartialEq + Eq + Hash + Send + Sync;
    /// What a subprogram executes against after earlier steps.
    type State: Debug + Clone + PartialEq + Eq + Hash + Send + Sync;
    type Subprogram: Debug + Display + Clone + PartialEq + Eq + Hash + Send + Sync;
    type Program: Debug + Display + Clone + PartialEq + SplitProgram + Send + Sync;

    fn initial_state(input: &Self::Input) -> Self::State;
    fn run(sub: &Self::Subprogram, state: &Self::State) -> Result<Self::Value, ExecError>;

    /// Moves one example forward after a subprogram produced `result`.
    /// `None` means the result cannot be part of a solution.
    fn advance(example: &Example<Self>, result: &Self::Value) -> Option<Example<Self>>;

    /// Whether the step that produced `result` (giving `after`) finished the example.
    fn finished(after: &Example<Self>, result: &Self::Value) -> bool;

    /// Domain pruning: a step whose results add nothing usable.
    fn is_noop(spec: &Spec<Self>, results: &[Self::Value]) -> bool;

    fn combine(input: &Self::Input, parts: &[Self::Subprogram]) -> Self::Program;
    fn parts(program: &Self::Program) -> Vec<Self::Subprogram>;
    fn execute(program: &Self::Program, input: &Self::Input) -> Result<Self::Value, ExecError>;

    fn parse_subprogram(text: &str) -> Result<Self::Subprogram, ParseError>;
    fn parse_program(text: &str) -> Result<Self::Program, ParseError>;
    fn parse_value(text: &str) -> Result<Self::Value, ParseError>;
    fn render_value(value: &Self::Value) -> String;
    fn parse_input(texts: &[String]) -> Result<Self::Input, ParseError>;
    fn render_input(input: &Self::Input) -> Vec<String>;
    /// Named intermediate values visible to the next subprogram.
    fn render_bindings(state: &Self::State) -> Vec<(String, String)>;

    fn default_max_steps() -> usize;
}

/// One example of a (possibly updated) specification.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Example<D: Domain> {
    pub input: D::Input,
    pub state: D::State,
    /// Remaining output (RobustFill) or the full output (DeepCoder); a
    /// subgoal when the spec is handed to a synthesizer.
    pub output: D::Value,
}

/// A list of input/output examples, possibly updated by earlier steps.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Spec<D: Domain> {
    pub examples: Vec<Example<D>>,
}

impl<D: Domain> Spec<D> {
    pub fn new(pairs: impl IntoIterator<Item = (D::Input, D::Value)>) -> Self {
        Spec {
            examples: pairs
                .into_iter()
                .map(|(input, output)| Example {
                    state: D::initial_state(&input),
                    input,
                    output,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn outputs(&self) -> Vec<D::Value> {
        self.examples.iter().map(|e| e.output.clone()).collect()
    }

    /// The same states with new target values (e.g. subgoals).
    pub fn with_outputs(&self, outputs: &[D::Value]) -> Self {
        Spec {
            examples: self
                .examples
                .iter()
                .zip(outputs)
                .map(|(e, o)| Example {
                    input: e.input.clone(),
                    state: e.state.clone(),
                    output: o.clone(),
                })
                .collect(),
        }
    }

    /// Runs `sub` on every example.
    pub fn run(&self, sub: &D::Subprogram) -> Result<Vec<D::Value>, ExecError> {
        self.examples
            .iter()
            .map(|e| D::run(sub, &e.state))
            .collect()
    }

    /// Applies per-example results; `None` if any example rejects its result.
    pub fn update(&self, results: &[D::Value]) -> Option<Spec<D>> {
        let examples = self
            .examples
            .iter()
            .zip(results)
            .map(|(e, r)| D::advance(e, r))
            .collect::<Option<Vec<_>>>()?;
        Some(Spec { examples })
    }

    /// Whether `program` maps every input to its output.
    pub fn satisfied_by(&self, program: &D::Program) -> bool {
        self.examples
            .iter()
            .all(|e| D::execute(program, &e.input).as_ref() == Ok(&e.output))
    }
}

/// Parses a subgoal proposal: a JSON array with one surface-syntax value per example.
pub fn parse_subgoals<D: Domain>(text: &str, n: usize) -> Option<Vec<D::Value>> {
    let items: Vec<String> = serde_json::from_str(text).ok()?;
    if items.len() != n {
        return None;
    }
    items.iter().map(|s| D::parse_value(s).ok()).collect()
}

pub fn render_subgoals<D: Domain>(values: &[D::Value]) -> String {
    let items: Vec<String> = values.iter().map(D::render_value).collect();
    serde_json::to_string(&items).expect("strings serialize")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Rf;

impl Domain for Rf {
    const KIND: DomainKind = DomainKind::RobustFill;

    type Input = String;
    type Value = String;
    type State = String;
    type Subprogram = RfExpression;
    type Program = RfProgram;

    fn initial_state(input: &String) -> String {
        input.clone()
    }

    fn run(sub: &RfExpression, state: &String) -> Result<String, ExecError> {
        robustfill::execute_expression(sub, state)
    }

    fn advance(example: &Example<Self>, result: &String) -> Option<Example<Self>> {
        let rest = example.output.strip_prefix(result.as_str())?;
        Some(Example {
            input: example.input.clone(),
            state: example.state.clone(),
            output: rest.to_owned(),
        })
    }

    fn finished(after: &Example<Self>, _result: &String) -> bool {
        after.output.is_empty()
    }

    fn is_noop(_spec: &Spec<Self>, results: &[String]) -> bool {
        results.iter().all(String::is_empty)
    }

    fn combine(_input: &String, parts: &[RfExpression]) -> RfProgram {
        RfProgram::new(parts.to_vec())
    }

    fn parts(program: &RfProgram) -> Vec<RfExpression> {
        program.expressions.clone()
    }

    fn execute(program: &RfProgram, input: &String) -> Result<String, ExecError> {
        program.execute(input)
    }

    fn parse_subprogram(text: &str) -> Result<RfExpression, ParseError> {
        robustfill::parse_expression(text)
    }

    fn parse_program(text: &str) -> Result<RfProgram, ParseError> {
        robustfill::parse_program(text)
    }

    fn parse_value(text: &str) -> Result<String, ParseError> {
        Ok(text.to_owned())
    }

    fn render_value(value: &String) -> String {
        value.clone()
    }

    fn parse_input(texts: &[String]) -> Result<String, ParseError> {
        match texts {
            [one] => Ok(one.clone()),
            _ => Err(ParseError::new(0, "expected exactly one input string")),
        }
    }

    fn render_input(input: &String) -> Vec<String> {
        vec![input.clone()]
    }

    fn render_bindings(_state: &String) -> Vec<(String, String)> {
        Vec::new()
    }

    fn default_max_steps() -> usize {
        10
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dc;

/// Canonical name of the `i`-th binding (inputs first, then statements).
fn canonical_var(i: usize) -> Var {
    Var::new(i as u8).expect("within the name pool")
}

impl Domain for Dc {
    const KIND: DomainKind = DomainKind::DeepCoder;

    type Input = Vec<DcValue>;
    type Value = DcValue;
    type State = DcState;
    type Subprogram = DcCall;
    type Program = DcProgram;

    fn initial_state(input: &Vec<DcValue>) -> DcState {
        DcState::new(
            input
                .iter()
                .enumerate()
                .map(|(i, v)| (canonical_var(i), v.clone()))
                .collect(),
        )
    }

    fn run(sub: &DcCall, state: &DcState) -> Result<DcValue, ExecError> {
        deepcoder::execute_call(sub, state)
    }

    fn advance(example: &Example<Self>, result: &DcValue) -> Option<Example<Self>> {
        let var = example.state.next_var()?;
        Some(Example {
            input: example.input.clone(),
            state: example.state.bind(var, result.clone()),
            output: example.output.clone(),
        })
    }

    fn finished(after: &Example<Self>, result: &DcValue) -> bool {
        *result == after.output
    }

    fn is_noop(spec: &Spec<Self>, results: &[DcValue]) -> bool {
        let Some(first) = spec.examples.first() else {
            return false;
        };
        (0..first.state.bindings.len()).any(|j| {
            spec.examples
                .iter()
                .zip(results)
                .all(|(e, r)| e.state.bindings.get(j).map(|(_, v)| v) == Some(r))
        })
    }

    fn combine(input: &Vec<DcValue>, parts: &[DcCall]) -> DcProgram {
        let n = input.len();
        DcProgram {
            inputs: (0..n).map(canonical_var).collect(),
            statements: parts
                .iter()
                .enumerate()
                .map(|(j, call)| DcStatement {
                    target: canonical_var(n + j),
                    call: call.clone(),
                })
                .collect(),
        }
    }

    /// Statement right-hand sides with variables renamed to the canonical
    /// names `combine` would assign.
    fn parts(program: &DcProgram) -> Vec<DcCall> {
        let order: Vec<Var> = program
            .inputs
            .iter()
            .copied()
            .chain(program.statements.iter().map(|s| s.target))
            .collect();
        let rename = |v: &Var| {
            order
                .iter()
                .position(|o| o == v)
                .map(canonical_var)
                .unwrap_or(*v)
        };
        program
            .statements
            .iter()
            .map(|s| DcCall {
                op: s.call.op,
                lambda: s.call.lambda,
                args: s.call.args.iter().map(rename).collect(),
            })
            .collect()
    }

    fn execute(program: &DcProgram, input: &Vec<DcValue>) -> Result<DcValue, ExecError> {
        program.execute(input)
    }

    /// Accepts a bare right-hand side or a full `xk = ...` statement; the
    /// target is ignored because the search names bindings itself.
    fn parse_subprogram(text: &str) -> Result<DcCall, ParseError> {
        match text.split_once('=') {
            Some((lhs, rhs)) if lhs.trim().starts_with('x') => {
                let offset = lhs.len() + 1;
                deepcoder::parse_call(rhs).map_err(|e| ParseError::new(e.pos + offset, e.message))
            }
            _ => deepcoder::parse_call(text),
        }
    }

    fn parse_program(text: &str) -> Result<DcProgram, ParseError> {
        deepcoder::parse_program(text)
    }

    fn parse_value(text: &str) -> Result<DcValue, ParseError> {
        deepcoder::parse_value(text)
    }

    fn render_value(value: &DcValue) -> String {
        value.to_string()
    }

    fn parse_input(texts: &[String]) -> Result<Vec<DcValue>, ParseError> {
        if texts.is_empty() || texts.len() > 2 {
            return Err(ParseError::new(0, "expected one or two inputs"));
        }
        texts.iter().map(|t| deepcoder::parse_value(t)).collect()
    }

    fn render_input(input: &Vec<DcValue>) -> Vec<String> {
        input.iter().map(DcValue::to_string).collect()
    }

    fn render_bindings(state: &DcState) -> Vec<(String, String)> {
        state
            .bindings
            .iter()
            .map(|(v, x)| (v.to_string(), x.to_string()))
            .collect()
    }

    fn default_max_steps() -> usize {
        5
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf_spec(pairs: &[(&str, &str)]) -> Spec<Rf> {
        Spec::new(pairs.iter().map(|(i, o)| (i.to_string(), o.to_string())))
    }

    #[test]
    fn rf_update_strips_prefix() {
        let spec = rf_spec(&[("x", ".Turing")]);
        let next = spec.update(&[".".into()]).unwrap();
        assert_eq!(next.examples[0].output, "Turing");
        let spec = rf_spec(&[("x", "abc")]);
        assert_eq!(spec.update(&["abc".into()]).unwrap().examples[0].output, "");
        assert!(spec.update(&["bc".into()]).is_none());
    }

    #[test]
    fn rf_combine() {
        let parts: Vec<RfExpression> = [
            "GetFrom(' ')",
            "Const('.')",
            "Compose(ToCase(PROPER), GetToken(WORD, 1))",
        ]
        .iter()
        .map(|t| t.parse().unwrap())
        .collect();
        let p = Rf::combine(&String::new(), &parts);
        assert_eq!(
            p.to_string(),
            "GetFrom(' ') | Const('.') | Compose(ToCase(PROPER), GetToken(WORD, 1))"
        );
        assert_eq!(Rf::combine(&String::new(), &parts[..1]).len(), 1);
    }

    #[test]
    fn dc_update_binds_next_name() {
        let spec: Spec<Dc> = Spec::new([(
            vec![DcValue::List(vec![5, 3, -4])],
            DcValue::List(vec![9, 16, 25]),
        )]);
        let call: DcCall = "Map (**2) x0".parse().unwrap();
        let results = spec.run(&call).unwrap();
        assert_eq!(results, vec![DcValue::List(vec![25, 9, 16])]);
        let next = spec.update(&results).unwrap();
        assert_eq!(
            Dc::render_bindings(&next.examples[0].state)[1],
            ("x1".into(), "[25, 9, 16]".into())
        );
        assert!(Dc::is_noop(&next, &results));
        let p = Dc::combine(&spec.examples[0].input, &[call, "Sort x1".parse().unwrap()]);
        assert_eq!(
            p.to_string(),
            "x0 = INPUT | x1 = Map (**2) x0 | x2 = Sort x1"
        );
        assert!(spec.satisfied_by(&p));
    }

    #[test]
    fn dc_parts_are_canonical() {
        let p: DcProgram = "x7 = INPUT | x3 = INPUT | x0 = ZipWith (+) x3 x7 | x9 = Sort x0"
            .parse()
            .unwrap();
        let parts: Vec<String> = Dc::parts(&p).iter().map(|c| c.to_string()).collect();
        assert_eq!(parts, ["ZipWith (+) x1 x0", "Sort x2"]);
    }

    #[test]
    fn subgoal_text() {
        let vals = vec![DcValue::List(vec![1]), DcValue::Int(-3)];
        let text = render_subgoals::<Dc>(&vals);
        assert_eq!(text, r#"["[1]","-3"]"#);
        assert_eq!(parse_subgoals::<Dc>(&text, 2), Some(vals));
        assert_eq!(parse_subgoals::<Dc>(&text, 3), None);
        assert_eq!(parse_subgoals::<Rf>("not json", 1), None);
    }

    #[test]
    fn dc_statement_form_accepted() {
        let call = Dc::parse_subprogram("x4 = Sort x0").unwrap();
        assert_eq!(call.to_string(), "Sort x0");
        assert_eq!(Dc::parse_subprogram("x4 = Sort").unwrap_err().pos, 5);
    }
}
