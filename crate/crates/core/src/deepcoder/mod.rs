//! Integer and list manipulation DSL.
//!
//! Programs are straight-line code: input initializations followed by
//! assignments, each applying one operation to previously bound variables.
//! The value of the final assignment is the program output.
//!
//! ```
//! use pbe_core::deepcoder::{DcProgram, DcValue};
//!
//! let program: DcProgram = "x0 = INPUT | x1 = Map (**2) x0 | x2 = Sort x1".parse().unwrap();
//! let out = program.execute(&[DcValue::List(vec![5, 3, -4])]).unwrap();
//! assert_eq!(out, DcValue::List(vec![9, 16, 25]));
//! ```

mod exec;
mod syntax;

pub use exec::{apply, execute, execute_call, execute_statement, typecheck, typecheck_call};
pub(crate) use exec::{binary, predicate, unary};
pub use syntax::{parse_call, parse_program, parse_value};

use std::fmt;

use crate::error::ParseError;

/// Intermediate and output values must lie in `[-VALUE_BOUND, VALUE_BOUND]`.
pub const VALUE_BOUND: i64 = 256;

/// Size of the variable-name pool `x0 .. x9`.
pub const NAME_POOL: u8 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DcValue {
    Int(i64),
    List(Vec<i64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DcType {
    Int,
    List,
}

impl DcValue {
    pub fn ty(&self) -> DcType {
        match self {
            DcValue::Int(_) => DcType::Int,
            DcValue::List(_) => DcType::List,
        }
    }

    pub fn in_range(&self) -> bool {
        let ok = |x: &i64| (-VALUE_BOUND..=VALUE_BOUND).contains(x);
        match self {
            DcValue::Int(n) => ok(n),
            DcValue::List(xs) => xs.iter().all(ok),
        }
    }
}

impl fmt::Display for DcValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DcValue::Int(n) => write!(f, "{n}"),
            DcValue::List(xs) => {
                f.write_str("[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
        }
    }
}

impl std::str::FromStr for DcValue {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_value(s)
    }
}

/// Variable `x{n}` from the fixed name pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(u8);

impl Var {
    pub fn new(n: u8) -> Option<Var> {
        (n < NAME_POOL).then_some(Var(n))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = Var> {
        (0..NAME_POOL).map(Var)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// Every lambda in the DSL, regardless of its arity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lambda {
    PlusOne,
    MinusOne,
    TimesTwo,
    DivTwo,
    Negate,
    Square,
    TimesThree,
    DivThree,
    TimesFour,
    DivFour,
    IsPositive,
    IsNegative,
    IsEven,
    IsOdd,
    Add,
    Subtract,
    Multiply,
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LambdaKind {
    /// int -> int
    Unary,
    /// int -> bool
    Predicate,
    /// (int, int) -> int
    Binary,
}

impl Lambda {
    pub const ALL: [Lambda; 19] = [
        Lambda::PlusOne,
        Lambda::MinusOne,
        Lambda::TimesTwo,
        Lambda::DivTwo,
        Lambda::Negate,
        Lambda::Square,
        Lambda::TimesThree,
        Lambda::DivThree,
        Lambda::TimesFour,
        Lambda::DivFour,
        Lambda::IsPositive,
        Lambda::IsNegative,
        Lambda::IsEven,
        Lambda::IsOdd,
        Lambda::Add,
        Lambda::Subtract,
        Lambda::Multiply,
        Lambda::Min,
        Lambda::Max,
    ];

    pub fn kind(self) -> LambdaKind {
        use Lambda::*;
        match self {
            PlusOne | MinusOne | TimesTwo | DivTwo | Negate | Square | TimesThree | DivThree
            | TimesFour | DivFour => LambdaKind::Unary,
            IsPositive | IsNegative | IsEven | IsOdd => LambdaKind::Predicate,
            Add | Subtract | Multiply | Min | Max => LambdaKind::Binary,
        }
    }

    pub fn of_kind(kind: LambdaKind) -> impl Iterator<Item = Lambda> {
        Self::ALL.into_iter().filter(move |l| l.kind() == kind)
    }

    pub fn token(self) -> &'static str {
        use Lambda::*;
        match self {
            PlusOne => "(+1)",
            MinusOne => "(-1)",
            TimesTwo => "(*2)",
            DivTwo => "(/2)",
            Negate => "(*(-1))",
            Square => "(**2)",
            TimesThree => "(*3)",
            DivThree => "(/3)",
            TimesFour => "(*4)",
            DivFour => "(/4)",
            IsPositive => "(>0)",
            IsNegative => "(<0)",
            IsEven => "(%2==0)",
            IsOdd => "(%2==1)",
            Add => "(+)",
            Subtract => "(-)",
            Multiply => "(*)",
            Min => "(min)",
            Max => "(max)",
        }
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Operand sort demanded by an operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operand {
    Int,
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operation {
    Head,
    Last,
    Access,
    Minimum,
    Maximum,
    Sum,
    Take,
    Drop,
    Reverse,
    Sort,
    Map,
    Filter,
    Count,
    ZipWith,
    Scanl1,
}

impl Operation {
    pub const ALL: [Operation; 15] = [
        Operation::Head,
        Operation::Last,
        Operation::Access,
        Operation::Minimum,
        Operation::Maximum,
        Operation::Sum,
        Operation::Take,
        Operation::Drop,
        Operation::Reverse,
        Operation::Sort,
        Operation::Map,
        Operation::Filter,
        Operation::Count,
        Operation::ZipWith,
        Operation::Scanl1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operation::Head => "Head",
            Operation::Last => "Last",
            Operation::Access => "Access",
            Operation::Minimum => "Minimum",
            Operation::Maximum => "Maximum",
            Operation::Sum => "Sum",
            Operation::Take => "Take",
            Operation::Drop => "Drop",
            Operation::Reverse => "Reverse",
            Operation::Sort => "Sort",
            Operation::Map => "Map",
            Operation::Filter => "Filter",
            Operation::Count => "Count",
            Operation::ZipWith => "ZipWith",
            Operation::Scanl1 => "Scanl1",
        }
    }

    pub fn from_name(name: &str) -> Option<Operation> {
        Self::ALL.into_iter().find(|op| op.name() == name)
    }

    /// Lambda kind taken by higher-order operations.
    pub fn lambda_kind(self) -> Option<LambdaKind> {
        match self {
            Operation::Map => Some(LambdaKind::Unary),
            Operation::Filter | Operation::Count => Some(LambdaKind::Predicate),
            Operation::ZipWith | Operation::Scanl1 => Some(LambdaKind::Binary),
            _ => None,
        }
    }

    pub fn operands(self) -> &'static [Operand] {
        use Operand::*;
        match self {
            Operation::Access | Operation::Take | Operation::Drop => &[Int, List],
            Operation::ZipWith => &[List, List],
            _ => &[List],
        }
    }

    pub fn result_type(self) -> DcType {
        match self {
            Operation::Head
            | Operation::Last
            | Operation::Access
            | Operation::Minimum
            | Operation::Maximum
            | Operation::Sum
            | Operation::Count => DcType::Int,
            _ => DcType::List,
        }
    }

    pub fn is_higher_order(self) -> bool {
        self.lambda_kind().is_some()
    }

    /// Every (operation, lambda) pairing allowed by the grammar, in
    /// operation order then lambda order.
    pub fn with_lambdas() -> Vec<(Operation, Option<Lambda>)> {
        let mut out = Vec::new();
        for op in Operation::ALL {
            match op.lambda_kind() {
                None => out.push((op, None)),
                Some(kind) => out.extend(Lambda::of_kind(kind).map(|l| (op, Some(l)))),
            }
        }
        out
    }
}

/// Right-hand side of an assignment: an operation with its lambda and
/// operand variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DcCall {
    pub op: Operation,
    pub lambda: Option<Lambda>,
    pub args: Vec<Var>,
}

impl DcCall {
    pub fn new(op: Operation, lambda: Option<Lambda>, args: Vec<Var>) -> Self {
        DcCall { op, lambda, args }
    }
}

impl fmt::Display for DcCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.op.name())?;
        if let Some(l) = self.lambda {
            write!(f, " {l}")?;
        }
        for a in &self.args {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for DcCall {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_call(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DcStatement {
    pub target: Var,
    pub call: DcCall,
}

impl fmt::Display for DcStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.target, self.call)
    }
}

/// Variable bindings in creation order; the last binding is the current output.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct DcState {
    pub bindings: Vec<(Var, DcValue)>,
}

impl DcState {
    pub fn new(bindings: Vec<(Var, DcValue)>) -> Self {
        DcState { bindings }
    }

    pub fn lookup(&self, var: Var) -> Option<&DcValue> {
        self.bindings
            .iter()
            .find(|(v, _)| *v == var)
            .map(|(_, x)| x)
    }

    pub fn contains(&self, var: Var) -> bool {
        self.lookup(var).is_some()
    }

    /// Lowest-numbered pool name not yet bound.
    pub fn next_var(&self) -> Option<Var> {
        Var::all().find(|v| !self.contains(*v))
    }

    pub fn last(&self) -> Option<&DcValue> {
        self.bindings.last().map(|(_, x)| x)
    }

    pub fn bind(&self, var: Var, value: DcValue) -> DcState {
        let mut bindings = self.bindings.clone();
        bindings.push((var, value));
        DcState { bindings }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DcProgram {
    pub inputs: Vec<Var>,
    pub statements: Vec<DcStatement>,
}

impl DcProgram {
    /// Number of assignments; initializations do not count.
    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn initial_state(&self, inputs: &[DcValue]) -> DcState {
        DcState::new(
            self.inputs
                .iter()
                .copied()
                .zip(inputs.iter().cloned())
                .collect(),
        )
    }

    pub fn execute(&self, inputs: &[DcValue]) -> Result<DcValue, crate::ExecError> {
        execute(self, inputs)
    }
}

impl fmt::Display for DcProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.inputs {
            if !first {
                f.write_str(" | ")?;
            }
            first = false;
            write!(f, "{v} = INPUT")?;
        }
        for s in &self.statements {
            write!(f, " | {s}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for DcProgram {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_program(s)
    }
}
