//! String-transformation DSL.
//!
//! A program is a concatenation of expressions. Every expression reads the
//! original input string, so expressions are independent of each other and
//! the program output is the in-order concatenation of their results.
//!
//! ```
//! use pbe_core::robustfill::RfProgram;
//!
//! let program: RfProgram = "GetFrom(' ') | Const('.') | Compose(ToCase(PROPER), GetToken(WORD, 1))"
//!     .parse()
//!     .unwrap();
//! assert_eq!(program.execute("TURING, Alan").unwrap(), "Alan.Turing");
//! ```

mod exec;
mod pattern;
mod syntax;

pub use exec::{execute, execute_expression};
pub use pattern::{matches, Span};
pub use syntax::{parse_expression, parse_program};

use std::fmt;

use crate::error::{ExecError, ParseError};

/// Delimiter characters. Space is a delimiter too.
pub const DELIMITERS: &[u8] = b"&,.?!@()[]%{}/:;$# \"'";

/// Longest input string produced by the task generator.
pub const MAX_INPUT_LEN: usize = 20;

pub fn is_delimiter(c: char) -> bool {
    c.is_ascii() && DELIMITERS.contains(&(c as u8))
}

/// Characters usable in `Const`, `Substitute` and `SubstituteAll`.
pub fn is_character(c: char) -> bool {
    c.is_ascii_alphanumeric() || is_delimiter(c)
}

/// Whether every character of `text` belongs to the DSL alphabet.
pub fn in_alphabet(text: &str) -> bool {
    text.chars().all(is_character)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegexClass {
    Number,
    Word,
    Alphanum,
    AllCaps,
    PropCase,
    Lower,
    Digit,
    Char,
}

impl RegexClass {
    pub const ALL: [RegexClass; 8] = [
        RegexClass::Number,
        RegexClass::Word,
        RegexClass::Alphanum,
        RegexClass::AllCaps,
        RegexClass::PropCase,
        RegexClass::Lower,
        RegexClass::Digit,
        RegexClass::Char,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegexClass::Number => "NUMBER",
            RegexClass::Word => "WORD",
            RegexClass::Alphanum => "ALPHANUM",
            RegexClass::AllCaps => "ALL_CAPS",
            RegexClass::PropCase => "PROP_CASE",
            RegexClass::Lower => "LOWER",
            RegexClass::Digit => "DIGIT",
            RegexClass::Char => "CHAR",
        }
    }
}

/// Token pattern: one of the named classes or a literal delimiter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Class(RegexClass),
    Delimiter(char),
}

impl Pattern {
    /// The 8 classes followed by every delimiter.
    pub fn all() -> impl Iterator<Item = Pattern> + Clone {
        RegexClass::ALL
            .into_iter()
            .map(Pattern::Class)
            .chain(DELIMITERS.iter().map(|&b| Pattern::Delimiter(b as char)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    AllCaps,
    Proper,
    Lower,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::AllCaps, Case::Proper, Case::Lower];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Boundary {
    Start,
    End,
}

impl Boundary {
    pub const ALL: [Boundary; 2] = [Boundary::Start, Boundary::End];
}

/// Match index in `[-5, -1] ∪ [1, 5]`; negative values count from the last match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Index(i8);

impl Index {
    pub const MAX: i8 = 5;

    pub fn new(value: i64) -> Option<Index> {
        (value != 0 && value.abs() <= Self::MAX as i64).then_some(Index(value as i8))
    }

    pub fn get(self) -> i64 {
        self.0 as i64
    }

    pub fn all() -> impl Iterator<Item = Index> + Clone {
        (1..=Self::MAX).chain(-Self::MAX..=-1).map(Index)
    }
}

/// Character position in `[-100, 100]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(i8);

impl Position {
    pub const MAX: i8 = 100;

    pub fn new(value: i64) -> Option<Position> {
        (value.abs() <= Self::MAX as i64).then_some(Position(value as i8))
    }

    pub fn get(self) -> i64 {
        self.0 as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Substring {
    SubStr(Position, Position),
    GetSpan {
        left: Pattern,
        left_index: Index,
        left_boundary: Boundary,
        right: Pattern,
        right_index: Index,
        right_boundary: Boundary,
    },
    GetToken(Pattern, Index),
    GetUpto(Pattern),
    GetFrom(Pattern),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modification {
    ToCase(Case),
    Replace(char, char),
    Trim,
    GetFirst(Pattern, Index),
    GetAll(Pattern),
    Substitute(Pattern, Index, char),
    SubstituteAll(Pattern, char),
    Remove(Pattern, Index),
    RemoveAll(Pattern),
}

/// Argument of `Compose`: anything except another `Compose` or a constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComposeInner {
    Modification(Modification),
    Substring(Substring),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RfExpression {
    Substring(Substring),
    Modification(Modification),
    Compose(Modification, ComposeInner),
    ConstStr(char),
}

/// Coarse expression kinds, in the order the enumerative backend explores them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    ConstStr,
    Substring,
    Modification,
    Compose,
}

impl RfExpression {
    pub fn category(&self) -> Category {
        match self {
            RfExpression::ConstStr(_) => Category::ConstStr,
            RfExpression::Substring(_) => Category::Substring,
            RfExpression::Modification(_) => Category::Modification,
            RfExpression::Compose(..) => Category::Compose,
        }
    }

    /// Whether all arguments are within the grammar's ranges.
    pub fn is_well_formed(&self) -> bool {
        fn pattern_ok(p: &Pattern) -> bool {
            match p {
                Pattern::Class(_) => true,
                Pattern::Delimiter(c) => is_delimiter(*c),
            }
        }
        fn substring_ok(s: &Substring) -> bool {
            match s {
                Substring::SubStr(..) => true,
                Substring::GetSpan { left, right, .. } => pattern_ok(left) && pattern_ok(right),
                Substring::GetToken(p, _) | Substring::GetUpto(p) | Substring::GetFrom(p) => {
                    pattern_ok(p)
                }
            }
        }
        fn modification_ok(m: &Modification) -> bool {
            match m {
                Modification::ToCase(_) | Modification::Trim => true,
                Modification::Replace(a, b) => is_delimiter(*a) && is_delimiter(*b),
                Modification::GetFirst(p, _)
                | Modification::GetAll(p)
                | Modification::Remove(p, _)
                | Modification::RemoveAll(p) => pattern_ok(p),
                Modification::Substitute(p, _, c) | Modification::SubstituteAll(p, c) => {
                    pattern_ok(p) && is_character(*c)
                }
            }
        }
        match self {
            RfExpression::ConstStr(c) => is_character(*c),
            RfExpression::Substring(s) => substring_ok(s),
            RfExpression::Modification(m) => modification_ok(m),
            RfExpression::Compose(m, ComposeInner::Modification(inner)) => {
                modification_ok(m) && modification_ok(inner)
            }
            RfExpression::Compose(m, ComposeInner::Substring(inner)) => {
                modification_ok(m) && substring_ok(inner)
            }
        }
    }

    pub fn execute(&self, input: &str) -> Result<String, ExecError> {
        execute_expression(self, input)
    }
}

/// A concatenation of one or more expressions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RfProgram {
    pub expressions: Vec<RfExpression>,
}

impl RfProgram {
    pub fn new(expressions: Vec<RfExpression>) -> Self {
        RfProgram { expressions }
    }

    pub fn len(&self) -> usize {
        self.expressions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expressions.is_empty()
    }

    pub fn execute(&self, input: &str) -> Result<String, ExecError> {
        execute(self, input)
    }
}

impl std::str::FromStr for RfProgram {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_program(s)
    }
}

impl std::str::FromStr for RfExpression {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expression(s)
    }
}

impl fmt::Display for RfProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.expressions.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}
