use std::fmt;

use thiserror::Error;

/// Failure to read DSL surface syntax.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    /// Byte offset into the text where parsing stopped.
    pub pos: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(pos: usize, message: impl Into<String>) -> Self {
        ParseError {
            pos,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}: {}", self.pos, self.message)
    }
}

/// Runtime failure of a DSL expression or statement.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("no match with the requested index")]
    MissingMatch,
    #[error("selected span is empty or reversed")]
    BadSpan,
    #[error("input contains characters outside the DSL alphabet")]
    InvalidInput,
    #[error("operation is undefined on an empty list")]
    EmptyList,
    #[error("list index out of bounds")]
    IndexOutOfBounds,
    #[error("value outside the allowed integer range")]
    OutOfRange,
    #[error("operand has the wrong type")]
    TypeMismatch,
    #[error("variable {0} is not bound")]
    UnboundVariable(String),
    #[error("expected {expected} inputs, got {got}")]
    Arity { expected: usize, got: usize },
}
