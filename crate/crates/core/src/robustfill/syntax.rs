use std::fmt;

use super::{
    is_character, is_delimiter, Boundary, Case, ComposeInner, Index, Modification, Pattern,
    Position, RegexClass, RfExpression, RfProgram, Substring,
};
use crate::error::ParseError;

fn write_char(f: &mut fmt::Formatter<'_>, c: char) -> fmt::Result {
    match c {
        '\'' => f.write_str("'\\''"),
        c => write!(f, "'{c}'"),
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Class(c) => f.write_str(c.name()),
            Pattern::Delimiter(c) => write_char(f, *c),
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::AllCaps => "ALL_CAPS",
            Case::Proper => "PROPER",
            Case::Lower => "LOWER",
        })
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Start => "START",
            Boundary::End => "END",
        })
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.get())
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.get())
    }
}

impl fmt::Display for Substring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Substring::SubStr(a, b) => write!(f, "SubStr({a}, {b})"),
            Substring::GetSpan {
                left,
                left_index,
                left_boundary,
                right,
                right_index,
                right_boundary,
            } => write!(
                f,
                "GetSpan({left}, {left_index}, {left_boundary}, {right}, {right_index}, {right_boundary})"
            ),
            Substring::GetToken(p, i) => write!(f, "GetToken({p}, {i})"),
            Substring::GetUpto(p) => write!(f, "GetUpto({p})"),
            Substring::GetFrom(p) => write!(f, "GetFrom({p})"),
        }
    }
}

impl fmt::Display for Modification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modification::ToCase(c) => write!(f, "ToCase({c})"),
            Modification::Replace(a, b) => {
                f.write_str("Replace(")?;
                write_char(f, *a)?;
                f.write_str(", ")?;
                write_char(f, *b)?;
                f.write_str(")")
            }
            Modification::Trim => f.write_str("Trim()"),
            Modification::GetFirst(p, i) => write!(f, "GetFirst({p}, {i})"),
            Modification::GetAll(p) => write!(f, "GetAll({p})"),
            Modification::Substitute(p, i, c) => {
                write!(f, "Substitute({p}, {i}, ")?;
                write_char(f, *c)?;
                f.write_str(")")
            }
            Modification::SubstituteAll(p, c) => {
                write!(f, "SubstituteAll({p}, ")?;
                write_char(f, *c)?;
                f.write_str(")")
            }
            Modification::Remove(p, i) => write!(f, "Remove({p}, {i})"),
            Modification::RemoveAll(p) => write!(f, "RemoveAll({p})"),
        }
    }
}

impl fmt::Display for ComposeInner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComposeInner::Modification(m) => m.fmt(f),
            ComposeInner::Substring(s) => s.fmt(f),
        }
    }
}

impl fmt::Display for RfExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RfExpression::Substring(s) => s.fmt(f),
            RfExpression::Modification(m) => m.fmt(f),
            RfExpression::Compose(outer, inner) => write!(f, "Compose({outer}, {inner})"),
            RfExpression::ConstStr(c) => {
                f.write_str("Const(")?;
                write_char(f, *c)?;
                f.write_str(")")
            }
        }
    }
}

/// One parsed argument.
#[derive(Debug)]
enum Arg {
    Int(i64),
    Name(String),
    Char(char),
    Call(Call),
}

#[derive(Debug)]
struct Call {
    name: String,
    args: Vec<(usize, Arg)>,
    pos: usize,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::new(self.pos, message))
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while self.peek() == Some(' ') {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a name");
        }
        Ok(self.src[start..self.pos].to_owned())
    }

    fn call(&mut self) -> Result<Call, ParseError> {
        self.skip_ws();
        let pos = self.pos;
        let name = self.ident()?;
        self.expect('(')?;
        let mut args = Vec::new();
        self.skip_ws();
        if self.peek() == Some(')') {
            self.pos += 1;
            return Ok(Call { name, args, pos });
        }
        loop {
            self.skip_ws();
            let at = self.pos;
            args.push((at, self.arg()?));
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(')') => {
                    self.pos += 1;
                    return Ok(Call { name, args, pos });
                }
                _ => return self.err("expected ',' or ')'"),
            }
        }
    }

    fn arg(&mut self) -> Result<Arg, ParseError> {
        match self.peek() {
            Some('\'') => {
                self.pos += 1;
                let c = match self.peek() {
                    Some('\\') => {
                        self.pos += 1;
                        self.peek()
                    }
                    other => other,
                };
                let Some(c) = c else {
                    return self.err("unterminated character literal");
                };
                self.pos += c.len_utf8();
                if self.peek() != Some('\'') {
                    return self.err("expected closing quote");
                }
                self.pos += 1;
                Ok(Arg::Char(c))
            }
            Some(c) if c == '-' || c.is_ascii_digit() => {
                let start = self.pos;
                self.pos += 1;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
                self.src[start..self.pos]
                    .parse()
                    .map(Arg::Int)
                    .or_else(|_| self.err("bad integer"))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let save = self.pos;
                let name = self.ident()?;
                self.skip_ws();
                if self.peek() == Some('(') {
                    self.pos = save;
                    Ok(Arg::Call(self.call()?))
                } else {
                    Ok(Arg::Name(name))
                }
            }
            _ => self.err("expected an argument"),
        }
    }
}

fn arg_err<T>(pos: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::new(pos, message))
}

fn as_pattern((pos, arg): &(usize, Arg)) -> Result<Pattern, ParseError> {
    match arg {
        Arg::Char(c) if is_delimiter(*c) => Ok(Pattern::Delimiter(*c)),
        Arg::Char(c) => arg_err(*pos, format!("'{c}' is not a delimiter")),
        Arg::Name(n) => {
            let class = match n.as_str() {
                "PROPER_CASE" => Some(RegexClass::PropCase),
                _ => RegexClass::ALL.into_iter().find(|c| c.name() == n),
            };
            class
                .map(Pattern::Class)
                .ok_or_else(|| ParseError::new(*pos, format!("unknown regex class {n}")))
        }
        _ => arg_err(*pos, "expected a regex"),
    }
}

fn as_index((pos, arg): &(usize, Arg)) -> Result<Index, ParseError> {
    match arg {
        Arg::Int(i) => Index::new(*i)
            .ok_or_else(|| ParseError::new(*pos, format!("index {i} outside [-5, -1] ∪ [1, 5]"))),
        _ => arg_err(*pos, "expected an index"),
    }
}

fn as_position((pos, arg): &(usize, Arg)) -> Result<Position, ParseError> {
    match arg {
        Arg::Int(k) => Position::new(*k)
            .ok_or_else(|| ParseError::new(*pos, format!("position {k} outside [-100, 100]"))),
        _ => arg_err(*pos, "expected a position"),
    }
}

fn as_boundary((pos, arg): &(usize, Arg)) -> Result<Boundary, ParseError> {
    match arg {
        Arg::Name(n) if n == "START" => Ok(Boundary::Start),
        Arg::Name(n) if n == "END" => Ok(Boundary::End),
        _ => arg_err(*pos, "expected START or END"),
    }
}

fn as_case((pos, arg): &(usize, Arg)) -> Result<Case, ParseError> {
    match arg {
        Arg::Name(n) => match n.as_str() {
            "ALL_CAPS" => Ok(Case::AllCaps),
            "PROPER" | "PROPER_CASE" | "PROP_CASE" => Ok(Case::Proper),
            "LOWER" => Ok(Case::Lower),
            _ => arg_err(*pos, format!("unknown case {n}")),
        },
        _ => arg_err(*pos, "expected a case"),
    }
}

fn as_character((pos, arg): &(usize, Arg)) -> Result<char, ParseError> {
    match arg {
        Arg::Char(c) if is_character(*c) => Ok(*c),
        _ => arg_err(*pos, "expected a character"),
    }
}

fn as_delimiter((pos, arg): &(usize, Arg)) -> Result<char, ParseError> {
    match arg {
        Arg::Char(c) if is_delimiter(*c) => Ok(*c),
        _ => arg_err(*pos, "expected a delimiter"),
    }
}

enum Node {
    Substring(Substring),
    Modification(Modification),
    Compose(Modification, ComposeInner),
    Const(char),
}

fn build(call: &Call) -> Result<Node, ParseError> {
    let a = &call.args;
    let arity = |n: usize| -> Result<(), ParseError> {
        if a.len() == n {
            Ok(())
        } else {
            arg_err(
                call.pos,
                format!("{} takes {n} arguments, got {}", call.name, a.len()),
            )
        }
    };
    let node = match call.name.as_str() {
        "SubStr" => {
            arity(2)?;
            Node::Substring(Substring::SubStr(as_position(&a[0])?, as_position(&a[1])?))
        }
        "GetSpan" => {
            arity(6)?;
            Node::Substring(Substring::GetSpan {
                left: as_pattern(&a[0])?,
                left_index: as_index(&a[1])?,
                left_boundary: as_boundary(&a[2])?,
                right: as_pattern(&a[3])?,
                right_index: as_index(&a[4])?,
                right_boundary: as_boundary(&a[5])?,
            })
        }
        "GetToken" => {
            arity(2)?;
            Node::Substring(Substring::GetToken(as_pattern(&a[0])?, as_index(&a[1])?))
        }
        "GetUpto" => {
            arity(1)?;
            Node::Substring(Substring::GetUpto(as_pattern(&a[0])?))
        }
        "GetFrom" => {
            arity(1)?;
            Node::Substring(Substring::GetFrom(as_pattern(&a[0])?))
        }
        "ToCase" => {
            arity(1)?;
            Node::Modification(Modification::ToCase(as_case(&a[0])?))
        }
        "Replace" => {
            arity(2)?;
            Node::Modification(Modification::Replace(
                as_delimiter(&a[0])?,
                as_delimiter(&a[1])?,
            ))
        }
        "Trim" => {
            arity(0)?;
            Node::Modification(Modification::Trim)
        }
        "GetFirst" => {
            arity(2)?;
            Node::Modification(Modification::GetFirst(as_pattern(&a[0])?, as_index(&a[1])?))
        }
        "GetAll" => {
            arity(1)?;
            Node::Modification(Modification::GetAll(as_pattern(&a[0])?))
        }
        "Substitute" => {
            arity(3)?;
            Node::Modification(Modification::Substitute(
                as_pattern(&a[0])?,
                as_index(&a[1])?,
                as_character(&a[2])?,
            ))
        }
        "SubstituteAll" => {
            arity(2)?;
            Node::Modification(Modification::SubstituteAll(
                as_pattern(&a[0])?,
                as_character(&a[1])?,
            ))
        }
        "Remove" => {
            arity(2)?;
            Node::Modification(Modification::Remove(as_pattern(&a[0])?, as_index(&a[1])?))
        }
        "RemoveAll" => {
            arity(1)?;
            Node::Modification(Modification::RemoveAll(as_pattern(&a[0])?))
        }
        "Const" | "ConstStr" => {
            arity(1)?;
            Node::Const(as_character(&a[0])?)
        }
        "Compose" => {
            arity(2)?;
            let sub = |(pos, arg): &(usize, Arg)| -> Result<Node, ParseError> {
                match arg {
                    Arg::Call(c) => build(c),
                    _ => arg_err(*pos, "Compose takes operations as arguments"),
                }
            };
            let outer = match sub(&a[0])? {
                Node::Modification(m) => m,
                _ => return arg_err(a[0].0, "Compose needs a modification as its first argument"),
            };
            let inner = match sub(&a[1])? {
                Node::Modification(m) => ComposeInner::Modification(m),
                Node::Substring(s) => ComposeInner::Substring(s),
                _ => {
                    return arg_err(
                        a[1].0,
                        "Compose needs a substring or modification as its second argument",
                    )
                }
            };
            Node::Compose(outer, inner)
        }
        other => return arg_err(call.pos, format!("unknown operation {other}")),
    };
    Ok(node)
}

fn expression_at(parser: &mut Parser<'_>) -> Result<RfExpression, ParseError> {
    let call = parser.call()?;
    Ok(match build(&call)? {
        Node::Substring(s) => RfExpression::Substring(s),
        Node::Modification(m) => RfExpression::Modification(m),
        Node::Compose(m, i) => RfExpression::Compose(m, i),
        Node::Const(c) => RfExpression::ConstStr(c),
    })
}

/// Parses a single expression such as `GetToken(WORD, 1)`.
pub fn parse_expression(text: &str) -> Result<RfExpression, ParseError> {
    let mut parser = Parser { src: text, pos: 0 };
    let e = expression_at(&mut parser)?;
    parser.skip_ws();
    if parser.pos != text.len() {
        return parser.err("trailing input");
    }
    Ok(e)
}

/// Parses expressions separated by `|`.
pub fn parse_program(text: &str) -> Result<RfProgram, ParseError> {
    let mut parser = Parser { src: text, pos: 0 };
    let mut expressions = vec![expression_at(&mut parser)?];
    loop {
        parser.skip_ws();
        match parser.peek() {
            None => break,
            Some('|') => {
                parser.pos += 1;
                expressions.push(expression_at(&mut parser)?);
            }
            Some(_) => return parser.err("expected '|' between expressions"),
        }
    }
    Ok(RfProgram { expressions })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn const_literal() {
        assert_eq!(
            parse_expression("Const('.')").unwrap(),
            RfExpression::ConstStr('.')
        );
    }

    #[test]
    fn token_fixed_point() {
        let e = parse_expression("GetToken(WORD, 1)").unwrap();
        assert_eq!(e.to_string(), "GetToken(WORD, 1)");
    }

    #[test]
    fn zero_index_rejected() {
        let err = parse_expression("GetToken(WORD, 0)").unwrap_err();
        assert_eq!(err.pos, 15);
    }

    #[test]
    fn program_round_trip() {
        let text = "GetFrom(' ') | Const('.') | Compose(ToCase(PROPER), GetToken(WORD, 1))";
        let p = parse_program(text).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.to_string(), text);
    }

    #[test]
    fn quote_escapes() {
        let e = parse_expression("Replace('\\'', '\"')").unwrap();
        assert_eq!(
            e,
            RfExpression::Modification(Modification::Replace('\'', '"'))
        );
        assert_eq!(parse_expression(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn malformed_inputs() {
        for bad in [
            "",
            "GetToken(WORD)",
            "GetToken(WORD, 1",
            "Foo(1)",
            "Const('ab')",
            "Const('-')",
            "SubStr(1, 101)",
            "Compose(GetToken(WORD, 1), Trim())",
            "Compose(Trim(), Compose(Trim(), Trim()))",
            "GetFrom(' ') Const('.')",
            "GetFrom('a')",
        ] {
            assert!(parse_program(bad).is_err(), "{bad:?} should not parse");
        }
    }
}
