use std::borrow::Cow;

use super::pattern::{matches, Span};
use super::{
    in_alphabet, Boundary, Case, ComposeInner, Index, Modification, Pattern, Position,
    RfExpression, RfProgram, Substring,
};
use crate::error::ExecError;

/// Source of pattern matches over one fixed text.
pub(crate) trait MatchSource {
    fn text(&self) -> &str;
    fn spans(&self, pattern: Pattern) -> Cow<'_, [Span]>;
}

pub(crate) struct Direct<'a>(pub &'a str);

impl MatchSource for Direct<'_> {
    fn text(&self) -> &str {
        self.0
    }

    fn spans(&self, pattern: Pattern) -> Cow<'_, [Span]> {
        Cow::Owned(matches(pattern, self.0))
    }
}

/// Runs every expression and concatenates the results.
pub fn execute(program: &RfProgram, input: &str) -> Result<String, ExecError> {
    if !in_alphabet(input) {
        return Err(ExecError::InvalidInput);
    }
    let source = Direct(input);
    let mut out = String::new();
    for e in &program.expressions {
        out.push_str(&eval_expression(e, &source)?);
    }
    Ok(out)
}

pub fn execute_expression(expr: &RfExpression, input: &str) -> Result<String, ExecError> {
    if !in_alphabet(input) {
        return Err(ExecError::InvalidInput);
    }
    eval_expression(expr, &Direct(input))
}

pub(crate) fn eval_expression(
    expr: &RfExpression,
    source: &impl MatchSource,
) -> Result<String, ExecError> {
    match expr {
        RfExpression::ConstStr(c) => Ok(c.to_string()),
        RfExpression::Substring(s) => eval_substring(s, source).map(str::to_owned),
        RfExpression::Modification(m) => eval_modification(m, source.text()),
        RfExpression::Compose(outer, inner) => {
            let mid = match inner {
                ComposeInner::Substring(s) => eval_substring(s, source)?.to_owned(),
                ComposeInner::Modification(m) => eval_modification(m, source.text())?,
            };
            eval_modification(outer, &mid)
        }
    }
}

fn select(spans: &[Span], index: Index) -> Result<Span, ExecError> {
    let i = index.get();
    let n = spans.len() as i64;
    let at = if i > 0 { i - 1 } else { n + i };
    if (0..n).contains(&at) {
        Ok(spans[at as usize])
    } else {
        Err(ExecError::MissingMatch)
    }
}

/// 0-based character index for a 1-based (or end-relative) position, clamped
/// to the text. Position 0 names no character.
fn resolve_position(k: Position, len: usize) -> Result<usize, ExecError> {
    let k = k.get();
    let n = len as i64;
    if k == 0 {
        return Err(ExecError::BadSpan);
    }
    let idx = if k > 0 { k.min(n) - 1 } else { (n + k).max(0) };
    Ok(idx as usize)
}

fn boundary(span: Span, b: Boundary) -> usize {
    match b {
        Boundary::Start => span.0,
        Boundary::End => span.1,
    }
}

pub(crate) fn eval_substring<'t, S: MatchSource>(
    s: &Substring,
    source: &'t S,
) -> Result<&'t str, ExecError> {
    let text = source.text();
    match *s {
        Substring::SubStr(k1, k2) => {
            if text.is_empty() {
                return Err(ExecError::BadSpan);
            }
            let a = resolve_position(k1, text.len())?;
            let b = resolve_position(k2, text.len())?;
            if a > b {
                return Err(ExecError::BadSpan);
            }
            Ok(&text[a..=b])
        }
        Substring::GetSpan {
            left,
            left_index,
            left_boundary,
            right,
            right_index,
            right_boundary,
        } => {
            let l = select(&source.spans(left), left_index)?;
            let r = select(&source.spans(right), right_index)?;
            let a = boundary(l, left_boundary);
            let b = boundary(r, right_boundary);
            if a >= b {
                return Err(ExecError::BadSpan);
            }
            Ok(&text[a..b])
        }
        Substring::GetToken(p, i) => {
            let (a, b) = select(&source.spans(p), i)?;
            Ok(&text[a..b])
        }
        Substring::GetUpto(p) => {
            let spans = source.spans(p);
            let first = spans.first().ok_or(ExecError::MissingMatch)?;
            Ok(&text[..first.1])
        }
        Substring::GetFrom(p) => {
            let spans = source.spans(p);
            let first = spans.first().ok_or(ExecError::MissingMatch)?;
            if first.1 == text.len() {
                return Err(ExecError::BadSpan);
            }
            Ok(&text[first.1..])
        }
    }
}

fn to_case(text: &str, case: Case) -> String {
    match case {
        Case::AllCaps => text.to_ascii_uppercase(),
        Case::Lower => text.to_ascii_lowercase(),
        Case::Proper => {
            let mut out = String::with_capacity(text.len());
            let mut in_word = false;
            for c in text.chars() {
                if c.is_ascii_alphabetic() {
                    out.push(if in_word {
                        c.to_ascii_lowercase()
                    } else {
                        c.to_ascii_uppercase()
                    });
                    in_word = true;
                } else {
                    out.push(c);
                    in_word = false;
                }
            }
            out
        }
    }
}

fn splice(text: &str, span: Span, with: &str) -> String {
    let mut out = String::with_capacity(text.len() + with.len());
    out.push_str(&text[..span.0]);
    out.push_str(with);
    out.push_str(&text[span.1..]);
    out
}

fn replace_all(text: &str, spans: &[Span], with: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for &(a, b) in spans {
        out.push_str(&text[last..a]);
        out.push_str(with);
        last = b;
    }
    out.push_str(&text[last..]);
    out
}

pub(crate) fn eval_modification(m: &Modification, text: &str) -> Result<String, ExecError> {
    Ok(match *m {
        Modification::ToCase(case) => to_case(text, case),
        Modification::Replace(from, to) => text
            .chars()
            .map(|c| if c == from { to } else { c })
            .collect(),
        Modification::Trim => text.trim_matches(' ').to_owned(),
        Modification::GetFirst(p, i) => {
            let spans = matches(p, text);
            let n = spans.len() as i64;
            let take = if i.get() > 0 { i.get() } else { n + i.get() };
            if take < 1 || take > n {
                return Err(ExecError::MissingMatch);
            }
            spans[..take as usize]
                .iter()
                .map(|&(a, b)| &text[a..b])
                .collect()
        }
        Modification::GetAll(p) => {
            let spans = matches(p, text);
            spans
                .iter()
                .map(|&(a, b)| &text[a..b])
                .collect::<Vec<_>>()
                .join(" ")
        }
        Modification::Substitute(p, i, c) => {
            let span = select(&matches(p, text), i)?;
            splice(text, span, c.encode_utf8(&mut [0; 4]))
        }
        Modification::SubstituteAll(p, c) => {
            replace_all(text, &matches(p, text), c.encode_utf8(&mut [0; 4]))
        }
        Modification::Remove(p, i) => {
            let span = select(&matches(p, text), i)?;
            splice(text, span, "")
        }
        Modification::RemoveAll(p) => replace_all(text, &matches(p, text), ""),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expr(s: &str) -> RfExpression {
        s.parse().unwrap()
    }

    fn run(s: &str, input: &str) -> Result<String, ExecError> {
        execute_expression(&expr(s), input)
    }

    #[test]
    fn get_from_space() {
        assert_eq!(run("GetFrom(' ')", "TURING, Alan").unwrap(), "Alan");
    }

    #[test]
    fn const_ignores_input() {
        assert_eq!(run("Const('.')", "anything 123").unwrap(), ".");
        assert_eq!(run("Const('.')", "").unwrap(), ".");
    }

    #[test]
    fn missing_token_is_an_error() {
        assert_eq!(
            run("GetToken(WORD, 3)", "ab cd"),
            Err(ExecError::MissingMatch)
        );
        assert_eq!(run("GetToken(WORD, -2)", "ab cd").unwrap(), "ab");
    }

    #[test]
    fn proper_case() {
        assert_eq!(run("ToCase(PROPER)", "dijkstra").unwrap(), "Dijkstra");
        assert_eq!(
            run("ToCase(PROPER)", "mAry ann o'NEIL").unwrap(),
            "Mary Ann O'Neil"
        );
        assert_eq!(run("ToCase(ALL_CAPS)", "ab1c").unwrap(), "AB1C");
        assert_eq!(run("ToCase(LOWER)", "AB1c").unwrap(), "ab1c");
    }

    #[test]
    fn remove_first_digit() {
        assert_eq!(run("Remove(DIGIT, 1)", "a1b2").unwrap(), "ab2");
        assert_eq!(
            run("Remove(DIGIT, 3)", "a1b2"),
            Err(ExecError::MissingMatch)
        );
        assert_eq!(run("RemoveAll(DIGIT)", "a1b2").unwrap(), "ab");
        assert_eq!(run("RemoveAll(DIGIT)", "ab").unwrap(), "ab");
    }

    #[test]
    fn substitutions() {
        assert_eq!(
            run("Substitute(NUMBER, -1, '#')", "a12b345").unwrap(),
            "a12b#"
        );
        assert_eq!(
            run("SubstituteAll(WORD, 'x')", "ab 12 cd").unwrap(),
            "x 12 x"
        );
        assert_eq!(run("SubstituteAll(WORD, 'x')", "12").unwrap(), "12");
        assert_eq!(run("Replace(' ', ',')", "a b c").unwrap(), "a,b,c");
    }

    #[test]
    fn substr_positions() {
        assert_eq!(run("SubStr(1, 3)", "abcdef").unwrap(), "abc");
        assert_eq!(run("SubStr(-2, -1)", "abcdef").unwrap(), "ef");
        assert_eq!(run("SubStr(2, 100)", "abcdef").unwrap(), "bcdef");
        assert_eq!(run("SubStr(-100, 1)", "abcdef").unwrap(), "a");
        assert_eq!(run("SubStr(4, 2)", "abcdef"), Err(ExecError::BadSpan));
        assert_eq!(run("SubStr(0, 2)", "abcdef"), Err(ExecError::BadSpan));
        assert_eq!(run("SubStr(1, 1)", ""), Err(ExecError::BadSpan));
    }

    #[test]
    fn get_span_boundaries() {
        let input = "(555) 123 4567";
        assert_eq!(
            run("GetSpan('(', 1, END, ')', 1, START)", input).unwrap(),
            "555"
        );
        assert_eq!(
            run("GetSpan(NUMBER, 1, START, NUMBER, -1, END)", input).unwrap(),
            "555) 123 4567"
        );
        assert_eq!(
            run("GetSpan(NUMBER, 2, START, NUMBER, 1, END)", input),
            Err(ExecError::BadSpan)
        );
    }

    #[test]
    fn upto_from() {
        assert_eq!(run("GetUpto(',')", "ab,cd,e").unwrap(), "ab,");
        assert_eq!(run("GetFrom(',')", "ab,cd,e").unwrap(), "cd,e");
        assert_eq!(run("GetFrom(',')", "ab,"), Err(ExecError::BadSpan));
        assert_eq!(run("GetUpto(NUMBER)", "abc"), Err(ExecError::MissingMatch));
    }

    #[test]
    fn first_and_all() {
        assert_eq!(run("GetFirst(NUMBER, 2)", "1a22b333").unwrap(), "122");
        assert_eq!(run("GetFirst(NUMBER, -1)", "1a22b333").unwrap(), "122");
        assert_eq!(
            run("GetFirst(NUMBER, 4)", "1a22b333"),
            Err(ExecError::MissingMatch)
        );
        assert_eq!(run("GetAll(NUMBER)", "1a22b333").unwrap(), "1 22 333");
        assert_eq!(run("GetAll(NUMBER)", "abc").unwrap(), "");
        assert_eq!(run("Trim()", "  a b ").unwrap(), "a b");
    }

    #[test]
    fn compose_applies_outer_to_inner() {
        assert_eq!(
            run("Compose(ToCase(PROPER), GetToken(WORD, 1))", "TURING, Alan").unwrap(),
            "Turing"
        );
        assert_eq!(
            run("Compose(ToCase(ALL_CAPS), Trim())", " ab ").unwrap(),
            "AB"
        );
    }

    #[test]
    fn rejects_foreign_characters() {
        assert_eq!(run("Const('a')", "tab\there"), Err(ExecError::InvalidInput));
    }
}
