use super::{DcCall, DcProgram, DcStatement, DcValue, Lambda, Operation, Var};
use crate::error::ParseError;

/// Whitespace-separated tokens with their byte offsets, shifted by `base`.
fn tokens(text: &str, base: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((base + s, &text[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((base + s, &text[s..]));
    }
    out
}

fn parse_var(pos: usize, tok: &str) -> Result<Var, ParseError> {
    tok.strip_prefix('x')
        .and_then(|n| n.parse::<u8>().ok())
        .filter(|n| tok.len() == 1 + n.to_string().len())
        .and_then(Var::new)
        .ok_or_else(|| ParseError::new(pos, format!("bad variable name {tok:?}")))
}

fn call_from_tokens(toks: &[(usize, &str)], end: usize) -> Result<DcCall, ParseError> {
    let Some(&(pos, name)) = toks.first() else {
        return Err(ParseError::new(end, "expected an operation"));
    };
    let op = Operation::from_name(name)
        .ok_or_else(|| ParseError::new(pos, format!("unknown operation {name:?}")))?;
    let mut rest = &toks[1..];
    let lambda = match rest.first() {
        Some(&(lpos, tok)) if tok.starts_with('(') => {
            rest = &rest[1..];
            let l = Lambda::ALL
                .into_iter()
                .find(|l| l.token() == tok)
                .ok_or_else(|| ParseError::new(lpos, format!("unknown lambda {tok}")))?;
            Some(l)
        }
        _ => None,
    };
    match (op.is_higher_order(), lambda) {
        (true, None) => {
            return Err(ParseError::new(pos, format!("{name} needs a lambda")));
        }
        (false, Some(_)) => {
            return Err(ParseError::new(pos, format!("{name} takes no lambda")));
        }
        _ => {}
    }
    let args = rest
        .iter()
        .map(|&(p, t)| parse_var(p, t))
        .collect::<Result<Vec<_>, _>>()?;
    if args.len() != op.operands().len() {
        return Err(ParseError::new(
            pos,
            format!(
                "{name} takes {} operands, got {}",
                op.operands().len(),
                args.len()
            ),
        ));
    }
    Ok(DcCall { op, lambda, args })
}

/// Parses a right-hand side such as `Map (**2) x0`.
pub fn parse_call(text: &str) -> Result<DcCall, ParseError> {
    call_from_tokens(&tokens(text, 0), text.len())
}

/// Parses `[1, -2, 3]` or `-4`.
pub fn parse_value(text: &str) -> Result<DcValue, ParseError> {
    let trimmed = text.trim();
    let offset = text.len() - text.trim_start().len();
    if let Some(inner) = trimmed.strip_prefix('[') {
        let inner = inner
            .strip_suffix(']')
            .ok_or_else(|| ParseError::new(text.len(), "expected ']'"))?;
        if inner.trim().is_empty() {
            return Ok(DcValue::List(Vec::new()));
        }
        let mut xs = Vec::new();
        let mut at = offset + 1;
        for part in inner.split(',') {
            xs.push(
                part.trim()
                    .parse::<i64>()
                    .map_err(|_| ParseError::new(at, format!("bad integer {:?}", part.trim())))?,
            );
            at += part.len() + 1;
        }
        Ok(DcValue::List(xs))
    } else {
        trimmed
            .parse::<i64>()
            .map(DcValue::Int)
            .map_err(|_| ParseError::new(offset, format!("bad value {trimmed:?}")))
    }
}

/// Parses `x0 = INPUT | ... | xk = <call>`. Lines may be separated by `|` or
/// newlines; all `INPUT` initializations must come first.
pub fn parse_program(text: &str) -> Result<DcProgram, ParseError> {
    let mut inputs = Vec::new();
    let mut statements: Vec<DcStatement> = Vec::new();
    let mut bound: Vec<Var> = Vec::new();
    let mut base = 0;
    for line in text.split(['|', '\n']) {
        let toks = tokens(line, base);
        let line_end = base + line.len();
        base = line_end + 1;
        if toks.is_empty() {
            if text.trim().is_empty() {
                break;
            }
            return Err(ParseError::new(line_end, "empty line"));
        }
        let target = parse_var(toks[0].0, toks[0].1)?;
        match toks.get(1) {
            Some((_, "=")) => {}
            Some(&(p, _)) => return Err(ParseError::new(p, "expected '='")),
            None => return Err(ParseError::new(line_end, "expected '='")),
        }
        if bound.contains(&target) {
            return Err(ParseError::new(
                toks[0].0,
                format!("{target} assigned twice"),
            ));
        }
        let rhs = &toks[2..];
        if rhs.len() == 1 && rhs[0].1 == "INPUT" {
            if !statements.is_empty() {
                return Err(ParseError::new(rhs[0].0, "INPUT after an assignment"));
            }
            inputs.push(target);
        } else {
            if inputs.is_empty() {
                return Err(ParseError::new(
                    toks[0].0,
                    "program must start with INPUT initializations",
                ));
            }
            let call = call_from_tokens(rhs, line_end)?;
            for (arg, &(p, _)) in call.args.iter().zip(&rhs[rhs.len() - call.args.len()..]) {
                if !bound.contains(arg) {
                    return Err(ParseError::new(p, format!("{arg} is not defined")));
                }
            }
            statements.push(DcStatement { target, call });
        }
        bound.push(target);
    }
    if inputs.is_empty() {
        return Err(ParseError::new(0, "program has no inputs"));
    }
    if statements.is_empty() {
        return Err(ParseError::new(text.len(), "program has no assignments"));
    }
    Ok(DcProgram { inputs, statements })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_fixed_point() {
        let text = "x0 = INPUT | x1 = Sort x0";
        assert_eq!(parse_program(text).unwrap().to_string(), text);
        let text = "x3 = INPUT | x7 = INPUT | x0 = ZipWith (min) x3 x7 | x1 = Map (*(-1)) x0";
        assert_eq!(parse_program(text).unwrap().to_string(), text);
    }

    #[test]
    fn initializations_required_first() {
        assert!(parse_program("x1 = Sort x0").is_err());
        assert!(parse_program("x0 = INPUT | x1 = Sort x0 | x2 = INPUT").is_err());
    }

    #[test]
    fn malformed() {
        for bad in [
            "",
            "x0 = INPUT",
            "x0 = INPUT | x1 = Sort x2",
            "x0 = INPUT | x0 = Sort x0",
            "x0 = INPUT | x1 = Map x0",
            "x0 = INPUT | x1 = Sort (+1) x0",
            "x0 = INPUT | x1 = Sort x0 x0",
            "x0 = INPUT | x1 = Frob x0",
            "x0 = INPUT | x1 Sort x0",
            "x0 = INPUT | x10 = Sort x0",
            "y0 = INPUT | x1 = Sort y0",
            "x0 = INPUT || x1 = Sort x0",
        ] {
            assert!(parse_program(bad).is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn error_position_points_at_token() {
        let err = parse_program("x0 = INPUT | x1 = Sort x4").unwrap_err();
        assert_eq!(err.pos, 23);
    }

    #[test]
    fn values() {
        assert_eq!(
            parse_value("[5, 3, -4]").unwrap(),
            DcValue::List(vec![5, 3, -4])
        );
        assert_eq!(parse_value("[]").unwrap(), DcValue::List(vec![]));
        assert_eq!(parse_value("-7").unwrap(), DcValue::Int(-7));
        assert!(parse_value("[1, x]").is_err());
        assert!(parse_value("[1, 2").is_err());
        assert_eq!(DcValue::List(vec![9, 16, 25]).to_string(), "[9, 16, 25]");
    }

    #[test]
    fn lambda_tokens_round_trip() {
        for l in Lambda::ALL {
            let op = match l.kind() {
                crate::deepcoder::LambdaKind::Unary => "Map",
                crate::deepcoder::LambdaKind::Predicate => "Filter",
                crate::deepcoder::LambdaKind::Binary => "Scanl1",
            };
            let text = format!("{op} {l} x0");
            assert_eq!(parse_call(&text).unwrap().to_string(), text);
        }
    }
}
