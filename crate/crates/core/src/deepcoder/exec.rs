use super::{
    DcCall, DcProgram, DcState, DcStatement, DcType, DcValue, Lambda, Operand, Operation,
    VALUE_BOUND,
};
use crate::error::ExecError;

fn bounded(x: i64) -> Result<i64, ExecError> {
    if (-VALUE_BOUND..=VALUE_BOUND).contains(&x) {
        Ok(x)
    } else {
        Err(ExecError::OutOfRange)
    }
}

pub(crate) fn unary(l: Lambda, x: i64) -> Result<i64, ExecError> {
    let y = match l {
        Lambda::PlusOne => x.checked_add(1),
        Lambda::MinusOne => x.checked_sub(1),
        Lambda::TimesTwo => x.checked_mul(2),
        Lambda::DivTwo => Some(x.div_euclid(2)),
        Lambda::Negate => x.checked_neg(),
        Lambda::Square => x.checked_mul(x),
        Lambda::TimesThree => x.checked_mul(3),
        Lambda::DivThree => Some(x.div_euclid(3)),
        Lambda::TimesFour => x.checked_mul(4),
        Lambda::DivFour => Some(x.div_euclid(4)),
        _ => return Err(ExecError::TypeMismatch),
    };
    y.ok_or(ExecError::OutOfRange).and_then(bounded)
}

pub(crate) fn predicate(l: Lambda, x: i64) -> Result<bool, ExecError> {
    Ok(match l {
        Lambda::IsPositive => x > 0,
        Lambda::IsNegative => x < 0,
        Lambda::IsEven => x.rem_euclid(2) == 0,
        Lambda::IsOdd => x.rem_euclid(2) == 1,
        _ => return Err(ExecError::TypeMismatch),
    })
}

pub(crate) fn binary(l: Lambda, a: i64, b: i64) -> Result<i64, ExecError> {
    let y = match l {
        Lambda::Add => a.checked_add(b),
        Lambda::Subtract => a.checked_sub(b),
        Lambda::Multiply => a.checked_mul(b),
        Lambda::Min => Some(a.min(b)),
        Lambda::Max => Some(a.max(b)),
        _ => return Err(ExecError::TypeMismatch),
    };
    y.ok_or(ExecError::OutOfRange).and_then(bounded)
}

fn int(v: &DcValue) -> Result<i64, ExecError> {
    match v {
        DcValue::Int(n) => Ok(*n),
        DcValue::List(_) => Err(ExecError::TypeMismatch),
    }
}

fn list(v: &DcValue) -> Result<&[i64], ExecError> {
    match v {
        DcValue::List(xs) => Ok(xs),
        DcValue::Int(_) => Err(ExecError::TypeMismatch),
    }
}

fn clamp_count(n: i64, len: usize) -> usize {
    n.clamp(0, len as i64) as usize
}

/// Applies an operation to operand values.
///
/// Integer division rounds toward negative infinity; `Take`/`Drop` clamp
/// their count into `[0, len]`; empty-list aggregates, out-of-bounds
/// `Access`, and any result element outside `[-256, 256]` are errors.
pub fn apply(
    op: Operation,
    lambda: Option<Lambda>,
    args: &[&DcValue],
) -> Result<DcValue, ExecError> {
    let expected = op.operands().len();
    if args.len() != expected {
        return Err(ExecError::Arity {
            expected,
            got: args.len(),
        });
    }
    let need_lambda = || -> Result<Lambda, ExecError> {
        match (lambda, op.lambda_kind()) {
            (Some(l), Some(kind)) if l.kind() == kind => Ok(l),
            _ => Err(ExecError::TypeMismatch),
        }
    };
    if op.lambda_kind().is_none() && lambda.is_some() {
        return Err(ExecError::TypeMismatch);
    }
    let out = match op {
        Operation::Head => DcValue::Int(*list(args[0])?.first().ok_or(ExecError::EmptyList)?),
        Operation::Last => DcValue::Int(*list(args[0])?.last().ok_or(ExecError::EmptyList)?),
        Operation::Minimum => {
            DcValue::Int(*list(args[0])?.iter().min().ok_or(ExecError::EmptyList)?)
        }
        Operation::Maximum => {
            DcValue::Int(*list(args[0])?.iter().max().ok_or(ExecError::EmptyList)?)
        }
        Operation::Sum => {
            let mut acc = 0i64;
            for &x in list(args[0])? {
                acc = acc.checked_add(x).ok_or(ExecError::OutOfRange)?;
            }
            DcValue::Int(acc)
        }
        Operation::Access => {
            let n = int(args[0])?;
            let xs = list(args[1])?;
            if n < 0 || n as usize >= xs.len() {
                return Err(ExecError::IndexOutOfBounds);
            }
            DcValue::Int(xs[n as usize])
        }
        Operation::Take => {
            let xs = list(args[1])?;
            DcValue::List(xs[..clamp_count(int(args[0])?, xs.len())].to_vec())
        }
        Operation::Drop => {
            let xs = list(args[1])?;
            DcValue::List(xs[clamp_count(int(args[0])?, xs.len())..].to_vec())
        }
        Operation::Reverse => DcValue::List(list(args[0])?.iter().rev().copied().collect()),
        Operation::Sort => {
            let mut xs = list(args[0])?.to_vec();
            xs.sort_unstable();
            DcValue::List(xs)
        }
        Operation::Map => {
            let l = need_lambda()?;
            DcValue::List(
                list(args[0])?
                    .iter()
                    .map(|&x| unary(l, x))
                    .collect::<Result<_, _>>()?,
            )
        }
        Operation::Filter => {
            let l = need_lambda()?;
            let mut out = Vec::new();
            for &x in list(args[0])? {
                if predicate(l, x)? {
                    out.push(x);
                }
            }
            DcValue::List(out)
        }
        Operation::Count => {
            let l = need_lambda()?;
            let mut n = 0;
            for &x in list(args[0])? {
                n += predicate(l, x)? as i64;
            }
            DcValue::Int(n)
        }
        Operation::ZipWith => {
            let l = need_lambda()?;
            let xs = list(args[0])?;
            let ys = list(args[1])?;
            DcValue::List(
                xs.iter()
                    .zip(ys)
                    .map(|(&a, &b)| binary(l, a, b))
                    .collect::<Result<_, _>>()?,
            )
        }
        Operation::Scanl1 => {
            let l = need_lambda()?;
            let xs = list(args[0])?;
            let mut out: Vec<i64> = Vec::with_capacity(xs.len());
            for &x in xs {
                let next = match out.last() {
                    None => x,
                    Some(&acc) => binary(l, acc, x)?,
                };
                out.push(next);
            }
            DcValue::List(out)
        }
    };
    if out.in_range() {
        Ok(out)
    } else {
        Err(ExecError::OutOfRange)
    }
}

/// True iff every operand variable is bound with the sort the operation
/// demands and the lambda (if any) has the right kind.
pub fn typecheck_call(call: &DcCall, state: &DcState) -> bool {
    let sorts = call.op.operands();
    if sorts.len() != call.args.len() {
        return false;
    }
    let lambda_ok = match (call.op.lambda_kind(), call.lambda) {
        (None, None) => true,
        (Some(kind), Some(l)) => l.kind() == kind,
        _ => false,
    };
    lambda_ok
        && sorts.iter().zip(&call.args).all(|(sort, var)| {
            match (sort, state.lookup(*var).map(DcValue::ty)) {
                (Operand::Int, Some(DcType::Int)) | (Operand::List, Some(DcType::List)) => true,
                _ => false,
            }
        })
}

/// Statement-level check: the call typechecks and the target name is fresh.
pub fn typecheck(stmt: &DcStatement, state: &DcState) -> bool {
    !state.contains(stmt.target) && typecheck_call(&stmt.call, state)
}

/// Evaluates a right-hand side against a state.
pub fn execute_call(call: &DcCall, state: &DcState) -> Result<DcValue, ExecError> {
    let mut args = Vec::with_capacity(call.args.len());
    for v in &call.args {
        args.push(
            state
                .lookup(*v)
                .ok_or_else(|| ExecError::UnboundVariable(v.to_string()))?,
        );
    }
    if let Some(l) = call.lambda {
        if call.op.lambda_kind() != Some(l.kind()) {
            return Err(ExecError::TypeMismatch);
        }
    }
    apply(call.op, call.lambda, &args)
}

/// Returns `state` extended with the statement's binding.
pub fn execute_statement(stmt: &DcStatement, state: &DcState) -> Result<DcState, ExecError> {
    if state.contains(stmt.target) {
        return Err(ExecError::TypeMismatch);
    }
    let value = execute_call(&stmt.call, state)?;
    Ok(state.bind(stmt.target, value))
}

pub fn execute(program: &DcProgram, inputs: &[DcValue]) -> Result<DcValue, ExecError> {
    if inputs.len() != program.inputs.len() {
        return Err(ExecError::Arity {
            expected: program.inputs.len(),
            got: inputs.len(),
        });
    }
    let mut state = program.initial_state(inputs);
    for stmt in &program.statements {
        state = execute_statement(stmt, &state)?;
    }
    state.last().cloned().ok_or(ExecError::EmptyList)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deepcoder::Var;

    fn l(xs: &[i64]) -> DcValue {
        DcValue::List(xs.to_vec())
    }

    fn x(n: u8) -> Var {
        Var::new(n).unwrap()
    }

    fn run(text: &str, inputs: &[DcValue]) -> Result<DcValue, ExecError> {
        text.parse::<DcProgram>().unwrap().execute(inputs)
    }

    #[test]
    fn square_then_sort() {
        let p = "x0 = INPUT | x1 = Map (**2) x0 | x2 = Sort x1";
        assert_eq!(run(p, &[l(&[5, 3, -4])]), Ok(l(&[9, 16, 25])));
    }

    #[test]
    fn reverse_empty() {
        assert_eq!(run("x0 = INPUT | x1 = Reverse x0", &[l(&[])]), Ok(l(&[])));
    }

    #[test]
    fn head_of_empty_fails() {
        assert_eq!(
            run("x0 = INPUT | x1 = Head x0", &[l(&[])]),
            Err(ExecError::EmptyList)
        );
    }

    #[test]
    fn scan_zip_take() {
        let a = l(&[1, 2, 3]);
        assert_eq!(
            apply(Operation::Scanl1, Some(Lambda::Add), &[&a]),
            Ok(l(&[1, 3, 6]))
        );
        assert_eq!(
            apply(
                Operation::ZipWith,
                Some(Lambda::Multiply),
                &[&l(&[1, 3]), &l(&[2, 2])]
            ),
            Ok(l(&[2, 6]))
        );
        assert_eq!(
            apply(Operation::Take, None, &[&DcValue::Int(0), &l(&[4, 5])]),
            Ok(l(&[]))
        );
    }

    #[test]
    fn floor_division_and_parity() {
        let xs = l(&[-3, -1, 0, 3]);
        assert_eq!(
            apply(Operation::Map, Some(Lambda::DivTwo), &[&xs]),
            Ok(l(&[-2, -1, 0, 1]))
        );
        assert_eq!(
            apply(Operation::Filter, Some(Lambda::IsOdd), &[&xs]),
            Ok(l(&[-3, -1, 3]))
        );
        assert_eq!(
            apply(Operation::Count, Some(Lambda::IsEven), &[&xs]),
            Ok(DcValue::Int(1))
        );
    }

    #[test]
    fn slicing_clamps() {
        let xs = l(&[1, 2, 3]);
        assert_eq!(
            apply(Operation::Take, None, &[&DcValue::Int(-4), &xs]),
            Ok(l(&[]))
        );
        assert_eq!(
            apply(Operation::Take, None, &[&DcValue::Int(9), &xs]),
            Ok(xs.clone())
        );
        assert_eq!(
            apply(Operation::Drop, None, &[&DcValue::Int(9), &xs]),
            Ok(l(&[]))
        );
        assert_eq!(
            apply(Operation::Drop, None, &[&DcValue::Int(1), &xs]),
            Ok(l(&[2, 3]))
        );
        assert_eq!(
            apply(Operation::Access, None, &[&DcValue::Int(3), &xs]),
            Err(ExecError::IndexOutOfBounds)
        );
        assert_eq!(
            apply(Operation::Access, None, &[&DcValue::Int(-1), &xs]),
            Err(ExecError::IndexOutOfBounds)
        );
    }

    #[test]
    fn range_limit() {
        let xs = l(&[17]);
        assert_eq!(
            apply(Operation::Map, Some(Lambda::Square), &[&xs]),
            Err(ExecError::OutOfRange)
        );
        assert_eq!(
            apply(Operation::Map, Some(Lambda::Square), &[&l(&[16])]),
            Ok(l(&[256]))
        );
    }

    #[test]
    fn typecheck_cases() {
        let state = DcState::new(vec![
            (x(0), l(&[1, 2])),
            (x(1), DcValue::Int(3)),
            (x(2), l(&[4])),
        ]);
        let call = |s: &str| s.parse::<DcCall>().unwrap();
        assert!(!typecheck_call(&call("Sort x1"), &state));
        assert!(typecheck_call(&call("ZipWith (max) x0 x2"), &state));
        assert!(!typecheck_call(&call("Map (>0) x0"), &state));
        assert!(typecheck_call(&call("Take x1 x0"), &state));
        assert!(!typecheck_call(&call("Take x0 x1"), &state));
        assert!(!typecheck_call(&call("Sort x5"), &state));
        let stmt = DcStatement {
            target: x(0),
            call: call("Sort x2"),
        };
        assert!(!typecheck(&stmt, &state));
    }

    #[test]
    fn statement_extends_state() {
        let state = DcState::new(vec![(x(0), l(&[3, 1]))]);
        let stmt = DcStatement {
            target: x(1),
            call: "Sort x0".parse().unwrap(),
        };
        let next = execute_statement(&stmt, &state).unwrap();
        assert_eq!(next.bindings[0], state.bindings[0]);
        assert_eq!(next.bindings[1], (x(1), l(&[1, 3])));
    }
}
