//! Allocation-free value encoding for the enumerator's inner loop. The
//! element semantics come from the interpreter's own lambda helpers; the
//! list plumbing is checked against [`apply`](crate::deepcoder::apply).

use crate::deepcoder::{binary, predicate, unary, DcType, DcValue, Lambda, Operation, VALUE_BOUND};

/// Longest list representable. No operation lengthens a list, so inputs
/// within this bound keep every intermediate value within it.
pub const MAX_LEN: usize = 5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Packed {
    /// List length, or -1 for an int stored in `xs[0]`.
    len: i8,
    xs: [i16; MAX_LEN],
}

impl Packed {
    fn int(x: i64) -> Option<Packed> {
        let mut p = Packed {
            len: -1,
            xs: [0; MAX_LEN],
        };
        p.xs[0] = i16::try_from(x).ok()?;
        Some(p)
    }

    fn list(xs: impl IntoIterator<Item = i64>) -> Option<Packed> {
        let mut p = Packed::default();
        for x in xs {
            if p.len as usize == MAX_LEN {
                return None;
            }
            p.xs[p.len as usize] = i16::try_from(x).ok()?;
            p.len += 1;
        }
        Some(p)
    }

    pub fn from_value(v: &DcValue) -> Option<Packed> {
        match v {
            DcValue::Int(x) => Packed::int(*x),
            DcValue::List(xs) => Packed::list(xs.iter().copied()),
        }
    }

    pub fn to_value(self) -> DcValue {
        match self.as_int() {
            Some(x) => DcValue::Int(x),
            None => DcValue::List(self.elems().collect()),
        }
    }

    pub fn ty(self) -> DcType {
        if self.len < 0 {
            DcType::Int
        } else {
            DcType::List
        }
    }

    fn as_int(self) -> Option<i64> {
        (self.len < 0).then_some(self.xs[0] as i64)
    }

    fn elems(&self) -> impl DoubleEndedIterator<Item = i64> + '_ {
        self.xs[..self.len.max(0) as usize]
            .iter()
            .map(|&x| x as i64)
    }
}

fn bounded(p: Packed) -> Option<Packed> {
    let n = if p.len < 0 { 1 } else { p.len as usize };
    p.xs[..n]
        .iter()
        .all(|&x| (x as i64).abs() <= VALUE_BOUND)
        .then_some(p)
}

/// [`apply`](crate::deepcoder::apply) on packed operands; `None` on any
/// execution error. `b` is ignored by one-operand operations.
pub fn apply_packed(op: Operation, lambda: Option<Lambda>, a: Packed, b: Packed) -> Option<Packed> {
    let lam = || lambda.expect("higher-order operation without a lambda");
    let out = match op {
        Operation::Head => Packed::int(a.elems().next()?)?,
        Operation::Last => Packed::int(a.elems().next_back()?)?,
        Operation::Minimum => Packed::int(a.elems().min()?)?,
        Operation::Maximum => Packed::int(a.elems().max()?)?,
        Operation::Sum => Packed::int(a.elems().sum())?,
        Operation::Access => {
            let n = a.as_int()?;
            if n < 0 || n >= b.len as i64 {
                return None;
            }
            Packed::int(b.xs[n as usize] as i64)?
        }
        Operation::Take => {
            let n = a.as_int()?.clamp(0, b.len as i64) as usize;
            Packed::list(b.elems().take(n))?
        }
        Operation::Drop => {
            let n = a.as_int()?.clamp(0, b.len as i64) as usize;
            Packed::list(b.elems().skip(n))?
        }
        Operation::Reverse => Packed::list(a.elems().rev())?,
        Operation::Sort => {
            let mut p = a;
            p.xs[..a.len as usize].sort_unstable();
            p
        }
        Operation::Map => {
            let mut p = a;
            for x in &mut p.xs[..a.len as usize] {
                *x = unary(lam(), *x as i64).ok()? as i16;
            }
            p
        }
        Operation::Filter => {
            let mut p = Packed::default();
            for x in a.elems() {
                if predicate(lam(), x).ok()? {
                    p.xs[p.len as usize] = x as i16;
                    p.len += 1;
                }
            }
            p
        }
        Operation::Count => {
            let mut n = 0;
            for x in a.elems() {
                n += predicate(lam(), x).ok()? as i64;
            }
            Packed::int(n)?
        }
        Operation::ZipWith => {
            let mut p = Packed::default();
            for (x, y) in a.elems().zip(b.elems()) {
                p.xs[p.len as usize] = binary(lam(), x, y).ok()? as i16;
                p.len += 1;
            }
            p
        }
        Operation::Scanl1 => {
            let mut p = a;
            for i in 1..a.len as usize {
                p.xs[i] = binary(lam(), p.xs[i - 1] as i64, a.xs[i] as i64).ok()? as i16;
            }
            p
        }
    };
    bounded(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deepcoder::apply;
    use proptest::prelude::*;

    fn value() -> impl Strategy<Value = DcValue> {
        prop_oneof![
            (-300i64..300).prop_map(DcValue::Int),
            (-8i64..8).prop_map(DcValue::Int),
            prop::collection::vec(-256i64..=256, 0..=MAX_LEN).prop_map(DcValue::List),
            prop::collection::vec(-20i64..=20, 0..=MAX_LEN).prop_map(DcValue::List),
        ]
    }

    proptest! {
        #[test]
        fn agrees_with_interpreter(sig in 0usize..38, a in value(), b in value()) {
            let (op, lambda) = Operation::with_lambdas()[sig];
            let args: Vec<&DcValue> = if op.operands().len() == 1 { vec![&a] } else { vec![&a, &b] };
            let well_typed = op.operands().len() == 1 && a.ty() == DcType::List
                || op == Operation::ZipWith && a.ty() == DcType::List && b.ty() == DcType::List
                || op.operands().len() == 2 && op != Operation::ZipWith
                    && a.ty() == DcType::Int && b.ty() == DcType::List;
            prop_assume!(well_typed && a.in_range() && b.in_range());
            let expected = apply(op, lambda, &args).ok();
            let got = apply_packed(
                op,
                lambda,
                Packed::from_value(&a).unwrap(),
                Packed::from_value(&b).unwrap(),
            )
            .map(Packed::to_value);
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn round_trips(v in value()) {
            let p = Packed::from_value(&v).unwrap();
            prop_assert_eq!(p.ty(), v.ty());
            prop_assert_eq!(p.to_value(), v);
        }
    }
}
