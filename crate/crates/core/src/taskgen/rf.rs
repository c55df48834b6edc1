//! RobustFill tasks: random inputs plus a program sampled by rejection.

use log::debug;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{task_rng, Task, TaskgenError};
use crate::domain::{Rf, Spec};
use crate::robustfill::{
    Boundary, Case, ComposeInner, Index, Modification, Pattern, Position, RegexClass, RfExpression,
    RfProgram, Substring, DELIMITERS, MAX_INPUT_LEN,
};
use crate::split::{rf_part, Side, Split, SplitKind};

pub const NUM_EXAMPLES: usize = 4;
/// Expression draws allowed per task before giving up.
pub const MAX_DRAWS: usize = 1000;
/// Sampled positions stay within one past the longest input.
const POSITION_BOUND: i64 = MAX_INPUT_LEN as i64 + 1;

const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
const DIGITS: &[u8] = b"0123456789";

fn pick(rng: &mut impl Rng, set: &[u8]) -> char {
    set[rng.gen_range(0..set.len())] as char
}

fn random_char(rng: &mut impl Rng) -> char {
    let roll = rng.gen_range(0..100);
    match roll {
        0..=59 => pick(rng, LETTERS),
        60..=79 => pick(rng, DIGITS),
        80..=89 => non_space_delimiter(rng),
        _ => ' ',
    }
}

/// One input string: 1-20 characters, weighted 60/20/10/10 toward
/// letters/digits/non-space delimiters/space, with at least one letter.
pub fn random_input(rng: &mut impl Rng) -> String {
    let len = rng.gen_range(1..=MAX_INPUT_LEN);
    let mut chars: Vec<char> = (0..len).map(|_| random_char(rng)).collect();
    if !chars.iter().any(|c| c.is_ascii_alphabetic()) {
        let at = rng.gen_range(0..len);
        chars[at] = pick(rng, LETTERS);
    }
    chars.into_iter().collect()
}

pub fn sample_inputs(rng: &mut impl Rng) -> Vec<String> {
    (0..NUM_EXAMPLES).map(|_| random_input(rng)).collect()
}

fn non_space_delimiter(rng: &mut impl Rng) -> char {
    loop {
        let c = pick(rng, DELIMITERS);
        if c != ' ' {
            return c;
        }
    }
}

fn random_character(rng: &mut impl Rng) -> char {
    match rng.gen_range(0..4) {
        0 => pick(rng, &LETTERS[..26]),
        1 => pick(rng, &LETTERS[26..]),
        2 => pick(rng, DIGITS),
        _ => pick(rng, DELIMITERS),
    }
}

fn random_pattern(rng: &mut impl Rng) -> Pattern {
    if rng.gen_bool(0.5) {
        Pattern::Class(*RegexClass::ALL.choose(rng).unwrap())
    } else {
        Pattern::Delimiter(pick(rng, DELIMITERS))
    }
}

fn random_index(rng: &mut impl Rng) -> Index {
    let v = rng.gen_range(1..=Index::MAX as i64);
    Index::new(if rng.gen_bool(0.5) { v } else { -v }).unwrap()
}

fn random_position(rng: &mut impl Rng) -> Position {
    Position::new(rng.gen_range(-POSITION_BOUND..=POSITION_BOUND)).unwrap()
}

pub fn random_substring(rng: &mut impl Rng) -> Substring {
    match rng.gen_range(0..5) {
        0 => Substring::SubStr(random_position(rng), random_position(rng)),
        1 => Substring::GetSpan {
            left: random_pattern(rng),
            left_index: random_index(rng),
            left_boundary: *Boundary::ALL.choose(rng).unwrap(),
            right: random_pattern(rng),
            right_index: random_index(rng),
            right_boundary: *Boundary::ALL.choose(rng).unwrap(),
        },
        2 => Substring::GetToken(random_pattern(rng), random_index(rng)),
        3 => Substring::GetUpto(random_pattern(rng)),
        _ => Substring::GetFrom(random_pattern(rng)),
    }
}

pub fn random_modification(rng: &mut impl Rng) -> Modification {
    match rng.gen_range(0..9) {
        0 => Modification::ToCase(*Case::ALL.choose(rng).unwrap()),
        1 => {
            let a = non_space_delimiter(rng);
            let b = loop {
                let b = pick(rng, DELIMITERS);
                if b != a {
                    break b;
                }
            };
            Modification::Replace(a, b)
        }
        2 => Modification::Trim,
        3 => Modification::GetFirst(random_pattern(rng), random_index(rng)),
        4 => Modification::GetAll(random_pattern(rng)),
        5 => Modification::Substitute(
            random_pattern(rng),
            random_index(rng),
            random_character(rng),
        ),
        6 => Modification::SubstituteAll(random_pattern(rng), random_character(rng)),
        7 => Modification::Remove(random_pattern(rng), random_index(rng)),
        _ => Modification::RemoveAll(random_pattern(rng)),
    }
}

/// Which expressions a program position may hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub substring: bool,
    pub modification: bool,
    pub constant: bool,
    pub compose: bool,
    /// Restricts the inner argument of `Compose`: `Some(true)` substring
    /// only, `Some(false)` modification only.
    pub compose_substring: Option<bool>,
}

impl Slot {
    pub const ANY: Slot = Slot {
        substring: true,
        modification: true,
        constant: true,
        compose: true,
        compose_substring: None,
    };
    const SUBSTRING: Slot = Slot {
        substring: true,
        modification: false,
        constant: false,
        compose: false,
        compose_substring: None,
    };
    const NON_SUBSTRING: Slot = Slot {
        substring: false,
        modification: true,
        constant: true,
        compose: false,
        compose_substring: None,
    };
    const NO_COMPOSE: Slot = Slot {
        compose: false,
        ..Slot::ANY
    };
    const COMPOSE: Slot = Slot {
        substring: false,
        modification: false,
        constant: false,
        compose: true,
        compose_substring: None,
    };
}

/// Draws an expression uniformly over the slot's categories, then over
/// operations, then over arguments.
pub fn random_expression(rng: &mut impl Rng, slot: Slot) -> RfExpression {
    let mut cats = Vec::with_capacity(4);
    if slot.constant {
        cats.push(0);
    }
    if slot.substring {
        cats.push(1);
    }
    if slot.modification {
        cats.push(2);
    }
    if slot.compose {
        cats.push(3);
    }
    match *cats.choose(rng).expect("slot allows something") {
        0 => RfExpression::ConstStr(random_character(rng)),
        1 => RfExpression::Substring(random_substring(rng)),
        2 => RfExpression::Modification(random_modification(rng)),
        _ => {
            let outer = random_modification(rng);
            let substring = slot.compose_substring.unwrap_or_else(|| rng.gen_bool(0.5));
            let inner = if substring {
                ComposeInner::Substring(random_substring(rng))
            } else {
                ComposeInner::Modification(random_modification(rng))
            };
            RfExpression::Compose(outer, inner)
        }
    }
}

/// A random well-formed program of the given length (no execution checks).
pub fn random_program(rng: &mut impl Rng, len: usize) -> RfProgram {
    RfProgram::new(
        (0..len)
            .map(|_| random_expression(rng, Slot::ANY))
            .collect(),
    )
}

fn pick_length(rng: &mut impl Rng, split: Split, side: Side) -> usize {
    if split.kind == SplitKind::ComposeNewOperation && side == Side::Train {
        if rng.gen_bool(0.25) {
            return 1;
        }
        return rng.gen_range(2..=*split.lengths(side).end());
    }
    let range = split.lengths(side);
    rng.gen_range(range)
}

/// Per-position slots that make the side predicate reachable.
fn slots(rng: &mut impl Rng, split: Split, side: Side, len: usize) -> Vec<Slot> {
    match split.kind {
        SplitKind::NoGeneralization | SplitKind::Length => vec![Slot::ANY; len],
        SplitKind::ComposeDifferentConcepts => match side {
            Side::Train => {
                let s = if rng.gen_bool(0.5) {
                    Slot::SUBSTRING
                } else {
                    Slot::NON_SUBSTRING
                };
                vec![s; len]
            }
            Side::Test => loop {
                let v: Vec<Slot> = (0..len)
                    .map(|_| {
                        if rng.gen_bool(0.5) {
                            Slot::SUBSTRING
                        } else {
                            Slot::NON_SUBSTRING
                        }
                    })
                    .collect();
                if v.iter().any(|s| s.substring) && v.iter().any(|s| !s.substring) {
                    break v;
                }
            },
        },
        SplitKind::SwitchConceptOrder => {
            let head = len.div_ceil(2);
            let (a, b) = match side {
                Side::Train => (Slot::SUBSTRING, Slot::NON_SUBSTRING),
                Side::Test => (Slot::NON_SUBSTRING, Slot::SUBSTRING),
            };
            (0..len).map(|i| if i < head { a } else { b }).collect()
        }
        SplitKind::ComposeNewOperation => match (side, len) {
            (Side::Train, 1) => vec![Slot::COMPOSE],
            (Side::Train, _) => vec![Slot::NO_COMPOSE; len],
            (Side::Test, _) => {
                let mut v = vec![Slot::ANY; len];
                v[rng.gen_range(0..len)] = Slot::COMPOSE;
                v
            }
        },
        SplitKind::AddOperationFunctionality => match side {
            Side::Train => vec![
                Slot {
                    compose_substring: Some(false),
                    ..Slot::ANY
                };
                len
            ],
            Side::Test => {
                let mut v = vec![Slot::ANY; len];
                v[rng.gen_range(0..len)] = Slot {
                    compose_substring: Some(true),
                    ..Slot::COMPOSE
                };
                v
            }
        },
    }
}

/// Whether `expr` yields a non-empty string on every input.
fn usable(expr: &RfExpression, inputs: &[String]) -> Option<Vec<String>> {
    inputs
        .iter()
        .map(|i| expr.execute(i).ok().filter(|o| !o.is_empty()))
        .collect()
}

/// Samples a task whose solution lies in the split's `side` distribution.
pub fn sample_task(split: Split, side: Side, seed: u64) -> Result<Task<Rf>, TaskgenError> {
    let mut rng = task_rng(split, side, seed);
    let mut draws = 0;
    while draws < MAX_DRAWS {
        let inputs = sample_inputs(&mut rng);
        let len = pick_length(&mut rng, split, side);
        let plan = slots(&mut rng, split, side, len);
        let mut exprs = Vec::with_capacity(len);
        let mut outputs = vec![String::new(); NUM_EXAMPLES];
        'slot: for slot in &plan {
            // a slot that keeps failing usually means the inputs are unsuitable
            for _ in 0..50 {
                draws += 1;
                let expr = random_expression(&mut rng, *slot);
                if let Some(outs) = usable(&expr, &inputs) {
                    for (o, piece) in outputs.iter_mut().zip(outs) {
                        o.push_str(&piece);
                    }
                    exprs.push(expr);
                    continue 'slot;
                }
            }
            break;
        }
        if exprs.len() != len {
            continue;
        }
        let parts: Vec<_> = exprs.iter().map(rf_part).collect();
        if !split.contains(side, &parts) {
            continue;
        }
        debug!("rf {split} {side} seed {seed}: {draws} draws");
        return Ok(Task {
            split,
            side,
            seed,
            spec: Spec::new(inputs.into_iter().zip(outputs)),
            program: RfProgram::new(exprs),
        });
    }
    Err(TaskgenError::GenerationTimeout {
        split,
        side,
        seed,
        attempts: draws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::split::DomainKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inputs_are_bounded_and_have_letters() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let s = random_input(&mut rng);
            assert!((1..=MAX_INPUT_LEN).contains(&s.len()));
            assert!(crate::robustfill::in_alphabet(&s));
            assert!(s.chars().any(|c| c.is_ascii_alphabetic()));
        }
    }

    #[test]
    fn inputs_are_deterministic() {
        let a = sample_inputs(&mut ChaCha8Rng::seed_from_u64(0));
        let b = sample_inputs(&mut ChaCha8Rng::seed_from_u64(0));
        let c = sample_inputs(&mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_expressions_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2000 {
            assert!(random_expression(&mut rng, Slot::ANY).is_well_formed());
        }
    }

    #[test]
    fn length_and_new_op_tasks() {
        let split = Split::new(DomainKind::RobustFill, SplitKind::Length);
        for seed in 0..10 {
            let t = sample_task(split, Side::Train, seed).unwrap();
            assert!((1..=6).contains(&t.program.len()));
            assert_eq!(t, sample_task(split, Side::Train, seed).unwrap());
        }
        let split = Split::new(DomainKind::RobustFill, SplitKind::ComposeNewOperation);
        for seed in 0..10 {
            let t = sample_task(split, Side::Test, seed).unwrap();
            assert!((2..=6).contains(&t.program.len()));
            assert!(t
                .program
                .expressions
                .iter()
                .any(|e| matches!(e, RfExpression::Compose(..))));
        }
    }
}
