//! DeepCoder tasks, built from an exhaustive bottom-up enumeration so that
//! test tasks can be required to have only test-distribution minimal solutions.
//!
//! Only programs without dead code and without repeated values are
//! enumerated: every minimal-length solution has both properties (an unused
//! binding could be dropped, a repeated value could be referenced instead),
//! so the minimal lengths and their solutions are exactly preserved.

use log::debug;
use rand::seq::SliceRandom;
use rand::Rng;
use rustc_hash::FxHashMap;

use super::packed::{apply_packed, Packed, MAX_LEN};
use super::{task_rng, Task, TaskgenError};
use crate::deepcoder::{
    apply, execute_call, typecheck_call, DcCall, DcProgram, DcState, DcStatement, DcType, DcValue,
    Lambda, Operand, Operation, Var, NAME_POOL,
};
use crate::domain::{Dc, Domain, Spec};
use crate::split::{dc_part, Concept, PartFacts, Side, Split, SplitKind};

pub const NUM_EXAMPLES: usize = 3;
pub const INPUT_BOUND: i64 = 50;
pub const MAX_LIST_LEN: usize = MAX_LEN;
/// Longest program the index enumerates; length-5 test programs are sampled
/// directly and checked against the length-4 index instead.
pub const MAX_INDEX_LENGTH: usize = 4;
pub const DEFAULT_STATE_BUDGET: usize = 20_000_000;
const MAX_ATTEMPTS: usize = 25;
const MAX_VALUES: usize = 8;
const NO_VALUE: u32 = u32::MAX;

fn random_list(rng: &mut impl Rng) -> DcValue {
    let len = rng.gen_range(1..=MAX_LIST_LEN);
    DcValue::List(
        (0..len)
            .map(|_| rng.gen_range(-INPUT_BOUND..=INPUT_BOUND))
            .collect(),
    )
}

fn random_int(rng: &mut impl Rng) -> DcValue {
    // small values make Take/Drop/Access useful; the rest covers the full range
    if rng.gen_bool(0.5) {
        DcValue::Int(rng.gen_range(0..=5))
    } else {
        DcValue::Int(rng.gen_range(-INPUT_BOUND..=INPUT_BOUND))
    }
}

/// Three examples of one or two inputs. The first input is a list; a second
/// input, when present, is an int or a list with equal probability.
pub fn sample_inputs(rng: &mut impl Rng) -> Vec<Vec<DcValue>> {
    let arity = rng.gen_range(1..=2);
    let second_int = rng.gen_bool(0.5);
    (0..NUM_EXAMPLES)
        .map(|_| {
            let mut ex = vec![random_list(rng)];
            if arity == 2 {
                ex.push(if second_int {
                    random_int(rng)
                } else {
                    random_list(rng)
                });
            }
            ex
        })
        .collect()
}

/// One value per example; slots past the example count stay default.
type Tuple = [Packed; NUM_EXAMPLES];

fn pack(values: &[DcValue]) -> Option<Tuple> {
    if values.len() > NUM_EXAMPLES {
        return None;
    }
    let mut t = Tuple::default();
    for (slot, v) in t.iter_mut().zip(values) {
        *slot = Packed::from_value(v)?;
    }
    Some(t)
}

/// Per-example value tuples, interned to small integers.
#[derive(Default)]
struct Interner {
    tuples: Vec<Tuple>,
    ids: FxHashMap<Tuple, u32>,
}

impl Interner {
    fn intern(&mut self, tuple: Tuple) -> u32 {
        let next = self.tuples.len() as u32;
        let id = *self.ids.entry(tuple).or_insert(next);
        if id == next {
            assert!(id < (1 << 29), "value interner overflow");
            self.tuples.push(tuple);
        }
        id
    }

    fn ty(&self, id: u32) -> DcType {
        self.tuples[id as usize][0].ty()
    }

    fn get(&self, tuple: &Tuple) -> Option<u32> {
        self.ids.get(tuple).copied()
    }
}

/// A statement in position form: which (operation, lambda) and which
/// earlier values (by creation position) it reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Step {
    sig: u8,
    args: [u8; 2],
}

#[derive(Debug, Clone, Copy)]
struct Node {
    vals: [u32; MAX_VALUES],
    n: u8,
    /// Bit per creation position: a statement value not yet read.
    unused: u8,
    key: u8,
    parent: u32,
    step: Step,
}

/// Facts about one output signature.
#[derive(Debug, Clone, Copy)]
pub struct OutputInfo {
    pub min_len: u8,
    /// Some minimal-length solution is in the train distribution.
    pub any_train: bool,
    /// Every minimal-length solution is in the test distribution.
    pub all_test: bool,
    rep: (u32, Step),
    train_rep: Option<(u32, Step)>,
}

/// Split-specific summary of a statement sequence: exactly what the side
/// predicates need, so states with equal summaries can be merged.
fn extend_key(kind: SplitKind, key: u8, pos: usize, part: PartFacts) -> u8 {
    let higher = part.concept == Some(Concept::HigherOrder);
    match kind {
        SplitKind::NoGeneralization | SplitKind::Length => 0,
        SplitKind::ComposeDifferentConcepts => key | if higher { 2 } else { 1 },
        SplitKind::SwitchConceptOrder => key | (higher as u8) << pos,
        SplitKind::ComposeNewOperation => key | part.special as u8,
        SplitKind::AddOperationFunctionality => key | part.extends as u8,
    }
}

/// A part list with the given summary, for evaluating the side predicates.
fn representative_parts(kind: SplitKind, key: u8, len: usize) -> Vec<PartFacts> {
    let part = |higher: bool| PartFacts {
        concept: Some(if higher {
            Concept::HigherOrder
        } else {
            Concept::FirstOrder
        }),
        special: false,
        extends: false,
    };
    let mut parts = vec![part(false); len];
    match kind {
        SplitKind::NoGeneralization | SplitKind::Length => {}
        SplitKind::ComposeDifferentConcepts => {
            for (i, p) in parts.iter_mut().enumerate() {
                *p = part(match key {
                    2 => true,
                    3 => i > 0,
                    _ => false,
                });
            }
        }
        SplitKind::SwitchConceptOrder => {
            for (i, p) in parts.iter_mut().enumerate() {
                *p = part(key >> i & 1 == 1);
            }
        }
        SplitKind::ComposeNewOperation => {
            if let Some(p) = parts.first_mut() {
                p.special = key & 1 == 1;
            }
        }
        SplitKind::AddOperationFunctionality => {
            if let Some(p) = parts.first_mut() {
                p.extends = key & 1 == 1;
            }
        }
    }
    parts
}

/// All minimal-length solutions reachable from one set of example inputs,
/// grouped by output signature.
pub struct SolutionIndex {
    split: Split,
    n_inputs: usize,
    n_examples: usize,
    sigs: Vec<(Operation, Option<Lambda>)>,
    values: Interner,
    nodes: Vec<Node>,
    outputs: FxHashMap<u32, OutputInfo>,
    max_length: usize,
}

impl SolutionIndex {
    pub fn build(
        inputs: &[Vec<DcValue>],
        split: Split,
        max_length: usize,
        budget: usize,
    ) -> Result<Self, TaskgenError> {
        assert!(max_length + 2 < MAX_VALUES);
        let sigs = Operation::with_lambdas();
        let parts: Vec<PartFacts> = sigs
            .iter()
            .map(|&(op, lambda)| dc_part(&DcCall::new(op, lambda, Vec::new())))
            .collect();
        let mut membership = [[(false, false); MAX_VALUES]; 64];
        for (key, row) in membership.iter_mut().enumerate() {
            for (len, cell) in row.iter_mut().enumerate() {
                let p = representative_parts(split.kind, key as u8, len);
                *cell = (
                    split.contains(Side::Train, &p),
                    split.contains(Side::Test, &p),
                );
            }
        }

        let n_inputs = inputs[0].len();
        let n_examples = inputs.len();
        let mut values = Interner::default();
        let mut root = Node {
            vals: [NO_VALUE; MAX_VALUES],
            n: n_inputs as u8,
            unused: 0,
            key: 0,
            parent: u32::MAX,
            step: Step {
                sig: 0,
                args: [0, 0],
            },
        };
        for i in 0..n_inputs {
            let column: Vec<DcValue> = inputs.iter().map(|ex| ex[i].clone()).collect();
            let tuple = pack(&column).ok_or_else(|| {
                TaskgenError::Unsupported(format!(
                    "at most {NUM_EXAMPLES} examples with lists of at most {MAX_LEN} small ints"
                ))
            })?;
            root.vals[i] = values.intern(tuple);
        }
        let mut index = SolutionIndex {
            split,
            n_inputs,
            n_examples,
            sigs,
            values,
            nodes: vec![root],
            outputs: FxHashMap::default(),
            max_length,
        };

        let mut memo: FxHashMap<u64, u32> = FxHashMap::default();
        let mut layer: Vec<u32> = vec![0];
        for depth in 1..=max_length {
            let remaining = max_length - depth;
            let mut seen: FxHashMap<([u32; MAX_VALUES], u8), ()> = FxHashMap::default();
            let mut next = Vec::new();
            for &ni in &layer {
                let node = index.nodes[ni as usize];
                let n = node.n as usize;
                let mut lists = Vec::with_capacity(n);
                let mut ints = Vec::with_capacity(n);
                for p in 0..n {
                    match index.values.ty(node.vals[p]) {
                        DcType::List => lists.push(p as u8),
                        DcType::Int => ints.push(p as u8),
                    }
                }
                let mut emit =
                    |index: &mut SolutionIndex, sig: usize, args: [u8; 2], arity: usize| {
                        let mut read = 0u8;
                        for &a in &args[..arity] {
                            read |= 1 << a;
                        }
                        let unused = (node.unused & !read) | 1 << n;
                        if unused.count_ones() as usize > remaining + 1 {
                            return;
                        }
                        let a = node.vals[args[0] as usize];
                        let b = if arity == 2 {
                            node.vals[args[1] as usize]
                        } else {
                            (1 << 29) - 1
                        };
                        let mkey = (sig as u64) << 58 | (a as u64) << 29 | b as u64;
                        let result = *memo.entry(mkey).or_insert_with(|| {
                            let (op, lambda) = index.sigs[sig];
                            let xs = index.values.tuples[a as usize];
                            let ys = if arity == 2 {
                                index.values.tuples[b as usize]
                            } else {
                                xs
                            };
                            let mut tuple = Tuple::default();
                            for e in 0..n_examples {
                                match apply_packed(op, lambda, xs[e], ys[e]) {
                                    Some(v) => tuple[e] = v,
                                    None => return NO_VALUE,
                                }
                            }
                            index.values.intern(tuple)
                        });
                        // a repeated statement value is never needed; one
                        // equal to an input can still be a final output
                        if result == NO_VALUE || node.vals[index.n_inputs..n].contains(&result) {
                            return;
                        }
                        let repeats_input = node.vals[..index.n_inputs].contains(&result);
                        let key = extend_key(index.split.kind, node.key, depth - 1, parts[sig]);
                        let step = Step {
                            sig: sig as u8,
                            args,
                        };
                        if unused.count_ones() == 1 {
                            let (train, test) = membership[key as usize][depth];
                            let info = index.outputs.entry(result).or_insert(OutputInfo {
                                min_len: depth as u8,
                                any_train: false,
                                all_test: true,
                                rep: (ni, step),
                                train_rep: None,
                            });
                            if info.min_len as usize == depth {
                                info.any_train |= train;
                                info.all_test &= test;
                                if train && info.train_rep.is_none() {
                                    info.train_rep = Some((ni, step));
                                }
                            }
                        }
                        if remaining > 0 && !repeats_input {
                            let mut child = node;
                            child.vals[n] = result;
                            child.n += 1;
                            child.unused = unused;
                            child.key = key;
                            child.parent = ni;
                            child.step = step;
                            let mut canon = [u32::MAX; MAX_VALUES];
                            for p in 0..=n {
                                canon[p] = child.vals[p] << 1 | (unused >> p & 1) as u32;
                            }
                            canon[..=n].sort_unstable();
                            if seen.insert((canon, key), ()).is_none() {
                                next.push(index.nodes.len() as u32);
                                index.nodes.push(child);
                            }
                        }
                    };
                for sig in 0..index.sigs.len() {
                    match index.sigs[sig].0.operands().len() {
                        1 => {
                            for &p in &lists {
                                emit(&mut index, sig, [p, 0], 1);
                            }
                        }
                        _ if index.sigs[sig].0 == Operation::ZipWith => {
                            for &p in &lists {
                                for &q in &lists {
                                    emit(&mut index, sig, [p, q], 2);
                                }
                            }
                        }
                        _ => {
                            for &i in &ints {
                                for &p in &lists {
                                    emit(&mut index, sig, [i, p], 2);
                                }
                            }
                        }
                    }
                }
            }
            if index.nodes.len() > budget {
                return Err(TaskgenError::BudgetExceeded(budget));
            }
            debug!(
                "depth {depth}: {} states, {} values, {} outputs",
                next.len(),
                index.values.tuples.len(),
                index.outputs.len()
            );
            layer = next;
        }
        Ok(index)
    }

    pub fn max_length(&self) -> usize {
        self.max_length
    }

    pub fn num_states(&self) -> usize {
        self.nodes.len()
    }

    /// Minimal-solution facts for an output signature, if any enumerated
    /// program produces it.
    pub fn lookup(&self, outputs: &[DcValue]) -> Option<&OutputInfo> {
        let id = self.values.get(&pack(outputs)?)?;
        self.outputs.get(&id)
    }

    fn output_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.outputs.keys().copied().collect();
        ids.sort_unstable();
        ids
    }

    fn signature(&self, id: u32) -> Vec<DcValue> {
        self.values.tuples[id as usize][..self.n_examples]
            .iter()
            .map(|p| p.to_value())
            .collect()
    }

    /// Output signatures with their facts, in interning order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<DcValue>, &OutputInfo)> + '_ {
        self.output_ids()
            .into_iter()
            .map(|id| (self.signature(id), &self.outputs[&id]))
    }

    /// Statement right-hand sides, with canonical names, of the program
    /// ending in `last` after node `node`.
    fn calls(&self, (node, last): (u32, Step)) -> Vec<DcCall> {
        let mut steps = vec![last];
        let mut at = node;
        while self.nodes[at as usize].parent != u32::MAX {
            steps.push(self.nodes[at as usize].step);
            at = self.nodes[at as usize].parent;
        }
        steps.reverse();
        steps
            .into_iter()
            .map(|s| {
                let (op, lambda) = self.sigs[s.sig as usize];
                let arity = op.operands().len();
                DcCall::new(
                    op,
                    lambda,
                    s.args[..arity]
                        .iter()
                        .map(|&p| Var::new(p).expect("position within the pool"))
                        .collect(),
                )
            })
            .collect()
    }

    /// A minimal solution for `info`; a train-distribution one when asked
    /// and available.
    pub fn solution(&self, info: &OutputInfo, train: bool) -> Vec<DcCall> {
        let src = if train {
            info.train_rep.unwrap_or(info.rep)
        } else {
            info.rep
        };
        self.calls(src)
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }
}

/// All statements over the values in `vals` that execute, add a new value,
/// and leave at most `remaining + 1` unread statement values.
fn extensions(
    vals: &[Vec<DcValue>],
    n_inputs: usize,
    unused: u8,
    remaining: usize,
) -> Vec<(DcCall, Vec<DcValue>, u8)> {
    let n = vals.len();
    let mut out = Vec::new();
    for (op, lambda) in Operation::with_lambdas() {
        let arity = op.operands().len();
        let choices: Vec<Vec<usize>> = if arity == 1 {
            (0..n).map(|p| vec![p]).collect()
        } else {
            (0..n)
                .flat_map(|p| (0..n).map(move |q| vec![p, q]))
                .collect()
        };
        for args in choices {
            let read: u8 = args
                .iter()
                .filter(|&&p| p >= n_inputs)
                .fold(0, |m, &p| m | 1 << p);
            let next_unused = (unused & !read) | 1 << n;
            if next_unused.count_ones() as usize > remaining + 1 {
                continue;
            }
            let result: Result<Vec<DcValue>, _> = (0..vals[0].len())
                .map(|e| {
                    let operands: Vec<&DcValue> = args.iter().map(|&p| &vals[p][e]).collect();
                    apply(op, lambda, &operands)
                })
                .collect();
            let Ok(result) = result else { continue };
            if vals.contains(&result) {
                continue;
            }
            let call = DcCall::new(
                op,
                lambda,
                args.iter().map(|&p| Var::new(p as u8).unwrap()).collect(),
            );
            out.push((call, result, next_unused));
        }
    }
    out
}

/// A random dead-code-free program of exactly `len` statements, as canonical
/// right-hand sides plus its output signature.
fn random_walk(
    rng: &mut impl Rng,
    inputs: &[Vec<DcValue>],
    len: usize,
) -> Option<(Vec<DcCall>, Vec<DcValue>)> {
    let n_inputs = inputs[0].len();
    let mut vals: Vec<Vec<DcValue>> = (0..n_inputs)
        .map(|i| inputs.iter().map(|ex| ex[i].clone()).collect())
        .collect();
    let mut unused = 0u8;
    let mut calls = Vec::with_capacity(len);
    for depth in 1..=len {
        let options = extensions(&vals, n_inputs, unused, len - depth);
        let (call, result, next_unused) = options.choose(rng)?.clone();
        calls.push(call);
        vals.push(result);
        unused = next_unused;
    }
    Some((calls, vals.pop().unwrap()))
}

/// Gives the program random distinct names from the pool.
fn name_program(rng: &mut impl Rng, n_inputs: usize, calls: &[DcCall]) -> DcProgram {
    let mut names: Vec<Var> = Var::all().collect();
    names.shuffle(rng);
    debug_assert!(n_inputs + calls.len() <= NAME_POOL as usize);
    let rename = |v: &Var| names[v.index() as usize];
    DcProgram {
        inputs: names[..n_inputs].to_vec(),
        statements: calls
            .iter()
            .enumerate()
            .map(|(j, c)| DcStatement {
                target: names[n_inputs + j],
                call: DcCall::new(c.op, c.lambda, c.args.iter().map(rename).collect()),
            })
            .collect(),
    }
}

/// A random well-typed program of `len` statements over inputs of the given
/// types, with random names. It need not execute without error.
pub fn random_program(rng: &mut impl Rng, input_types: &[DcType], len: usize) -> DcProgram {
    let mut types = input_types.to_vec();
    let mut calls = Vec::with_capacity(len);
    let pairs = Operation::with_lambdas();
    for _ in 0..len {
        let of = |ty: DcType, types: &[DcType]| -> Vec<usize> {
            (0..types.len()).filter(|&i| types[i] == ty).collect()
        };
        let (ints, lists) = (of(DcType::Int, &types), of(DcType::List, &types));
        let usable: Vec<_> = pairs
            .iter()
            .filter(|(op, _)| {
                op.operands().iter().all(|s| match s {
                    Operand::Int => !ints.is_empty(),
                    Operand::List => !lists.is_empty(),
                })
            })
            .collect();
        let &&(op, lambda) = usable.choose(rng).expect("a list input is always bound");
        let args = op
            .operands()
            .iter()
            .map(|s| {
                let pool = match s {
                    Operand::Int => &ints,
                    Operand::List => &lists,
                };
                Var::new(*pool.choose(rng).unwrap() as u8).unwrap()
            })
            .collect();
        calls.push(DcCall::new(op, lambda, args));
        types.push(op.result_type());
    }
    name_program(rng, input_types.len(), &calls)
}

/// Lengths in the side's range that some statement sequence of that length
/// can realize.
fn feasible_lengths(split: Split, side: Side) -> Vec<usize> {
    let mut kinds: Vec<PartFacts> = Vec::new();
    for (op, lambda) in Operation::with_lambdas() {
        let part = dc_part(&DcCall::new(op, lambda, Vec::new()));
        if !kinds.contains(&part) {
            kinds.push(part);
        }
    }
    split
        .lengths(side)
        .filter(|&len| {
            let mut counter = vec![0usize; len];
            loop {
                let parts: Vec<PartFacts> = counter.iter().map(|&i| kinds[i]).collect();
                if split.contains(side, &parts) {
                    return true;
                }
                let Some(j) = counter.iter().rposition(|&i| i + 1 < kinds.len()) else {
                    return false;
                };
                counter[j] += 1;
                counter[j + 1..].iter_mut().for_each(|i| *i = 0);
            }
        })
        .collect()
}

fn pick_length(rng: &mut impl Rng, split: Split, side: Side) -> usize {
    let lengths = feasible_lengths(split, side);
    if split.kind == SplitKind::ComposeNewOperation && side == Side::Train {
        // a quarter of the training tasks are the new operation on its own
        if rng.gen_bool(0.25) {
            return 1;
        }
        let longer: Vec<usize> = lengths.into_iter().filter(|&l| l > 1).collect();
        return *longer.choose(rng).expect("longer training programs exist");
    }
    *lengths
        .choose(rng)
        .expect("every split side has a feasible length")
}

/// Builds a task whose minimal solutions satisfy the side condition: for
/// train, some minimal solution is in the train distribution; for test,
/// every minimal solution is in the test distribution.
pub fn build_task(split: Split, side: Side, seed: u64) -> Result<Task<Dc>, TaskgenError> {
    build_task_with_budget(split, side, seed, DEFAULT_STATE_BUDGET)
}

pub fn build_task_with_budget(
    split: Split,
    side: Side,
    seed: u64,
    budget: usize,
) -> Result<Task<Dc>, TaskgenError> {
    let mut rng = task_rng(split, side, seed);
    // the length is fixed up front so the index only goes as deep as needed
    let len = pick_length(&mut rng, split, side);
    for attempt in 1..=MAX_ATTEMPTS {
        let inputs = sample_inputs(&mut rng);
        let index = SolutionIndex::build(&inputs, split, len.min(MAX_INDEX_LENGTH), budget)?;
        let n_inputs = inputs[0].len();
        let found = if len > MAX_INDEX_LENGTH {
            // longer than anything indexed: a program whose output the index
            // has never seen has no shorter solution
            (0..200).find_map(|_| {
                let (calls, out) = random_walk(&mut rng, &inputs, len)?;
                index.lookup(&out).is_none().then_some((calls, out))
            })
        } else {
            let candidates: Vec<u32> = index
                .output_ids()
                .into_iter()
                .filter(|id| {
                    let info = &index.outputs[id];
                    info.min_len as usize == len
                        && match side {
                            Side::Train => info.any_train,
                            Side::Test => info.all_test,
                        }
                })
                .collect();
            candidates.choose(&mut rng).map(|&id| {
                let info = &index.outputs[&id];
                (
                    index.solution(info, side == Side::Train),
                    index.signature(id),
                )
            })
        };
        let Some((calls, outputs)) = found else {
            debug!("dc {split} {side} seed {seed}: attempt {attempt} found no length-{len} task");
            continue;
        };
        let program = name_program(&mut rng, n_inputs, &calls);
        let spec = Spec::new(inputs.into_iter().zip(outputs));
        debug!(
            "dc {split} {side} seed {seed}: attempt {attempt}, {} states",
            index.num_states()
        );
        return Ok(Task {
            split,
            side,
            seed,
            spec,
            program,
        });
    }
    Err(TaskgenError::GenerationTimeout {
        split,
        side,
        seed,
        attempts: MAX_ATTEMPTS,
    })
}

/// Re-enumerates the task's inputs from scratch and confirms the solution
/// length is minimal and, for test tasks of a split that separates the
/// sides, that no minimal-length solution is in the train distribution
/// (for train tasks, that one is).
pub fn check_minimal_solutions(task: &Task<Dc>) -> Result<(), String> {
    let m = task.program.len();
    let inputs: Vec<Vec<DcValue>> = task.spec.examples.iter().map(|e| e.input.clone()).collect();
    let outputs = task.spec.outputs();
    let index = SolutionIndex::build(
        &inputs,
        task.split,
        m.min(MAX_INDEX_LENGTH),
        DEFAULT_STATE_BUDGET,
    )
    .map_err(|e| e.to_string())?;
    let Some(info) = index.lookup(&outputs) else {
        if m > MAX_INDEX_LENGTH && !task.split.lengths(Side::Train).contains(&m) {
            return Ok(());
        }
        return Err(format!(
            "no solution of length {m} found for {}",
            task.program
        ));
    };
    if info.min_len as usize != m {
        let shorter = Dc::combine(&inputs[0], &index.solution(info, false));
        return Err(format!("shorter solution exists: {shorter}"));
    }
    match task.side {
        Side::Train if !info.any_train => {
            Err("no minimal solution in the train distribution".into())
        }
        Side::Test if task.split.kind != SplitKind::NoGeneralization && info.any_train => {
            let train = Dc::combine(&inputs[0], &index.solution(info, true));
            Err(format!("train-distribution solution exists: {train}"))
        }
        _ => Ok(()),
    }
}

/// Depth-first re-check that shares nothing with [`SolutionIndex`]: walks
/// every dead-code-free program up to the solution's length, stopping at
/// the first one that is shorter or (for test tasks) in the train
/// distribution. Exponential; meant for short programs.
pub fn brute_force_check(task: &Task<Dc>) -> Result<(), String> {
    let m = task.program.len();
    let states: Vec<DcState> = task.spec.examples.iter().map(|e| e.state.clone()).collect();
    let outputs = task.spec.outputs();
    let n_inputs = states[0].bindings.len();
    let mut parts = Vec::with_capacity(m);
    let mut unread = Vec::new();
    let check_train = task.side == Side::Test && task.split.kind != SplitKind::NoGeneralization;
    search(
        &task.split,
        check_train,
        m,
        n_inputs,
        &states,
        &outputs,
        &mut parts,
        &mut unread,
    )
}

#[allow(clippy::too_many_arguments)]
fn search(
    split: &Split,
    check_train: bool,
    m: usize,
    n_inputs: usize,
    states: &[DcState],
    outputs: &[DcValue],
    parts: &mut Vec<(DcCall, PartFacts)>,
    unread: &mut Vec<Var>,
) -> Result<(), String> {
    let depth = parts.len() + 1;
    let remaining = m - depth;
    let target = states[0].next_var().ok_or("variable pool exhausted")?;
    let vars: Vec<Var> = states[0].bindings.iter().map(|(v, _)| *v).collect();
    for (op, lambda) in Operation::with_lambdas() {
        let arity = op.operands().len();
        let arg_lists: Vec<Vec<Var>> = if arity == 1 {
            vars.iter().map(|&v| vec![v]).collect()
        } else {
            vars.iter()
                .flat_map(|&a| vars.iter().map(move |&b| vec![a, b]))
                .collect()
        };
        for args in arg_lists {
            let call = DcCall::new(op, lambda, args);
            if !typecheck_call(&call, &states[0]) {
                continue;
            }
            let still_unread: Vec<Var> = unread
                .iter()
                .copied()
                .filter(|v| !call.args.contains(v))
                .collect();
            if still_unread.len() + 1 > remaining + 1 {
                continue;
            }
            let Ok(results) = states
                .iter()
                .map(|s| execute_call(&call, s))
                .collect::<Result<Vec<_>, _>>()
            else {
                continue;
            };
            let part = dc_part(&call);
            parts.push((call, part));
            if results == outputs {
                let facts: Vec<PartFacts> = parts.iter().map(|(_, p)| *p).collect();
                let program = Dc::combine(
                    &states[0].bindings[..n_inputs]
                        .iter()
                        .map(|(_, v)| v.clone())
                        .collect(),
                    &parts.iter().map(|(c, _)| c.clone()).collect::<Vec<_>>(),
                );
                if depth < m {
                    return Err(format!("shorter solution exists: {program}"));
                }
                if check_train && split.contains(Side::Train, &facts) {
                    return Err(format!("train-distribution solution exists: {program}"));
                }
            }
            let repeats = (0..states[0].bindings.len()).any(|j| {
                states
                    .iter()
                    .zip(&results)
                    .all(|(s, r)| &s.bindings[j].1 == r)
            });
            if remaining > 0 && !repeats {
                let next: Vec<DcState> = states
                    .iter()
                    .zip(results)
                    .map(|(s, r)| s.bind(target, r))
                    .collect();
                let mut next_unread = still_unread;
                next_unread.push(target);
                search(
                    split,
                    check_train,
                    m,
                    n_inputs,
                    &next,
                    outputs,
                    parts,
                    &mut next_unread,
                )?;
            }
            parts.pop();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::split::DomainKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn list(xs: &[i64]) -> DcValue {
        DcValue::List(xs.to_vec())
    }

    #[test]
    fn inputs_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let ex = sample_inputs(&mut rng);
            assert_eq!(ex.len(), NUM_EXAMPLES);
            let arity = ex[0].len();
            assert!((1..=2).contains(&arity));
            for inputs in &ex {
                assert_eq!(inputs.len(), arity);
                for (v, first) in inputs.iter().zip(&ex[0]) {
                    assert_eq!(v.ty(), first.ty());
                    match v {
                        DcValue::List(xs) => {
                            assert!((1..=MAX_LIST_LEN).contains(&xs.len()));
                            assert!(xs.iter().all(|x| x.abs() <= INPUT_BOUND));
                        }
                        DcValue::Int(x) => assert!(x.abs() <= INPUT_BOUND),
                    }
                }
            }
        }
    }

    #[test]
    fn index_finds_square_then_sort() {
        let inputs = vec![vec![list(&[5, 3, -4])]];
        let split = Split::new(DomainKind::DeepCoder, SplitKind::NoGeneralization);
        let index = SolutionIndex::build(&inputs, split, 2, DEFAULT_STATE_BUDGET).unwrap();
        let info = index.lookup(&[list(&[9, 16, 25])]).unwrap();
        assert_eq!(info.min_len, 2);
        let calls = index.solution(info, false);
        let program = Dc::combine(&inputs[0], &calls);
        assert_eq!(program.execute(&inputs[0]).unwrap(), list(&[9, 16, 25]));
        // every indexed program re-executes to its signature
        for (out, info) in index.entries() {
            let program = Dc::combine(&inputs[0], &index.solution(info, false));
            assert_eq!(program.len(), info.min_len as usize);
            assert_eq!(&program.execute(&inputs[0]).unwrap(), &out[0]);
        }
    }

    #[test]
    fn summary_keys_agree_with_split_predicates() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sigs = Operation::with_lambdas();
        for kind in SplitKind::ALL {
            let split = Split::new(DomainKind::DeepCoder, kind);
            for _ in 0..2000 {
                let len = rng.gen_range(1..=5);
                let parts: Vec<PartFacts> = (0..len)
                    .map(|_| {
                        let (op, l) = *sigs.choose(&mut rng).unwrap();
                        dc_part(&DcCall::new(op, l, vec![]))
                    })
                    .collect();
                let key = parts
                    .iter()
                    .enumerate()
                    .fold(0, |k, (i, p)| extend_key(kind, k, i, *p));
                let rep = representative_parts(kind, key, len);
                for side in Side::ALL {
                    assert_eq!(
                        split.contains(side, &parts),
                        split.contains(side, &rep),
                        "{kind} {side} {parts:?}"
                    );
                }
            }
        }
    }

    /// Every program up to `depth` statements, without any pruning, grouped
    /// by output: (minimal length, some minimal one in train, all in test).
    fn unpruned_outputs(
        inputs: &[Vec<DcValue>],
        split: Split,
        depth: usize,
    ) -> FxHashMap<Vec<DcValue>, (usize, bool, bool)> {
        fn walk(
            states: &[DcState],
            split: Split,
            depth: usize,
            parts: &mut Vec<PartFacts>,
            out: &mut FxHashMap<Vec<DcValue>, (usize, bool, bool)>,
        ) {
            let target = states[0].next_var().unwrap();
            let vars: Vec<Var> = states[0].bindings.iter().map(|(v, _)| *v).collect();
            for (op, lambda) in Operation::with_lambdas() {
                for a in &vars {
                    for b in &vars {
                        let args = if op.operands().len() == 1 {
                            if a != b {
                                continue;
                            }
                            vec![*a]
                        } else {
                            vec![*a, *b]
                        };
                        let call = DcCall::new(op, lambda, args);
                        if !typecheck_call(&call, &states[0]) {
                            continue;
                        }
                        let Ok(results) = states
                            .iter()
                            .map(|s| execute_call(&call, s))
                            .collect::<Result<Vec<_>, _>>()
                        else {
                            continue;
                        };
                        parts.push(dc_part(&call));
                        let len = parts.len();
                        let train = split.contains(Side::Train, parts);
                        let test = split.contains(Side::Test, parts);
                        let e = out.entry(results.clone()).or_insert((len, false, true));
                        if len < e.0 {
                            *e = (len, train, test);
                        } else if e.0 == len {
                            e.1 |= train;
                            e.2 &= test;
                        }
                        if len < depth {
                            let next: Vec<DcState> = states
                                .iter()
                                .zip(results)
                                .map(|(s, r)| s.bind(target, r))
                                .collect();
                            walk(&next, split, depth, parts, out);
                        }
                        parts.pop();
                    }
                }
            }
        }
        let states: Vec<DcState> = inputs.iter().map(|i| Dc::initial_state(i)).collect();
        let mut out = FxHashMap::default();
        walk(&states, split, depth, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn index_matches_unpruned_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in SplitKind::ALL {
            let split = Split::new(DomainKind::DeepCoder, kind);
            for _ in 0..2 {
                let inputs = sample_inputs(&mut rng);
                let expected = unpruned_outputs(&inputs, split, 3);
                let index = SolutionIndex::build(&inputs, split, 3, DEFAULT_STATE_BUDGET).unwrap();
                let got: FxHashMap<Vec<DcValue>, (usize, bool, bool)> = index
                    .entries()
                    .map(|(out, i)| (out.to_vec(), (i.min_len as usize, i.any_train, i.all_test)))
                    .collect();
                assert_eq!(got.len(), expected.len(), "{kind} {inputs:?}");
                for (out, facts) in &expected {
                    assert_eq!(got.get(out), Some(facts), "{kind} {inputs:?} -> {out:?}");
                }
            }
        }
    }

    #[test]
    fn identity_output_has_length_one() {
        let inputs = vec![vec![list(&[1, 2, 3])]];
        let split = Split::new(DomainKind::DeepCoder, SplitKind::NoGeneralization);
        let index = SolutionIndex::build(&inputs, split, 2, DEFAULT_STATE_BUDGET).unwrap();
        let info = index.lookup(&[list(&[1, 2, 3])]).unwrap();
        assert_eq!(info.min_len, 1);
    }

    #[test]
    fn feasible_lengths_per_split() {
        let dc = |k| Split::new(DomainKind::DeepCoder, k);
        assert_eq!(feasible_lengths(dc(SplitKind::Length), Side::Test), [5]);
        assert_eq!(
            feasible_lengths(dc(SplitKind::ComposeNewOperation), Side::Test),
            [2, 3, 4]
        );
        assert_eq!(
            feasible_lengths(dc(SplitKind::ComposeDifferentConcepts), Side::Test),
            [2, 3, 4]
        );
        assert_eq!(
            feasible_lengths(dc(SplitKind::NoGeneralization), Side::Train),
            [1, 2, 3, 4]
        );
    }

    #[test]
    fn built_tasks_pass_both_checks() {
        for kind in SplitKind::ALL {
            let split = Split::new(DomainKind::DeepCoder, kind);
            for side in Side::ALL {
                for seed in 0..3 {
                    let task = build_task(split, side, seed).unwrap();
                    crate::taskgen::check_task(&task).unwrap();
                    check_minimal_solutions(&task).unwrap();
                    if task.program.len() <= 3 {
                        brute_force_check(&task).unwrap();
                    }
                }
            }
        }
    }
}
