//! Exhaustive single-subprogram synthesis against exact subgoals.

use std::marker::PhantomData;
use std::time::{Duration, Instant};

use log::warn;
use rustc_hash::FxHashMap;

use crate::deepcoder::{execute_call, typecheck_call, DcCall, DcType, Operand, Operation, Var};
use crate::domain::{Dc, Domain, Rf, Spec};
use crate::robustfill::{
    execute_expression, is_character, matches, Boundary, Case, ComposeInner, Index, Modification,
    Pattern, Position, RfExpression, Span, Substring, DELIMITERS, MAX_INPUT_LEN,
};
use crate::search::{Backend, Proposal, Role};

/// Per-domain enumeration of single subprograms in a fixed size order.
pub trait Enumerate: Domain {
    /// Up to `k` subprograms (best first) whose results equal the spec's
    /// outputs on every example. `None` when the deadline passed first.
    fn enumerate(spec: &Spec<Self>, k: usize, deadline: Instant) -> Option<Vec<Self::Subprogram>>;
}

/// Synthesizer that proposes exact matches found by enumeration, scored
/// `-rank` so earlier (smaller) programs rank higher.
pub struct EnumBackend<D> {
    budget: Duration,
    _domain: PhantomData<D>,
}

impl<D> EnumBackend<D> {
    pub const DEFAULT_BUDGET: Duration = Duration::from_secs(60);

    pub fn new(budget: Duration) -> Self {
        EnumBackend {
            budget,
            _domain: PhantomData,
        }
    }
}

impl<D> Default for EnumBackend<D> {
    fn default() -> Self {
        Self::new(Self::DEFAULT_BUDGET)
    }
}

impl<D: Enumerate> Backend<D> for EnumBackend<D> {
    fn role(&self) -> Role {
        Role::Synthesizer
    }

    fn propose(&self, spec: &Spec<D>, k: usize) -> Vec<Proposal> {
        if k == 0 || spec.is_empty() {
            return Vec::new();
        }
        let Some(found) = D::enumerate(spec, k, Instant::now() + self.budget) else {
            warn!(
                "enumeration exceeded its {:.1}s budget; no proposals",
                self.budget.as_secs_f64()
            );
            return Vec::new();
        };
        found
            .into_iter()
            .filter(|sub| spec.run(sub).ok().as_deref() == Some(&spec.outputs()[..]))
            .take(k)
            .enumerate()
            .map(|(rank, sub)| Proposal::new(sub.to_string(), -(rank as f64)))
            .collect()
    }
}

// ---------------------------------------------------------------- DeepCoder

impl Enumerate for Dc {
    /// Order: operation, then operand variables, then lambda.
    fn enumerate(spec: &Spec<Dc>, k: usize, deadline: Instant) -> Option<Vec<DcCall>> {
        let first = &spec.examples[0].state;
        let typed = |ty: DcType| -> Vec<Var> {
            first
                .bindings
                .iter()
                .filter(|(_, v)| v.ty() == ty)
                .map(|(var, _)| *var)
                .collect()
        };
        let ints = typed(DcType::Int);
        let lists = typed(DcType::List);
        let mut out = Vec::new();
        for op in Operation::ALL {
            if Instant::now() > deadline {
                return None;
            }
            let mut arg_tuples: Vec<Vec<Var>> = vec![Vec::new()];
            for sort in op.operands() {
                let pool = match sort {
                    Operand::Int => &ints,
                    Operand::List => &lists,
                };
                arg_tuples = arg_tuples
                    .into_iter()
                    .flat_map(|prefix| {
                        pool.iter().map(move |v| {
                            let mut next = prefix.clone();
                            next.push(*v);
                            next
                        })
                    })
                    .collect();
            }
            let lambdas: Vec<_> = match op.lambda_kind() {
                None => vec![None],
                Some(kind) => crate::deepcoder::Lambda::of_kind(kind).map(Some).collect(),
            };
            for args in &arg_tuples {
                for lambda in &lambdas {
                    let call = DcCall::new(op, *lambda, args.clone());
                    let hit = spec.examples.iter().all(|e| {
                        typecheck_call(&call, &e.state)
                            && execute_call(&call, &e.state).as_ref() == Ok(&e.output)
                    });
                    if hit {
                        out.push(call);
                        if out.len() == k {
                            return Some(out);
                        }
                    }
                }
            }
        }
        Some(out)
    }
}

// --------------------------------------------------------------- RobustFill

/// Positions tried by `SubStr`: anything further out clamps to the same
/// character on inputs of at most [`MAX_INPUT_LEN`] characters.
const POSITION_RANGE: i64 = MAX_INPUT_LEN as i64 + 1;

fn characters() -> impl Iterator<Item = char> {
    ('0'..='9')
        .chain('A'..='Z')
        .chain('a'..='z')
        .chain(DELIMITERS.iter().map(|&b| b as char))
}

fn pick(spans: &[Span], index: Index) -> Option<Span> {
    let i = index.get();
    let n = spans.len() as i64;
    let at = if i > 0 { i - 1 } else { n + i };
    (0..n).contains(&at).then(|| spans[at as usize])
}

fn substrs() -> impl Iterator<Item = Substring> {
    let positions = || {
        (1..=POSITION_RANGE)
            .chain(-POSITION_RANGE..=-1)
            .map(|k| Position::new(k).expect("within range"))
    };
    positions().flat_map(move |a| positions().map(move |b| Substring::SubStr(a, b)))
}

fn simple_substrings() -> impl Iterator<Item = Substring> {
    Pattern::all()
        .flat_map(|p| Index::all().map(move |i| Substring::GetToken(p, i)))
        .chain(Pattern::all().map(Substring::GetUpto))
        .chain(Pattern::all().map(Substring::GetFrom))
}

/// Modifications whose character argument (if any) is enumerated rather
/// than read off the goal.
fn plain_modifications() -> impl Iterator<Item = Modification> {
    let delims = || DELIMITERS.iter().map(|&b| b as char);
    Case::ALL
        .into_iter()
        .map(Modification::ToCase)
        .chain(delims().flat_map(move |a| delims().map(move |b| Modification::Replace(a, b))))
        .chain(std::iter::once(Modification::Trim))
        .chain(Pattern::all().flat_map(|p| Index::all().map(move |i| Modification::GetFirst(p, i))))
        .chain(Pattern::all().map(Modification::GetAll))
        .chain(Pattern::all().flat_map(|p| Index::all().map(move |i| Modification::Remove(p, i))))
        .chain(Pattern::all().map(Modification::RemoveAll))
}

fn all_modifications() -> impl Iterator<Item = Modification> {
    plain_modifications()
        .chain(Pattern::all().flat_map(|p| {
            Index::all()
                .flat_map(move |i| characters().map(move |c| Modification::Substitute(p, i, c)))
        }))
        .chain(
            Pattern::all()
                .flat_map(|p| characters().map(move |c| Modification::SubstituteAll(p, c))),
        )
}

fn run_modification(m: Modification, text: &str) -> Option<String> {
    execute_expression(&RfExpression::Modification(m), text).ok()
}

fn all_produce(m: Modification, texts: &[&str], goals: &[&str]) -> bool {
    texts
        .iter()
        .zip(goals)
        .all(|(t, g)| run_modification(m, t).as_deref() == Some(*g))
}

/// The character `c` such that replacing `span` of `text` by `c` gives `goal`.
fn replacement_char(text: &str, span: Span, goal: &str) -> Option<char> {
    let (a, b) = span;
    if goal.len() + (b - a) != text.len() + 1 {
        return None;
    }
    if goal.get(..a)? != &text[..a] || goal.get(a + 1..)? != &text[b..] {
        return None;
    }
    goal[a..].chars().next().filter(|c| is_character(*c))
}

/// Every modification mapping each text to its goal.
fn matching_modifications(texts: &[&str], goals: &[&str]) -> Vec<Modification> {
    let mut out: Vec<Modification> = plain_modifications()
        .filter(|m| all_produce(*m, texts, goals))
        .collect();
    for p in Pattern::all() {
        let spans0 = matches(p, texts[0]);
        for i in Index::all() {
            let Some(span) = pick(&spans0, i) else {
                continue;
            };
            if let Some(c) = replacement_char(texts[0], span, goals[0]) {
                let m = Modification::Substitute(p, i, c);
                if all_produce(m, texts, goals) {
                    out.push(m);
                }
            }
        }
        // the first example with a match pins down the character
        let pinned = texts.iter().zip(goals).find_map(|(t, g)| {
            matches(p, t)
                .first()
                .map(|&(a, _)| g.get(a..).and_then(|s| s.chars().next()))
        });
        let chars: Vec<char> = match pinned {
            Some(Some(c)) => vec![c],
            Some(None) => Vec::new(),
            None => characters().collect(),
        };
        for c in chars.into_iter().filter(|c| is_character(*c)) {
            let m = Modification::SubstituteAll(p, c);
            if all_produce(m, texts, goals) {
                out.push(m);
            }
        }
    }
    out
}

type Anchor = (Pattern, Index, Boundary);

/// Precomputed per-example match data for the step inputs.
struct Inputs<'a> {
    texts: Vec<&'a str>,
    /// Groups of anchors that resolve to the same position on every example.
    anchors: Vec<(Vec<usize>, Vec<Anchor>)>,
}

impl<'a> Inputs<'a> {
    fn new(texts: Vec<&'a str>) -> Self {
        let spans: Vec<Vec<Vec<Span>>> = texts
            .iter()
            .map(|t| Pattern::all().map(|p| matches(p, t)).collect())
            .collect();
        let mut groups: FxHashMap<Vec<usize>, Vec<Anchor>> = FxHashMap::default();
        let mut order = Vec::new();
        for (pi, p) in Pattern::all().enumerate() {
            for i in Index::all() {
                for b in Boundary::ALL {
                    let positions: Option<Vec<usize>> = spans
                        .iter()
                        .map(|per| {
                            pick(&per[pi], i).map(|s| match b {
                                Boundary::Start => s.0,
                                Boundary::End => s.1,
                            })
                        })
                        .collect();
                    if let Some(positions) = positions {
                        let entry = groups.entry(positions.clone()).or_default();
                        if entry.is_empty() {
                            order.push(positions);
                        }
                        entry.push((p, i, b));
                    }
                }
            }
        }
        let anchors = order
            .into_iter()
            .map(|k| {
                let v = groups.remove(&k).expect("grouped");
                (k, v)
            })
            .collect();
        Inputs { texts, anchors }
    }

    fn span(l: Anchor, r: Anchor) -> Substring {
        Substring::GetSpan {
            left: l.0,
            left_index: l.1,
            left_boundary: l.2,
            right: r.0,
            right_index: r.1,
            right_boundary: r.2,
        }
    }

    /// Substrings producing exactly `goals`.
    fn substrings(&self, goals: &[&str]) -> Vec<Substring> {
        let hits = |s: &Substring| {
            self.texts.iter().zip(goals).all(|(t, g)| {
                execute_expression(&RfExpression::Substring(*s), t).as_deref() == Ok(*g)
            })
        };
        let mut out: Vec<Substring> = substrs().chain(simple_substrings()).filter(hits).collect();
        if goals.iter().any(|g| g.is_empty()) {
            return out;
        }
        let lefts: Vec<&(Vec<usize>, Vec<Anchor>)> = self
            .anchors
            .iter()
            .filter(|(pos, _)| {
                pos.iter()
                    .zip(&self.texts)
                    .zip(goals)
                    .all(|((&a, t), g)| t[a..].starts_with(g))
            })
            .collect();
        for (lpos, lgroup) in lefts {
            for (rpos, rgroup) in &self.anchors {
                let fits = lpos
                    .iter()
                    .zip(rpos)
                    .zip(goals)
                    .all(|((&a, &b), g)| b == a + g.len());
                if fits {
                    for l in lgroup {
                        for r in rgroup {
                            out.push(Self::span(*l, *r));
                        }
                    }
                }
            }
        }
        out
    }

    /// One representative per distinct result vector over all `Compose`
    /// arguments; the representative has the shortest rendering.
    fn compose_arguments(&self, deadline: Instant) -> Option<Vec<(Vec<String>, ComposeInner)>> {
        let mut best: FxHashMap<Vec<String>, (usize, String, ComposeInner)> = FxHashMap::default();
        let mut offer = |values: Vec<String>, inner: ComposeInner| {
            let text = inner.to_string();
            let key = (text.len(), text);
            match best.get(&values) {
                Some((len, t, _)) if (*len, t) <= (key.0, &key.1) => {}
                _ => {
                    best.insert(values, (key.0, key.1, inner));
                }
            }
        };
        let run_all = |e: &RfExpression| -> Option<Vec<String>> {
            self.texts
                .iter()
                .map(|t| execute_expression(e, t).ok())
                .collect()
        };
        for s in substrs().chain(simple_substrings()) {
            if let Some(v) = run_all(&RfExpression::Substring(s)) {
                offer(v, ComposeInner::Substring(s));
            }
        }
        if Instant::now() > deadline {
            return None;
        }
        let shortest = |group: &[Anchor]| {
            *group
                .iter()
                .min_by_key(|a| {
                    let text = format!("{}, {}, {}", a.0, a.1, a.2);
                    (text.len(), text)
                })
                .expect("nonempty group")
        };
        let reps: Vec<(&Vec<usize>, Anchor)> =
            self.anchors.iter().map(|(p, g)| (p, shortest(g))).collect();
        for (lpos, l) in &reps {
            for (rpos, r) in &reps {
                if lpos.iter().zip(*rpos).all(|(a, b)| a < b) {
                    let v = lpos
                        .iter()
                        .zip(*rpos)
                        .zip(&self.texts)
                        .map(|((&a, &b), t)| t[a..b].to_owned())
                        .collect();
                    offer(v, ComposeInner::Substring(Self::span(*l, *r)));
                }
            }
        }
        if Instant::now() > deadline {
            return None;
        }
        for m in all_modifications() {
            if let Some(v) = run_all(&RfExpression::Modification(m)) {
                offer(v, ComposeInner::Modification(m));
            }
        }
        let mut out: Vec<(Vec<String>, ComposeInner)> = best
            .into_iter()
            .map(|(v, (_, _, inner))| (v, inner))
            .collect();
        out.sort_by(|a, b| a.1.cmp(&b.1));
        Some(out)
    }
}

fn rank(exprs: &mut Vec<RfExpression>) {
    let mut keyed: Vec<(usize, String, RfExpression)> = exprs
        .drain(..)
        .map(|e| {
            let t = e.to_string();
            (t.len(), t, e)
        })
        .collect();
    keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    keyed.dedup_by(|a, b| a.1 == b.1);
    exprs.extend(keyed.into_iter().map(|(_, _, e)| e));
}

impl Enumerate for Rf {
    /// Order: category (constant, substring, modification, composition),
    /// then serialized length, then text. Later categories are only
    /// explored when earlier ones yield fewer than `k` matches.
    fn enumerate(spec: &Spec<Rf>, k: usize, deadline: Instant) -> Option<Vec<RfExpression>> {
        let texts: Vec<&str> = spec.examples.iter().map(|e| e.state.as_str()).collect();
        let goals: Vec<&str> = spec.examples.iter().map(|e| e.output.as_str()).collect();
        let mut out = Vec::new();

        let mut chars = goals[0].chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            if is_character(c) && goals.iter().all(|g| *g == goals[0]) {
                out.push(RfExpression::ConstStr(c));
            }
        }
        if out.len() >= k {
            return Some(out);
        }

        let inputs = Inputs::new(texts.clone());
        let mut found: Vec<RfExpression> = inputs
            .substrings(&goals)
            .into_iter()
            .map(RfExpression::Substring)
            .collect();
        rank(&mut found);
        out.extend(found);
        if out.len() >= k {
            out.truncate(k);
            return Some(out);
        }
        if Instant::now() > deadline {
            return None;
        }

        let mut found: Vec<RfExpression> = matching_modifications(&texts, &goals)
            .into_iter()
            .map(RfExpression::Modification)
            .collect();
        rank(&mut found);
        out.extend(found);
        if out.len() >= k {
            out.truncate(k);
            return Some(out);
        }

        let mut found = Vec::new();
        for (values, inner) in inputs.compose_arguments(deadline)? {
            if Instant::now() > deadline {
                return None;
            }
            let mids: Vec<&str> = values.iter().map(String::as_str).collect();
            for m in matching_modifications(&mids, &goals) {
                found.push(RfExpression::Compose(m, inner));
            }
        }
        rank(&mut found);
        out.extend(found);
        out.truncate(k);
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deepcoder::DcValue;
    use crate::split::{Side, Split, SplitKind};
    use crate::taskgen::{decompose, Generate};

    fn far() -> Instant {
        Instant::now() + Duration::from_secs(600)
    }

    fn rf_step(pairs: &[(&str, &str)]) -> Spec<Rf> {
        Spec::new(pairs.iter().map(|(i, o)| (i.to_string(), o.to_string())))
    }

    #[test]
    fn dc_finds_square() {
        let spec: Spec<Dc> = Spec::new([(
            vec![DcValue::List(vec![5, 3, -4])],
            DcValue::List(vec![25, 9, 16]),
        )]);
        let found: Vec<String> = Dc::enumerate(&spec, 100, far())
            .unwrap()
            .iter()
            .map(ToString::to_string)
            .collect();
        assert!(found.contains(&"Map (**2) x0".to_string()), "{found:?}");
    }

    #[test]
    fn dc_unreachable_goal_is_empty() {
        let spec: Spec<Dc> =
            Spec::new([(vec![DcValue::List(vec![1, 2])], DcValue::List(vec![1000]))]);
        assert!(EnumBackend::<Dc>::default().propose(&spec, 10).is_empty());
    }

    #[test]
    fn rf_constant_first() {
        let spec = rf_step(&[("ab", "."), ("cd", ".")]);
        let p = EnumBackend::<Rf>::default().propose(&spec, 1);
        assert_eq!(p[0].text, "Const('.')");
        assert_eq!(p[0].logp, 0.0);
    }

    #[test]
    fn rf_finds_name_parts() {
        let spec = rf_step(&[
            ("TURING, Alan", "Alan"),
            ("knuth Donald", "Donald"),
            ("Hopper Grace", "Grace"),
            ("DIJKSTRA... Edsger", "Edsger"),
        ]);
        let found = Rf::enumerate(&spec, 1000, far()).unwrap();
        assert_eq!(found[0].category(), crate::robustfill::Category::Substring);
        assert!(found.windows(2).all(|w| w[0].category() <= w[1].category()));
        let texts: Vec<String> = found.iter().map(ToString::to_string).collect();
        assert!(texts.contains(&"GetFrom(' ')".to_string()));
        let spec = rf_step(&[
            ("TURING, Alan", "Turing"),
            ("knuth Donald", "Knuth"),
            ("Hopper Grace", "Hopper"),
            ("DIJKSTRA... Edsger", "Dijkstra"),
        ]);
        let found = Rf::enumerate(&spec, 1, far()).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].category(), crate::robustfill::Category::Compose);
        for e in &spec.examples {
            assert_eq!(execute_expression(&found[0], &e.state).unwrap(), e.output);
        }
    }

    #[test]
    fn rf_proposals_are_ranked_and_exact() {
        let spec = rf_step(&[("a1 b22", "A1 B22"), ("x y", "X Y")]);
        let p = EnumBackend::<Rf>::default().propose(&spec, 20);
        assert!(!p.is_empty());
        for (rank, prop) in p.iter().enumerate() {
            assert_eq!(prop.logp, -(rank as f64));
            let e: RfExpression = prop.text.parse().unwrap();
            assert_eq!(spec.run(&e).unwrap(), spec.outputs());
        }
    }

    #[test]
    fn substitute_char_is_read_off_the_goal() {
        let spec = rf_step(&[("ab cd", "ab#cd"), ("x y z", "x#y z")]);
        let found: Vec<String> = Rf::enumerate(&spec, 1000, far())
            .unwrap()
            .iter()
            .map(ToString::to_string)
            .collect();
        assert!(
            found.contains(&"Substitute(' ', 1, '#')".to_string()),
            "{found:?}"
        );
    }

    /// Independent check: brute force every single-pattern modification
    /// with every character and compare with the goal-directed search.
    #[test]
    fn goal_directed_modifications_are_complete() {
        let texts = ["Ab-12 cd", "xY 3.4"];
        for m in all_modifications() {
            let goals: Vec<String> = match texts
                .iter()
                .map(|t| run_modification(m, t))
                .collect::<Option<Vec<_>>>()
            {
                Some(g) => g,
                None => continue,
            };
            let goals: Vec<&str> = goals.iter().map(String::as_str).collect();
            let found = matching_modifications(&texts, &goals);
            assert!(
                found.iter().any(|f| all_produce(*f, &texts, &goals)),
                "{m} not matched"
            );
            assert!(found.iter().all(|f| all_produce(*f, &texts, &goals)));
        }
    }

    fn check_trace_steps<D: Enumerate + Generate>(split: SplitKind, seeds: std::ops::Range<u64>) {
        let split = Split::new(D::KIND, split);
        for seed in seeds {
            for side in Side::ALL {
                let task = D::generate(split, side, seed).unwrap();
                let trace = decompose(&task.spec, &task.program).unwrap();
                for step in &trace.steps {
                    let target = step.spec.with_outputs(&step.subgoals);
                    let found = D::enumerate(&target, 1, far()).unwrap();
                    assert_eq!(found.len(), 1, "{} step {}", task.program, step.subprogram);
                    assert_eq!(target.run(&found[0]).unwrap(), step.subgoals);
                }
            }
        }
    }

    #[test]
    fn rf_covers_generated_steps() {
        for kind in SplitKind::ALL {
            check_trace_steps::<Rf>(kind, 0..3);
        }
    }

    #[test]
    fn dc_covers_generated_steps() {
        for kind in SplitKind::ALL {
            check_trace_steps::<Dc>(kind, 0..2);
        }
    }
}
