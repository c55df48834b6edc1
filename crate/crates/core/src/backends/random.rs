//! Uninformed baseline: proposals drawn from a generator seeded by the spec.

use std::hash::{Hash, Hasher};
use std::marker::PhantomData;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHasher;

use crate::deepcoder::{DcCall, DcType, DcValue, Operand, Operation, VALUE_BOUND};
use crate::domain::{render_subgoals, Dc, Domain, Example, Rf, Spec};
use crate::robustfill::RfExpression;
use crate::search::{Backend, Proposal, Role};
use crate::taskgen::rf::{random_expression, Slot};

/// How to draw one random proposal for a domain.
pub trait RandomProposals: Domain {
    fn random_subprogram(rng: &mut ChaCha8Rng, spec: &Spec<Self>) -> Self::Subprogram;
    fn random_subgoal(rng: &mut ChaCha8Rng, example: &Example<Self>) -> Self::Value;
}

impl RandomProposals for Rf {
    fn random_subprogram(rng: &mut ChaCha8Rng, _spec: &Spec<Rf>) -> RfExpression {
        random_expression(rng, Slot::ANY)
    }

    /// A nonempty prefix of the remaining output.
    fn random_subgoal(rng: &mut ChaCha8Rng, example: &Example<Rf>) -> String {
        let out = &example.output;
        if out.is_empty() {
            return String::new();
        }
        out[..rng.gen_range(1..=out.len())].to_owned()
    }
}

impl RandomProposals for Dc {
    /// A call that typechecks against the first example's bindings.
    fn random_subprogram(rng: &mut ChaCha8Rng, spec: &Spec<Dc>) -> DcCall {
        let bindings = &spec.examples[0].state.bindings;
        let of = |ty| -> Vec<_> {
            bindings
                .iter()
                .filter(|(_, v): &&(_, DcValue)| v.ty() == ty)
                .map(|(var, _)| *var)
                .collect()
        };
        let (ints, lists) = (of(DcType::Int), of(DcType::List));
        let usable: Vec<_> = Operation::with_lambdas()
            .into_iter()
            .filter(|(op, _)| {
                op.operands().iter().all(|s| match s {
                    Operand::Int => !ints.is_empty(),
                    Operand::List => !lists.is_empty(),
                })
            })
            .collect();
        let Some(&(op, lambda)) = usable.choose(rng) else {
            // no list binding at all: an ill-typed call the search will reject
            return DcCall::new(Operation::Sort, None, Vec::new());
        };
        let args = op
            .operands()
            .iter()
            .map(|s| {
                let pool = match s {
                    Operand::Int => &ints,
                    Operand::List => &lists,
                };
                *pool.choose(rng).expect("nonempty pool")
            })
            .collect();
        DcCall::new(op, lambda, args)
    }

    /// The final output half the time, otherwise a random value of its type.
    fn random_subgoal(rng: &mut ChaCha8Rng, example: &Example<Dc>) -> DcValue {
        if rng.gen_bool(0.5) {
            return example.output.clone();
        }
        let mut x = || rng.gen_range(-VALUE_BOUND..=VALUE_BOUND) / 8;
        match example.output {
            DcValue::Int(_) => DcValue::Int(x()),
            DcValue::List(_) => {
                let n = (x().unsigned_abs() % 6) as usize;
                DcValue::List((0..n).map(|_| x()).collect())
            }
        }
    }
}

/// Random proposals with random (descending) log-probabilities. The stream
/// is a pure function of the seed and the spec.
pub struct RandomBackend<D> {
    role: Role,
    seed: u64,
    _domain: PhantomData<D>,
}

impl<D> RandomBackend<D> {
    pub fn new(role: Role, seed: u64) -> Self {
        RandomBackend {
            role,
            seed,
            _domain: PhantomData,
        }
    }
}

impl<D: RandomProposals> RandomBackend<D> {
    fn rng(&self, spec: &Spec<D>) -> ChaCha8Rng {
        let mut h = FxHasher::default();
        self.seed.hash(&mut h);
        spec.hash(&mut h);
        ChaCha8Rng::seed_from_u64(h.finish())
    }
}

impl<D: RandomProposals> Backend<D> for RandomBackend<D> {
    fn role(&self) -> Role {
        self.role
    }

    fn propose(&self, spec: &Spec<D>, k: usize) -> Vec<Proposal> {
        if spec.is_empty() {
            return Vec::new();
        }
        let mut rng = self.rng(spec);
        let mut out: Vec<Proposal> = (0..k)
            .map(|_| {
                let text = match self.role {
                    Role::Subgoal => {
                        let values: Vec<D::Value> = spec
                            .examples
                            .iter()
                            .map(|e| D::random_subgoal(&mut rng, e))
                            .collect();
                        render_subgoals::<D>(&values)
                    }
                    Role::Synthesizer | Role::Combined => {
                        D::random_subprogram(&mut rng, spec).to_string()
                    }
                };
                Proposal::new(text, -rng.gen_range(0.0..5.0))
            })
            .collect();
        out.sort_by(|a, b| b.logp.total_cmp(&a.logp));
        out
    }
}
