//! Proposal sources for the search: a ground-truth oracle, exhaustive
//! enumerators, a random baseline, and a client for external models.

mod enumerative;
pub mod protocol;
mod random;
mod remote;

use crate::domain::{parse_subgoals, render_subgoals, Domain, Spec};
use crate::search::{Backend, Proposal, Role};
use crate::taskgen::{Trace, TraceStep};

pub use enumerative::{EnumBackend, Enumerate};
pub use random::{RandomBackend, RandomProposals};
pub use remote::{Endpoint, RemoteBackend, RemoteError};

/// Replays a ground-truth decomposition: whenever the spec matches a
/// recorded step, proposes that step's subgoals or subprogram with
/// log-probability 0; anything off the trace gets no proposals.
pub struct OracleBackend<D: Domain> {
    role: Role,
    steps: Vec<TraceStep<D>>,
}

impl<D: Domain> OracleBackend<D> {
    pub fn new(trace: &Trace<D>, role: Role) -> Self {
        OracleBackend {
            role,
            steps: trace.steps.clone(),
        }
    }
}

impl<D: Domain> Backend<D> for OracleBackend<D> {
    fn role(&self) -> Role {
        self.role
    }

    fn propose(&self, spec: &Spec<D>, k: usize) -> Vec<Proposal> {
        if k == 0 {
            return Vec::new();
        }
        let found = self.steps.iter().find_map(|step| match self.role {
            Role::Subgoal => (step.spec == *spec).then(|| render_subgoals::<D>(&step.subgoals)),
            Role::Synthesizer => (step.spec.with_outputs(&step.subgoals) == *spec)
                .then(|| step.subprogram.to_string()),
            Role::Combined => (step.spec == *spec).then(|| step.subprogram.to_string()),
        });
        found
            .map(|text| vec![Proposal::new(text, 0.0)])
            .unwrap_or_default()
    }
}

/// A combined backend built from a subgoal and a synthesizer backend: each
/// subgoal proposal is handed to the synthesizer, and the pair is scored by
/// the sum of both log-probabilities.
pub struct ChainedBackend<S, Y> {
    subgoal: S,
    synthesizer: Y,
}

impl<S, Y> ChainedBackend<S, Y> {
    pub fn new(subgoal: S, synthesizer: Y) -> Self {
        ChainedBackend {
            subgoal,
            synthesizer,
        }
    }
}

impl<D: Domain, S: Backend<D>, Y: Backend<D>> Backend<D> for ChainedBackend<S, Y> {
    fn role(&self) -> Role {
        Role::Combined
    }

    fn propose(&self, spec: &Spec<D>, k: usize) -> Vec<Proposal> {
        let mut out = Vec::new();
        for sg in self.subgoal.propose(spec, k).into_iter().take(k) {
            let Some(values) = parse_subgoals::<D>(&sg.text, spec.len()) else {
                continue;
            };
            let target = spec.with_outputs(&values);
            for sp in self.synthesizer.propose(&target, k).into_iter().take(k) {
                out.push(Proposal::new(sp.text, sg.logp + sp.logp));
            }
        }
        out.sort_by(|a, b| b.logp.total_cmp(&a.logp));
        out.truncate(k);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Rf;
    use crate::robustfill::RfProgram;
    use crate::taskgen::decompose;

    fn name_task() -> (Spec<Rf>, Trace<Rf>) {
        let program: RfProgram =
            "GetFrom(' ') | Const('.') | Compose(ToCase(PROPER), GetToken(WORD, 1))"
                .parse()
                .unwrap();
        let spec: Spec<Rf> = Spec::new(
            [
                "TURING, Alan",
                "knuth Donald",
                "Hopper Grace",
                "DIJKSTRA... Edsger",
            ]
            .map(|i| (i.to_string(), program.execute(i).unwrap())),
        );
        let trace = decompose(&spec, &program).unwrap();
        (spec, trace)
    }

    #[test]
    fn oracle_proposes_the_recorded_step() {
        let (spec, trace) = name_task();
        let subgoal = OracleBackend::new(&trace, Role::Subgoal);
        let proposals = subgoal.propose(&spec, 3);
        assert_eq!(proposals.len(), 1);
        assert_eq!(proposals[0].logp, 0.0);
        assert_eq!(
            parse_subgoals::<Rf>(&proposals[0].text, 4).unwrap(),
            ["Alan", "Donald", "Grace", "Edsger"]
        );
        let synthesizer = OracleBackend::new(&trace, Role::Synthesizer);
        let target = spec.with_outputs(&trace.steps[0].subgoals);
        assert_eq!(synthesizer.propose(&target, 1)[0].text, "GetFrom(' ')");
        let combined = OracleBackend::new(&trace, Role::Combined);
        assert_eq!(
            combined.propose(&trace.steps[1].spec, 1)[0].text,
            "Const('.')"
        );
    }

    #[test]
    fn oracle_is_silent_off_trace() {
        let (spec, trace) = name_task();
        let off = spec.with_outputs(&["x", "y", "z", "w"].map(String::from));
        for role in [Role::Subgoal, Role::Synthesizer, Role::Combined] {
            assert!(OracleBackend::new(&trace, role).propose(&off, 5).is_empty());
        }
    }

    #[test]
    fn chained_oracles_match_the_combined_oracle() {
        let (_, trace) = name_task();
        let chained = ChainedBackend::new(
            OracleBackend::new(&trace, Role::Subgoal),
            OracleBackend::new(&trace, Role::Synthesizer),
        );
        let combined = OracleBackend::new(&trace, Role::Combined);
        for step in &trace.steps {
            assert_eq!(
                chained.propose(&step.spec, 1),
                combined.propose(&step.spec, 1)
            );
        }
    }
}
