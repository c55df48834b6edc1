use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pbe_core::backends::{ChainedBackend, OracleBackend};
use pbe_core::deepcoder::{DcProgram, DcValue};
use pbe_core::robustfill::RfProgram;
use pbe_core::search::{exedec_search, nosubgoal_search, Role, SearchConfig};
use pbe_core::taskgen::{dc, decompose, rf, Generate};
use pbe_core::{Dc, DomainKind, Rf, Side, Split, SplitKind};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dc_case(seed: u64, len: usize) -> (DcProgram, Vec<Vec<DcValue>>) {
    let mut r = rng(seed);
    let inputs = dc::sample_inputs(&mut r);
    let types: Vec<_> = inputs[0].iter().map(DcValue::ty).collect();
    (dc::random_program(&mut r, &types, len), inputs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rf_print_parse_identity(seed: u64, len in 1usize..=10) {
        let p = rf::random_program(&mut rng(seed), len);
        let back: RfProgram = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn rf_concatenation_and_determinism(seed: u64, len in 1usize..=10) {
        let mut r = rng(seed);
        let p = rf::random_program(&mut r, len);
        let input = rf::random_input(&mut r);
        let whole = p.execute(&input);
        prop_assert_eq!(&whole, &p.execute(&input));
        let parts: Result<Vec<String>, _> = p.expressions.iter().map(|e| e.execute(&input)).collect();
        prop_assert_eq!(whole, parts.map(|v| v.concat()));
    }

    #[test]
    fn dc_print_parse_identity(seed: u64, len in 1usize..=5) {
        let (p, inputs) = dc_case(seed, len);
        let back: DcProgram = p.to_string().parse().unwrap();
        prop_assert_eq!(&back, &p);
        for i in &inputs {
            prop_assert_eq!(p.execute(i), back.execute(i));
        }
    }

    #[test]
    fn splits_are_disjoint(seed: u64, len in 1usize..=10) {
        let rfp = rf::random_program(&mut rng(seed), len);
        let (dcp, _) = dc_case(seed, len.min(5));
        for kind in SplitKind::ALL {
            if kind == SplitKind::NoGeneralization {
                continue;
            }
            let s = Split::new(DomainKind::RobustFill, kind);
            prop_assert!(!(s.in_train(&rfp) && s.in_test(&rfp)), "{} {}", kind, rfp);
            let s = Split::new(DomainKind::DeepCoder, kind);
            prop_assert!(!(s.in_train(&dcp) && s.in_test(&dcp)), "{} {}", kind, dcp);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Chained oracles inside the ablation find the same program as the
    /// decomposed search.
    #[test]
    fn ablation_matches_decomposed_search(seed in 0u64..1000, kind in 0usize..6, test: bool) {
        let side = if test { Side::Test } else { Side::Train };
        let split = Split::new(DomainKind::RobustFill, SplitKind::ALL[kind]);
        let task = Rf::generate(split, side, seed).unwrap();
        let trace = decompose(&task.spec, &task.program).unwrap();
        let config = SearchConfig::for_domain::<Rf>(3);
        let sub = OracleBackend::new(&trace, Role::Subgoal);
        let syn = OracleBackend::new(&trace, Role::Synthesizer);
        let a = exedec_search(&task.spec, &sub, &syn, &config, &mut ()).unwrap();
        let chained = ChainedBackend::new(sub, syn);
        let b = nosubgoal_search(&task.spec, &chained, &config, &mut ()).unwrap();
        prop_assert_eq!(a[0].program.to_string(), b[0].program.to_string());
        prop_assert!(task.spec.satisfied_by(&a[0].program));

        let split = Split::new(DomainKind::DeepCoder, SplitKind::ALL[kind]);
        let task = Dc::generate(split, side, seed).unwrap();
        let trace = decompose(&task.spec, &task.program).unwrap();
        let config = SearchConfig::for_domain::<Dc>(3);
        let sub = OracleBackend::new(&trace, Role::Subgoal);
        let syn = OracleBackend::new(&trace, Role::Synthesizer);
        let a = exedec_search(&task.spec, &sub, &syn, &config, &mut ()).unwrap();
        let chained = ChainedBackend::new(sub, syn);
        let b = nosubgoal_search(&task.spec, &chained, &config, &mut ()).unwrap();
        prop_assert_eq!(&a[0].program, &b[0].program);
        prop_assert!(task.spec.satisfied_by(&a[0].program));
    }
}
