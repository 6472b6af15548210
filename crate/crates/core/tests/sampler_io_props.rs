mod common;

use common::sampled;
use proptest::prelude::*;
use robsel_core::io::{canonical_string, content_hash, parse_instance, read_instance, write_instance, Layout};
use robsel_core::model::Criterion;
use robsel_core::rational::{self, int};
use robsel_core::samplers::{check_sampler_invariants, GeneratorId};

fn generator() -> impl Strategy<Value = GeneratorId> {
    proptest::sample::select(GeneratorId::all())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn samples_satisfy_invariants(g in generator(), n in 2usize..16, p in 0usize..16, big_n in 0usize..6, gamma in any::<u32>(), delta in 0usize..16, seed in any::<u64>()) {
        let inst = sampled(g, n, p, big_n, gamma, delta, seed);
        prop_assert!(check_sampler_invariants(&inst).is_ok(), "{:?}", check_sampler_invariants(&inst));
        let again = sampled(g, n, p, big_n, gamma, delta, seed);
        prop_assert_eq!(canonical_string(&inst).unwrap(), canonical_string(&again).unwrap());
        // C + 5 tops out at 105 in the recipes centered on C.
        for c in inst.uncertainty.scenarios().unwrap_or(&[]).iter().chain(inst.first_stage_costs.iter()) {
            prop_assert!(c.entries().iter().all(|v| rational::is_integral(v) && *v >= int(0) && *v <= int(105)));
        }
    }

    #[test]
    fn extra_scenarios_keep_earlier_rows(g in proptest::sample::select(GeneratorId::all().into_iter().filter(|g| g.family.is_discrete()).collect::<Vec<_>>()),
                                         n in 2usize..12, p in 0usize..12, big_n in 0usize..4, seed in any::<u64>()) {
        let short = sampled(g, n, p, big_n, 0, 1, seed);
        let long = sampled(g, n, p, big_n + 3, 0, 1, seed);
        let s = short.uncertainty.scenarios().unwrap();
        prop_assert_eq!(s, &long.uncertainty.scenarios().unwrap()[..s.len()]);
    }

    #[test]
    fn write_read_is_identity(g in generator(), n in 2usize..12, p in 0usize..12, big_n in 0usize..4, gamma in any::<u32>(), delta in 0usize..12, seed in any::<u64>()) {
        let inst = sampled(g, n, p, big_n, gamma, delta, seed);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        write_instance(&inst, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let back = read_instance(&path).unwrap();
        prop_assert_eq!(&back.uncertainty, &inst.uncertainty);
        prop_assert_eq!(&back.first_stage_costs, &inst.first_stage_costs);
        prop_assert_eq!(back.p, inst.p);
        prop_assert_eq!(content_hash(&back).unwrap(), content_hash(&inst).unwrap());
        write_instance(&back, &path).unwrap();
        prop_assert_eq!(std::fs::read(&path).unwrap(), bytes);
        let text = String::from_utf8(std::fs::read(&path).unwrap()).unwrap();
        let parsed = parse_instance(&text, &Layout::of(&inst), true).unwrap();
        prop_assert_eq!(canonical_string(&parsed).unwrap(), text);
    }

    #[test]
    fn mutated_text_never_panics(g in generator(), n in 2usize..8, seed in any::<u64>(), edits in proptest::collection::vec((any::<usize>(), proptest::sample::select(vec!["", ",", "\n", "x", "-1", "1.5", "3/2", " ", "999"])), 1..4)) {
        let inst = sampled(g, n, n, 1, 1, 0, seed);
        let mut text = canonical_string(&inst).unwrap();
        for (at, s) in edits {
            let mut at = at % (text.len() + 1);
            while !text.is_char_boundary(at) {
                at -= 1;
            }
            let end = (at + 1).min(text.len());
            text.replace_range(at..end, s);
        }
        let layout = Layout::of(&inst);
        for integers in [true, false] {
            if let Ok(parsed) = parse_instance(&text, &layout, integers) {
                prop_assert!(parsed.validate().is_ok());
                if parsed.criterion == Criterion::Recoverable {
                    prop_assert!(parsed.kept_min().unwrap() <= parsed.p);
                }
            }
        }
    }
}
