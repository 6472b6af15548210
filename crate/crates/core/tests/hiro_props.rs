mod common;

use common::sampled;
use proptest::prelude::*;
use robsel_core::hiro::{harden, within_neighborhood, HiroConfig, PerturbationNeighborhood};
use robsel_core::io::canonical_string;
use robsel_core::model::{brute_force_robust_opt, BruteForceLimits, CostVector};
use robsel_core::rational::{int, ratio};
use robsel_core::samplers::GeneratorId;
use std::time::Duration;

/// Generators whose pairings have a hardening model.
fn generator() -> impl Strategy<Value = GeneratorId> {
    use robsel_core::samplers::Family::*;
    let ok = [MmD, MmB, MmrI, MmrD, TstD, RrD];
    proptest::sample::select(GeneratorId::all().into_iter().filter(|g| ok.contains(&g.family)).collect::<Vec<_>>())
}

fn optimum(inst: &robsel_core::model::ProblemInstance) -> robsel_core::rational::Rational {
    brute_force_robust_opt(inst, BruteForceLimits { max_n: 16 }).unwrap().1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_lands_in_neighborhood(c in proptest::collection::vec(0i64..=110, 1..8), t in proptest::collection::vec(-20i64..=130, 8), b in 0i64..=12) {
        let center = CostVector::from_ints(&c).unwrap();
        let h = PerturbationNeighborhood::new(&center, &int(b), &int(100));
        let target: Vec<_> = t[..c.len()].iter().map(|&v| ratio(v, 3)).collect();
        prop_assert!(h.contains(&h.project(&target)));
        if c.iter().all(|&v| v <= 100) {
            prop_assert!(h.contains(&center));
        }
        if b == 0 {
            prop_assert!(h.is_singleton());
        }
    }

    #[test]
    fn zero_budget_is_identity(g in generator(), n in 2usize..7, p in 0usize..7, big_n in 0usize..3, gamma in any::<u32>(), delta in 0usize..7, seed in any::<u64>()) {
        let inst = sampled(g, n, p, big_n, gamma % 4, delta, seed);
        let (out, _) = harden(&inst, &HiroConfig::new(int(0))).unwrap();
        prop_assert_eq!(canonical_string(&out).unwrap(), canonical_string(&inst).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hardening_is_sound(g in generator(), n in 2usize..6, p in 0usize..4, big_n in 0usize..2, gamma in any::<u32>(), delta in 0usize..4, seed in any::<u64>(), b in 1i64..=3) {
        let inst = sampled(g, n, p, big_n, gamma % 4, delta, seed);
        let cfg = HiroConfig::new(int(b)).with_time_limit(Duration::from_secs(20));
        let (out, trace) = harden(&inst, &cfg).unwrap();
        prop_assert!(within_neighborhood(&inst, &out, &int(b), &int(100)));
        let before = optimum(&inst);
        let after = optimum(&out);
        prop_assert_eq!(&trace.initial_value, &before);
        prop_assert_eq!(&trace.best_value, &after);
        prop_assert!(after >= before, "{}: {} < {}", g, after, before);
    }
}
