mod common;

use common::sampled;
use proptest::prelude::*;
use robsel_core::formulations::solve_formulation;
use robsel_core::milp::SolverConfig;
use robsel_core::model::{
    brute_force_robust_opt, evaluate_robust, recovery_best_response, robust_value, value_under, BruteForceLimits,
    BudgetMode, CostVector, Criterion, ProblemInstance, SelectionSolution, SolutionRole, UncertaintySet,
};
use robsel_core::rational::{self, int};
use robsel_core::samplers::GeneratorId;

fn costs(n: usize) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(0i64..=100, n)
}

/// A p-subset of 0..n from a bit pattern.
fn choose(n: usize, p: usize, bits: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (bits.rotate_left(i as u32 * 7) ^ (i as u64 * 0x9e37)) & 0xffff);
    let mut x: Vec<usize> = order.into_iter().take(p).collect();
    x.sort();
    x
}

fn generator() -> impl Strategy<Value = GeneratorId> {
    proptest::sample::select(GeneratorId::all())
}

fn solution_for(inst: &ProblemInstance, bits: u64) -> SelectionSolution {
    if inst.criterion == Criterion::TwoStage {
        let k = bits as usize % (inst.p + 1);
        SelectionSolution::from_indices(inst.n, &choose(inst.n, k, bits >> 8), SolutionRole::PartialFirstStage)
    } else {
        SelectionSolution::full(inst.n, &choose(inst.n, inst.p, bits))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn interval_minmax_is_upper_bound_cost((n, lo, dev, p, bits) in (2usize..9).prop_flat_map(|n| (Just(n), costs(n), costs(n), 1..=n, any::<u64>()))) {
        let lower = CostVector::from_ints(&lo).unwrap();
        let deviation = CostVector::from_ints(&dev).unwrap();
        let upper = lower.plus(&deviation);
        let inst = ProblemInstance::new(p, Criterion::MinMax, UncertaintySet::Interval { lower, deviation }, None, None).unwrap();
        let idx = choose(n, p, bits);
        let x = SelectionSolution::full(n, &idx);
        let expect = rational::sum(idx.iter().map(|&i| upper.get(i)));
        prop_assert_eq!(robust_value(&x, &inst).unwrap(), expect);
    }

    #[test]
    fn regret_is_nonnegative(g in proptest::sample::select(vec![GeneratorId::parse("MMR-D-U").unwrap(), GeneratorId::parse("MMR-D-2").unwrap(), GeneratorId::parse("MMR-I-1").unwrap(), GeneratorId::parse("MMR-I-2").unwrap()]),
                             n in 2usize..10, p in 0usize..10, big_n in 0usize..4, seed in any::<u64>(), bits in any::<u64>()) {
        let inst = sampled(g, n, p, big_n, 0, 0, seed);
        let x = solution_for(&inst, bits);
        prop_assert!(robust_value(&x, &inst).unwrap() >= rational::zero());
    }

    #[test]
    fn budgeted_value_monotone_in_gamma((n, lo, dev, p, bits) in (2usize..9).prop_flat_map(|n| (Just(n), costs(n), costs(n), 1..=n, any::<u64>())),
                                        mode in proptest::sample::select(vec![BudgetMode::ContinuousItems, BudgetMode::DiscreteItems, BudgetMode::VariableBudget])) {
        let lower = CostVector::from_ints(&lo).unwrap();
        let deviation = CostVector::from_ints(&dev).unwrap();
        let x = SelectionSolution::full(n, &choose(n, p, bits));
        let step = if mode == BudgetMode::VariableBudget { 37 } else { 1 };
        let mut prev = None;
        for k in 0..=n as i64 {
            let gamma = int(k * step);
            let inst = ProblemInstance::minmax_budgeted(p, lower.clone(), deviation.clone(), gamma, mode).unwrap();
            let v = robust_value(&x, &inst).unwrap();
            if let Some(pv) = &prev {
                prop_assert!(&v >= pv);
            }
            prev = Some(v);
        }
    }

    #[test]
    fn recovery_monotone_in_kept((n, c, p, bits) in (2usize..10).prop_flat_map(|n| (Just(n), costs(n), 1..=n, any::<u64>()))) {
        let c = CostVector::from_ints(&c).unwrap();
        let idx = choose(n, p, bits);
        let x = SelectionSolution::full(n, &idx);
        let cx = rational::sum(idx.iter().map(|&i| c.get(i)));
        let mut prev = None;
        for kept in 0..=p {
            let (y, v) = recovery_best_response(&x, &c, p, kept).unwrap();
            prop_assert_eq!(y.count(), p);
            let overlap = y.indices().iter().filter(|i| idx.contains(i)).count();
            prop_assert!(overlap >= kept);
            prop_assert!(v <= cx);
            if let Some(pv) = &prev {
                prop_assert!(&v >= pv);
            }
            prev = Some(v);
        }
        prop_assert_eq!(prev.unwrap(), cx);
    }

    #[test]
    fn witness_reproduces_objective(g in generator(), n in 2usize..9, p in 0usize..9, big_n in 0usize..4, gamma in any::<u32>(), delta in 0usize..9, seed in any::<u64>(), bits in any::<u64>()) {
        let inst = sampled(g, n, p, big_n, gamma, delta, seed);
        let x = solution_for(&inst, bits);
        let rep = evaluate_robust(&x, &inst).unwrap();
        prop_assert_eq!(&rep.objective, &robust_value(&x, &inst).unwrap());
        prop_assert_eq!(value_under(&x, &inst, &rep.witness.realized).unwrap(), rep.objective);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn brute_force_matches_formulation(g in generator(), n in 2usize..8, p in 0usize..5, big_n in 0usize..4, gamma in any::<u32>(), delta in 0usize..6, seed in any::<u64>()) {
        let inst = sampled(g, n, p, big_n, gamma % 4, delta, seed);
        let (_, v) = brute_force_robust_opt(&inst, BruteForceLimits { max_n: 16 }).unwrap();
        let out = solve_formulation(&inst, &SolverConfig::default()).unwrap();
        let obj = out.objective.expect("optimal");
        prop_assert!(rational::to_f64(&(&obj - &v)).abs() <= 1e-6, "{}: {} vs brute {}", g, obj, v);
        let x = out.solution.unwrap();
        prop_assert!(rational::to_f64(&(robust_value(&x, &inst).unwrap() - &v)).abs() <= 1e-6);
    }
}
