mod common;

use common::{hiro_oracle, toy_discrete, vertex_grid_value};
use robsel_core::hiro::{harden, harden_iterative, within_neighborhood, HiroConfig, HiroMode};
use robsel_core::io::canonical_string;
use robsel_core::model::{brute_force_robust_opt, BruteForceLimits, CostVector, Criterion, ProblemInstance};
use robsel_core::rational::{int, Rational};

fn optimum(inst: &ProblemInstance) -> Rational {
    brute_force_robust_opt(inst, BruteForceLimits::default()).unwrap().1
}

fn check_toy(inst: &ProblemInstance, b: i64, c_max: i64, mode: Option<HiroMode>) {
    let mut cfg = HiroConfig::new(int(b));
    cfg.c_max = int(c_max);
    cfg.mode = mode;
    let perturb = mode != Some(HiroMode::FirstStageOnly);
    let (out, trace) = harden_iterative(inst, &cfg).unwrap();
    assert!(within_neighborhood(inst, &out, &cfg.b, &cfg.c_max));
    let v = optimum(&out);
    assert_eq!(v, trace.best_value);
    assert!(v >= optimum(inst));
    assert!(trace.converged, "{}", canonical_string(inst).unwrap());
    let oracle = hiro_oracle(inst, &cfg.b, &cfg.c_max, perturb);
    assert_eq!(v, oracle, "instance\n{}", canonical_string(inst).unwrap());
}

#[test]
fn minmax_toys_match_oracle() {
    for seed in 0..12 {
        let n = 3 + seed as usize % 3;
        let inst = toy_discrete(Criterion::MinMax, n, 1 + seed as usize % 3, 1 + seed as usize % 3, 10, seed);
        check_toy(&inst, 1 + seed as i64 % 2, 10, None);
    }
}

#[test]
fn regret_toys_match_oracle() {
    for seed in 0..10 {
        let n = 3 + seed as usize % 2;
        let inst = toy_discrete(Criterion::MinMaxRegret, n, 1 + seed as usize % 2, 2 + seed as usize % 2, 10, 100 + seed);
        check_toy(&inst, 1 + seed as i64 % 2, 10, None);
    }
}

#[test]
fn two_stage_toys_match_oracle() {
    for seed in 0..8 {
        let inst = toy_discrete(Criterion::TwoStage, 3 + seed as usize % 2, 2, 1 + seed as usize % 2, 10, 200 + seed);
        for mode in [HiroMode::FirstStageOnly, HiroMode::FirstAndSecondStage] {
            check_toy(&inst, 1 + seed as i64 % 2, 10, Some(mode));
        }
    }
}

#[test]
fn recoverable_toys_match_oracle() {
    for seed in 0..8 {
        let inst = toy_discrete(Criterion::Recoverable, 3 + seed as usize % 2, 2, 1 + seed as usize % 2, 10, 300 + seed);
        for mode in [HiroMode::FirstStageOnly, HiroMode::FirstAndSecondStage] {
            check_toy(&inst, 1 + seed as i64 % 2, 10, Some(mode));
        }
    }
}

#[test]
fn vertex_grid_is_a_lower_bound() {
    let inst = ProblemInstance::minmax_discrete(1, vec![CostVector::from_ints(&[5, 6]).unwrap()]).unwrap();
    let grid = vertex_grid_value(&inst, &int(1), &int(100));
    let exact = hiro_oracle(&inst, &int(1), &int(100), true);
    assert_eq!(grid, int(5));
    assert_eq!(exact, robsel_core::rational::ratio(11, 2));
    let (_, trace) = harden_iterative(&inst, &HiroConfig::new(int(1))).unwrap();
    assert_eq!(trace.best_value, exact);
}

#[test]
fn listed_minmax_example() {
    let inst = ProblemInstance::minmax_discrete(
        1,
        vec![CostVector::from_ints(&[1, 9, 5]).unwrap(), CostVector::from_ints(&[9, 1, 5]).unwrap()],
    )
    .unwrap();
    assert_eq!(hiro_oracle(&inst, &int(1), &int(100), true), int(6));
    let (_, trace) = harden(&inst, &HiroConfig::new(int(1))).unwrap();
    assert_eq!(trace.best_value, int(6));
}

#[test]
fn zero_budget_is_bit_identical() {
    for (k, c) in [Criterion::MinMax, Criterion::MinMaxRegret, Criterion::TwoStage, Criterion::Recoverable]
        .into_iter()
        .enumerate()
    {
        let inst = toy_discrete(c, 5, 2, 3, 20, k as u64);
        let (out, _) = harden(&inst, &HiroConfig::new(int(0))).unwrap();
        assert_eq!(canonical_string(&out).unwrap(), canonical_string(&inst).unwrap());
        assert_eq!(out, inst);
    }
}

#[test]
fn master_objective_bounds_each_iterate() {
    for seed in 0..6 {
        let inst = toy_discrete(Criterion::MinMax, 6, 3, 3, 30, 400 + seed);
        let (_, trace) = harden_iterative(&inst, &HiroConfig::new(int(3))).unwrap();
        for w in trace.iterations.windows(2) {
            assert!(w[1].master_objective <= w[0].master_objective);
        }
        for it in &trace.iterations {
            assert!(it.robust_value <= it.master_objective);
        }
    }
}
