//! Exhaustive robust optimum, used as an independent test oracle.

use super::eval::{back, conv, evaluate_prepared, value_under_prepared, Int, Prepared, Q};
use super::{BudgetMode, Criterion, ProblemInstance, SelectionSolution, SolutionRole};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use num_bigint::BigInt;
use num_traits::ToPrimitive;

#[derive(Clone, Copy, Debug)]
pub struct BruteForceLimits {
    pub max_n: usize,
}

impl Default for BruteForceLimits {
    fn default() -> Self {
        BruteForceLimits { max_n: 16 }
    }
}

/// Largest n for which item-budgeted witnesses are checked by enumerating δ.
const DELTA_CHECK_MAX_N: usize = 12;

/// Minimizes the robust value over every feasible first-stage solution.
///
/// Subsets are visited in lexicographic order of their sorted index lists and
/// only strict improvements are kept, so ties resolve to the lexicographically
/// smallest set.
pub fn brute_force_robust_opt(
    inst: &ProblemInstance,
    limits: BruteForceLimits,
) -> Result<(SelectionSolution, Rational)> {
    inst.validate()?;
    if inst.n > limits.max_n {
        return Err(Error::TooLarge(format!(
            "n = {} exceeds max_n = {}",
            inst.n, limits.max_n
        )));
    }
    let (x, v) = match Prepared::<i128>::new(inst)? {
        Some(prep) => {
            let (x, v) = search(&prep, inst.criterion == Criterion::TwoStage);
            (x, back(&v))
        }
        None => {
            let prep = Prepared::<BigInt>::new(inst)?.expect("big rationals convert");
            search(&prep, inst.criterion == Criterion::TwoStage)
        }
    };
    let role = if inst.criterion == Criterion::TwoStage {
        SolutionRole::PartialFirstStage
    } else {
        SolutionRole::Full
    };
    let sol = SelectionSolution::new(x, role);
    if inst.uncertainty.budget_mode() == Some(BudgetMode::DiscreteItems)
        && inst.n <= DELTA_CHECK_MAX_N
    {
        let check = delta_enumeration_value(inst, &sol.chosen)?;
        if check != v {
            return Err(Error::OracleMismatch(format!(
                "closed form gives {}, δ enumeration gives {}",
                rational::format(&v),
                rational::format(&check)
            )));
        }
    }
    Ok((sol, v))
}

fn search<I: Int>(prep: &Prepared<I>, partial: bool) -> (Vec<bool>, Q<I>) {
    let n = prep.n;
    let mut x = vec![false; n];
    let mut best: Option<(Vec<bool>, Q<I>)> = None;
    fn rec<I: Int>(
        prep: &Prepared<I>,
        x: &mut Vec<bool>,
        next: usize,
        size: usize,
        partial: bool,
        best: &mut Option<(Vec<bool>, Q<I>)>,
    ) {
        let p = prep.p;
        if size == p || partial {
            let v = evaluate_prepared(prep, x, false).0;
            if best.as_ref().map_or(true, |(_, b)| v < *b) {
                *best = Some((x.clone(), v));
            }
        }
        if size == p {
            return;
        }
        for j in next..x.len() {
            if !partial && x.len() - j < p - size {
                break;
            }
            x[j] = true;
            rec(prep, x, j + 1, size + 1, partial, best);
            x[j] = false;
        }
    }
    rec(prep, &mut x, 0, 0, partial, &mut best);
    best.expect("feasible set is non-empty")
}

/// Robust value of `x` by enumerating every binary δ with Σδ ≤ Γ.
pub(crate) fn delta_enumeration_value(inst: &ProblemInstance, x: &[bool]) -> Result<Rational> {
    let prep = Prepared::<BigInt>::new(inst)?.expect("big rationals convert");
    let (lower, dev) = inst
        .uncertainty
        .bounds()
        .ok_or_else(|| Error::Parameter("δ enumeration needs a budgeted set".into()))?;
    let gamma = inst
        .uncertainty
        .gamma()
        .and_then(|g| g.to_integer().to_usize())
        .ok_or_else(|| Error::Parameter("δ enumeration needs an integral budget".into()))?;
    let lower: Vec<Q<BigInt>> = lower.entries().iter().map(|v| conv(v).unwrap()).collect();
    let dev: Vec<Q<BigInt>> = dev.entries().iter().map(|v| conv(v).unwrap()).collect();
    let n = inst.n;
    let mut best: Option<Q<BigInt>> = None;
    let mut c = lower.clone();
    fn rec(
        prep: &Prepared<BigInt>,
        x: &[bool],
        lower: &[Q<BigInt>],
        dev: &[Q<BigInt>],
        c: &mut Vec<Q<BigInt>>,
        next: usize,
        left: usize,
        best: &mut Option<Q<BigInt>>,
    ) {
        let v = value_under_prepared(prep, x, c);
        if best.as_ref().map_or(true, |b| v > *b) {
            *best = Some(v);
        }
        if left == 0 {
            return;
        }
        for j in next..c.len() {
            c[j] = lower[j].clone() + &dev[j];
            rec(prep, x, lower, dev, c, j + 1, left - 1, best);
            c[j] = lower[j].clone();
        }
    }
    rec(&prep, x, &lower, &dev, &mut c, 0, gamma.min(n), &mut best);
    Ok(best.expect("at least the nominal scenario"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CostVector, UncertaintySet};
    use crate::rational::int;

    fn cv(v: &[i64]) -> CostVector {
        CostVector::from_ints(v).unwrap()
    }

    #[test]
    fn minmax_and_regret_examples() {
        let sc = vec![cv(&[1, 5, 3, 4]), cv(&[4, 2, 5, 1])];
        let inst = ProblemInstance::minmax_discrete(2, sc.clone()).unwrap();
        let (x, v) = brute_force_robust_opt(&inst, BruteForceLimits::default()).unwrap();
        assert_eq!(x.indices(), vec![0, 3]);
        assert_eq!(v, int(5));
        let inst = ProblemInstance::regret_discrete(2, sc).unwrap();
        let (x, v) = brute_force_robust_opt(&inst, BruteForceLimits::default()).unwrap();
        assert_eq!(x.indices(), vec![0, 3]);
        assert_eq!(v, int(2));
    }

    #[test]
    fn two_stage_example() {
        let inst = ProblemInstance::new(
            2,
            Criterion::TwoStage,
            UncertaintySet::Discrete {
                scenarios: vec![cv(&[9, 1, 8]), cv(&[9, 8, 1])],
            },
            Some(cv(&[2, 10, 10])),
            None,
        )
        .unwrap();
        let (x, v) = brute_force_robust_opt(&inst, BruteForceLimits::default()).unwrap();
        assert_eq!(x.indices(), vec![0]);
        assert_eq!(v, int(3));
    }

    #[test]
    fn refuses_large_instances() {
        let inst = ProblemInstance::minmax_discrete(1, vec![CostVector::zeros(20)]).unwrap();
        assert!(matches!(
            brute_force_robust_opt(&inst, BruteForceLimits::default()),
            Err(Error::TooLarge(_))
        ));
    }
}
