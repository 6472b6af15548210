//! Single LP hardening of min-max budgeted instances.

use super::neighborhood::{Entry, MasterVector, PerturbationNeighborhood};
use super::{lineage, stamp, Clock, HiroConfig, HiroMode};
use crate::error::{Error, Result};
use crate::formulations::{minmax_budgeted_candidates, solve_minmax_budgeted_enumeration};
use crate::milp::{solve_milp, MilpModel, Relation, Sense};
use crate::model::{BudgetMode, Pairing, ProblemInstance, UncertaintySet};
use crate::rational::{self, Rational};
use num_traits::{One, Zero};
use std::time::Instant;

/// Dual candidate for π: a constant, or the deviation of item k.
enum Pi {
    Const(Rational),
    Item(usize),
}

/// Perturbs lower bounds, deviations or both, maximizing the robust
/// optimum. Deviation runs keep the input order of the deviations, which
/// linearizes [d_i − d_k]₊; the output is reported in the original item
/// order.
pub fn harden_budgeted(inst: &ProblemInstance, cfg: &HiroConfig) -> Result<ProblemInstance> {
    cfg.check()?;
    inst.validate()?;
    let pairing = inst.pairing()?;
    if pairing != Pairing::MinMaxBudgeted {
        return Err(Error::UnsupportedPairing(format!(
            "budgeted hardening needs MinMax x Budgeted, got {pairing}"
        )));
    }
    let mode = cfg.mode_for(pairing);
    let (move_lower, move_dev) = match mode {
        HiroMode::LowerBounds => (true, false),
        HiroMode::Deviations => (false, true),
        HiroMode::Both => (true, true),
        other => {
            return Err(Error::Parameter(format!(
                "mode {} does not apply to {pairing}",
                other.name()
            )))
        }
    };
    if cfg.b.is_zero() {
        return Ok(inst.clone());
    }
    let UncertaintySet::Budgeted {
        lower,
        deviation,
        gamma,
        mode: bmode,
    } = &inst.uncertainty
    else {
        unreachable!()
    };
    let n = inst.n;
    let mut model = MilpModel::new(Sense::Maximize);
    let t = model.add_continuous("t", None, None);
    model.add_objective_term(t, Rational::one());
    let lh = PerturbationNeighborhood::new(lower, &cfg.b, &cfg.c_max);
    let dh = PerturbationNeighborhood::new(deviation, &cfg.b, &cfg.c_max);
    let c = if move_lower {
        MasterVector::variable(&mut model, lh, "l")
    } else {
        MasterVector::fixed(lh)
    };
    let d = if move_dev {
        MasterVector::variable(&mut model, dh, "d")
    } else {
        MasterVector::fixed(dh)
    };

    let variable_budget = *bmode == BudgetMode::VariableBudget;
    let ordered = move_dev && !variable_budget;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| deviation.get(a).cmp(deviation.get(b)));
    let mut rank = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let mut pis: Vec<Pi> = Vec::new();
    if ordered {
        for w in order.windows(2) {
            let mut row = Vec::new();
            let mut k0 = d.entries[w[0]].push(&mut row, &Rational::one());
            k0 += d.entries[w[1]].push(&mut row, &-Rational::one());
            model.add_constraint(format!("order{}", w[0] + 1), row, Relation::Le, -k0);
        }
        pis.push(Pi::Const(Rational::zero()));
        pis.extend((0..n).map(Pi::Item));
    } else {
        let cand = minmax_budgeted_candidates(deviation, *bmode);
        pis.extend(cand.values.into_iter().map(Pi::Const));
    }

    let p = rational::from_usize(inst.p);
    for (k, pi) in pis.iter().enumerate() {
        let kk = k + 1;
        let alpha = model.add_nonneg(format!("alpha[{kk}]"));
        // t ≤ Γπ + pα − Σβ
        let mut trow = vec![(t, Rational::one()), (alpha, -p.clone())];
        let mut trhs = Rational::zero();
        match pi {
            Pi::Const(v) => trhs += gamma * v,
            Pi::Item(j) => trhs -= d.entries[*j].push(&mut trow, &-gamma.clone()),
        }
        for i in 0..n {
            let beta = model.add_nonneg(format!("beta[{},{kk}]", i + 1));
            trow.push((beta, Rational::one()));
            // α − β_i ≤ c_i + extra_i(π)
            let mut row = vec![(alpha, Rational::one()), (beta, -Rational::one())];
            let mut k0 = c.entries[i].push(&mut row, &-Rational::one());
            match pi {
                Pi::Const(v) if variable_budget => {
                    let w = rational::pos(&(Rational::one() - v));
                    if !w.is_zero() {
                        k0 += d.entries[i].push(&mut row, &-w);
                    }
                }
                Pi::Const(v) => match &d.entries[i] {
                    Entry::Fixed(di) => k0 -= rational::pos(&(di - v)),
                    Entry::Var(_) => {
                        debug_assert!(v.is_zero());
                        k0 += d.entries[i].push(&mut row, &-Rational::one());
                    }
                },
                Pi::Item(j) => {
                    if rank[i] > rank[*j] {
                        k0 += d.entries[i].push(&mut row, &-Rational::one());
                        k0 += d.entries[*j].push(&mut row, &Rational::one());
                    }
                }
            }
            model.add_constraint(format!("dual[{},{kk}]", i + 1), row, Relation::Le, -k0);
        }
        model.add_constraint(format!("value{kk}"), trow, Relation::Le, trhs);
    }

    let clock = Clock {
        start: Instant::now(),
        limit: cfg.time_limit,
    };
    let res = solve_milp(&model, &clock.cfg(&cfg.solver_cfg))?;
    let mut lin = lineage(inst, cfg, mode, 1)?;
    if ordered {
        let perm: Vec<String> = order.iter().map(|i| (i + 1).to_string()).collect();
        lin.notes.push(format!("order={}", perm.join(" ")));
    }
    let Some(assign) = res.assignment.as_ref() else {
        lin.notes.push(format!("model {}; input kept", res.status.as_str()));
        return Ok(stamp(inst.clone(), inst, lin));
    };
    let mut out = inst.clone();
    out.uncertainty = UncertaintySet::Budgeted {
        lower: c.read(assign),
        deviation: d.read(assign),
        gamma: gamma.clone(),
        mode: *bmode,
    };
    let before = solve_minmax_budgeted_enumeration(inst)?.1;
    let after = solve_minmax_budgeted_enumeration(&out)?.1;
    if after < before {
        lin.notes.push("no improvement; input kept".into());
        return Ok(stamp(inst.clone(), inst, lin));
    }
    Ok(stamp(out, inst, lin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CostVector;
    use crate::rational::int;

    fn inst(l: &[i64], d: &[i64], p: usize, g: i64) -> ProblemInstance {
        ProblemInstance::minmax_budgeted(
            p,
            CostVector::from_ints(l).unwrap(),
            CostVector::from_ints(d).unwrap(),
            int(g),
            BudgetMode::DiscreteItems,
        )
        .unwrap()
    }

    #[test]
    fn every_mode_is_monotone() {
        let base = inst(&[1, 4, 2], &[3, 1, 2], 2, 1);
        let v0 = solve_minmax_budgeted_enumeration(&base).unwrap().1;
        for mode in [HiroMode::LowerBounds, HiroMode::Deviations, HiroMode::Both] {
            let cfg = HiroConfig::new(int(1)).with_mode(mode);
            let out = harden_budgeted(&base, &cfg).unwrap();
            assert!(super::super::within_neighborhood(&base, &out, &int(1), &int(100)));
            let v = solve_minmax_budgeted_enumeration(&out).unwrap().1;
            assert!(v >= v0, "{mode:?}");
        }
    }

    #[test]
    fn zero_budget_keeps_vectors() {
        let base = inst(&[1, 4, 2], &[3, 1, 2], 2, 1);
        let out = harden_budgeted(&base, &HiroConfig::new(int(0))).unwrap();
        assert_eq!(out, base);
    }
}
