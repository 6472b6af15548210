//! Linearized MILP hardening of min-max regret interval instances.
//!
//! For every breakpoint π^k of the input the inner regret problem is
//! dualized; z^k_i and q^k_i flag π^k ≥ c_i and π^k ≥ c_i + d_i, and the
//! products z·c, q·c, q·d are linearized with the neighborhood upper
//! bounds as big-M constants.

use super::neighborhood::{Entry, MasterVector, PerturbationNeighborhood};
use super::{lineage, stamp, Clock, HiroConfig, HiroMode};
use crate::error::{Error, Result};
use crate::formulations::{regret_interval_candidates, solve_regret_interval_enumeration};
use crate::milp::{solve_milp, MilpModel, Relation, Sense};
use crate::model::{Pairing, ProblemInstance, UncertaintySet};
use crate::rational::{self, Rational};
use num_traits::{One, Signed, Zero};
use std::time::Instant;

/// An indicator that the neighborhood already decides.
enum Flag {
    Off,
    On,
    Free(usize),
}

/// Adds `coeff * flag * entry` to `row`, linearizing with `hat ≥ entry −
/// bar (1 − flag)` and `hat ≥ lo flag` when both factors vary. Returns the
/// constant part.
#[allow(clippy::too_many_arguments)]
fn product(
    model: &mut MilpModel,
    row: &mut Vec<(usize, Rational)>,
    coeff: &Rational,
    flag: &Flag,
    entry: &Entry,
    lo: &Rational,
    bar: &Rational,
    tag: String,
) -> Rational {
    match (flag, entry) {
        (Flag::Off, _) => Rational::zero(),
        (Flag::On, e) => e.push(row, coeff),
        (Flag::Free(z), Entry::Fixed(c)) => {
            row.push((*z, coeff * c));
            Rational::zero()
        }
        (Flag::Free(z), Entry::Var(c)) => {
            let hat = model.add_nonneg(tag.clone());
            model.add_constraint(
                tag.clone(),
                vec![(hat, Rational::one()), (*c, -Rational::one()), (*z, -bar.clone())],
                Relation::Ge,
                -bar.clone(),
            );
            if lo.is_positive() {
                model.add_constraint(
                    format!("{tag}lo"),
                    vec![(hat, Rational::one()), (*z, -lo.clone())],
                    Relation::Ge,
                    Rational::zero(),
                );
            }
            row.push((hat, coeff.clone()));
            Rational::zero()
        }
    }
}

fn free(f: &Flag) -> Option<usize> {
    match f {
        Flag::Free(v) => Some(*v),
        _ => None,
    }
}

fn flag(model: &mut MilpModel, pi: &Rational, lo: &Rational, hi: &Rational, tag: String) -> Flag {
    if pi < lo {
        Flag::Off
    } else if pi >= hi {
        Flag::On
    } else {
        Flag::Free(model.add_binary(tag))
    }
}

/// Perturbs lower bounds and/or deviations to maximize the regret optimum.
/// The breakpoints π^k are those of the input; the output's exact regret
/// optimum is re-evaluated and the input is kept if it is not exceeded.
pub fn harden_regret_interval(inst: &ProblemInstance, cfg: &HiroConfig) -> Result<ProblemInstance> {
    cfg.check()?;
    inst.validate()?;
    let pairing = inst.pairing()?;
    if pairing != Pairing::RegretInterval {
        return Err(Error::UnsupportedPairing(format!(
            "interval hardening needs MinMaxRegret x Interval, got {pairing}"
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
    let (model, c, d) = build(inst, cfg, move_lower, move_dev)?;
    let clock = Clock {
        start: Instant::now(),
        limit: cfg.time_limit,
    };
    let res = solve_milp(&model, &clock.cfg(&cfg.solver_cfg))?;
    let mut lin = lineage(inst, cfg, mode, 1)?;
    let Some(assign) = res.assignment.as_ref() else {
        lin.notes.push(format!("model {}; input kept", res.status.as_str()));
        return Ok(stamp(inst.clone(), inst, lin));
    };
    let mut out = inst.clone();
    out.uncertainty = UncertaintySet::Interval {
        lower: c.read(assign),
        deviation: d.read(assign),
    };
    let before = solve_regret_interval_enumeration(inst)?.1;
    let after = solve_regret_interval_enumeration(&out)?.1;
    if after < before {
        lin.notes.push("no improvement; input kept".into());
        return Ok(stamp(inst.clone(), inst, lin));
    }
    Ok(stamp(out, inst, lin))
}

fn build(
    inst: &ProblemInstance,
    cfg: &HiroConfig,
    move_lower: bool,
    move_dev: bool,
) -> Result<(MilpModel, MasterVector, MasterVector)> {
    let (lower, deviation) = inst.uncertainty.bounds().expect("interval set");
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
    let p = rational::from_usize(inst.p);
    let one = Rational::one();
    let cand = regret_interval_candidates(lower, deviation);
    let mut zs: Vec<Vec<Option<usize>>> = vec![Vec::new(); n];
    let mut qs: Vec<Vec<Option<usize>>> = vec![Vec::new(); n];
    for (k, pi) in cand.values.iter().enumerate() {
        let kk = k + 1;
        let alpha = model.add_nonneg(format!("alpha[{kk}]"));
        // t ≤ Σ(z π − ẑ) − pπ + pα − Σβ
        let mut trow = vec![(t, one.clone()), (alpha, -p.clone())];
        let mut tconst = &p * pi;
        for i in 0..n {
            let ii = i + 1;
            let (c_lo, c_hi) = (&c.hood.lower[i], c.bar(i));
            let s_lo = c_lo + &d.hood.lower[i];
            let s_hi = c_hi + d.bar(i);
            let z = flag(&mut model, pi, c_lo, c_hi, format!("z[{ii},{kk}]"));
            let q = flag(&mut model, pi, &s_lo, &s_hi, format!("q[{ii},{kk}]"));
            zs[i].push(free(&z));
            qs[i].push(free(&q));
            match &z {
                Flag::Off => {}
                Flag::On => tconst -= pi,
                Flag::Free(v) => trow.push((*v, -pi.clone())),
            }
            tconst += product(&mut model, &mut trow, &one, &z, &c.entries[i], c_lo, c_hi, format!("zh[{ii},{kk}]"));
            let beta = model.add_nonneg(format!("beta[{ii},{kk}]"));
            trow.push((beta, one.clone()));

            // α − β_i ≤ c_i + d_i + π q − q̂ − q̃ − s
            let mut row = vec![(alpha, one.clone()), (beta, -one.clone())];
            let mut k0 = c.entries[i].push(&mut row, &-one.clone());
            k0 += d.entries[i].push(&mut row, &-one.clone());
            match &q {
                Flag::Off => {}
                Flag::On => k0 -= pi,
                Flag::Free(v) => row.push((*v, -pi.clone())),
            }
            k0 += product(&mut model, &mut row, &one, &q, &c.entries[i], c_lo, c_hi, format!("qh[{ii},{kk}]"));
            k0 += product(&mut model, &mut row, &one, &q, &d.entries[i], &d.hood.lower[i], d.bar(i), format!("qt[{ii},{kk}]"));
            // s ≥ [π − c_i]₊
            if pi > c_lo {
                let s = model.add_nonneg(format!("s[{ii},{kk}]"));
                row.push((s, one.clone()));
                let mut srow = vec![(s, one.clone())];
                let s0 = c.entries[i].push(&mut srow, &one);
                model.add_constraint(format!("s[{ii},{kk}]"), srow, Relation::Ge, pi - s0);
            }
            model.add_constraint(format!("dual[{ii},{kk}]"), row, Relation::Le, -k0);
        }
        model.add_constraint(format!("value{kk}"), trow, Relation::Le, -tconst);
    }
    // Indicator solutions are monotone in π and satisfy q ≤ z.
    let le = |model: &mut MilpModel, a: Option<usize>, b: Option<usize>, tag: String| {
        if let (Some(a), Some(b)) = (a, b) {
            model.add_constraint(tag, vec![(a, one.clone()), (b, -one.clone())], Relation::Le, Rational::zero());
        }
    };
    for i in 0..n {
        let ii = i + 1;
        for k in 0..cand.values.len() {
            if k + 1 < cand.values.len() {
                le(&mut model, zs[i][k], zs[i][k + 1], format!("zord[{ii},{}]", k + 1));
                le(&mut model, qs[i][k], qs[i][k + 1], format!("qord[{ii},{}]", k + 1));
            }
            le(&mut model, qs[i][k], zs[i][k], format!("qz[{ii},{}]", k + 1));
        }
    }
    Ok((model, c, d))
}

/// Optimal value of the hardening model, for validation on small cases.
#[cfg(test)]
pub(crate) fn model_value(inst: &ProblemInstance, cfg: &HiroConfig) -> Rational {
    let (model, _, _) = build(inst, cfg, true, true).unwrap();
    let res = solve_milp(&model, &cfg.solver_cfg).unwrap();
    res.objective.unwrap()
}
