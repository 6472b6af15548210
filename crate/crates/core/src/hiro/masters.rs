//! Master problems of the iterative scheme: given candidate solutions
//! x¹…x^K, choose perturbed costs maximizing the best candidate's value.

use super::neighborhood::{Entry, MasterVector, PerturbationNeighborhood};
use crate::error::{Error, Result};
use crate::milp::{MilpModel, Relation, Sense};
use crate::model::{Criterion, CostVector, ProblemInstance, SelectionSolution, UncertaintySet};
use crate::rational::{self, Rational};
use num_traits::{One, Zero};

pub(crate) struct Master {
    pub model: MilpModel,
    pub first: Option<MasterVector>,
    pub scenarios: Vec<MasterVector>,
}

impl Master {
    /// The instance carrying the perturbed costs of a master solution.
    pub fn hardened(&self, inst: &ProblemInstance, assignment: &[Rational]) -> ProblemInstance {
        let mut out = inst.clone();
        out.uncertainty = UncertaintySet::Discrete {
            scenarios: self.scenarios.iter().map(|s| s.read(assignment)).collect(),
        };
        if let Some(f) = &self.first {
            out.first_stage_costs = Some(f.read(assignment));
        }
        out
    }
}

fn neg(v: &Rational) -> Rational {
    -v.clone()
}

/// λ_kj · c_ji as a row term: linear when c is fixed, otherwise through
/// d ≤ c, d ≤ c̄ λ.
fn assigned(
    model: &mut MilpModel,
    tag: &str,
    vec: &MasterVector,
    i: usize,
    lambda: usize,
) -> (usize, Rational) {
    match &vec.entries[i] {
        Entry::Fixed(c) => (lambda, c.clone()),
        Entry::Var(c) => {
            let bar = vec.bar(i).clone();
            let d = model.add_continuous(tag, Some(Rational::zero()), Some(bar.clone()));
            model.add_constraint(
                format!("{tag}_c"),
                vec![(d, rational::one()), (*c, -Rational::one())],
                Relation::Le,
                Rational::zero(),
            );
            model.add_constraint(
                format!("{tag}_l"),
                vec![(d, rational::one()), (lambda, -bar)],
                Relation::Le,
                Rational::zero(),
            );
            (d, Rational::one())
        }
    }
}

pub(crate) fn build_master(
    inst: &ProblemInstance,
    cands: &[SelectionSolution],
    b: &Rational,
    c_max: &Rational,
    perturb_scenarios: bool,
) -> Result<Master> {
    let scen = inst
        .uncertainty
        .scenarios()
        .ok_or_else(|| Error::UnsupportedPairing("iterative hardening needs discrete scenarios".into()))?;
    let n = inst.n;
    let big_n = scen.len();
    let mut model = MilpModel::new(Sense::Maximize);
    let t = model.add_continuous("t", None, None);
    model.add_objective_term(t, Rational::one());

    let scenarios: Vec<MasterVector> = scen
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let hood = PerturbationNeighborhood::new(c, b, c_max);
            if perturb_scenarios {
                MasterVector::variable(&mut model, hood, &format!("c{}", j + 1))
            } else {
                MasterVector::fixed(hood)
            }
        })
        .collect();
    let first = match &inst.first_stage_costs {
        Some(c) => Some(MasterVector::variable(
            &mut model,
            PerturbationNeighborhood::new(c, b, c_max),
            "C",
        )),
        None => None,
    };

    // Scenario optima y^j, shared by all candidates (regret only).
    let ys: Vec<Vec<usize>> = if inst.criterion == Criterion::MinMaxRegret {
        (0..big_n)
            .map(|j| {
                let y: Vec<usize> = (0..n)
                    .map(|i| model.add_binary(format!("y[{},{}]", j + 1, i + 1)))
                    .collect();
                model.add_constraint(
                    format!("card_y{}", j + 1),
                    y.iter().map(|&v| (v, Rational::one())).collect(),
                    Relation::Eq,
                    rational::from_usize(inst.p),
                );
                y
            })
            .collect()
    } else {
        Vec::new()
    };

    let p = rational::from_usize(inst.p);
    for (k, x) in cands.iter().enumerate() {
        let kk = k + 1;
        let lambda: Vec<usize> = (0..big_n)
            .map(|j| model.add_binary(format!("lambda[{},{kk}]", j + 1)))
            .collect();
        model.add_constraint(
            format!("assign{kk}"),
            lambda.iter().map(|&v| (v, Rational::one())).collect(),
            Relation::Eq,
            Rational::one(),
        );
        let mut row = vec![(t, Rational::one())];
        let mut rhs = Rational::zero();
        if let Some(f) = &first {
            for i in x.indices() {
                rhs -= f.entries[i].push(&mut row, &-Rational::one());
            }
        }
        match inst.criterion {
            Criterion::MinMax | Criterion::MinMaxRegret => {
                for (j, vec) in scenarios.iter().enumerate() {
                    for i in x.indices() {
                        let tag = format!("d[{},{},{kk}]", i + 1, j + 1);
                        let (v, c) = assigned(&mut model, &tag, vec, i, lambda[j]);
                        row.push((v, neg(&c)));
                    }
                }
                if inst.criterion == Criterion::MinMaxRegret {
                    for (j, vec) in scenarios.iter().enumerate() {
                        for i in 0..n {
                            let bar = vec.bar(i).clone();
                            if bar.is_zero() {
                                continue;
                            }
                            let a = model.add_nonneg(format!("alpha[{},{},{kk}]", i + 1, j + 1));
                            row.push((a, Rational::one()));
                            // α ≥ c − c̄(2 − λ − y)
                            let mut arow = vec![
                                (a, Rational::one()),
                                (lambda[j], neg(&bar)),
                                (ys[j][i], neg(&bar)),
                            ];
                            let k0 = vec.entries[i].push(&mut arow, &-Rational::one());
                            model.add_constraint(
                                format!("alpha[{},{},{kk}]", i + 1, j + 1),
                                arow,
                                Relation::Ge,
                                -k0 - &bar * rational::int(2),
                            );
                        }
                    }
                }
            }
            Criterion::TwoStage => {
                let beta = model.add_continuous(format!("beta[{kk}]"), None, None);
                let open = inst.p - x.count();
                row.push((beta, neg(&rational::from_usize(open))));
                for i in (0..n).filter(|&i| !x.chosen[i]) {
                    let g = model.add_nonneg(format!("gamma[{},{kk}]", i + 1));
                    row.push((g, Rational::one()));
                    let mut drow = vec![(beta, Rational::one()), (g, -Rational::one())];
                    for (j, vec) in scenarios.iter().enumerate() {
                        let tag = format!("d[{},{},{kk}]", i + 1, j + 1);
                        let (v, c) = assigned(&mut model, &tag, vec, i, lambda[j]);
                        drow.push((v, neg(&c)));
                    }
                    model.add_constraint(
                        format!("dual[{},{kk}]", i + 1),
                        drow,
                        Relation::Le,
                        Rational::zero(),
                    );
                }
            }
            Criterion::Recoverable => {
                let kept = inst
                    .kept_min()
                    .ok_or_else(|| Error::InvalidInstance("recoverable instance needs delta".into()))?;
                let beta = model.add_continuous(format!("beta[{kk}]"), None, None);
                let eta = model.add_nonneg(format!("eta[{kk}]"));
                row.push((beta, neg(&p)));
                row.push((eta, neg(&rational::from_usize(kept))));
                for i in 0..n {
                    let g = model.add_nonneg(format!("gamma[{},{kk}]", i + 1));
                    row.push((g, Rational::one()));
                    let mut drow = vec![(beta, Rational::one()), (g, -Rational::one())];
                    if x.chosen[i] {
                        drow.push((eta, Rational::one()));
                    }
                    for (j, vec) in scenarios.iter().enumerate() {
                        let tag = format!("d[{},{},{kk}]", i + 1, j + 1);
                        let (v, c) = assigned(&mut model, &tag, vec, i, lambda[j]);
                        drow.push((v, neg(&c)));
                    }
                    model.add_constraint(
                        format!("dual[{},{kk}]", i + 1),
                        drow,
                        Relation::Le,
                        Rational::zero(),
                    );
                }
            }
        }
        model.add_constraint(format!("value{kk}"), row, Relation::Le, rhs);
    }
    Ok(Master {
        model,
        first,
        scenarios,
    })
}

/// True when every vector of `out` lies in the neighborhood of the
/// corresponding vector of `inp`.
pub(crate) fn within_neighborhood(
    inp: &ProblemInstance,
    out: &ProblemInstance,
    b: &Rational,
    c_max: &Rational,
) -> bool {
    fn vectors(inst: &ProblemInstance) -> Vec<&CostVector> {
        let mut v: Vec<&CostVector> = inst.first_stage_costs.iter().collect();
        match &inst.uncertainty {
            UncertaintySet::Discrete { scenarios } => v.extend(scenarios.iter()),
            UncertaintySet::Interval { lower, deviation }
            | UncertaintySet::Budgeted {
                lower, deviation, ..
            } => {
                v.push(lower);
                v.push(deviation);
            }
        }
        v
    }
    let a = vectors(inp);
    let o = vectors(out);
    a.len() == o.len()
        && a.iter()
            .zip(&o)
            .all(|(c, d)| PerturbationNeighborhood::new(c, b, c_max).contains(d))
}
