//! Compact MILP formulations for every supported pairing and the
//! polynomial enumeration solvers for the min-max budgeted and the
//! regret interval problems.

mod breakpoints;

pub use breakpoints::{
    minmax_budgeted_candidates, recoverable_db_pairs, regret_interval_candidates,
    two_stage_db_alphas, BreakpointSet,
};

use crate::error::{Error, Result};
use crate::milp::{solve_milp, MilpModel, Relation, Sense, SolveResult, SolverConfig};
use crate::model::{
    robust_value, solve_nominal_selection, BudgetMode, CostVector, Pairing, ProblemInstance,
    SelectionSolution, SolutionRole, UncertaintySet,
};
use crate::rational::{self, pos, Rational};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// A built model together with the handles needed to read a selection
/// back from an assignment.
#[derive(Clone, Debug)]
pub struct ModelBundle {
    pub pairing: Pairing,
    pub model: MilpModel,
    /// Symbol (`x`, `t`, `pi`, `rho`, ...) to its variable indices.
    pub varmap: BTreeMap<String, Vec<usize>>,
    /// Indices of the selection variables x_1..x_n.
    pub x: Vec<usize>,
    pub role: SolutionRole,
}

impl ModelBundle {
    /// Rounds the x variables at one half.
    pub fn extract(&self, assignment: &[Rational]) -> SelectionSolution {
        let half = rational::ratio(1, 2);
        let chosen = self.x.iter().map(|&j| assignment[j] >= half).collect();
        SelectionSolution::new(chosen, self.role)
    }
}

struct Builder {
    model: MilpModel,
    varmap: BTreeMap<String, Vec<usize>>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            model: MilpModel::new(Sense::Minimize),
            varmap: BTreeMap::new(),
        }
    }

    fn note(&mut self, sym: &str, idx: usize) -> usize {
        self.varmap.entry(sym.to_string()).or_default().push(idx);
        idx
    }

    fn binary(&mut self, sym: &str, tag: String) -> usize {
        let v = self.model.add_binary(format!("{sym}[{tag}]"));
        self.note(sym, v)
    }

    fn nonneg(&mut self, sym: &str, tag: String) -> usize {
        let v = self.model.add_nonneg(format!("{sym}[{tag}]"));
        self.note(sym, v)
    }

    fn unit(&mut self, sym: &str, tag: String) -> usize {
        let v = self
            .model
            .add_continuous(format!("{sym}[{tag}]"), Some(Rational::zero()), Some(Rational::one()));
        self.note(sym, v)
    }

    fn free(&mut self, sym: &str) -> usize {
        let v = self.model.add_continuous(sym, None, None);
        self.note(sym, v)
    }

    fn row(&mut self, name: String, coeffs: Vec<(usize, Rational)>, rel: Relation, rhs: Rational) {
        self.model.add_constraint(name, coeffs, rel, rhs);
    }

    fn obj(&mut self, v: usize, c: Rational) {
        self.model.add_objective_term(v, c);
    }

    fn xs(&mut self, n: usize) -> Vec<usize> {
        (0..n).map(|i| self.binary("x", (i + 1).to_string())).collect()
    }

    fn cardinality(&mut self, name: &str, vars: &[usize], rel: Relation, p: usize) {
        let coeffs = vars.iter().map(|&v| (v, Rational::one())).collect();
        self.row(name.to_string(), coeffs, rel, rational::from_usize(p));
    }

    fn finish(self, pairing: Pairing, x: Vec<usize>, role: SolutionRole) -> ModelBundle {
        ModelBundle {
            pairing,
            model: self.model,
            varmap: self.varmap,
            x,
            role,
        }
    }
}

/// Optimal nominal value of each scenario.
pub fn scenario_optima(scenarios: &[CostVector], p: usize) -> Result<Vec<Rational>> {
    if let Some(first) = scenarios.first() {
        for s in scenarios {
            if s.len() != first.len() {
                return Err(Error::LengthMismatch {
                    expected: first.len(),
                    found: s.len(),
                });
            }
        }
    }
    scenarios
        .iter()
        .map(|s| solve_nominal_selection(s, p).map(|r| r.1))
        .collect()
}

fn integral_gamma(gamma: &Rational, mode: BudgetMode) -> Result<()> {
    if mode == BudgetMode::DiscreteItems && !gamma.is_integer() {
        return Err(Error::Parameter(format!(
            "DiscreteItems budget needs an integral gamma, got {}",
            rational::format(gamma)
        )));
    }
    Ok(())
}

fn min_d(a: Rational, d: &Rational) -> Rational {
    if a < *d {
        a
    } else {
        d.clone()
    }
}

/// Builds the compact MILP of the instance's pairing.
pub fn build_milp(inst: &ProblemInstance) -> Result<ModelBundle> {
    inst.validate()?;
    let pairing = inst.pairing()?;
    let (n, p) = (inst.n, inst.p);
    let mut b = Builder::new();
    let one = Rational::one;
    match pairing {
        Pairing::MinMaxDiscrete | Pairing::RegretDiscrete => {
            let scen = inst.uncertainty.scenarios().unwrap();
            let opt = if pairing == Pairing::RegretDiscrete {
                scenario_optima(scen, p)?
            } else {
                vec![Rational::zero(); scen.len()]
            };
            let x = b.xs(n);
            let t = b.free("t");
            b.obj(t, one());
            for (j, c) in scen.iter().enumerate() {
                let mut row = vec![(t, one())];
                row.extend(x.iter().zip(c.entries()).map(|(&v, cv)| (v, -cv.clone())));
                b.row(format!("epi[{}]", j + 1), row, Relation::Ge, -opt[j].clone());
            }
            b.cardinality("card", &x, Relation::Eq, p);
            Ok(b.finish(pairing, x, SolutionRole::Full))
        }
        Pairing::MinMaxInterval => {
            let (l, d) = inst.uncertainty.bounds().unwrap();
            let x = b.xs(n);
            for i in 0..n {
                b.obj(x[i], l.get(i) + d.get(i));
            }
            b.cardinality("card", &x, Relation::Eq, p);
            Ok(b.finish(pairing, x, SolutionRole::Full))
        }
        Pairing::MinMaxBudgeted => {
            let UncertaintySet::Budgeted {
                lower,
                deviation,
                gamma,
                mode,
            } = &inst.uncertainty
            else {
                unreachable!()
            };
            integral_gamma(gamma, *mode)?;
            let x = b.xs(n);
            let pi = b.nonneg("pi", String::new());
            b.model.variables[pi].name = "pi".into();
            b.obj(pi, gamma.clone());
            for i in 0..n {
                b.obj(x[i], lower.get(i).clone());
                let rho = b.nonneg("rho", (i + 1).to_string());
                let (xc, rc) = match mode {
                    BudgetMode::VariableBudget => (one(), deviation.get(i).clone()),
                    _ => (deviation.get(i).clone(), one()),
                };
                b.obj(rho, rc);
                b.row(
                    format!("dual[{}]", i + 1),
                    vec![(pi, one()), (rho, one()), (x[i], -xc)],
                    Relation::Ge,
                    Rational::zero(),
                );
            }
            b.cardinality("card", &x, Relation::Eq, p);
            Ok(b.finish(pairing, x, SolutionRole::Full))
        }
        Pairing::RegretInterval => {
            let (l, d) = inst.uncertainty.bounds().unwrap();
            let x = b.xs(n);
            let pi = b.free("pi");
            b.obj(pi, -rational::from_usize(p));
            for i in 0..n {
                b.obj(x[i], l.get(i) + d.get(i));
                let rho = b.nonneg("rho", (i + 1).to_string());
                b.obj(rho, one());
                b.row(
                    format!("dual[{}]", i + 1),
                    vec![(pi, one()), (rho, -one()), (x[i], -d.get(i).clone())],
                    Relation::Le,
                    l.get(i).clone(),
                );
            }
            b.cardinality("card", &x, Relation::Eq, p);
            Ok(b.finish(pairing, x, SolutionRole::Full))
        }
        Pairing::TwoStageDiscrete => {
            let scen = inst.uncertainty.scenarios().unwrap();
            let c = inst.first_stage()?;
            let x = b.xs(n);
            let t = b.free("t");
            b.obj(t, one());
            for i in 0..n {
                b.obj(x[i], c.get(i).clone());
            }
            for (j, s) in scen.iter().enumerate() {
                let y: Vec<usize> = (0..n)
                    .map(|i| b.binary("y", format!("{},{}", j + 1, i + 1)))
                    .collect();
                let mut row = vec![(t, one())];
                row.extend(y.iter().zip(s.entries()).map(|(&v, cv)| (v, -cv.clone())));
                b.row(format!("epi[{}]", j + 1), row, Relation::Ge, Rational::zero());
                let mut card: Vec<(usize, Rational)> = x.iter().map(|&v| (v, one())).collect();
                card.extend(y.iter().map(|&v| (v, one())));
                b.row(format!("card[{}]", j + 1), card, Relation::Eq, rational::from_usize(p));
                for i in 0..n {
                    b.row(
                        format!("disj[{},{}]", j + 1, i + 1),
                        vec![(x[i], one()), (y[i], one())],
                        Relation::Le,
                        one(),
                    );
                }
            }
            Ok(b.finish(pairing, x, SolutionRole::PartialFirstStage))
        }
        Pairing::TwoStageDiscreteBudgeted => {
            let UncertaintySet::Budgeted {
                lower,
                deviation,
                gamma,
                mode,
            } = &inst.uncertainty
            else {
                unreachable!()
            };
            integral_gamma(gamma, *mode)?;
            let c = inst.first_stage()?;
            let s = two_stage_db_alphas(lower, deviation);
            let x = b.xs(n);
            let t = b.free("t");
            b.obj(t, one());
            b.cardinality("card", &x, Relation::Le, p);
            let pq = rational::from_usize(p);
            for (k, alpha) in s.values.iter().enumerate() {
                let kk = k + 1;
                let pi = b.nonneg("pi", kk.to_string());
                b.model.variables[pi].name = format!("pi[{kk}]");
                let mut row = vec![(t, one()), (pi, -gamma.clone())];
                let mut rhs = &pq * alpha;
                for i in 0..n {
                    let over = pos(&(alpha - lower.get(i)));
                    let w = min_d(over.clone(), deviation.get(i));
                    row.push((x[i], alpha - c.get(i) - &over));
                    rhs -= &over;
                    if w.is_zero() {
                        continue;
                    }
                    let rho = b.nonneg("rho", format!("{kk},{}", i + 1));
                    row.push((rho, -one()));
                    b.row(
                        format!("dual[{kk},{}]", i + 1),
                        vec![(pi, one()), (rho, one()), (x[i], w.clone())],
                        Relation::Ge,
                        w,
                    );
                }
                b.row(format!("alpha[{kk}]"), row, Relation::Ge, rhs);
            }
            Ok(b.finish(pairing, x, SolutionRole::PartialFirstStage))
        }
        Pairing::TwoStageContinuousBudgeted => {
            let UncertaintySet::Budgeted {
                lower,
                deviation,
                gamma,
                ..
            } = &inst.uncertainty
            else {
                unreachable!()
            };
            let c = inst.first_stage()?;
            let x = b.xs(n);
            let pi = b.nonneg("pi", String::new());
            b.model.variables[pi].name = "pi".into();
            b.obj(pi, gamma.clone());
            let mut card: Vec<(usize, Rational)> = Vec::new();
            for i in 0..n {
                let tag = (i + 1).to_string();
                let y = b.unit("y", tag.clone());
                let rho = b.nonneg("rho", tag);
                b.obj(x[i], c.get(i).clone());
                b.obj(y, lower.get(i).clone());
                b.obj(rho, deviation.get(i).clone());
                card.push((x[i], one()));
                card.push((y, one()));
                b.row(
                    format!("disj[{}]", i + 1),
                    vec![(x[i], one()), (y, one())],
                    Relation::Le,
                    one(),
                );
                b.row(
                    format!("dual[{}]", i + 1),
                    vec![(pi, one()), (rho, one()), (y, -one())],
                    Relation::Ge,
                    Rational::zero(),
                );
            }
            b.row("card".into(), card, Relation::Eq, rational::from_usize(p));
            Ok(b.finish(pairing, x, SolutionRole::PartialFirstStage))
        }
        Pairing::RecoverableDiscrete => {
            let scen = inst.uncertainty.scenarios().unwrap();
            let c = inst.first_stage()?;
            let kept = inst.kept_min().unwrap_or(0);
            let x = b.xs(n);
            let t = b.free("t");
            b.obj(t, one());
            for i in 0..n {
                b.obj(x[i], c.get(i).clone());
            }
            b.cardinality("card", &x, Relation::Eq, p);
            for (j, s) in scen.iter().enumerate() {
                let jj = j + 1;
                let y: Vec<usize> = (0..n).map(|i| b.binary("y", format!("{jj},{}", i + 1))).collect();
                let z: Vec<usize> = (0..n).map(|i| b.unit("z", format!("{jj},{}", i + 1))).collect();
                let mut row = vec![(t, one())];
                row.extend(y.iter().zip(s.entries()).map(|(&v, cv)| (v, -cv.clone())));
                b.row(format!("epi[{jj}]"), row, Relation::Ge, Rational::zero());
                b.cardinality(&format!("card[{jj}]"), &y, Relation::Eq, p);
                b.cardinality(&format!("keep[{jj}]"), &z, Relation::Ge, kept);
                for i in 0..n {
                    b.row(
                        format!("zx[{jj},{}]", i + 1),
                        vec![(z[i], one()), (x[i], -one())],
                        Relation::Le,
                        Rational::zero(),
                    );
                    b.row(
                        format!("zy[{jj},{}]", i + 1),
                        vec![(z[i], one()), (y[i], -one())],
                        Relation::Le,
                        Rational::zero(),
                    );
                }
            }
            Ok(b.finish(pairing, x, SolutionRole::Full))
        }
        Pairing::RecoverableDiscreteBudgeted => {
            let UncertaintySet::Budgeted {
                lower,
                deviation,
                gamma,
                mode,
            } = &inst.uncertainty
            else {
                unreachable!()
            };
            integral_gamma(gamma, *mode)?;
            if n > 40 {
                return Err(Error::TooLarge(format!(
                    "Recoverable x DiscreteBudgeted formulation is limited to n <= 40 (got {n})"
                )));
            }
            let c = inst.first_stage()?;
            let kept = rational::from_usize(inst.kept_min().unwrap_or(0));
            let pairs = recoverable_db_pairs(lower, deviation);
            let x = b.xs(n);
            let t = b.free("t");
            b.obj(t, one());
            b.cardinality("card", &x, Relation::Eq, p);
            let pq = rational::from_usize(p);
            for (k, (alpha, beta)) in pairs.values.iter().enumerate() {
                let kk = k + 1;
                let pi = b.nonneg("pi", kk.to_string());
                let mut row = vec![(t, one()), (pi, -gamma.clone())];
                let mut rhs = &pq * alpha + &kept * beta;
                let ab = alpha + beta;
                for i in 0..n {
                    let over1 = pos(&(&ab - lower.get(i)));
                    let over0 = pos(&(alpha - lower.get(i)));
                    let g1 = min_d(over1.clone(), deviation.get(i));
                    let g0 = min_d(over0.clone(), deviation.get(i));
                    row.push((x[i], &over1 - &over0 - c.get(i)));
                    rhs -= &over0;
                    if g0.is_zero() && g1.is_zero() {
                        continue;
                    }
                    let rho = b.nonneg("rho", format!("{kk},{}", i + 1));
                    row.push((rho, -one()));
                    b.row(
                        format!("dual[{kk},{}]", i + 1),
                        vec![(pi, one()), (rho, one()), (x[i], &g0 - &g1)],
                        Relation::Ge,
                        g0,
                    );
                }
                b.row(format!("pair[{kk}]"), row, Relation::Ge, rhs);
            }
            Ok(b.finish(pairing, x, SolutionRole::Full))
        }
        Pairing::RecoverableContinuousBudgeted => {
            let UncertaintySet::Budgeted {
                lower,
                deviation,
                gamma,
                ..
            } = &inst.uncertainty
            else {
                unreachable!()
            };
            let c = inst.first_stage()?;
            let kept = inst.kept_min().unwrap_or(0);
            let x = b.xs(n);
            let pi = b.nonneg("pi", String::new());
            b.model.variables[pi].name = "pi".into();
            b.obj(pi, gamma.clone());
            let mut y = Vec::with_capacity(n);
            let mut z = Vec::with_capacity(n);
            for i in 0..n {
                let tag = (i + 1).to_string();
                let yi = b.unit("y", tag.clone());
                let zi = b.unit("z", tag.clone());
                let rho = b.nonneg("rho", tag);
                b.obj(x[i], c.get(i).clone());
                b.obj(yi, lower.get(i).clone());
                b.obj(rho, deviation.get(i).clone());
                b.row(
                    format!("zx[{}]", i + 1),
                    vec![(zi, one()), (x[i], -one())],
                    Relation::Le,
                    Rational::zero(),
                );
                b.row(
                    format!("zy[{}]", i + 1),
                    vec![(zi, one()), (yi, -one())],
                    Relation::Le,
                    Rational::zero(),
                );
                b.row(
                    format!("dual[{}]", i + 1),
                    vec![(pi, one()), (rho, one()), (yi, -one())],
                    Relation::Ge,
                    Rational::zero(),
                );
                y.push(yi);
                z.push(zi);
            }
            b.cardinality("card", &x, Relation::Eq, p);
            b.cardinality("card_y", &y, Relation::Eq, p);
            b.cardinality("keep", &z, Relation::Ge, kept);
            Ok(b.finish(pairing, x, SolutionRole::Full))
        }
    }
}

/// A formulation solve: the MILP result, the extracted selection and its
/// exact robust value.
#[derive(Clone, Debug)]
pub struct FormulationOutcome {
    pub milp: SolveResult,
    pub solution: Option<SelectionSolution>,
    /// Exact robust value of `solution`.
    pub objective: Option<Rational>,
}

/// Builds, solves and extracts.
pub fn solve_formulation(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<FormulationOutcome> {
    let bundle = build_milp(inst)?;
    let milp = solve_milp(&bundle.model, cfg)?;
    let solution = milp.assignment.as_ref().map(|a| bundle.extract(a));
    let objective = match &solution {
        Some(s) => Some(robust_value(s, inst)?),
        None => None,
    };
    Ok(FormulationOutcome {
        milp,
        solution,
        objective,
    })
}

fn pick_p(coef: &[Rational], p: usize) -> (Vec<usize>, Rational) {
    let mut idx: Vec<usize> = (0..coef.len()).collect();
    idx.sort_by(|a, b| coef[*a].cmp(&coef[*b]).then(a.cmp(b)));
    idx.truncate(p);
    let v = rational::sum(idx.iter().map(|&i| &coef[i]));
    idx.sort_unstable();
    (idx, v)
}

/// Minimizes over the dual candidates π of Γπ plus the nominal optimum on
/// the costs lower_i + [d_i − π]₊ (for `VariableBudget`, π ∈ {0, 1} on
/// lower_i + d_i[1 − π]₊).
pub fn solve_minmax_budgeted_enumeration(
    inst: &ProblemInstance,
) -> Result<(SelectionSolution, Rational)> {
    inst.validate()?;
    if inst.pairing()? != Pairing::MinMaxBudgeted {
        return Err(Error::UnsupportedPairing(format!(
            "budgeted enumeration needs MinMax x Budgeted, got {}",
            inst.pairing()?
        )));
    }
    let UncertaintySet::Budgeted {
        lower,
        deviation,
        gamma,
        mode,
    } = &inst.uncertainty
    else {
        unreachable!()
    };
    integral_gamma(gamma, *mode)?;
    let cand = minmax_budgeted_candidates(deviation, *mode);
    let mut best: Option<(Vec<usize>, Rational)> = None;
    for pi in &cand.values {
        let coef: Vec<Rational> = (0..inst.n)
            .map(|i| match mode {
                BudgetMode::VariableBudget => {
                    lower.get(i) + deviation.get(i) * pos(&(Rational::one() - pi))
                }
                _ => lower.get(i) + pos(&(deviation.get(i) - pi)),
            })
            .collect();
        let (sel, v) = pick_p(&coef, inst.p);
        let v = v + gamma * pi;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((sel, v));
        }
    }
    let (sel, v) = best.expect("candidate set contains zero");
    Ok((SelectionSolution::full(inst.n, &sel), v))
}

/// Minimizes the fixed-π reduced regret problem over the candidate set.
pub fn solve_regret_interval_enumeration(
    inst: &ProblemInstance,
) -> Result<(SelectionSolution, Rational)> {
    inst.validate()?;
    if inst.pairing()? != Pairing::RegretInterval {
        return Err(Error::UnsupportedPairing(format!(
            "regret enumeration needs MinMaxRegret x Interval, got {}",
            inst.pairing()?
        )));
    }
    let (l, d) = inst.uncertainty.bounds().unwrap();
    let cand = regret_interval_candidates(l, d);
    let pq = rational::from_usize(inst.p);
    let mut best: Option<(Vec<usize>, Rational)> = None;
    for pi in &cand.values {
        let mut constant = -(&pq * pi);
        let coef: Vec<Rational> = (0..inst.n)
            .map(|i| {
                let up = l.get(i) + d.get(i);
                let below = pos(&(pi - l.get(i)));
                constant += &below;
                &up + pos(&(pi - &up)) - below
            })
            .collect();
        let (sel, v) = pick_p(&coef, inst.p);
        let v = v + constant;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((sel, v));
        }
    }
    let (sel, v) = best.expect("candidate set contains zero");
    Ok((SelectionSolution::full(inst.n, &sel), v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{brute_force_robust_opt, BruteForceLimits, Criterion, DeltaSemantics};
    use crate::rational::int;

    fn cv(v: &[i64]) -> CostVector {
        CostVector::from_ints(v).unwrap()
    }

    fn solve(inst: &ProblemInstance) -> (SelectionSolution, Rational) {
        let out = solve_formulation(inst, &SolverConfig::default()).unwrap();
        assert!(out.milp.status.has_solution(), "{:?}", out.milp.status);
        let obj = out.milp.objective.clone().unwrap();
        assert_eq!(out.objective.as_ref(), Some(&obj));
        (out.solution.unwrap(), obj)
    }

    #[test]
    fn scenario_optima_examples() {
        let s = vec![cv(&[1, 5, 3, 4]), cv(&[4, 2, 5, 1])];
        assert_eq!(scenario_optima(&s, 2).unwrap(), vec![int(4), int(3)]);
        assert_eq!(scenario_optima(&[cv(&[0, 0, 0])], 2).unwrap(), vec![int(0)]);
        assert!(scenario_optima(&[cv(&[1, 2]), cv(&[1])], 1).is_err());
    }

    #[test]
    fn minmax_discrete_example() {
        let inst = ProblemInstance::minmax_discrete(
            2,
            vec![cv(&[1, 5, 3, 4]), cv(&[4, 2, 5, 1])],
        )
        .unwrap();
        let (x, v) = solve(&inst);
        assert_eq!(v, int(5));
        assert_eq!(x.indices(), vec![0, 3]);
    }

    #[test]
    fn regret_interval_example() {
        let inst = ProblemInstance::regret_interval(1, cv(&[1, 2, 0]), cv(&[1, 0, 5])).unwrap();
        assert_eq!(solve(&inst).1, int(2));
        assert_eq!(solve_regret_interval_enumeration(&inst).unwrap().1, int(2));
        let flat = ProblemInstance::regret_interval(2, cv(&[1, 2, 0]), cv(&[0, 0, 0])).unwrap();
        assert_eq!(solve_regret_interval_enumeration(&flat).unwrap().1, int(0));
        let full = ProblemInstance::regret_interval(3, cv(&[1, 2, 0]), cv(&[4, 1, 5])).unwrap();
        assert_eq!(solve_regret_interval_enumeration(&full).unwrap().1, int(0));
    }

    #[test]
    fn budgeted_enumeration_examples() {
        let inst = ProblemInstance::minmax_budgeted(
            2,
            cv(&[1, 1, 1]),
            cv(&[2, 3, 4]),
            int(1),
            BudgetMode::DiscreteItems,
        )
        .unwrap();
        assert_eq!(solve_minmax_budgeted_enumeration(&inst).unwrap().1, int(5));
        assert_eq!(solve(&inst).1, int(5));
        let g0 = ProblemInstance::minmax_budgeted(2, cv(&[3, 1, 2]), cv(&[9, 9, 9]), int(0), BudgetMode::DiscreteItems)
            .unwrap();
        assert_eq!(solve_minmax_budgeted_enumeration(&g0).unwrap().1, int(3));
        let gn = ProblemInstance::minmax_budgeted(2, cv(&[3, 1, 2]), cv(&[1, 9, 9]), int(3), BudgetMode::DiscreteItems)
            .unwrap();
        assert_eq!(solve_minmax_budgeted_enumeration(&gn).unwrap().1, int(14));
    }

    #[test]
    fn fractional_gamma_rejected_for_discrete_items() {
        let inst = ProblemInstance::minmax_budgeted(
            1,
            cv(&[1, 2]),
            cv(&[1, 1]),
            rational::ratio(1, 2),
            BudgetMode::ContinuousItems,
        )
        .unwrap();
        assert!(build_milp(&inst).is_ok());
        let mut bad = inst.clone();
        if let UncertaintySet::Budgeted { mode, .. } = &mut bad.uncertainty {
            *mode = BudgetMode::DiscreteItems;
        }
        assert!(build_milp(&bad).is_err());
    }

    #[test]
    fn two_stage_single_scenario_reduces_to_enumeration() {
        let inst = ProblemInstance::new(
            2,
            Criterion::TwoStage,
            UncertaintySet::Discrete {
                scenarios: vec![cv(&[4, 1, 6, 3])],
            },
            Some(cv(&[2, 5, 1, 7])),
            None,
        )
        .unwrap();
        let (_, v) = solve(&inst);
        let (_, bv) = brute_force_robust_opt(&inst, BruteForceLimits::default()).unwrap();
        assert_eq!(v, bv);
        assert_eq!(v, int(2));
    }

    #[test]
    fn recoverable_full_keep_matches_brute_force() {
        let inst = ProblemInstance::new(
            2,
            Criterion::Recoverable,
            UncertaintySet::Discrete {
                scenarios: vec![cv(&[4, 1, 6, 3, 2]), cv(&[1, 7, 2, 2, 5])],
            },
            Some(cv(&[2, 5, 1, 7, 3])),
            Some((2, DeltaSemantics::KeptAtLeast)),
        )
        .unwrap();
        let (_, v) = solve(&inst);
        let (_, bv) = brute_force_robust_opt(&inst, BruteForceLimits::default()).unwrap();
        assert_eq!(v, bv);
    }

    #[test]
    fn varmap_names_symbols() {
        let inst = ProblemInstance::new(
            2,
            Criterion::Recoverable,
            UncertaintySet::Budgeted {
                lower: cv(&[1, 2, 3]),
                deviation: cv(&[3, 2, 1]),
                gamma: int(1),
                mode: BudgetMode::DiscreteItems,
            },
            Some(cv(&[2, 2, 2])),
            Some((1, DeltaSemantics::ChangedAtMost)),
        )
        .unwrap();
        let b = build_milp(&inst).unwrap();
        for s in ["x", "t", "pi", "rho"] {
            assert!(b.varmap.contains_key(s), "{s}");
        }
        assert!(crate::milp::validate_model(&b.model).is_ok());
    }
}
