//! Shared oracles for the integration tests.
#![allow(dead_code)]

use robsel_core::hiro::PerturbationNeighborhood;
use robsel_core::milp::{solve_lp_exact, MilpModel, Relation, Sense, SolveStatus};
use robsel_core::model::{
    robust_value, Criterion, CostVector, ProblemInstance, SelectionSolution, SolutionRole,
    UncertaintySet,
};
use robsel_core::rational::{self, Rational};

/// k-subsets of 0..n in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Every first-stage decision of the instance.
pub fn first_stage_decisions(inst: &ProblemInstance) -> Vec<Vec<usize>> {
    if inst.criterion == Criterion::TwoStage {
        (0..=inst.p).flat_map(|k| subsets(inst.n, k)).collect()
    } else {
        subsets(inst.n, inst.p)
    }
}

fn as_solution(inst: &ProblemInstance, idx: &[usize]) -> SelectionSolution {
    let role = if inst.criterion == Criterion::TwoStage {
        SolutionRole::PartialFirstStage
    } else {
        SolutionRole::Full
    };
    SelectionSolution::from_indices(inst.n, idx, role)
}

/// Exact max-min-max value of the hardening problem for a tiny discrete
/// instance.
///
/// The value is max over c in the neighborhood of g(c) = min_x f(x, c),
/// where f(x, c) = max_j φ_j(x, c). Every φ_j is linear in c (min-max),
/// a maximum of linear functions (regret: c^j x − c^j y over scenario
/// solutions y) or a minimum of linear functions (two-stage and
/// recoverable: C x + c^j y over admissible second-stage y). The oracle
/// branches on disjunctions: each decision x is assigned the scenario j
/// that certifies its value, and for regret every used scenario is
/// assigned its optimal solution y^j. A node LP maximizes t subject to the
/// rows of the assigned disjuncts, so it bounds every completion. At the
/// LP optimum c* all decisions are evaluated exactly; if none falls below
/// t* the node is solved, otherwise the most violated unassigned decision
/// is branched on. Every LP is solved in exact rational arithmetic.
pub fn hiro_oracle(inst: &ProblemInstance, b: &Rational, c_max: &Rational, perturb_scenarios: bool) -> Rational {
    let scen = inst.uncertainty.scenarios().expect("discrete").to_vec();
    let xs = first_stage_decisions(inst);
    let ys = subsets(inst.n, inst.p);
    let mut o = Oracle {
        inst,
        scen,
        xs,
        ys,
        b: b.clone(),
        c_max: c_max.clone(),
        perturb: perturb_scenarios,
        best: None,
    };
    let node = Node {
        assign: vec![None; o.xs.len()],
        ysel: vec![None; o.scen.len()],
    };
    o.search(node);
    o.best.expect("root is feasible")
}

#[derive(Clone)]
struct Node {
    assign: Vec<Option<usize>>,
    ysel: Vec<Option<usize>>,
}

struct Oracle<'a> {
    inst: &'a ProblemInstance,
    scen: Vec<CostVector>,
    xs: Vec<Vec<usize>>,
    ys: Vec<Vec<usize>>,
    b: Rational,
    c_max: Rational,
    perturb: bool,
    best: Option<Rational>,
}

type Lin = (Vec<(usize, Rational)>, Rational);

impl Oracle<'_> {
    fn search(&mut self, node: Node) {
        let Some((t, inst)) = self.lp(&node) else {
            return;
        };
        if self.best.as_ref().is_some_and(|b| &t <= b) {
            return;
        }
        let values: Vec<Rational> = self
            .xs
            .iter()
            .map(|x| robust_value(&as_solution(self.inst, x), &inst).unwrap())
            .collect();
        let g = values.iter().min().unwrap().clone();
        if self.best.as_ref().is_none_or(|b| &g > b) {
            self.best = Some(g.clone());
        }
        if g >= t {
            return;
        }
        // Regret: fix the scenario solution of any scenario in use first.
        if self.inst.criterion == Criterion::MinMaxRegret {
            for j in 0..self.scen.len() {
                if node.ysel[j].is_none() && node.assign.contains(&Some(j)) {
                    for y in 0..self.ys.len() {
                        let mut child = node.clone();
                        child.ysel[j] = Some(y);
                        self.search(child);
                    }
                    return;
                }
            }
        }
        let k = (0..self.xs.len())
            .filter(|&k| node.assign[k].is_none() && values[k] < t)
            .min_by(|&a, &b| values[a].cmp(&values[b]))
            .expect("a violated decision is unassigned");
        for j in 0..self.scen.len() {
            let mut child = node.clone();
            child.assign[k] = Some(j);
            self.search(child);
        }
    }

    fn lp(&self, node: &Node) -> Option<(Rational, ProblemInstance)> {
        let inst = self.inst;
        let mut m = MilpModel::new(Sense::Maximize);
        let bound = rational::from_usize(2 * inst.p) * &self.c_max + rational::one();
        let t = m.add_continuous("t", None, Some(bound));
        m.add_objective_term(t, rational::one());
        let vector = |m: &mut MilpModel, c: &CostVector, var: bool, tag: &str| -> Vec<Lin> {
            let h = PerturbationNeighborhood::new(c, &self.b, &self.c_max);
            if !var {
                return c.entries().iter().map(|v| (vec![], v.clone())).collect();
            }
            let vs: Vec<usize> = (0..c.len())
                .map(|i| m.add_continuous(format!("{tag}{i}"), Some(h.lower[i].clone()), Some(h.upper[i].clone())))
                .collect();
            m.add_constraint(
                format!("cap{tag}"),
                vs.iter().map(|&v| (v, rational::one())).collect(),
                Relation::Le,
                h.cap.clone(),
            );
            vs.into_iter().map(|v| (vec![(v, rational::one())], rational::zero())).collect()
        };
        let cs: Vec<Vec<Lin>> = (0..self.scen.len())
            .map(|j| vector(&mut m, &self.scen[j], self.perturb, &format!("c{j}_")))
            .collect();
        let first: Option<Vec<Lin>> = inst
            .first_stage_costs
            .as_ref()
            .map(|c| vector(&mut m, c, true, "C"));
        // t − Σ plus·entries + Σ minus·entries ≤ 0
        let add_row = |m: &mut MilpModel, plus: Vec<&Lin>, minus: Vec<&Lin>| {
            let mut coeffs = vec![(t, rational::one())];
            let mut rhs = rational::zero();
            for (terms, k) in plus {
                coeffs.extend(terms.iter().map(|(v, a)| (*v, -a.clone())));
                rhs += k;
            }
            for (terms, k) in minus {
                coeffs.extend(terms.iter().map(|(v, a)| (*v, a.clone())));
                rhs -= k;
            }
            m.add_constraint("row", coeffs, Relation::Le, rhs);
        };
        for (k, x) in self.xs.iter().enumerate() {
            let Some(j) = node.assign[k] else { continue };
            let fx: Vec<&Lin> = first.as_ref().map(|f| x.iter().map(|&i| &f[i]).collect()).unwrap_or_default();
            match inst.criterion {
                Criterion::MinMax => add_row(&mut m, x.iter().map(|&i| &cs[j][i]).collect(), vec![]),
                Criterion::MinMaxRegret => {
                    let minus = match node.ysel[j] {
                        Some(y) => self.ys[y].iter().map(|&i| &cs[j][i]).collect(),
                        None => vec![],
                    };
                    add_row(&mut m, x.iter().map(|&i| &cs[j][i]).collect(), minus);
                }
                Criterion::TwoStage => {
                    let open: Vec<usize> = (0..inst.n).filter(|i| !x.contains(i)).collect();
                    for y in subsets(open.len(), inst.p - x.len()) {
                        let mut plus = fx.clone();
                        plus.extend(y.iter().map(|&r| &cs[j][open[r]]));
                        add_row(&mut m, plus, vec![]);
                    }
                }
                Criterion::Recoverable => {
                    let kept = inst.kept_min().unwrap();
                    for y in &self.ys {
                        if y.iter().filter(|i| x.contains(i)).count() < kept {
                            continue;
                        }
                        let mut plus = fx.clone();
                        plus.extend(y.iter().map(|&i| &cs[j][i]));
                        add_row(&mut m, plus, vec![]);
                    }
                }
            }
        }
        let res = solve_lp_exact(&m).unwrap();
        if res.status != SolveStatus::Optimal {
            return None;
        }
        let value = |lin: &Lin| -> Rational {
            lin.0.iter().fold(lin.1.clone(), |acc, (v, a)| acc + a * &res.values[*v])
        };
        let mut out = inst.clone();
        out.uncertainty = UncertaintySet::Discrete {
            scenarios: cs
                .iter()
                .map(|row| CostVector::new(row.iter().map(value).collect()).unwrap())
                .collect(),
        };
        if let Some(f) = &first {
            out.first_stage_costs = Some(CostVector::new(f.iter().map(value).collect()).unwrap());
        }
        Some((res.objective.unwrap(), out))
    }
}

/// Best value over the box vertices of each scenario that respect the sum
/// cap. A lower bound on the exact value; min-max only.
pub fn vertex_grid_value(inst: &ProblemInstance, b: &Rational, c_max: &Rational) -> Rational {
    let scen = inst.uncertainty.scenarios().unwrap();
    let per: Vec<Vec<CostVector>> = scen
        .iter()
        .map(|c| {
            let h = PerturbationNeighborhood::new(c, b, c_max);
            let n = c.len();
            (0..1u32 << n)
                .map(|mask| {
                    CostVector::new(
                        (0..n)
                            .map(|i| if mask >> i & 1 == 1 { h.upper[i].clone() } else { h.lower[i].clone() })
                            .collect(),
                    )
                    .unwrap()
                })
                .filter(|v| h.contains(v))
                .collect()
        })
        .collect();
    let xs = first_stage_decisions(inst);
    let mut best: Option<Rational> = None;
    let mut idx = vec![0usize; per.len()];
    loop {
        let chosen: Vec<CostVector> = idx.iter().zip(&per).map(|(&k, v)| v[k].clone()).collect();
        let g = xs
            .iter()
            .map(|x| {
                chosen
                    .iter()
                    .map(|c| rational::sum(x.iter().map(|&i| c.get(i))))
                    .max()
                    .unwrap()
            })
            .min()
            .unwrap();
        if best.as_ref().is_none_or(|b| &g > b) {
            best = Some(g);
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return best.unwrap();
            }
            idx[pos] += 1;
            if idx[pos] < per[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Toy discrete instance of the given criterion with integer costs in
/// `0..=hi`.
pub fn toy_discrete(criterion: Criterion, n: usize, p: usize, big_n: usize, hi: i64, seed: u64) -> ProblemInstance {
    use robsel_core::model::DeltaSemantics;
    use robsel_core::samplers::Draws;
    let mut d = Draws::new(seed, 0);
    let vec = |d: &mut Draws| CostVector::from_ints(&(0..n).map(|_| d.int(0, hi)).collect::<Vec<_>>()).unwrap();
    let scenarios = (0..big_n).map(|_| vec(&mut d)).collect();
    let (first, recovery) = match criterion {
        Criterion::TwoStage => (Some(vec(&mut d)), None),
        Criterion::Recoverable => {
            let delta = d.int(0, p as i64) as usize;
            (Some(vec(&mut d)), Some((delta, DeltaSemantics::KeptAtLeast)))
        }
        _ => (None, None),
    };
    ProblemInstance::new(p, criterion, UncertaintySet::Discrete { scenarios }, first, recovery).unwrap()
}

/// Instance from the sampler catalog with parameters folded into the
/// generator's admissible ranges.
pub fn sampled(g: robsel_core::samplers::GeneratorId, n: usize, p: usize, big_n: usize, gamma: u32, delta: usize, seed: u64) -> ProblemInstance {
    use robsel_core::model::BudgetMode;
    use robsel_core::samplers::{sample_instance, ShapeParams};
    let p = 1 + p % n;
    let mut sp = ShapeParams::new(n, p, seed);
    for &key in g.required_params() {
        match key {
            "N" => sp.scenarios = Some(1 + big_n),
            "gamma" => {
                let v = match g.family.budget_mode() {
                    Some(BudgetMode::VariableBudget) => gamma % 300,
                    _ => gamma % (n as u32 + 1),
                };
                sp.gamma = Some(rational::from_usize(v as usize));
            }
            "delta" => sp.delta = Some(delta % (p + 1)),
            _ => {}
        }
    }
    sample_instance(g, &sp).unwrap_or_else(|e| panic!("{g}: {e}"))
}
