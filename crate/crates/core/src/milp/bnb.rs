//! Depth-first branch-and-bound with best-bound backtracking.

use super::field::Field;
use super::simplex::{self, Basis, LpData, LpLimits, LpOutcome, LpStatus, Tols};
use super::{validate_model, MilpModel, Relation, Sense, SolveResult, SolveStatus, SolverConfig, VarKind};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use std::rc::Rc;
use std::time::Instant;

struct Converted<F> {
    lp: LpData<F>,
    lo: Vec<Option<F>>,
    up: Vec<Option<F>>,
    binaries: Vec<usize>,
}

fn convert<F: Field>(model: &MilpModel) -> Converted<F> {
    let n = model.variables.len();
    let m = model.constraints.len();
    let mut cols: Vec<Vec<(usize, F)>> = vec![Vec::new(); n];
    for (i, c) in model.constraints.iter().enumerate() {
        for (j, a) in &c.coeffs {
            cols[*j].push((i, F::from_rational(a)));
        }
    }
    let flip = model.objective.sense == Sense::Maximize;
    let mut cost = vec![F::zero(); n];
    for (j, c) in &model.objective.coeffs {
        let v = F::from_rational(c);
        cost[*j] = cost[*j].plus(&if flip { v.negate() } else { v });
    }
    let mut lo = Vec::with_capacity(n + m);
    let mut up = Vec::with_capacity(n + m);
    let mut binaries = Vec::new();
    for (j, v) in model.variables.iter().enumerate() {
        let mut l = v.lower.clone();
        let mut u = v.upper.clone();
        if v.kind == VarKind::Binary {
            binaries.push(j);
            l = Some(l.map_or(rational::zero(), |l| l.max(rational::zero())));
            u = Some(u.map_or(rational::one(), |u| u.min(rational::one())));
        }
        lo.push(l.as_ref().map(F::from_rational));
        up.push(u.as_ref().map(F::from_rational));
    }
    for c in &model.constraints {
        let (l, u) = match c.relation {
            Relation::Le => (Some(F::zero()), None),
            Relation::Ge => (None, Some(F::zero())),
            Relation::Eq => (Some(F::zero()), Some(F::zero())),
        };
        lo.push(l);
        up.push(u);
    }
    let rhs = model.constraints.iter().map(|c| F::from_rational(&c.rhs)).collect();
    Converted {
        lp: LpData { m, n, cols, cost, rhs },
        lo,
        up,
        binaries,
    }
}

#[derive(Clone, Debug)]
pub struct ExactLp {
    /// `Optimal`, `Infeasible`, `Unbounded` or `NumericalError`.
    pub status: SolveStatus,
    pub objective: Option<Rational>,
    pub values: Vec<Rational>,
    /// Row duals in the model's own sense.
    pub duals: Vec<Rational>,
}

fn lp_status(s: LpStatus) -> SolveStatus {
    match s {
        LpStatus::Optimal => SolveStatus::Optimal,
        LpStatus::Infeasible => SolveStatus::Infeasible,
        LpStatus::Unbounded => SolveStatus::Unbounded,
        LpStatus::IterationLimit | LpStatus::TimeLimit => SolveStatus::LimitNoSolution,
        LpStatus::Numerical => SolveStatus::NumericalError,
    }
}

/// Solves the continuous relaxation (binaries relaxed to [0,1]) in exact
/// rational arithmetic.
pub fn solve_lp_exact(model: &MilpModel) -> Result<ExactLp> {
    check(model)?;
    let c = convert::<Rational>(model);
    let out = simplex::solve(&c.lp, &c.lo, &c.up, None, &Tols::exact(), &LpLimits::default());
    Ok(exact_report(model, &c.lp, out))
}

fn exact_report(model: &MilpModel, lp: &LpData<Rational>, out: LpOutcome<Rational>) -> ExactLp {
    let flip = model.objective.sense == Sense::Maximize;
    let status = lp_status(out.status);
    if status != SolveStatus::Optimal {
        return ExactLp {
            status,
            objective: None,
            values: Vec::new(),
            duals: Vec::new(),
        };
    }
    let values: Vec<Rational> = out.x[..lp.n].to_vec();
    let duals = out
        .duals
        .into_iter()
        .map(|d| if flip { -d } else { d })
        .collect();
    ExactLp {
        status,
        objective: Some(model.objective_value(&values)),
        values,
        duals,
    }
}

fn check(model: &MilpModel) -> Result<()> {
    validate_model(model).map_err(|d| {
        let s: Vec<String> = d.iter().map(|d| d.to_string()).collect();
        Error::Solver(s.join("; "))
    })
}

struct Node {
    fixes: Vec<(usize, bool)>,
    bound: f64,
    basis: Option<Rc<Basis>>,
}

struct Incumbent {
    x: Vec<f64>,
    obj: f64,
    basis: Basis,
}

/// Branch-and-bound over the binary variables. Continuous models are
/// solved as a single LP.
pub fn solve_milp(model: &MilpModel, cfg: &SolverConfig) -> Result<SolveResult> {
    check(model)?;
    let start = Instant::now();
    let deadline = cfg.time_limit.map(|t| start + t);
    let conv = convert::<f64>(model);
    let limits = LpLimits {
        max_iterations: None,
        deadline,
    };
    let tols = Tols::float();
    let int_tol = cfg.integrality_tol;
    let mut exact_conv: Option<Converted<Rational>> = None;
    let small = model.nnz() <= cfg.exact_nnz_limit;

    let mut open: Vec<Node> = Vec::new();
    let mut next = Some(Node {
        fixes: Vec::new(),
        bound: f64::NEG_INFINITY,
        basis: None,
    });
    let mut inc: Option<Incumbent> = None;
    let mut nodes = 0u64;
    let mut iters = 0u64;
    let mut numerical = false;
    let mut unbounded = false;
    let mut stopped: Option<SolveStatus> = None;
    let mut lo = conv.lo.clone();
    let mut up = conv.up.clone();
    let prune_gap = |inc: &Option<Incumbent>, b: f64| {
        inc.as_ref()
            .is_some_and(|i| b >= i.obj - 1e-9 * i.obj.abs().max(1.0))
    };

    loop {
        let node = match next.take() {
            Some(n) => n,
            None => {
                if open.is_empty() {
                    break;
                }
                let mut bi = 0;
                for (k, nd) in open.iter().enumerate() {
                    if nd.bound < open[bi].bound {
                        bi = k;
                    }
                }
                open.swap_remove(bi)
            }
        };
        if prune_gap(&inc, node.bound) {
            continue;
        }
        if cfg.node_limit.is_some_and(|l| nodes >= l) {
            open.push(node);
            stopped = Some(SolveStatus::FeasibleNodeLimit);
            break;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            open.push(node);
            stopped = Some(SolveStatus::FeasibleTimeLimit);
            break;
        }
        nodes += 1;
        lo.clone_from(&conv.lo);
        up.clone_from(&conv.up);
        for &(j, v) in &node.fixes {
            let b = if v { 1.0 } else { 0.0 };
            lo[j] = Some(b);
            up[j] = Some(b);
        }
        let mut out = simplex::solve(&conv.lp, &lo, &up, node.basis.as_deref(), &tols, &limits);
        iters += out.iterations as u64;
        if out.status == LpStatus::Numerical && node.basis.is_some() {
            out = simplex::solve(&conv.lp, &lo, &up, None, &tols, &limits);
            iters += out.iterations as u64;
        }
        if out.status == LpStatus::Numerical && small {
            let ec = exact_conv.get_or_insert_with(|| convert::<Rational>(model));
            let mut elo = ec.lo.clone();
            let mut eup = ec.up.clone();
            for &(j, v) in &node.fixes {
                let b = if v { rational::one() } else { rational::zero() };
                elo[j] = Some(b.clone());
                eup[j] = Some(b);
            }
            let e = simplex::solve(&ec.lp, &elo, &eup, None, &Tols::exact(), &limits);
            iters += e.iterations as u64;
            out = LpOutcome {
                status: e.status,
                x: e.x.iter().map(rational::to_f64).collect(),
                objective: rational::to_f64(&e.objective),
                duals: Vec::new(),
                basis: e.basis,
                iterations: e.iterations,
            };
        }
        match out.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                unbounded = true;
                break;
            }
            LpStatus::TimeLimit | LpStatus::IterationLimit => {
                open.push(node);
                stopped = Some(SolveStatus::FeasibleTimeLimit);
                break;
            }
            LpStatus::Numerical => {
                numerical = true;
                continue;
            }
        }
        let obj = out.objective;
        if prune_gap(&inc, obj) {
            continue;
        }
        let mut branch: Option<(usize, f64)> = None;
        for &j in &conv.binaries {
            let v = out.x[j];
            let frac = (v - v.round()).abs();
            if frac > int_tol && branch.is_none_or(|(_, f)| frac > f) {
                branch = Some((j, frac));
            }
        }
        match branch {
            None => {
                inc = Some(Incumbent {
                    x: out.x,
                    obj,
                    basis: out.basis,
                });
            }
            Some((j, _)) => {
                let basis = Rc::new(out.basis);
                let up_first = out.x[j] >= 0.5;
                let mk = |v: bool| {
                    let mut f = node.fixes.clone();
                    f.push((j, v));
                    Node {
                        fixes: f,
                        bound: obj,
                        basis: Some(basis.clone()),
                    }
                };
                next = Some(mk(up_first));
                open.push(mk(!up_first));
            }
        }
    }

    let flip = model.objective.sense == Sense::Maximize;
    let to_model = |v: f64| {
        let v = if flip { -v } else { v };
        v + rational::to_f64(&model.objective.constant)
    };
    let wall = start.elapsed();
    let mut result = SolveResult {
        status: SolveStatus::Infeasible,
        objective: None,
        assignment: None,
        certified: false,
        best_bound: None,
        nodes,
        lp_iterations: iters,
        wall_time: wall,
    };
    if unbounded {
        result.status = SolveStatus::Unbounded;
        return Ok(result);
    }
    let Some(inc) = inc else {
        result.status = match stopped {
            Some(_) => SolveStatus::LimitNoSolution,
            None if numerical => SolveStatus::NumericalError,
            None => SolveStatus::Infeasible,
        };
        let b = open.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
        if b.is_finite() {
            result.best_bound = Some(to_model(b));
        }
        return Ok(result);
    };
    let open_bound = open.iter().map(|n| n.bound).fold(inc.obj, f64::min);
    result.best_bound = Some(to_model(open_bound));
    result.status = match stopped {
        Some(s) => s,
        None if numerical => SolveStatus::NumericalError,
        None => SolveStatus::Optimal,
    };

    let n = conv.lp.n;
    if cfg.exact_certificate && small {
        let ec = exact_conv.get_or_insert_with(|| convert::<Rational>(model));
        let mut elo = ec.lo.clone();
        let mut eup = ec.up.clone();
        for &j in &ec.binaries {
            let b = if inc.x[j] >= 0.5 { rational::one() } else { rational::zero() };
            elo[j] = Some(b.clone());
            eup[j] = Some(b);
        }
        let e = simplex::solve(&ec.lp, &elo, &eup, Some(&inc.basis), &Tols::exact(), &LpLimits::default());
        result.lp_iterations += e.iterations as u64;
        if e.status == LpStatus::Optimal {
            let values = e.x[..n].to_vec();
            result.objective = Some(model.objective_value(&values));
            result.assignment = Some(values);
            result.certified = true;
            result.wall_time = start.elapsed();
            return Ok(result);
        }
    }
    let values: Vec<Rational> = (0..n)
        .map(|j| {
            if model.variables[j].kind == VarKind::Binary {
                if inc.x[j] >= 0.5 {
                    rational::one()
                } else {
                    rational::zero()
                }
            } else {
                rational::snap_f64(inc.x[j], 1_000_000)
            }
        })
        .collect();
    result.objective = Some(rational::snap_f64(to_model(inc.obj), 1_000_000));
    result.assignment = Some(values);
    result.wall_time = start.elapsed();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use crate::rational::{int, ratio};

    fn knapsack() -> MilpModel {
        // max 5a + 4b + 3c s.t. 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8
        let mut m = MilpModel::new(Sense::Maximize);
        let v: Vec<usize> = ["a", "b", "c"].iter().map(|s| m.add_binary(*s)).collect();
        for (j, c) in [5, 4, 3].iter().enumerate() {
            m.add_objective_term(v[j], int(*c));
        }
        let rows = [([2, 3, 1], 5), ([4, 1, 2], 11), ([3, 4, 2], 8)];
        for (k, (a, b)) in rows.iter().enumerate() {
            m.add_constraint(
                format!("r{k}"),
                a.iter().enumerate().map(|(j, c)| (v[j], int(*c))).collect(),
                Relation::Le,
                int(*b),
            );
        }
        m
    }

    #[test]
    fn solves_binary_knapsack() {
        let r = solve_milp(&knapsack(), &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.objective, Some(int(9)));
        assert!(r.certified);
        let a = r.assignment.unwrap();
        assert_eq!(knapsack().objective_value(&a), int(9));
    }

    #[test]
    fn exact_lp_relaxation() {
        let e = solve_lp_exact(&knapsack()).unwrap();
        assert_eq!(e.status, SolveStatus::Optimal);
        // a = 1, c = 1, b = 1/3 binds row 0: 2 + 1 + 1 = 4 <= 5 ... check optimum is rational
        let obj = e.objective.unwrap();
        assert!(obj >= int(9));
        assert!(obj <= int(12));
    }

    #[test]
    fn mixed_model_with_continuous_variables() {
        // min t s.t. t >= 3x + 1, t >= 5 - 2x, x binary -> x = 1? t = max(4, 3) = 4; x = 0: max(1, 5) = 5
        let mut m = MilpModel::new(Sense::Minimize);
        let x = m.add_binary("x");
        let t = m.add_continuous("t", None, None);
        m.add_objective_term(t, int(1));
        m.add_constraint("a", vec![(t, int(1)), (x, int(-3))], Relation::Ge, int(1));
        m.add_constraint("b", vec![(t, int(1)), (x, int(2))], Relation::Ge, int(5));
        let r = solve_milp(&m, &SolverConfig::default()).unwrap();
        assert_eq!(r.objective, Some(int(4)));
        // fractional continuous optimum
        let mut m2 = MilpModel::new(Sense::Minimize);
        let y = m2.add_nonneg("y");
        m2.add_objective_term(y, int(1));
        m2.add_constraint("c", vec![(y, int(3))], Relation::Ge, int(1));
        let r2 = solve_milp(&m2, &SolverConfig::default()).unwrap();
        assert_eq!(r2.objective, Some(ratio(1, 3)));
    }

    #[test]
    fn infeasible_and_node_limit() {
        let mut m = MilpModel::new(Sense::Minimize);
        let x = m.add_binary("x");
        let y = m.add_binary("y");
        m.add_constraint("s", vec![(x, int(2)), (y, int(2))], Relation::Eq, int(1));
        let r = solve_milp(&m, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        let cfg = SolverConfig {
            node_limit: Some(0),
            ..SolverConfig::default()
        };
        let r = solve_milp(&knapsack(), &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::LimitNoSolution);
    }
}
