//! Small 0-1 mixed-integer linear programming layer: model container,
//! validation, a textual dump, and a branch-and-bound solver over a
//! bounded primal simplex (floating point, with an exact rational
//! re-solve of the final incumbent).

mod bnb;
mod field;
mod lu;
mod simplex;

pub use bnb::{solve_lp_exact, solve_milp, ExactLp};

use crate::rational::{self, Rational};
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::time::Duration;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Clone, Debug)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    /// `None` is unbounded.
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug)]
pub struct Objective {
    pub sense: Sense,
    pub coeffs: Vec<(usize, Rational)>,
    pub constant: Rational,
}

#[derive(Clone, Debug)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Objective,
    names: HashMap<String, usize>,
}

impl MilpModel {
    pub fn new(sense: Sense) -> Self {
        MilpModel {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Objective {
                sense,
                coeffs: Vec::new(),
                constant: Rational::zero(),
            },
            names: HashMap::new(),
        }
    }

    pub fn add_variable(&mut self, v: Variable) -> usize {
        let idx = self.variables.len();
        self.names.entry(v.name.clone()).or_insert(idx);
        self.variables.push(v);
        idx
    }

    pub fn add_continuous(
        &mut self,
        name: impl Into<String>,
        lower: Option<Rational>,
        upper: Option<Rational>,
    ) -> usize {
        self.add_variable(Variable {
            name: name.into(),
            kind: VarKind::Continuous,
            lower,
            upper,
        })
    }

    /// Continuous variable with lower bound zero and no upper bound.
    pub fn add_nonneg(&mut self, name: impl Into<String>) -> usize {
        self.add_continuous(name, Some(Rational::zero()), None)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> usize {
        self.add_variable(Variable {
            name: name.into(),
            kind: VarKind::Binary,
            lower: Some(Rational::zero()),
            upper: Some(rational::one()),
        })
    }

    /// Adds a row; zero coefficients are dropped and repeated variables merged.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) -> usize {
        let mut merged: BTreeMap<usize, Rational> = BTreeMap::new();
        for (j, c) in coeffs {
            *merged.entry(j).or_insert_with(Rational::zero) += c;
        }
        let coeffs = merged.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        self.constraints.push(Constraint {
            name: name.into(),
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn add_objective_term(&mut self, var: usize, coeff: Rational) {
        if !coeff.is_zero() {
            self.objective.coeffs.push((var, coeff));
        }
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.names.get(name).copied()
    }

    pub fn nnz(&self) -> usize {
        self.constraints.iter().map(|c| c.coeffs.len()).sum()
    }

    pub fn binary_count(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    /// Objective value of an assignment.
    pub fn objective_value(&self, values: &[Rational]) -> Rational {
        let mut s = self.objective.constant.clone();
        for (j, c) in &self.objective.coeffs {
            s += c * &values[*j];
        }
        s
    }

    /// Human-readable LP-format dump.
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        let term = |out: &mut String, first: bool, c: &Rational, name: &str| {
            let sign = if c.is_negative() {
                "- "
            } else if first {
                ""
            } else {
                "+ "
            };
            let a = c.abs();
            if a == rational::one() {
                let _ = write!(out, "{sign}{name} ");
            } else {
                let _ = write!(out, "{sign}{} {name} ", rational::format(&a));
            }
        };
        out.push_str(match self.objective.sense {
            Sense::Minimize => "minimize\n obj: ",
            Sense::Maximize => "maximize\n obj: ",
        });
        for (k, (j, c)) in self.objective.coeffs.iter().enumerate() {
            term(&mut out, k == 0, c, &self.name_of(*j));
        }
        if !self.objective.constant.is_zero() {
            let _ = write!(out, "+ {}", rational::format(&self.objective.constant));
        }
        out.push_str("\nsubject to\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let label = if c.name.is_empty() { format!("r{i}") } else { c.name.clone() };
            let _ = write!(out, " {label}: ");
            for (k, (j, a)) in c.coeffs.iter().enumerate() {
                term(&mut out, k == 0, a, &self.name_of(*j));
            }
            let _ = writeln!(out, "{} {}", c.relation.symbol(), rational::format(&c.rhs));
        }
        out.push_str("bounds\n");
        let bound = |b: &Option<Rational>, inf: &str| b.as_ref().map_or(inf.to_string(), rational::format);
        for v in self.variables.iter().filter(|v| v.kind == VarKind::Continuous) {
            let _ = writeln!(out, " {} <= {} <= {}", bound(&v.lower, "-inf"), v.name, bound(&v.upper, "+inf"));
        }
        let bins: Vec<&str> = self
            .variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .map(|v| v.name.as_str())
            .collect();
        if !bins.is_empty() {
            let _ = writeln!(out, "binary\n {}", bins.join(" "));
        }
        out.push_str("end\n");
        out
    }

    fn name_of(&self, j: usize) -> String {
        self.variables
            .get(j)
            .map_or_else(|| format!("?{j}"), |v| v.name.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Defect {
    UnknownVariable { constraint: String, index: usize },
    UnknownObjectiveVariable { index: usize },
    EmptyConstraint { constraint: String },
    InvertedBounds { variable: String },
    Infinite01Bounds { variable: String },
    DuplicateName { name: String },
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::UnknownVariable { constraint, index } => {
                write!(f, "unknown variable {index} in constraint {constraint}")
            }
            Defect::UnknownObjectiveVariable { index } => {
                write!(f, "unknown variable {index} in objective")
            }
            Defect::EmptyConstraint { constraint } => write!(f, "empty constraint {constraint}"),
            Defect::InvertedBounds { variable } => write!(f, "inverted bounds on {variable}"),
            Defect::Infinite01Bounds { variable } => {
                write!(f, "binary {variable} has bounds outside [0,1]")
            }
            Defect::DuplicateName { name } => write!(f, "duplicate name {name}"),
        }
    }
}

/// Structural checks; returns every defect found.
pub fn validate_model(model: &MilpModel) -> Result<(), Vec<Defect>> {
    let mut out = Vec::new();
    let nv = model.variables.len();
    let mut seen = HashMap::new();
    for v in &model.variables {
        if seen.insert(v.name.as_str(), ()).is_some() {
            out.push(Defect::DuplicateName { name: v.name.clone() });
        }
        if let (Some(l), Some(u)) = (&v.lower, &v.upper) {
            if l > u {
                out.push(Defect::InvertedBounds { variable: v.name.clone() });
            }
        }
        if v.kind == VarKind::Binary {
            let lo_ok = v.lower.as_ref().is_some_and(|l| *l >= Rational::zero());
            let up_ok = v.upper.as_ref().is_some_and(|u| *u <= rational::one());
            if !(lo_ok && up_ok) {
                out.push(Defect::Infinite01Bounds { variable: v.name.clone() });
            }
        }
    }
    for (i, c) in model.constraints.iter().enumerate() {
        let label = if c.name.is_empty() { format!("r{i}") } else { c.name.clone() };
        if c.coeffs.is_empty() {
            out.push(Defect::EmptyConstraint { constraint: label.clone() });
        }
        for (j, _) in &c.coeffs {
            if *j >= nv {
                out.push(Defect::UnknownVariable {
                    constraint: label.clone(),
                    index: *j,
                });
            }
        }
    }
    for (j, _) in &model.objective.coeffs {
        if *j >= nv {
            out.push(Defect::UnknownObjectiveVariable { index: *j });
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    pub feasibility_tol: f64,
    pub integrality_tol: f64,
    /// Re-solve the final incumbent's LP in exact rationals.
    pub exact_certificate: bool,
    /// Models with more constraint nonzeros skip the exact re-solve.
    pub exact_nnz_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            time_limit: None,
            node_limit: None,
            feasibility_tol: 1e-7,
            integrality_tol: 1e-6,
            exact_certificate: true,
            exact_nnz_limit: 5000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Time limit hit with an incumbent.
    FeasibleTimeLimit,
    /// Node limit hit with an incumbent.
    FeasibleNodeLimit,
    Infeasible,
    Unbounded,
    /// A limit was hit before any incumbent was found.
    LimitNoSolution,
    NumericalError,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleTimeLimit => "feasible_time_limit",
            SolveStatus::FeasibleNodeLimit => "feasible_node_limit",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::LimitNoSolution => "limit_no_solution",
            SolveStatus::NumericalError => "numerical_error",
        }
    }

    pub fn has_solution(self) -> bool {
        matches!(
            self,
            SolveStatus::Optimal | SolveStatus::FeasibleTimeLimit | SolveStatus::FeasibleNodeLimit
        )
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Objective of the incumbent in the model's own sense.
    pub objective: Option<Rational>,
    /// Incumbent values; binaries are exactly 0 or 1.
    pub assignment: Option<Vec<Rational>>,
    /// True when objective and assignment come from an exact re-solve.
    pub certified: bool,
    /// Best proven bound on the optimum (model sense).
    pub best_bound: Option<f64>,
    pub nodes: u64,
    pub lp_iterations: u64,
    pub wall_time: Duration,
}

impl SolveResult {
    pub fn value(&self, var: usize) -> Option<&Rational> {
        self.assignment.as_ref().and_then(|a| a.get(var))
    }

    /// Incumbent keyed by variable name.
    pub fn assignment_map(&self, model: &MilpModel) -> Option<BTreeMap<String, Rational>> {
        self.assignment.as_ref().map(|a| {
            model
                .variables
                .iter()
                .zip(a)
                .map(|(v, x)| (v.name.clone(), x.clone()))
                .collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn validate_reports_defects() {
        let mut m = MilpModel::new(Sense::Minimize);
        let x = m.add_continuous("x", Some(int(3)), Some(int(1)));
        m.add_constraint("c", vec![(x, int(1)), (7, int(1))], Relation::Le, int(1));
        m.add_constraint("e", vec![], Relation::Le, int(1));
        let d = validate_model(&m).unwrap_err();
        let s: Vec<String> = d.iter().map(|d| d.to_string()).collect();
        assert!(s.iter().any(|s| s.contains("inverted bounds")));
        assert!(s.iter().any(|s| s.contains("unknown variable")));
        assert!(s.iter().any(|s| s.contains("empty constraint")));
    }

    #[test]
    fn dump_lists_rows_and_binaries() {
        let mut m = MilpModel::new(Sense::Minimize);
        let x = m.add_binary("x1");
        let t = m.add_continuous("t", None, None);
        m.add_objective_term(t, int(1));
        m.add_constraint("lim", vec![(t, int(1)), (x, int(-3))], Relation::Ge, int(0));
        let s = m.to_lp_string();
        assert!(s.contains("lim: - 3 x1 + t >= 0"));
        assert!(s.contains("binary\n x1"));
        assert!(s.contains("-inf <= t <= +inf"));
    }
}
