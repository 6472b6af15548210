//! Hard-instance generation: perturb an uncertainty set inside a budget-b
//! neighborhood so that the robust optimum grows.

mod budgeted;
mod masters;
mod neighborhood;
mod regret;

pub use budgeted::harden_budgeted;
pub use neighborhood::PerturbationNeighborhood;
pub use regret::harden_regret_interval;

use crate::error::{Error, Result};
use crate::formulations::solve_formulation;
use crate::milp::{solve_milp, SolveStatus, SolverConfig};
use crate::model::{HiroLineage, Pairing, ProblemInstance, SelectionSolution};
use crate::rational::{self, Rational};
use num_traits::{Signed, Zero};
use std::time::{Duration, Instant};

/// Which vectors a hardening run may change.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HiroMode {
    /// Two-stage and recoverable: only first-stage costs C.
    FirstStageOnly,
    /// Two-stage and recoverable: C and every scenario.
    FirstAndSecondStage,
    LowerBounds,
    Deviations,
    Both,
}

impl HiroMode {
    pub fn name(self) -> &'static str {
        match self {
            HiroMode::FirstStageOnly => "FirstStageOnly",
            HiroMode::FirstAndSecondStage => "FirstAndSecondStage",
            HiroMode::LowerBounds => "LowerBounds",
            HiroMode::Deviations => "Deviations",
            HiroMode::Both => "Both",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            HiroMode::FirstStageOnly,
            HiroMode::FirstAndSecondStage,
            HiroMode::LowerBounds,
            HiroMode::Deviations,
            HiroMode::Both,
        ]
        .into_iter()
        .find(|m| m.name() == s)
    }

    /// Mode used when none is configured.
    pub fn default_for(pairing: Pairing) -> HiroMode {
        match pairing {
            Pairing::TwoStageDiscrete | Pairing::RecoverableDiscrete => {
                HiroMode::FirstAndSecondStage
            }
            _ => HiroMode::Both,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HiroConfig {
    /// Per-coefficient perturbation budget.
    pub b: Rational,
    /// Global cost cap.
    pub c_max: Rational,
    pub time_limit: Option<Duration>,
    pub max_iterations: usize,
    pub solver_cfg: SolverConfig,
    /// `None` picks [`HiroMode::default_for`] the instance's pairing.
    pub mode: Option<HiroMode>,
}

impl HiroConfig {
    pub fn new(b: Rational) -> Self {
        HiroConfig {
            b,
            c_max: rational::int(100),
            time_limit: None,
            max_iterations: 100,
            solver_cfg: SolverConfig::default(),
            mode: None,
        }
    }

    pub fn with_mode(mut self, mode: HiroMode) -> Self {
        self.mode = Some(mode);
        self
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    fn check(&self) -> Result<()> {
        if self.b.is_negative() {
            return Err(Error::Parameter("perturbation budget b must be non-negative".into()));
        }
        if !self.c_max.is_positive() {
            return Err(Error::Parameter("c_max must be positive".into()));
        }
        Ok(())
    }

    fn mode_for(&self, pairing: Pairing) -> HiroMode {
        self.mode.unwrap_or_else(|| HiroMode::default_for(pairing))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HiroIteration {
    /// Candidates in the master, K.
    pub candidate_count: usize,
    pub master_objective: Rational,
    /// Exact robust optimum of the instance proposed by the master.
    pub robust_value: Rational,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct HiroTrace {
    pub iterations: Vec<HiroIteration>,
    pub initial_value: Rational,
    /// Robust optimum of the returned instance.
    pub best_value: Rational,
    pub converged: bool,
    pub candidates: Vec<SelectionSolution>,
}

struct Clock {
    start: Instant,
    limit: Option<Duration>,
}

impl Clock {
    fn remaining(&self) -> Option<Duration> {
        self.limit.map(|l| l.saturating_sub(self.start.elapsed()))
    }

    fn expired(&self) -> bool {
        self.remaining().is_some_and(|r| r.is_zero())
    }

    fn cfg(&self, base: &SolverConfig) -> SolverConfig {
        let mut cfg = base.clone();
        if let Some(r) = self.remaining() {
            cfg.time_limit = Some(cfg.time_limit.map_or(r, |t| t.min(r)));
        }
        cfg
    }
}

fn lineage(parent: &ProblemInstance, cfg: &HiroConfig, mode: HiroMode, iterations: usize) -> Result<HiroLineage> {
    Ok(HiroLineage {
        parent_hash: crate::io::content_hash(parent)?,
        b: cfg.b.clone(),
        mode: mode.name().to_string(),
        iterations,
        notes: Vec::new(),
    })
}

pub(crate) fn stamp(
    mut out: ProblemInstance,
    parent: &ProblemInstance,
    lineage: HiroLineage,
) -> ProblemInstance {
    out.provenance = parent.provenance.clone();
    out.provenance.lineage = Some(lineage);
    out
}

/// Exact robust optimum and an optimal solution, or `None` when the solve
/// did not finish.
fn robust_optimum(
    inst: &ProblemInstance,
    cfg: &SolverConfig,
) -> Result<Option<(SelectionSolution, Rational)>> {
    let out = solve_formulation(inst, cfg)?;
    if out.milp.status != SolveStatus::Optimal {
        return Ok(None);
    }
    Ok(out.solution.zip(out.objective))
}

fn close(a: &Rational, b: &Rational, exact: bool) -> bool {
    if exact {
        return a == b;
    }
    let scale = rational::to_f64(b).abs().max(1.0);
    (rational::to_f64(a) - rational::to_f64(b)).abs() <= 1e-6 * scale
}

/// Master/sub loop for the four discrete-uncertainty variants.
pub fn harden_iterative(
    inst: &ProblemInstance,
    cfg: &HiroConfig,
) -> Result<(ProblemInstance, HiroTrace)> {
    cfg.check()?;
    inst.validate()?;
    let pairing = inst.pairing()?;
    let mode = cfg.mode_for(pairing);
    let perturb_scenarios = match pairing {
        Pairing::MinMaxDiscrete | Pairing::RegretDiscrete => true,
        Pairing::TwoStageDiscrete | Pairing::RecoverableDiscrete => match mode {
            HiroMode::FirstStageOnly => false,
            HiroMode::FirstAndSecondStage => true,
            other => {
                return Err(Error::Parameter(format!(
                    "mode {} does not apply to {pairing}",
                    other.name()
                )))
            }
        },
        other => {
            return Err(Error::UnsupportedPairing(format!(
                "iterative hardening needs discrete uncertainty, got {other}"
            )))
        }
    };
    let clock = Clock {
        start: Instant::now(),
        limit: cfg.time_limit,
    };
    let Some((x0, v0)) = robust_optimum(inst, &clock.cfg(&cfg.solver_cfg))? else {
        let trace = HiroTrace {
            iterations: Vec::new(),
            initial_value: Rational::zero(),
            best_value: Rational::zero(),
            converged: false,
            candidates: Vec::new(),
        };
        return Ok((inst.clone(), trace));
    };
    let mut trace = HiroTrace {
        iterations: Vec::new(),
        initial_value: v0.clone(),
        best_value: v0.clone(),
        converged: false,
        candidates: vec![x0],
    };
    if cfg.b.is_zero() {
        trace.converged = true;
        return Ok((inst.clone(), trace));
    }

    let mut best = inst.clone();
    while trace.iterations.len() < cfg.max_iterations && !clock.expired() {
        let master = masters::build_master(inst, &trace.candidates, &cfg.b, &cfg.c_max, perturb_scenarios)?;
        let res = solve_milp(&master.model, &clock.cfg(&cfg.solver_cfg))?;
        let (Some(assign), Some(m_obj)) = (res.assignment.as_ref(), res.objective.clone()) else {
            if res.status == SolveStatus::Infeasible {
                return Err(Error::Solver("hardening master infeasible".into()));
            }
            break;
        };
        let hard = master.hardened(inst, assign);
        let Some((x, v)) = robust_optimum(&hard, &clock.cfg(&cfg.solver_cfg))? else {
            break;
        };
        trace.iterations.push(HiroIteration {
            candidate_count: trace.candidates.len(),
            master_objective: m_obj.clone(),
            robust_value: v.clone(),
            elapsed: clock.start.elapsed(),
        });
        if v >= trace.best_value {
            trace.best_value = v.clone();
            best = hard;
        }
        if res.status != SolveStatus::Optimal {
            break;
        }
        if close(&m_obj, &v, res.certified) {
            trace.converged = true;
            break;
        }
        if trace.candidates.contains(&x) {
            break;
        }
        trace.candidates.push(x);
    }
    let lin = lineage(inst, cfg, mode, trace.iterations.len())?;
    Ok((stamp(best, inst, lin), trace))
}

/// Dispatches on the pairing. Budgeted and interval runs report a single
/// iteration.
pub fn harden(inst: &ProblemInstance, cfg: &HiroConfig) -> Result<(ProblemInstance, HiroTrace)> {
    let pairing = inst.pairing()?;
    let (out, value_in, value_out) = match pairing {
        Pairing::MinMaxBudgeted => {
            let out = harden_budgeted(inst, cfg)?;
            let a = crate::formulations::solve_minmax_budgeted_enumeration(inst)?.1;
            let b = crate::formulations::solve_minmax_budgeted_enumeration(&out)?.1;
            (out, a, b)
        }
        Pairing::RegretInterval => {
            let out = harden_regret_interval(inst, cfg)?;
            let a = crate::formulations::solve_regret_interval_enumeration(inst)?.1;
            let b = crate::formulations::solve_regret_interval_enumeration(&out)?.1;
            (out, a, b)
        }
        _ => return harden_iterative(inst, cfg),
    };
    let trace = HiroTrace {
        iterations: Vec::new(),
        initial_value: value_in,
        best_value: value_out,
        converged: true,
        candidates: Vec::new(),
    };
    Ok((out, trace))
}

/// True when every perturbed vector of `out` lies in the neighborhood of
/// its counterpart in `inp`.
pub fn within_neighborhood(inp: &ProblemInstance, out: &ProblemInstance, b: &Rational, c_max: &Rational) -> bool {
    masters::within_neighborhood(inp, out, b, c_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{brute_force_robust_opt, BruteForceLimits, CostVector};
    use crate::rational::int;

    fn cv(v: &[i64]) -> CostVector {
        CostVector::from_ints(v).unwrap()
    }

    #[test]
    fn minmax_example_reaches_six() {
        let inst = ProblemInstance::minmax_discrete(1, vec![cv(&[1, 9, 5]), cv(&[9, 1, 5])]).unwrap();
        let (out, trace) = harden_iterative(&inst, &HiroConfig::new(int(1))).unwrap();
        assert_eq!(trace.initial_value, int(5));
        assert_eq!(trace.best_value, int(6));
        assert!(trace.converged);
        assert!(within_neighborhood(&inst, &out, &int(1), &int(100)));
        let bf = brute_force_robust_opt(&out, BruteForceLimits::default()).unwrap();
        assert_eq!(bf.1, int(6));
    }

    #[test]
    fn zero_budget_is_identity() {
        let inst = ProblemInstance::minmax_discrete(2, vec![cv(&[1, 5, 3]), cv(&[4, 2, 1])]).unwrap();
        let (out, trace) = harden_iterative(&inst, &HiroConfig::new(int(0))).unwrap();
        assert_eq!(out, inst);
        assert_eq!(trace.best_value, trace.initial_value);
    }
}
