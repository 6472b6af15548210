//! Domain model for robust selection instances.

mod brute;
mod eval;

pub use brute::{brute_force_robust_opt, BruteForceLimits};
pub use eval::{
    evaluate_robust, recovery_best_response, robust_value, second_stage_completion,
    solve_nominal_selection, value_under, worst_case_regret_scenario,
};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::samplers::GeneratorId;
use num_traits::{Signed, Zero};
use std::fmt;

/// Non-negative cost vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CostVector(Vec<Rational>);

impl CostVector {
    pub fn new(entries: Vec<Rational>) -> Result<Self> {
        if let Some(i) = entries.iter().position(|v| v.is_negative()) {
            return Err(Error::Parameter(format!(
                "cost entry {i} is negative ({})",
                rational::format(&entries[i])
            )));
        }
        Ok(CostVector(entries))
    }

    pub fn from_ints(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| rational::int(v)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        CostVector(vec![Rational::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Rational> {
        self.0
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.0[i]
    }

    /// Sum of the entries selected by `x`.
    pub fn dot(&self, x: &[bool]) -> Rational {
        self.0
            .iter()
            .zip(x)
            .filter(|(_, &b)| b)
            .fold(Rational::zero(), |acc, (c, _)| acc + c)
    }

    pub fn total(&self) -> Rational {
        rational::sum(&self.0)
    }

    /// Componentwise sum with another vector of the same length.
    pub fn plus(&self, other: &CostVector) -> CostVector {
        CostVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for CostVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(rational::format).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BudgetMode {
    /// δ ∈ [0,1]ⁿ, Σδ ≤ Γ.
    ContinuousItems,
    /// δ ∈ {0,1}ⁿ, Σδ ≤ Γ.
    DiscreteItems,
    /// δ_i ∈ [0, d_i], Σδ ≤ Γ (budget on total deviation).
    VariableBudget,
}

impl BudgetMode {
    pub fn name(self) -> &'static str {
        match self {
            BudgetMode::ContinuousItems => "ContinuousItems",
            BudgetMode::DiscreteItems => "DiscreteItems",
            BudgetMode::VariableBudget => "VariableBudget",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "ContinuousItems" => Some(BudgetMode::ContinuousItems),
            "DiscreteItems" => Some(BudgetMode::DiscreteItems),
            "VariableBudget" => Some(BudgetMode::VariableBudget),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UncertaintySet {
    Discrete {
        scenarios: Vec<CostVector>,
    },
    Interval {
        lower: CostVector,
        deviation: CostVector,
    },
    Budgeted {
        lower: CostVector,
        deviation: CostVector,
        gamma: Rational,
        mode: BudgetMode,
    },
}

impl UncertaintySet {
    pub fn kind_name(&self) -> &'static str {
        match self {
            UncertaintySet::Discrete { .. } => "Discrete",
            UncertaintySet::Interval { .. } => "Interval",
            UncertaintySet::Budgeted { .. } => "Budgeted",
        }
    }

    pub fn budget_mode(&self) -> Option<BudgetMode> {
        match self {
            UncertaintySet::Budgeted { mode, .. } => Some(*mode),
            _ => None,
        }
    }

    pub fn scenarios(&self) -> Option<&[CostVector]> {
        match self {
            UncertaintySet::Discrete { scenarios } => Some(scenarios),
            _ => None,
        }
    }

    /// `(lower, deviation)` for interval and budgeted sets.
    pub fn bounds(&self) -> Option<(&CostVector, &CostVector)> {
        match self {
            UncertaintySet::Interval { lower, deviation }
            | UncertaintySet::Budgeted {
                lower, deviation, ..
            } => Some((lower, deviation)),
            UncertaintySet::Discrete { .. } => None,
        }
    }

    pub fn gamma(&self) -> Option<&Rational> {
        match self {
            UncertaintySet::Budgeted { gamma, .. } => Some(gamma),
            _ => None,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            UncertaintySet::Discrete { scenarios } => {
                if scenarios.is_empty() {
                    return Err(Error::InvalidInstance(
                        "discrete set needs at least one scenario".into(),
                    ));
                }
                for s in scenarios {
                    check_len(s, n)?;
                }
            }
            UncertaintySet::Interval { lower, deviation } => {
                check_len(lower, n)?;
                check_len(deviation, n)?;
            }
            UncertaintySet::Budgeted {
                lower,
                deviation,
                gamma,
                mode,
            } => {
                check_len(lower, n)?;
                check_len(deviation, n)?;
                if gamma.is_negative() {
                    return Err(Error::InvalidInstance("gamma must be non-negative".into()));
                }
                match mode {
                    BudgetMode::ContinuousItems | BudgetMode::DiscreteItems => {
                        if *gamma > rational::from_usize(n) {
                            return Err(Error::InvalidInstance(format!(
                                "gamma {} exceeds n = {n}",
                                rational::format(gamma)
                            )));
                        }
                    }
                    BudgetMode::VariableBudget => {}
                }
                if *mode == BudgetMode::DiscreteItems && !gamma.is_integer() {
                    return Err(Error::InvalidInstance(format!(
                        "DiscreteItems requires integral gamma, got {}",
                        rational::format(gamma)
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_len(v: &CostVector, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: v.len(),
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Criterion {
    MinMax,
    MinMaxRegret,
    TwoStage,
    Recoverable,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::MinMax => "MinMax",
            Criterion::MinMaxRegret => "MinMaxRegret",
            Criterion::TwoStage => "TwoStage",
            Criterion::Recoverable => "Recoverable",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "MinMax" => Some(Criterion::MinMax),
            "MinMaxRegret" => Some(Criterion::MinMaxRegret),
            "TwoStage" => Some(Criterion::TwoStage),
            "Recoverable" => Some(Criterion::Recoverable),
            _ => None,
        }
    }
}

/// How the recovery parameter Δ is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DeltaSemantics {
    /// At least Δ first-stage items are kept.
    KeptAtLeast,
    /// At most Δ items are exchanged, so at least p − Δ are kept.
    ChangedAtMost,
}

impl DeltaSemantics {
    pub fn name(self) -> &'static str {
        match self {
            DeltaSemantics::KeptAtLeast => "KeptAtLeast",
            DeltaSemantics::ChangedAtMost => "ChangedAtMost",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "KeptAtLeast" => Some(DeltaSemantics::KeptAtLeast),
            "ChangedAtMost" => Some(DeltaSemantics::ChangedAtMost),
            _ => None,
        }
    }

    /// Minimum number of first-stage items that survive recovery.
    pub fn kept_min(self, p: usize, delta: usize) -> usize {
        match self {
            DeltaSemantics::KeptAtLeast => delta,
            DeltaSemantics::ChangedAtMost => p - delta.min(p),
        }
    }
}

/// Lineage of a hardened instance.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct HiroLineage {
    pub parent_hash: String,
    pub b: Rational,
    pub mode: String,
    pub iterations: usize,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Provenance {
    pub generator: Option<GeneratorId>,
    pub seed: Option<u64>,
    pub lineage: Option<HiroLineage>,
}

/// Criterion × uncertainty combination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pairing {
    MinMaxDiscrete,
    MinMaxBudgeted,
    /// Nominal-equivalent; accepted but flagged.
    MinMaxInterval,
    RegretInterval,
    RegretDiscrete,
    TwoStageDiscrete,
    TwoStageDiscreteBudgeted,
    TwoStageContinuousBudgeted,
    RecoverableDiscrete,
    RecoverableDiscreteBudgeted,
    RecoverableContinuousBudgeted,
}

impl Pairing {
    /// The ten pairings with a dedicated formulation.
    pub const SUPPORTED: [Pairing; 10] = [
        Pairing::MinMaxDiscrete,
        Pairing::MinMaxBudgeted,
        Pairing::RegretInterval,
        Pairing::RegretDiscrete,
        Pairing::TwoStageDiscrete,
        Pairing::TwoStageDiscreteBudgeted,
        Pairing::TwoStageContinuousBudgeted,
        Pairing::RecoverableDiscrete,
        Pairing::RecoverableDiscreteBudgeted,
        Pairing::RecoverableContinuousBudgeted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pairing::MinMaxDiscrete => "MinMax x Discrete",
            Pairing::MinMaxBudgeted => "MinMax x Budgeted",
            Pairing::MinMaxInterval => "MinMax x Interval",
            Pairing::RegretInterval => "MinMaxRegret x Interval",
            Pairing::RegretDiscrete => "MinMaxRegret x Discrete",
            Pairing::TwoStageDiscrete => "TwoStage x Discrete",
            Pairing::TwoStageDiscreteBudgeted => "TwoStage x DiscreteBudgeted",
            Pairing::TwoStageContinuousBudgeted => "TwoStage x ContinuousBudgeted",
            Pairing::RecoverableDiscrete => "Recoverable x Discrete",
            Pairing::RecoverableDiscreteBudgeted => "Recoverable x DiscreteBudgeted",
            Pairing::RecoverableContinuousBudgeted => "Recoverable x ContinuousBudgeted",
        }
    }

    pub fn criterion(self) -> Criterion {
        match self {
            Pairing::MinMaxDiscrete | Pairing::MinMaxBudgeted | Pairing::MinMaxInterval => {
                Criterion::MinMax
            }
            Pairing::RegretInterval | Pairing::RegretDiscrete => Criterion::MinMaxRegret,
            Pairing::TwoStageDiscrete
            | Pairing::TwoStageDiscreteBudgeted
            | Pairing::TwoStageContinuousBudgeted => Criterion::TwoStage,
            Pairing::RecoverableDiscrete
            | Pairing::RecoverableDiscreteBudgeted
            | Pairing::RecoverableContinuousBudgeted => Criterion::Recoverable,
        }
    }

    pub fn has_first_stage(self) -> bool {
        matches!(
            self.criterion(),
            Criterion::TwoStage | Criterion::Recoverable
        )
    }

    /// True when this pairing is equivalent to a nominal problem.
    pub fn is_nominal_equivalent(self) -> bool {
        self == Pairing::MinMaxInterval
    }

    fn resolve(criterion: Criterion, u: &UncertaintySet) -> Result<Pairing> {
        use BudgetMode::*;
        let p = match (criterion, u) {
            (Criterion::MinMax, UncertaintySet::Discrete { .. }) => Pairing::MinMaxDiscrete,
            (Criterion::MinMax, UncertaintySet::Interval { .. }) => Pairing::MinMaxInterval,
            (Criterion::MinMax, UncertaintySet::Budgeted { .. }) => Pairing::MinMaxBudgeted,
            (Criterion::MinMaxRegret, UncertaintySet::Interval { .. }) => Pairing::RegretInterval,
            (Criterion::MinMaxRegret, UncertaintySet::Discrete { .. }) => Pairing::RegretDiscrete,
            (Criterion::TwoStage, UncertaintySet::Discrete { .. }) => Pairing::TwoStageDiscrete,
            (Criterion::TwoStage, UncertaintySet::Budgeted { mode, .. }) if *mode == DiscreteItems => {
                Pairing::TwoStageDiscreteBudgeted
            }
            (Criterion::TwoStage, UncertaintySet::Budgeted { mode, .. }) if *mode == VariableBudget => {
                Pairing::TwoStageContinuousBudgeted
            }
            (Criterion::Recoverable, UncertaintySet::Discrete { .. }) => Pairing::RecoverableDiscrete,
            (Criterion::Recoverable, UncertaintySet::Budgeted { mode, .. })
                if *mode == DiscreteItems =>
            {
                Pairing::RecoverableDiscreteBudgeted
            }
            (Criterion::Recoverable, UncertaintySet::Budgeted { mode, .. })
                if *mode == VariableBudget =>
            {
                Pairing::RecoverableContinuousBudgeted
            }
            _ => {
                let mode = u.budget_mode().map(|m| format!(" ({})", m.name())).unwrap_or_default();
                return Err(Error::UnsupportedPairing(format!(
                    "{} x {}{}",
                    criterion.name(),
                    u.kind_name(),
                    mode
                )));
            }
        };
        Ok(p)
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A robust selection instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    pub n: usize,
    pub p: usize,
    pub criterion: Criterion,
    pub uncertainty: UncertaintySet,
    /// First-stage costs C (two-stage and recoverable only).
    pub first_stage_costs: Option<CostVector>,
    /// Recovery parameter Δ (recoverable only).
    pub delta: Option<usize>,
    pub delta_semantics: Option<DeltaSemantics>,
    pub provenance: Provenance,
}

impl ProblemInstance {
    /// Builds and validates an instance.
    pub fn new(
        p: usize,
        criterion: Criterion,
        uncertainty: UncertaintySet,
        first_stage_costs: Option<CostVector>,
        recovery: Option<(usize, DeltaSemantics)>,
    ) -> Result<Self> {
        let n = match &uncertainty {
            UncertaintySet::Discrete { scenarios } => scenarios.first().map_or(0, |s| s.len()),
            UncertaintySet::Interval { lower, .. } | UncertaintySet::Budgeted { lower, .. } => {
                lower.len()
            }
        };
        let inst = ProblemInstance {
            n,
            p,
            criterion,
            uncertainty,
            first_stage_costs,
            delta: recovery.map(|r| r.0),
            delta_semantics: recovery.map(|r| r.1),
            provenance: Provenance::default(),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn minmax_discrete(p: usize, scenarios: Vec<CostVector>) -> Result<Self> {
        Self::new(p, Criterion::MinMax, UncertaintySet::Discrete { scenarios }, None, None)
    }

    pub fn regret_discrete(p: usize, scenarios: Vec<CostVector>) -> Result<Self> {
        Self::new(
            p,
            Criterion::MinMaxRegret,
            UncertaintySet::Discrete { scenarios },
            None,
            None,
        )
    }

    pub fn regret_interval(p: usize, lower: CostVector, deviation: CostVector) -> Result<Self> {
        Self::new(
            p,
            Criterion::MinMaxRegret,
            UncertaintySet::Interval { lower, deviation },
            None,
            None,
        )
    }

    pub fn minmax_budgeted(
        p: usize,
        lower: CostVector,
        deviation: CostVector,
        gamma: Rational,
        mode: BudgetMode,
    ) -> Result<Self> {
        Self::new(
            p,
            Criterion::MinMax,
            UncertaintySet::Budgeted {
                lower,
                deviation,
                gamma,
                mode,
            },
            None,
            None,
        )
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn pairing(&self) -> Result<Pairing> {
        Pairing::resolve(self.criterion, &self.uncertainty)
    }

    /// Minimum number of first-stage items kept by recovery.
    pub fn kept_min(&self) -> Option<usize> {
        match (self.delta, self.delta_semantics) {
            (Some(d), Some(s)) => Some(s.kept_min(self.p, d)),
            _ => None,
        }
    }

    /// Number of scenarios for discrete sets.
    pub fn scenario_count(&self) -> Option<usize> {
        self.uncertainty.scenarios().map(|s| s.len())
    }

    pub fn first_stage(&self) -> Result<&CostVector> {
        self.first_stage_costs
            .as_ref()
            .ok_or_else(|| Error::InvalidInstance("first-stage costs missing".into()))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidInstance("n must be at least 1".into()));
        }
        if self.p < 1 || self.p > n {
            return Err(Error::InvalidInstance(format!(
                "p = {} outside [1, {n}]",
                self.p
            )));
        }
        self.uncertainty.validate(n)?;
        let pairing = self.pairing()?;
        match (&self.first_stage_costs, pairing.has_first_stage()) {
            (Some(c), true) => check_len(c, n)?,
            (None, true) => {
                return Err(Error::InvalidInstance(format!(
                    "{pairing} requires first-stage costs"
                )))
            }
            (Some(_), false) => {
                return Err(Error::InvalidInstance(format!(
                    "{pairing} takes no first-stage costs"
                )))
            }
            (None, false) => {}
        }
        if self.criterion == Criterion::Recoverable {
            let d = self
                .delta
                .ok_or_else(|| Error::InvalidInstance("recoverable instance needs delta".into()))?;
            if d > self.p {
                return Err(Error::InvalidInstance(format!(
                    "delta = {d} exceeds p = {}",
                    self.p
                )));
            }
            if self.delta_semantics.is_none() {
                return Err(Error::InvalidInstance(
                    "recoverable instance needs delta semantics".into(),
                ));
            }
        } else if self.delta.is_some() || self.delta_semantics.is_some() {
            return Err(Error::InvalidInstance(
                "delta only applies to recoverable instances".into(),
            ));
        }
        Ok(())
    }

    /// The same instance with every cost vector replaced.
    pub fn map_costs(&self, mut f: impl FnMut(&CostVector) -> CostVector) -> ProblemInstance {
        let mut out = self.clone();
        out.first_stage_costs = self.first_stage_costs.as_ref().map(&mut f);
        out.uncertainty = match &self.uncertainty {
            UncertaintySet::Discrete { scenarios } => UncertaintySet::Discrete {
                scenarios: scenarios.iter().map(&mut f).collect(),
            },
            UncertaintySet::Interval { lower, deviation } => UncertaintySet::Interval {
                lower: f(lower),
                deviation: f(deviation),
            },
            UncertaintySet::Budgeted {
                lower,
                deviation,
                gamma,
                mode,
            } => UncertaintySet::Budgeted {
                lower: f(lower),
                deviation: f(deviation),
                gamma: gamma.clone(),
                mode: *mode,
            },
        };
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolutionRole {
    /// Σx = p.
    Full,
    /// Σx ≤ p (two-stage first stage).
    PartialFirstStage,
}

/// 0/1 indicator vector with a cardinality contract.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SelectionSolution {
    pub chosen: Vec<bool>,
    pub role: SolutionRole,
}

impl SelectionSolution {
    pub fn new(chosen: Vec<bool>, role: SolutionRole) -> Self {
        SelectionSolution { chosen, role }
    }

    pub fn from_indices(n: usize, indices: &[usize], role: SolutionRole) -> Self {
        let mut chosen = vec![false; n];
        for &i in indices {
            chosen[i] = true;
        }
        SelectionSolution { chosen, role }
    }

    pub fn full(n: usize, indices: &[usize]) -> Self {
        Self::from_indices(n, indices, SolutionRole::Full)
    }

    pub fn partial(n: usize, indices: &[usize]) -> Self {
        Self::from_indices(n, indices, SolutionRole::PartialFirstStage)
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    pub fn count(&self) -> usize {
        self.chosen.iter().filter(|&&b| b).count()
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.chosen.len()).filter(|&i| self.chosen[i]).collect()
    }

    /// Checks the cardinality contract for `p`.
    pub fn check(&self, n: usize, p: usize) -> Result<()> {
        if self.chosen.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: self.chosen.len(),
            });
        }
        let k = self.count();
        let ok = match self.role {
            SolutionRole::Full => k == p,
            SolutionRole::PartialFirstStage => k <= p,
        };
        if !ok {
            return Err(Error::Cardinality(format!(
                "{:?} solution selects {k} items, p = {p}",
                self.role
            )));
        }
        Ok(())
    }
}

/// Identifies the maximizing scenario behind an evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessKind {
    /// Index of the worst scenario in a discrete set.
    Scenario(usize),
    /// c^rwc(x) for interval regret.
    RegretWorstCase,
    /// All costs at their upper bounds.
    UpperBounds,
    /// δ ∈ [0,1]ⁿ (item-budgeted sets).
    DeviationPattern(Vec<Rational>),
    /// Absolute deviations δ_i ∈ [0, d_i] (variable budget).
    DeviationAmounts(Vec<Rational>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub kind: WitnessKind,
    /// The realized cost vector.
    pub realized: CostVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationReport {
    pub objective: Rational,
    pub witness: Witness,
    /// Best response y under the witness (two-stage and recoverable).
    pub second_stage: Option<SelectionSolution>,
}
