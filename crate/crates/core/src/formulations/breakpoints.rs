//! Finite candidate sets for dual variables.

use crate::model::{BudgetMode, CostVector};
use crate::rational::Rational;
use num_traits::{One, Zero};

/// Sorted, deduplicated candidate values (or lexicographically sorted pairs).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BreakpointSet<T> {
    pub values: Vec<T>,
}

impl<T: Ord> BreakpointSet<T> {
    pub fn new(values: impl IntoIterator<Item = T>) -> Self {
        let mut values: Vec<T> = values.into_iter().collect();
        values.sort();
        values.dedup();
        BreakpointSet { values }
    }

    /// Number of candidates K.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// P = {0} ∪ {d_i}; for `VariableBudget` the dual π lives in [0, 1] and
/// the candidates are {0, 1}.
pub fn minmax_budgeted_candidates(deviation: &CostVector, mode: BudgetMode) -> BreakpointSet<Rational> {
    match mode {
        BudgetMode::VariableBudget => BreakpointSet::new([Rational::zero(), Rational::one()]),
        _ => BreakpointSet::new(
            deviation
                .entries()
                .iter()
                .cloned()
                .chain(std::iter::once(Rational::zero())),
        ),
    }
}

/// {0} ∪ {lower_i} ∪ {dev_i} ∪ {lower_i + dev_i}.
pub fn regret_interval_candidates(lower: &CostVector, deviation: &CostVector) -> BreakpointSet<Rational> {
    let mut v = vec![Rational::zero()];
    for (l, d) in lower.entries().iter().zip(deviation.entries()) {
        v.push(l.clone());
        v.push(d.clone());
        v.push(l + d);
    }
    BreakpointSet::new(v)
}

/// S = {0} ∪ {lower_i} ∪ {lower_i + dev_i}.
pub fn two_stage_db_alphas(lower: &CostVector, deviation: &CostVector) -> BreakpointSet<Rational> {
    let mut v = vec![Rational::zero()];
    for (l, d) in lower.entries().iter().zip(deviation.entries()) {
        v.push(l.clone());
        v.push(l + d);
    }
    BreakpointSet::new(v)
}

/// Pairs (α, β) with α ∈ S and β ∈ {0} ∪ {a − α : a ∈ S, a > α}.
pub fn recoverable_db_pairs(
    lower: &CostVector,
    deviation: &CostVector,
) -> BreakpointSet<(Rational, Rational)> {
    let s = two_stage_db_alphas(lower, deviation).values;
    let mut pairs = Vec::with_capacity(s.len() * (s.len() + 1) / 2);
    for (i, a) in s.iter().enumerate() {
        pairs.push((a.clone(), Rational::zero()));
        for b in &s[i + 1..] {
            pairs.push((a.clone(), b - a));
        }
    }
    BreakpointSet::new(pairs)
}
