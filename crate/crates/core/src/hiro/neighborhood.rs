use crate::milp::{MilpModel, Relation};
use crate::model::CostVector;
use crate::rational::{self, Rational};
use num_traits::{Signed, Zero};

/// Box of radius b around a cost vector, clipped to [0, c_max], with the
/// vector total not allowed to increase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbationNeighborhood {
    pub center: CostVector,
    pub lower: Vec<Rational>,
    pub upper: Vec<Rational>,
    pub cap: Rational,
}

impl PerturbationNeighborhood {
    /// Entries above `c_max` keep their own value as upper bound so the
    /// center stays feasible.
    pub fn new(center: &CostVector, b: &Rational, c_max: &Rational) -> Self {
        let mut lower = Vec::with_capacity(center.len());
        let mut upper = Vec::with_capacity(center.len());
        for c in center.entries() {
            let lo = c - b;
            lower.push(if lo.is_negative() { Rational::zero() } else { lo });
            let cap = if c > c_max { c.clone() } else { c_max.clone() };
            upper.push((c + b).min(cap));
        }
        PerturbationNeighborhood {
            center: center.clone(),
            lower,
            upper,
            cap: center.total(),
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.lower == self.upper
    }

    pub fn contains(&self, c: &CostVector) -> bool {
        c.len() == self.len()
            && c
                .entries()
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, up))| lo <= v && v <= up)
            && c.total() <= self.cap
    }

    /// Nearest-ish feasible point: clamp into the box, then shave the excess
    /// over the cap from the largest slack first.
    pub fn project(&self, values: &[Rational]) -> CostVector {
        let mut v: Vec<Rational> = values
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(x, (lo, up))| x.clone().max(lo.clone()).min(up.clone()))
            .collect();
        let mut excess = rational::sum(&v) - &self.cap;
        if excess.is_positive() {
            let mut order: Vec<usize> = (0..v.len()).collect();
            order.sort_by(|&a, &b| (&v[b] - &self.lower[b]).cmp(&(&v[a] - &self.lower[a])));
            for i in order {
                if !excess.is_positive() {
                    break;
                }
                let room = &v[i] - &self.lower[i];
                let cut = room.min(excess.clone());
                v[i] -= &cut;
                excess -= cut;
            }
        }
        CostVector::new(v).expect("projection keeps entries non-negative")
    }
}

/// A cost entry inside a master model: a decision variable or a constant.
#[derive(Clone, Debug)]
pub(crate) enum Entry {
    Var(usize),
    Fixed(Rational),
}

impl Entry {
    /// Adds `coeff * entry` to a row, returning the constant part.
    pub(crate) fn push(&self, coeffs: &mut Vec<(usize, Rational)>, coeff: &Rational) -> Rational {
        match self {
            Entry::Var(v) => {
                coeffs.push((*v, coeff.clone()));
                Rational::zero()
            }
            Entry::Fixed(c) => c * coeff,
        }
    }
}

/// Cost vector that is either perturbed inside its neighborhood or held
/// at its center.
#[derive(Clone, Debug)]
pub(crate) struct MasterVector {
    pub hood: PerturbationNeighborhood,
    pub entries: Vec<Entry>,
}

impl MasterVector {
    pub(crate) fn variable(model: &mut MilpModel, hood: PerturbationNeighborhood, tag: &str) -> Self {
        let mut entries = Vec::with_capacity(hood.len());
        let mut row = Vec::with_capacity(hood.len());
        for i in 0..hood.len() {
            let v = model.add_continuous(
                format!("{tag}[{}]", i + 1),
                Some(hood.lower[i].clone()),
                Some(hood.upper[i].clone()),
            );
            row.push((v, rational::one()));
            entries.push(Entry::Var(v));
        }
        model.add_constraint(format!("cap_{tag}"), row, Relation::Le, hood.cap.clone());
        MasterVector { hood, entries }
    }

    pub(crate) fn fixed(hood: PerturbationNeighborhood) -> Self {
        let entries = hood
            .center
            .entries()
            .iter()
            .map(|c| Entry::Fixed(c.clone()))
            .collect();
        MasterVector { hood, entries }
    }

    pub(crate) fn is_variable(&self) -> bool {
        matches!(self.entries.first(), Some(Entry::Var(_)))
    }

    /// Upper bound of entry i.
    pub(crate) fn bar(&self, i: usize) -> &Rational {
        &self.hood.upper[i]
    }

    /// Reads the perturbed vector from a solution and projects it.
    pub(crate) fn read(&self, assignment: &[Rational]) -> CostVector {
        if !self.is_variable() {
            return self.hood.center.clone();
        }
        let raw: Vec<Rational> = self
            .entries
            .iter()
            .map(|e| match e {
                Entry::Var(v) => assignment[*v].clone(),
                Entry::Fixed(c) => c.clone(),
            })
            .collect();
        self.hood.project(&raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn box_is_clipped_and_center_feasible() {
        let c = CostVector::from_ints(&[0, 50, 100]).unwrap();
        let h = PerturbationNeighborhood::new(&c, &int(2), &int(100));
        assert_eq!(h.lower, vec![int(0), int(48), int(98)]);
        assert_eq!(h.upper, vec![int(2), int(52), int(100)]);
        assert!(h.contains(&c));
        let z = PerturbationNeighborhood::new(&c, &int(0), &int(100));
        assert!(z.is_singleton());
    }

    #[test]
    fn projection_restores_cap() {
        let c = CostVector::from_ints(&[5, 6]).unwrap();
        let h = PerturbationNeighborhood::new(&c, &int(1), &int(100));
        let p = h.project(&[int(6), int(7)]);
        assert!(h.contains(&p));
        assert_eq!(p.total(), int(11));
    }
}
