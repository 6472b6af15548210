//! Per-generator range and identity checks.

use super::{Family, GeneratorId, Variant};
use crate::model::{CostVector, ProblemInstance, UncertaintySet};
use crate::rational;
use num_traits::ToPrimitive;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// One of `provenance`, `shape`, `integrality`, `range`, `symmetry`, `complement`.
    pub kind: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.detail)
    }
}

pub(super) fn describe(id: GeneratorId) -> &'static str {
    use Family::*;
    use Variant::*;
    match (id.family, id.variant) {
        (MmD | MmrD, U) => "c in [1,100]",
        (MmD | MmrD, One) => "c in [1,10] or [91,100]",
        (MmD | MmrD, Two) => "c_i in [1,100] for i <= n/2; c_i = 100 - c_(i-n/2) otherwise",
        (MmB, U) => "lower, dev in [1,100]",
        (MmB, One) => "lower in [1,100]; lower + dev = 100",
        (MmB, Two) => "lower in [1,10]; dev in [99-lower,100]",
        (MmrI, U) => "lower, dev in [1,100]",
        (MmrI, One) => "(lower in [1,10], dev in [91,100]) or (lower in [91,100], dev in [1,10])",
        (MmrI, Two) => "lower, dev both in [1,10] or both in [91,100]",
        (TstD | RrD, U) => "C, c in [1,100]",
        (TstD | RrD, One) => "C in [25,75]; c in [C-5,C+5], [1,10] or [91,100]",
        (TstD | RrD, Two) => "C in [1,100]; C = 50 => c in [1,10] or [91,100]; else c in [max(0,C-5),C+5]",
        (TstDb | TstCb | RrDb | RrCb, U) => "C, lower, dev in [1,100]",
        (TstDb | TstCb | RrDb | RrCb, One) => "C in [1,100]; lower in [1,10]; dev in [100-lower,100]",
        (TstDb | TstCb | RrDb | RrCb, Two) => "C in [1,100]; lower = 100 - C; dev in [lower,100]",
    }
}

struct Checker {
    out: Vec<Violation>,
}

impl Checker {
    fn push(&mut self, kind: &'static str, detail: String) {
        self.out.push(Violation { kind, detail });
    }

    fn range(&mut self, what: &str, i: usize, v: i64, ranges: &[(i64, i64)]) {
        if !ranges.iter().any(|&(lo, hi)| lo <= v && v <= hi) {
            let rs: Vec<String> = ranges.iter().map(|(a, b)| format!("[{a},{b}]")).collect();
            self.push(
                "range",
                format!("{what}[{}] = {v} outside {}", i + 1, rs.join(" or ")),
            );
        }
    }
}

fn as_ints(what: &str, v: &CostVector, ck: &mut Checker) -> Vec<i64> {
    v.entries()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if !r.is_integer() {
                ck.push(
                    "integrality",
                    format!("{what}[{}] = {} is not an integer", i + 1, rational::format(r)),
                );
            }
            r.to_integer().to_i64().unwrap_or(i64::MAX)
        })
        .collect()
}

/// Verifies the recipe identities of the generator recorded in the
/// instance's provenance. Returns every violation found.
pub fn check_sampler_invariants(inst: &ProblemInstance) -> Result<(), Vec<Violation>> {
    let mut ck = Checker { out: Vec::new() };
    let Some(g) = inst.provenance.generator else {
        ck.push("provenance", "instance names no generator".into());
        return Err(ck.out);
    };
    check(g, inst, &mut ck);
    if ck.out.is_empty() {
        Ok(())
    } else {
        Err(ck.out)
    }
}

fn check(g: GeneratorId, inst: &ProblemInstance, ck: &mut Checker) {
    use Family::*;
    let f = g.family;
    if inst.criterion != f.criterion() || inst.uncertainty.budget_mode() != f.budget_mode() {
        ck.push("shape", format!("instance pairing does not match {g}"));
        return;
    }
    let first = inst
        .first_stage_costs
        .as_ref()
        .map(|c| as_ints("C", c, ck));
    match (&inst.uncertainty, f) {
        (UncertaintySet::Discrete { scenarios }, MmD | MmrD | TstD | RrD) => {
            for (j, s) in scenarios.iter().enumerate() {
                let row = as_ints(&format!("c^{}", j + 1), s, ck);
                let what = format!("c^{}", j + 1);
                match f {
                    MmD | MmrD => min_max_row(g.variant, &what, &row, ck),
                    _ => two_stage_row(g.variant, &what, first.as_deref().unwrap(), &row, ck),
                }
            }
            if let (Some(c), TstD | RrD) = (&first, f) {
                for (i, &v) in c.iter().enumerate() {
                    let r: &[(i64, i64)] = match g.variant {
                        Variant::U => &[(1, 100)],
                        Variant::One => &[(25, 75)],
                        Variant::Two => &[(1, 100)],
                    };
                    ck.range("C", i, v, r);
                }
            }
        }
        (UncertaintySet::Budgeted { lower, deviation, .. }, MmB) => {
            let (l, d) = (as_ints("lower", lower, ck), as_ints("dev", deviation, ck));
            for i in 0..l.len() {
                match g.variant {
                    Variant::U => {
                        ck.range("lower", i, l[i], &[(1, 100)]);
                        ck.range("dev", i, d[i], &[(1, 100)]);
                    }
                    Variant::One => {
                        ck.range("lower", i, l[i], &[(1, 100)]);
                        if l[i] + d[i] != 100 {
                            ck.push(
                                "complement",
                                format!("lower[{0}] + dev[{0}] = {1} != 100", i + 1, l[i] + d[i]),
                            );
                        }
                    }
                    Variant::Two => {
                        ck.range("lower", i, l[i], &[(1, 10)]);
                        ck.range("dev", i, d[i], &[(99 - l[i], 100)]);
                    }
                }
            }
        }
        (UncertaintySet::Interval { lower, deviation }, MmrI) => {
            let (l, d) = (as_ints("lower", lower, ck), as_ints("dev", deviation, ck));
            for i in 0..l.len() {
                match g.variant {
                    Variant::U => {
                        ck.range("lower", i, l[i], &[(1, 100)]);
                        ck.range("dev", i, d[i], &[(1, 100)]);
                    }
                    Variant::One | Variant::Two => {
                        let lo_l = (1..=10).contains(&l[i]);
                        let hi_l = (91..=100).contains(&l[i]);
                        let lo_d = (1..=10).contains(&d[i]);
                        let hi_d = (91..=100).contains(&d[i]);
                        let ok = if g.variant == Variant::One {
                            (lo_l && hi_d) || (hi_l && lo_d)
                        } else {
                            (lo_l && lo_d) || (hi_l && hi_d)
                        };
                        if !ok {
                            ck.push(
                                "range",
                                format!("(lower, dev)[{}] = ({}, {}) outside the recipe", i + 1, l[i], d[i]),
                            );
                        }
                    }
                }
            }
        }
        (UncertaintySet::Budgeted { lower, deviation, .. }, TstDb | TstCb | RrDb | RrCb) => {
            let (l, d) = (as_ints("lower", lower, ck), as_ints("dev", deviation, ck));
            let c = first.unwrap_or_default();
            for i in 0..l.len() {
                ck.range("C", i, c[i], &[(1, 100)]);
                match g.variant {
                    Variant::U => {
                        ck.range("lower", i, l[i], &[(1, 100)]);
                        ck.range("dev", i, d[i], &[(1, 100)]);
                    }
                    Variant::One => {
                        ck.range("lower", i, l[i], &[(1, 10)]);
                        ck.range("dev", i, d[i], &[(100 - l[i], 100)]);
                    }
                    Variant::Two => {
                        if l[i] != 100 - c[i] {
                            ck.push(
                                "complement",
                                format!("lower[{0}] = {1} != 100 - C[{0}] = {2}", i + 1, l[i], 100 - c[i]),
                            );
                        }
                        ck.range("dev", i, d[i], &[(l[i], 100)]);
                    }
                }
            }
        }
        _ => ck.push("shape", format!("uncertainty set does not match {g}")),
    }
}

fn min_max_row(variant: Variant, what: &str, row: &[i64], ck: &mut Checker) {
    let n = row.len();
    match variant {
        Variant::U => row.iter().enumerate().for_each(|(i, &v)| ck.range(what, i, v, &[(1, 100)])),
        Variant::One => row
            .iter()
            .enumerate()
            .for_each(|(i, &v)| ck.range(what, i, v, &[(1, 10), (91, 100)])),
        Variant::Two => {
            let half = n / 2;
            for i in 0..n {
                if i < half {
                    ck.range(what, i, row[i], &[(1, 100)]);
                } else if row[i] != 100 - row[i - half] {
                    ck.push(
                        "symmetry",
                        format!(
                            "{what}[{}] = {} != 100 - {what}[{}] = {}",
                            i + 1,
                            row[i],
                            i - half + 1,
                            100 - row[i - half]
                        ),
                    );
                }
            }
        }
    }
}

fn two_stage_row(variant: Variant, what: &str, first: &[i64], row: &[i64], ck: &mut Checker) {
    for (i, (&c, &v)) in first.iter().zip(row).enumerate() {
        match variant {
            Variant::U => ck.range(what, i, v, &[(1, 100)]),
            Variant::One => ck.range(what, i, v, &[(c - 5, c + 5), (1, 10), (91, 100)]),
            Variant::Two => {
                if c == 50 {
                    ck.range(what, i, v, &[(1, 10), (91, 100)]);
                } else {
                    ck.range(what, i, v, &[((c - 5).max(0), c + 5)]);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{sample_instance, ShapeParams};
    use super::*;
    use crate::model::CostVector;

    #[test]
    fn sampled_instances_pass() {
        for g in GeneratorId::all() {
            let mut sp = ShapeParams::new(6, 3, 11);
            if g.family.is_discrete() {
                sp = sp.with_scenarios(3);
            }
            if g.family.budget_mode().is_some() {
                sp = sp.with_gamma(rational::int(2));
            }
            if g.family == Family::RrD || g.family == Family::RrDb || g.family == Family::RrCb {
                sp = sp.with_delta(1, None);
            }
            let inst = sample_instance(g, &sp).unwrap();
            assert_eq!(check_sampler_invariants(&inst), Ok(()), "{g}");
        }
    }

    #[test]
    fn broken_symmetry_is_reported() {
        let g = GeneratorId::parse("MM-D-2").unwrap();
        let mut inst = sample_instance(g, &ShapeParams::new(4, 2, 3).with_scenarios(1)).unwrap();
        if let UncertaintySet::Discrete { scenarios } = &mut inst.uncertainty {
            let mut e = scenarios[0].clone().into_entries();
            e[2] = e[2].clone() + rational::int(1);
            scenarios[0] = CostVector::new(e).unwrap();
        }
        let v = check_sampler_invariants(&inst).unwrap_err();
        assert_eq!(v[0].kind, "symmetry");
    }

    #[test]
    fn broken_complement_is_reported() {
        let g = GeneratorId::parse("2ST-DB-2").unwrap();
        let mut inst =
            sample_instance(g, &ShapeParams::new(4, 2, 3).with_gamma(rational::int(1))).unwrap();
        let c = inst.first_stage_costs.clone().unwrap();
        let mut e = c.into_entries();
        e[0] = if e[0] == rational::int(1) { rational::int(2) } else { rational::int(1) };
        inst.first_stage_costs = Some(CostVector::new(e).unwrap());
        let v = check_sampler_invariants(&inst).unwrap_err();
        assert!(v.iter().any(|x| x.kind == "complement"));
    }
}
