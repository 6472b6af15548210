//! Instance samplers, deterministic under a 64-bit seed.

mod invariants;
mod rng;

pub use invariants::check_sampler_invariants;
pub use rng::Draws;

use crate::error::{Error, Result};
use crate::model::{
    BudgetMode, CostVector, Criterion, DeltaSemantics, ProblemInstance, Provenance, UncertaintySet,
};
use crate::rational::Rational;
use std::fmt;

/// Sampler family (criterion × uncertainty).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    MmD,
    MmB,
    MmrI,
    MmrD,
    TstD,
    TstDb,
    TstCb,
    RrD,
    RrDb,
    RrCb,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    U,
    One,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GeneratorId {
    pub family: Family,
    pub variant: Variant,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::MmD,
        Family::MmB,
        Family::MmrI,
        Family::MmrD,
        Family::TstD,
        Family::TstDb,
        Family::TstCb,
        Family::RrD,
        Family::RrDb,
        Family::RrCb,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            Family::MmD => "MM-D",
            Family::MmB => "MM-B",
            Family::MmrI => "MMR-I",
            Family::MmrD => "MMR-D",
            Family::TstD => "2ST-D",
            Family::TstDb => "2ST-DB",
            Family::TstCb => "2ST-CB",
            Family::RrD => "RR-D",
            Family::RrDb => "RR-DB",
            Family::RrCb => "RR-CB",
        }
    }

    pub fn criterion(self) -> Criterion {
        match self {
            Family::MmD | Family::MmB => Criterion::MinMax,
            Family::MmrI | Family::MmrD => Criterion::MinMaxRegret,
            Family::TstD | Family::TstDb | Family::TstCb => Criterion::TwoStage,
            Family::RrD | Family::RrDb | Family::RrCb => Criterion::Recoverable,
        }
    }

    pub fn is_discrete(self) -> bool {
        matches!(self, Family::MmD | Family::MmrD | Family::TstD | Family::RrD)
    }

    pub fn budget_mode(self) -> Option<BudgetMode> {
        match self {
            Family::MmB => Some(BudgetMode::ContinuousItems),
            Family::TstDb | Family::RrDb => Some(BudgetMode::DiscreteItems),
            Family::TstCb | Family::RrCb => Some(BudgetMode::VariableBudget),
            _ => None,
        }
    }

    /// Δ semantics used when the shape does not specify one.
    pub fn default_semantics(self) -> Option<DeltaSemantics> {
        match self {
            Family::RrD => Some(DeltaSemantics::KeptAtLeast),
            Family::RrDb | Family::RrCb => Some(DeltaSemantics::ChangedAtMost),
            _ => None,
        }
    }
}

impl GeneratorId {
    pub fn new(family: Family, variant: Variant) -> Self {
        GeneratorId { family, variant }
    }

    pub fn all() -> Vec<GeneratorId> {
        let mut out = Vec::new();
        for f in Family::ALL {
            for v in [Variant::U, Variant::One, Variant::Two] {
                out.push(GeneratorId::new(f, v));
            }
        }
        out
    }

    pub fn name(&self) -> String {
        let v = match self.variant {
            Variant::U => "U",
            Variant::One => "1",
            Variant::Two => "2",
        };
        format!("{}-{}", self.family.prefix(), v)
    }

    pub fn parse(s: &str) -> Option<Self> {
        let (prefix, v) = s.rsplit_once('-')?;
        let variant = match v {
            "U" => Variant::U,
            "1" => Variant::One,
            "2" => Variant::Two,
            _ => return None,
        };
        let family = Family::ALL.into_iter().find(|f| f.prefix() == prefix)?;
        Some(GeneratorId::new(family, variant))
    }

    /// Shape parameters the generator requires.
    pub fn required_params(&self) -> &'static [&'static str] {
        match self.family {
            Family::MmD | Family::MmrD | Family::TstD => &["n", "p", "N"],
            Family::RrD => &["n", "p", "N", "delta"],
            Family::MmB | Family::TstDb | Family::TstCb => &["n", "p", "gamma"],
            Family::MmrI => &["n", "p"],
            Family::RrDb | Family::RrCb => &["n", "p", "gamma", "delta"],
        }
    }
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Instance shape and seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShapeParams {
    pub n: usize,
    pub p: usize,
    pub scenarios: Option<usize>,
    pub gamma: Option<Rational>,
    pub delta: Option<usize>,
    pub delta_semantics: Option<DeltaSemantics>,
    pub seed: u64,
}

impl ShapeParams {
    pub fn new(n: usize, p: usize, seed: u64) -> Self {
        ShapeParams {
            n,
            p,
            scenarios: None,
            gamma: None,
            delta: None,
            delta_semantics: None,
            seed,
        }
    }

    pub fn with_scenarios(mut self, big_n: usize) -> Self {
        self.scenarios = Some(big_n);
        self
    }

    pub fn with_gamma(mut self, gamma: Rational) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn with_delta(mut self, delta: usize, semantics: Option<DeltaSemantics>) -> Self {
        self.delta = Some(delta);
        self.delta_semantics = semantics;
        self
    }
}

/// One row of the generator catalog.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub id: GeneratorId,
    pub required: &'static [&'static str],
    pub invariants: &'static str,
}

pub fn catalog() -> Vec<CatalogEntry> {
    GeneratorId::all()
        .into_iter()
        .map(|id| CatalogEntry {
            id,
            required: id.required_params(),
            invariants: invariants::describe(id),
        })
        .collect()
}

fn check_shape(g: GeneratorId, sp: &ShapeParams) -> Result<()> {
    let f = g.family;
    let bad = |m: String| Err(Error::Parameter(format!("{g}: {m}")));
    if sp.n == 0 || sp.p < 1 || sp.p > sp.n {
        return bad(format!("need 1 <= p <= n, got n = {}, p = {}", sp.n, sp.p));
    }
    match (f.is_discrete(), sp.scenarios) {
        (true, None) | (true, Some(0)) => return bad("needs N >= 1".into()),
        (false, Some(_)) => return bad("takes no scenario count".into()),
        _ => {}
    }
    match (f.budget_mode().is_some(), &sp.gamma) {
        (true, None) => return bad("needs gamma".into()),
        (false, Some(_)) => return bad("takes no gamma".into()),
        _ => {}
    }
    match (f.criterion() == Criterion::Recoverable, sp.delta) {
        (true, None) => return bad("needs delta".into()),
        (false, Some(_)) => return bad("takes no delta".into()),
        _ => {}
    }
    if f == Family::MmD || f == Family::MmrD {
        if g.variant == Variant::Two && sp.n < 2 {
            return bad("mirrored costs need n >= 2".into());
        }
    }
    Ok(())
}

fn ints(v: &[i64]) -> CostVector {
    CostVector::from_ints(v).expect("sampled costs are non-negative")
}

fn mixture_low_high(d: &mut Draws) -> i64 {
    if d.coin() {
        d.int(91, 100)
    } else {
        d.int(1, 10)
    }
}

fn discrete_min_max_row(variant: Variant, n: usize, d: &mut Draws) -> Vec<i64> {
    match variant {
        Variant::U => (0..n).map(|_| d.int(1, 100)).collect(),
        Variant::One => (0..n).map(|_| mixture_low_high(d)).collect(),
        Variant::Two => {
            let half = n / 2;
            let mut row: Vec<i64> = (0..half).map(|_| d.int(1, 100)).collect();
            for i in half..n {
                let mirrored = 100 - row[i - half];
                row.push(mirrored);
            }
            row
        }
    }
}

/// First-stage costs and scenario rows for the two-stage / recoverable discrete recipes.
fn two_stage_discrete(
    variant: Variant,
    n: usize,
    big_n: usize,
    seed: u64,
) -> (Vec<i64>, Vec<Vec<i64>>) {
    let mut d0 = Draws::new(seed, 0);
    let first: Vec<i64> = match variant {
        Variant::U => (0..n).map(|_| d0.int(1, 100)).collect(),
        Variant::One => (0..n)
            .map(|_| {
                if d0.coin() {
                    d0.int(25, 75)
                } else {
                    d0.int(45, 55)
                }
            })
            .collect(),
        Variant::Two => (0..n)
            .map(|_| if d0.coin() { 50 } else { d0.int(1, 100) })
            .collect(),
    };
    let rows = (0..big_n)
        .map(|j| {
            let mut d = Draws::new(seed, j as u64 + 1);
            first
                .iter()
                .map(|&c| match variant {
                    Variant::U => d.int(1, 100),
                    Variant::One => match d.int(0, 3) {
                        0 | 1 => d.int(c - 5, c + 5),
                        2 => d.int(1, 10),
                        _ => d.int(91, 100),
                    },
                    Variant::Two => {
                        if c == 50 {
                            mixture_low_high(&mut d)
                        } else {
                            d.int(c - 5, c + 5).max(0)
                        }
                    }
                })
                .collect()
        })
        .collect();
    (first, rows)
}

/// (first-stage, lower, deviation) for the budgeted two-stage / recoverable recipes.
fn two_stage_budgeted(variant: Variant, n: usize, seed: u64) -> (Vec<i64>, Vec<i64>, Vec<i64>) {
    let mut d = Draws::new(seed, 0);
    let (mut first, mut lower, mut dev) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n {
        let c = d.int(1, 100);
        let (l, dv) = match variant {
            Variant::U => {
                let l = d.int(1, 100);
                (l, d.int(1, 100))
            }
            Variant::One => {
                let l = d.int(1, 10);
                (l, d.int(100 - l, 100))
            }
            Variant::Two => {
                let l = 100 - c;
                (l, d.int(l, 100))
            }
        };
        first.push(c);
        lower.push(l);
        dev.push(dv);
    }
    (first, lower, dev)
}

fn min_max_budgeted(variant: Variant, n: usize, seed: u64) -> (Vec<i64>, Vec<i64>) {
    let mut d = Draws::new(seed, 0);
    let (mut lower, mut dev) = (Vec::new(), Vec::new());
    for _ in 0..n {
        let (l, dv) = match variant {
            Variant::U => {
                let l = d.int(1, 100);
                (l, d.int(1, 100))
            }
            Variant::One => {
                let l = d.int(1, 100);
                (l, 100 - l)
            }
            Variant::Two => {
                let l = d.int(1, 10);
                (l, d.int(99 - l, 100))
            }
        };
        lower.push(l);
        dev.push(dv);
    }
    (lower, dev)
}

fn regret_interval(variant: Variant, n: usize, seed: u64) -> (Vec<i64>, Vec<i64>) {
    let mut d = Draws::new(seed, 0);
    let (mut lower, mut dev) = (Vec::new(), Vec::new());
    for _ in 0..n {
        let (l, dv) = match variant {
            Variant::U => {
                let l = d.int(1, 100);
                (l, d.int(1, 100))
            }
            Variant::One => {
                if d.coin() {
                    let l = d.int(91, 100);
                    (l, d.int(1, 10))
                } else {
                    let l = d.int(1, 10);
                    (l, d.int(91, 100))
                }
            }
            Variant::Two => {
                if d.coin() {
                    let l = d.int(91, 100);
                    (l, d.int(91, 100))
                } else {
                    let l = d.int(1, 10);
                    (l, d.int(1, 10))
                }
            }
        };
        lower.push(l);
        dev.push(dv);
    }
    (lower, dev)
}

/// Draws an instance following the generator's recipe.
pub fn sample_instance(g: GeneratorId, sp: &ShapeParams) -> Result<ProblemInstance> {
    check_shape(g, sp)?;
    let n = sp.n;
    let f = g.family;
    let (uncertainty, first) = match f {
        Family::MmD | Family::MmrD => {
            let big_n = sp.scenarios.unwrap();
            let scenarios = (0..big_n)
                .map(|j| {
                    let mut d = Draws::new(sp.seed, j as u64 + 1);
                    ints(&discrete_min_max_row(g.variant, n, &mut d))
                })
                .collect();
            (UncertaintySet::Discrete { scenarios }, None)
        }
        Family::TstD | Family::RrD => {
            let (first, rows) = two_stage_discrete(g.variant, n, sp.scenarios.unwrap(), sp.seed);
            let scenarios = rows.iter().map(|r| ints(r)).collect();
            (UncertaintySet::Discrete { scenarios }, Some(ints(&first)))
        }
        Family::MmB => {
            let (lower, dev) = min_max_budgeted(g.variant, n, sp.seed);
            (
                UncertaintySet::Budgeted {
                    lower: ints(&lower),
                    deviation: ints(&dev),
                    gamma: sp.gamma.clone().unwrap(),
                    mode: BudgetMode::ContinuousItems,
                },
                None,
            )
        }
        Family::MmrI => {
            let (lower, dev) = regret_interval(g.variant, n, sp.seed);
            (
                UncertaintySet::Interval {
                    lower: ints(&lower),
                    deviation: ints(&dev),
                },
                None,
            )
        }
        Family::TstDb | Family::TstCb | Family::RrDb | Family::RrCb => {
            let (first, lower, dev) = two_stage_budgeted(g.variant, n, sp.seed);
            (
                UncertaintySet::Budgeted {
                    lower: ints(&lower),
                    deviation: ints(&dev),
                    gamma: sp.gamma.clone().unwrap(),
                    mode: f.budget_mode().unwrap(),
                },
                Some(ints(&first)),
            )
        }
    };
    let recovery = sp.delta.map(|d| {
        let s = sp
            .delta_semantics
            .or(f.default_semantics())
            .expect("recoverable families have a default");
        (d, s)
    });
    let inst = ProblemInstance::new(sp.p, f.criterion(), uncertainty, first, recovery)
        .map_err(|e| Error::Parameter(format!("{g}: {e}")))?;
    Ok(inst.with_provenance(Provenance {
        generator: Some(g),
        seed: Some(sp.seed),
        lineage: None,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational;

    #[test]
    fn names_round_trip() {
        for g in GeneratorId::all() {
            assert_eq!(GeneratorId::parse(&g.name()), Some(g));
        }
        assert_eq!(GeneratorId::all().len(), 30);
        assert!(GeneratorId::parse("MM-X-1").is_none());
    }

    #[test]
    fn mirrored_rows() {
        let g = GeneratorId::parse("MM-D-2").unwrap();
        let inst = sample_instance(g, &ShapeParams::new(4, 2, 9).with_scenarios(3)).unwrap();
        for s in inst.uncertainty.scenarios().unwrap() {
            assert_eq!(s.get(2) + s.get(0), rational::int(100));
            assert_eq!(s.get(3) + s.get(1), rational::int(100));
        }
    }

    #[test]
    fn shape_errors() {
        let g = GeneratorId::parse("MM-D-U").unwrap();
        let sp = ShapeParams::new(4, 2, 1).with_gamma(rational::int(1));
        assert!(sample_instance(g, &sp).is_err());
        let g = GeneratorId::parse("RR-DB-1").unwrap();
        assert!(sample_instance(g, &ShapeParams::new(4, 2, 1).with_gamma(rational::int(1))).is_err());
    }

    #[test]
    fn adding_scenarios_keeps_earlier_rows() {
        let g = GeneratorId::parse("2ST-D-1").unwrap();
        let a = sample_instance(g, &ShapeParams::new(6, 3, 5).with_scenarios(2)).unwrap();
        let b = sample_instance(g, &ShapeParams::new(6, 3, 5).with_scenarios(4)).unwrap();
        let (sa, sb) = (a.uncertainty.scenarios().unwrap(), b.uncertainty.scenarios().unwrap());
        assert_eq!(sa, &sb[..2]);
        assert_eq!(a.first_stage_costs, b.first_stage_costs);
    }
}
