use super::{ExperimentConfig, HiroSettings, Shape};
use crate::error::{Error, Result};
use crate::hiro::HiroMode;
use crate::rational::int;
use crate::samplers::{Family, GeneratorId, Variant};

/// Preset names, `<family>/exp<k>`.
pub const PRESETS: [&str; 22] = [
    "MM-D/exp1",
    "MM-D/exp2",
    "MM-D/exp3",
    "MM-D/exp4",
    "MM-B/exp1",
    "MMR-I/exp1",
    "MMR-D/exp1",
    "MMR-D/exp2",
    "MMR-D/exp3",
    "MMR-D/exp4",
    "2ST-D/exp1",
    "2ST-D/exp2",
    "2ST-D/exp3",
    "2ST-D/exp4",
    "2ST-DB/exp1",
    "2ST-CB/exp1",
    "RR-D/exp1",
    "RR-D/exp2",
    "RR-D/exp3",
    "RR-D/exp4",
    "RR-DB/exp1",
    "RR-CB/exp1",
];

fn discrete(n: usize, p: usize, big_n: usize) -> Shape {
    Shape {
        big_n: Some(big_n),
        ..Shape::new(n, p)
    }
}

fn budgeted(n: usize, p: usize, gamma: i64) -> Shape {
    Shape {
        gamma: Some(int(gamma)),
        ..Shape::new(n, p)
    }
}

fn recover(mut s: Shape, delta: usize) -> Shape {
    s.delta = Some(delta);
    s
}

fn hiro(budgets: &[i64], modes: &[HiroMode]) -> Option<HiroSettings> {
    Some(HiroSettings {
        budgets: budgets.iter().map(|&b| int(b)).collect(),
        modes: modes.to_vec(),
        time_limit: 600.0,
        c_max: int(100),
    })
}

const STAGES: [HiroMode; 2] = [HiroMode::FirstStageOnly, HiroMode::FirstAndSecondStage];

/// Recoverable budgeted grid: Γ and Δ range over the same p-dependent list.
fn rr_budgeted(gammas: impl Fn(usize) -> [i64; 4]) -> Vec<Shape> {
    let mut out = Vec::new();
    for p in [25, 50, 75] {
        let deltas = [5, 10, 15, 20].map(|v| v * p / 25);
        for g in gammas(p) {
            for d in deltas {
                out.push(recover(budgeted(100, p, g), d));
            }
        }
    }
    out
}

/// Full-size preset: 50 instances per cell, 600 s limits, scale 1.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let (family, exp) = name
        .split_once('/')
        .ok_or_else(|| Error::Config(format!("unknown preset {name:?}")))?;
    let fam = Family::ALL
        .into_iter()
        .find(|f| f.prefix() == family)
        .ok_or_else(|| Error::Config(format!("unknown preset family {family:?}")))?;
    let b3 = [1, 2, 5];
    let (shapes, hiro): (Vec<Shape>, Option<HiroSettings>) = match (fam, exp) {
        (Family::MmD, "exp1") => (
            [(20, 11), (25, 13), (30, 15), (35, 17), (40, 21)].map(|(n, p)| discrete(n, p, n)).to_vec(),
            hiro(&b3, &[]),
        ),
        (Family::MmD, "exp2") => ([5, 11, 15, 21, 25].map(|p| discrete(30, p, 30)).to_vec(), hiro(&b3, &[])),
        (Family::MmD, "exp3") => (
            [5, 10, 15, 20, 25, 30, 35, 40].map(|m| discrete(30, 15, m)).to_vec(),
            hiro(&b3, &[]),
        ),
        (Family::MmD, "exp4") => ([100, 500, 1000, 5000, 10000].map(|m| discrete(30, 15, m)).to_vec(), None),
        (Family::MmB, "exp1") => (
            [5, 10, 15, 20].map(|g| budgeted(40, 20, g)).to_vec(),
            hiro(&[1, 2, 5, 10, 20], &[HiroMode::LowerBounds, HiroMode::Deviations, HiroMode::Both]),
        ),
        (Family::MmrI, "exp1") => ((1..=9).map(|k| Shape::new(100, 10 * k)).collect(), hiro(&b3, &[])),
        (Family::MmrD, "exp1") => (
            [(30, 15), (40, 20), (40, 21)].map(|(n, p)| discrete(n, p, n)).to_vec(),
            hiro(&b3, &[]),
        ),
        (Family::MmrD, "exp2") => ([10, 11, 15, 20, 21].map(|p| discrete(30, p, 30)).to_vec(), hiro(&b3, &[])),
        (Family::MmrD, "exp3") => ([20, 30, 40].map(|m| discrete(30, 15, m)).to_vec(), hiro(&b3, &[])),
        (Family::MmrD, "exp4") => (
            [100, 200, 500, 1000, 2000, 5000].map(|m| discrete(30, 15, m)).to_vec(),
            None,
        ),
        (Family::TstD, "exp1") => (vec![discrete(50, 25, 50), discrete(100, 50, 100)], hiro(&b3, &STAGES)),
        (Family::TstD, "exp2") => ([10, 20, 25, 30, 40].map(|p| discrete(50, p, 50)).to_vec(), hiro(&b3, &STAGES)),
        (Family::TstD, "exp3") => ((1..=6).map(|k| discrete(50, 25, 10 * k)).collect(), hiro(&b3, &STAGES)),
        (Family::TstD, "exp4") => (
            [100, 200, 500, 1000, 2000, 5000].map(|m| discrete(50, 25, m)).to_vec(),
            None,
        ),
        (Family::TstDb, "exp1") => (
            [(25, [5, 10, 15, 20]), (50, [10, 20, 30, 40]), (75, [15, 30, 45, 60])]
                .iter()
                .flat_map(|(p, gs)| gs.map(|g| budgeted(100, *p, g)))
                .collect(),
            None,
        ),
        (Family::TstCb, "exp1") => (
            [25, 50, 75]
                .iter()
                .flat_map(|&p| [400, 800, 1000, 1200].map(|g| budgeted(100, p, g)))
                .collect(),
            None,
        ),
        (Family::RrD, "exp1") => (
            vec![
                recover(discrete(50, 25, 50), 13),
                recover(discrete(50, 25, 50), 20),
                recover(discrete(100, 50, 100), 25),
                recover(discrete(100, 50, 100), 40),
            ],
            hiro(&b3, &STAGES),
        ),
        (Family::RrD, "exp2") => (
            [(25, 13), (25, 20), (30, 15), (30, 25), (40, 20), (40, 30)]
                .map(|(p, d)| recover(discrete(50, p, 50), d))
                .to_vec(),
            hiro(&b3, &STAGES),
        ),
        (Family::RrD, "exp3") => (
            [40, 50, 60]
                .iter()
                .flat_map(|&m| [13, 20].map(|d| recover(discrete(50, 25, m), d)))
                .collect(),
            hiro(&b3, &STAGES),
        ),
        (Family::RrD, "exp4") => (
            [100, 200, 500, 1000, 2000]
                .iter()
                .flat_map(|&m| [13, 20].map(|d| recover(discrete(50, 25, m), d)))
                .collect(),
            None,
        ),
        (Family::RrDb, "exp1") => (rr_budgeted(|p| [5, 10, 15, 20].map(|v| (v * p / 25) as i64)), None),
        (Family::RrCb, "exp1") => (rr_budgeted(|_| [400, 800, 1000, 1200]), None),
        _ => return Err(Error::Config(format!("unknown preset {name:?}"))),
    };
    Ok(ExperimentConfig {
        name: name.to_string(),
        generators: [Variant::U, Variant::One, Variant::Two]
            .map(|v| GeneratorId::new(fam, v))
            .to_vec(),
        shapes,
        seeds: 50,
        hiro,
        ..ExperimentConfig::default()
    })
}
