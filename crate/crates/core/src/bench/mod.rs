//! Experiment grids, presets and the batch runner.

mod presets;

pub use presets::{preset, PRESETS};

use crate::error::{Error, Result};
use crate::formulations::solve_formulation;
use crate::hiro::{harden, HiroConfig, HiroMode};
use crate::io::{write_instance, write_results, ResultRecord};
use crate::milp::SolverConfig;
use crate::model::{DeltaSemantics, ProblemInstance};
use crate::rational::{self, int, Rational};
use crate::samplers::{sample_instance, GeneratorId, ShapeParams};
use num_traits::Signed;
use rayon::prelude::*;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

/// One parameter tuple of a grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    pub n: usize,
    pub p: usize,
    pub big_n: Option<usize>,
    pub gamma: Option<Rational>,
    pub delta: Option<usize>,
    pub delta_semantics: Option<DeltaSemantics>,
}

impl Shape {
    pub fn new(n: usize, p: usize) -> Self {
        Shape {
            n,
            p,
            big_n: None,
            gamma: None,
            delta: None,
            delta_semantics: None,
        }
    }

    /// Shrinks every size parameter by `s`, rounding down, keeping n ≥ 2,
    /// 1 ≤ p ≤ n, N ≥ 1 and Δ ≤ p.
    pub fn scaled(&self, s: f64) -> Shape {
        if s >= 1.0 {
            return self.clone();
        }
        let f = |v: usize, lo: usize| ((v as f64 * s).floor() as usize).max(lo);
        let n = f(self.n, 2);
        let p = f(self.p, 1).min(n);
        Shape {
            n,
            p,
            big_n: self.big_n.map(|m| f(m, 1)),
            gamma: self.gamma.as_ref().map(|g| int((rational::to_f64(g) * s).floor() as i64)),
            delta: self.delta.map(|d| f(d, 0).min(p)),
            delta_semantics: self.delta_semantics,
        }
    }

    fn params(&self, seed: u64) -> ShapeParams {
        let mut sp = ShapeParams::new(self.n, self.p, seed);
        sp.scenarios = self.big_n;
        sp.gamma = self.gamma.clone();
        sp.delta = self.delta;
        sp.delta_semantics = self.delta_semantics;
        sp
    }

    /// `n20_p11_N20`, with `_g` and `_d` parts when present.
    pub fn label(&self) -> String {
        let mut s = format!("n{}_p{}", self.n, self.p);
        if let Some(m) = self.big_n {
            s += &format!("_N{m}");
        }
        if let Some(g) = &self.gamma {
            s += &format!("_g{}", rational::format(g).replace('/', "over"));
        }
        if let Some(d) = self.delta {
            s += &format!("_d{d}");
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HiroSettings {
    pub budgets: Vec<Rational>,
    /// Empty means the default mode of each pairing.
    pub modes: Vec<HiroMode>,
    /// Seconds per hardening run.
    pub time_limit: f64,
    pub c_max: Rational,
}

/// A batch of (shape, generator, seed) cells, optionally hardened.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub generators: Vec<GeneratorId>,
    pub shapes: Vec<Shape>,
    /// Instances per cell; seeds run `base_seed..base_seed + seeds`.
    pub seeds: usize,
    pub base_seed: u64,
    pub hiro: Option<HiroSettings>,
    /// Also solve the sampled (unhardened) instances.
    pub include_sampled: bool,
    /// Seconds per solve.
    pub time_limit: f64,
    /// Applied to n, p, N, Γ, Δ and both time limits.
    pub scale: f64,
    pub threads: usize,
    /// Instances, results and summary are written here when set.
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "experiment".into(),
            generators: Vec::new(),
            shapes: Vec::new(),
            seeds: 5,
            base_seed: 0,
            hiro: None,
            include_sampled: true,
            time_limit: 600.0,
            scale: 1.0,
            threads: 1,
            out_dir: None,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Num {
    Int(i64),
    Text(String),
}

impl Num {
    fn rational(&self, what: &str) -> Result<Rational> {
        match self {
            Num::Int(v) => Ok(int(*v)),
            Num::Text(s) => rational::parse(s).ok_or_else(|| Error::Config(format!("invalid {what} {s:?}"))),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShape {
    n: usize,
    p: usize,
    #[serde(rename = "N")]
    big_n: Option<usize>,
    gamma: Option<Num>,
    delta: Option<usize>,
    delta_semantics: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHiro {
    b: Vec<Num>,
    #[serde(default)]
    modes: Vec<String>,
    time_limit: Option<f64>,
    c_max: Option<Num>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    preset: Option<String>,
    full: Option<bool>,
    generators: Option<Vec<String>>,
    shapes: Option<Vec<RawShape>>,
    seeds: Option<usize>,
    base_seed: Option<u64>,
    hiro: Option<RawHiro>,
    include_sampled: Option<bool>,
    time_limit: Option<f64>,
    scale: Option<f64>,
    threads: Option<usize>,
    out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses the TOML schema documented in the README. A `preset` key
    /// seeds the config at desk scale (`full = true` keeps the full grid);
    /// every other key overrides it.
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = match &raw.preset {
            Some(p) if raw.full.unwrap_or(false) => preset(p)?,
            Some(p) => preset(p)?.desk(),
            None => ExperimentConfig::default(),
        };
        if let Some(n) = raw.name {
            cfg.name = n;
        }
        if let Some(gs) = raw.generators {
            cfg.generators = gs
                .iter()
                .map(|g| GeneratorId::parse(g).ok_or_else(|| Error::Config(format!("unknown generator {g:?}"))))
                .collect::<Result<_>>()?;
        }
        if let Some(shapes) = raw.shapes {
            cfg.shapes = shapes
                .into_iter()
                .map(|s| {
                    Ok(Shape {
                        n: s.n,
                        p: s.p,
                        big_n: s.big_n,
                        gamma: s.gamma.map(|g| g.rational("gamma")).transpose()?,
                        delta: s.delta,
                        delta_semantics: s
                            .delta_semantics
                            .map(|d| {
                                DeltaSemantics::from_name(&d)
                                    .ok_or_else(|| Error::Config(format!("unknown delta semantics {d:?}")))
                            })
                            .transpose()?,
                    })
                })
                .collect::<Result<_>>()?;
        }
        if let Some(h) = raw.hiro {
            cfg.hiro = Some(HiroSettings {
                budgets: h.b.iter().map(|b| b.rational("budget")).collect::<Result<_>>()?,
                modes: h
                    .modes
                    .iter()
                    .map(|m| HiroMode::from_name(m).ok_or_else(|| Error::Config(format!("unknown HIRO mode {m:?}"))))
                    .collect::<Result<_>>()?,
                time_limit: h.time_limit.unwrap_or(cfg.time_limit),
                c_max: h.c_max.map(|c| c.rational("c_max")).transpose()?.unwrap_or_else(|| int(100)),
            });
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = raw.$f { cfg.$f = v; })* };
        }
        set!(seeds, base_seed, include_sampled, time_limit, scale, threads);
        if raw.out_dir.is_some() {
            cfg.out_dir = raw.out_dir;
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Desk defaults: 5 instances per cell, 10 s limits, sizes scaled so the
    /// largest n is at most 30.
    pub fn desk(mut self) -> Self {
        self.seeds = 5;
        self.time_limit = 10.0;
        if let Some(h) = &mut self.hiro {
            h.time_limit = 10.0;
        }
        let max_n = self.shapes.iter().map(|s| s.n).max().unwrap_or(0);
        self.scale = if max_n > 30 { 30.0 / max_n as f64 } else { 1.0 };
        self
    }

    pub fn check(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            return Err(Error::Config(format!("scale must lie in (0, 1], got {}", self.scale)));
        }
        if self.time_limit <= 0.0 || self.threads == 0 {
            return Err(Error::Config("time_limit and threads must be positive".into()));
        }
        if let Some(h) = &self.hiro {
            if h.budgets.iter().any(|b| b.is_negative()) || h.time_limit <= 0.0 {
                return Err(Error::Config("HIRO budgets must be non-negative and time_limit positive".into()));
            }
        }
        Ok(())
    }

    fn scaled_time(&self, secs: f64) -> Duration {
        Duration::from_secs_f64((secs * self.scale).max(1.0))
    }

    fn variants(&self) -> Vec<Option<(Rational, Option<HiroMode>)>> {
        let mut v = Vec::new();
        if self.include_sampled {
            v.push(None);
        }
        if let Some(h) = &self.hiro {
            let modes: Vec<Option<HiroMode>> = if h.modes.is_empty() {
                vec![None]
            } else {
                h.modes.iter().copied().map(Some).collect()
            };
            for b in &h.budgets {
                for m in &modes {
                    v.push(Some((b.clone(), *m)));
                }
            }
        }
        v
    }

    /// Number of records [`run_experiment`] produces.
    pub fn record_count(&self) -> usize {
        self.shapes.len() * self.generators.len() * self.seeds * self.variants().len()
    }
}

/// Per-cell aggregate over seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub generator: String,
    pub shape: String,
    pub b: Option<Rational>,
    pub hiro_mode: Option<String>,
    pub count: usize,
    pub optimal: usize,
    pub mean_time_s: f64,
    pub median_time_s: f64,
    pub mean_nodes: f64,
    pub median_nodes: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub records: Vec<ResultRecord>,
    pub summary: Vec<CellSummary>,
    /// `(instance_id, message)` for every error row.
    pub errors: Vec<(String, String)>,
}

struct Unit {
    shape: Shape,
    shape_label: String,
    generator: GeneratorId,
    seed: u64,
}

fn error_record(id: String, unit: &Unit, hv: &Option<(Rational, Option<HiroMode>)>) -> ResultRecord {
    ResultRecord {
        instance_id: id,
        generator: unit.generator.name(),
        n: unit.shape.n,
        p: unit.shape.p,
        big_n: unit.shape.big_n,
        gamma: unit.shape.gamma.clone(),
        delta: unit.shape.delta,
        b: hv.as_ref().map(|h| h.0.clone()),
        hiro_mode: hv.as_ref().and_then(|h| h.1.map(|m| m.name().to_string())),
        status: "error".into(),
        objective: None,
        wall_time_s: 0.0,
        nodes: 0,
        seed: Some(unit.seed),
    }
}

fn instance_id(unit: &Unit, hv: &Option<(Rational, Option<HiroMode>)>) -> String {
    let mut id = format!("{}_{}_s{}", unit.generator.name(), unit.shape_label, unit.seed);
    if let Some((b, m)) = hv {
        id += &format!("_H{}", rational::format(b).replace('/', "over"));
        if let Some(m) = m {
            id += &format!("_{}", m.name());
        }
    }
    id
}

impl ExperimentConfig {
    fn run_unit(&self, unit: &Unit) -> Vec<(ResultRecord, Option<String>)> {
        let solver = SolverConfig {
            time_limit: Some(self.scaled_time(self.time_limit)),
            ..SolverConfig::default()
        };
        let base = sample_instance(unit.generator, &unit.shape.params(unit.seed));
        self.variants()
            .into_iter()
            .map(|hv| {
                let id = instance_id(unit, &hv);
                match self.run_variant(&id, unit, &hv, base.as_ref(), &solver) {
                    Ok(r) => (r, None),
                    Err(e) => (error_record(id, unit, &hv), Some(e.to_string())),
                }
            })
            .collect()
    }

    fn run_variant(
        &self,
        id: &str,
        unit: &Unit,
        hv: &Option<(Rational, Option<HiroMode>)>,
        base: std::result::Result<&ProblemInstance, &Error>,
        solver: &SolverConfig,
    ) -> Result<ResultRecord> {
        let base = base.map_err(|e| Error::Config(e.to_string()))?;
        let (inst, mode) = match hv {
            None => (base.clone(), None),
            Some((b, m)) => {
                let h = self.hiro.as_ref().expect("variant implies settings");
                let mut hc = HiroConfig::new(b.clone()).with_time_limit(self.scaled_time(h.time_limit));
                hc.c_max = h.c_max.clone();
                hc.mode = *m;
                let (out, _) = harden(base, &hc)?;
                let mode = out.provenance.lineage.as_ref().map(|l| l.mode.clone());
                (out, mode.or_else(|| m.map(|m| m.name().to_string())))
            }
        };
        if let Some(dir) = &self.out_dir {
            write_instance(&inst, dir.join("instances").join(format!("{id}.csv")))?;
        }
        let start = Instant::now();
        let out = solve_formulation(&inst, solver)?;
        Ok(ResultRecord {
            instance_id: id.to_string(),
            generator: unit.generator.name(),
            n: inst.n,
            p: inst.p,
            big_n: inst.scenario_count(),
            gamma: inst.uncertainty.gamma().cloned(),
            delta: inst.delta,
            b: hv.as_ref().map(|h| h.0.clone()),
            hiro_mode: mode,
            status: out.milp.status.as_str().to_string(),
            objective: out.objective,
            wall_time_s: start.elapsed().as_secs_f64(),
            nodes: out.milp.nodes,
            seed: Some(unit.seed),
        })
    }
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Groups records by (generator, shape, b, mode), in first-seen order.
pub fn summarize(records: &[ResultRecord], shapes: &[String]) -> Vec<CellSummary> {
    let mut order = Vec::new();
    let mut groups: BTreeMap<usize, Vec<&ResultRecord>> = BTreeMap::new();
    let mut index: BTreeMap<(String, String, String, String), usize> = BTreeMap::new();
    for (r, shape) in records.iter().zip(shapes) {
        let key = (
            r.generator.clone(),
            shape.clone(),
            r.b.as_ref().map(rational::format).unwrap_or_default(),
            r.hiro_mode.clone().unwrap_or_default(),
        );
        let k = *index.entry(key).or_insert_with(|| {
            order.push((r.generator.clone(), shape.clone(), r.b.clone(), r.hiro_mode.clone()));
            order.len() - 1
        });
        groups.entry(k).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(k, rs)| {
            let (generator, shape, b, hiro_mode) = order[k].clone();
            let mut t: Vec<f64> = rs.iter().map(|r| r.wall_time_s).collect();
            let mut nd: Vec<f64> = rs.iter().map(|r| r.nodes as f64).collect();
            let c = rs.len() as f64;
            CellSummary {
                generator,
                shape,
                b,
                hiro_mode,
                count: rs.len(),
                optimal: rs.iter().filter(|r| r.status == "optimal").count(),
                mean_time_s: t.iter().sum::<f64>() / c,
                median_time_s: median(&mut t),
                mean_nodes: nd.iter().sum::<f64>() / c,
                median_nodes: median(&mut nd),
            }
        })
        .collect()
}

pub fn summary_csv(cells: &[CellSummary]) -> String {
    let mut out =
        String::from("generator,shape,b,hiro_mode,count,optimal,mean_time_s,median_time_s,mean_nodes,median_nodes\n");
    for c in cells {
        out += &format!(
            "{},{},{},{},{},{},{:.3},{:.3},{:.1},{:.1}\n",
            c.generator,
            c.shape,
            c.b.as_ref().map(rational::format).unwrap_or_default(),
            c.hiro_mode.as_deref().unwrap_or(""),
            c.count,
            c.optimal,
            c.mean_time_s,
            c.median_time_s,
            c.mean_nodes,
            c.median_nodes
        );
    }
    out
}

/// Samples, optionally hardens, persists and solves every cell. Failures
/// become rows with status `error`; records follow grid order
/// (shape, generator, seed, variant) regardless of thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.check()?;
    let mut units = Vec::new();
    for shape in &cfg.shapes {
        let shape = shape.scaled(cfg.scale);
        for &generator in &cfg.generators {
            for k in 0..cfg.seeds as u64 {
                units.push(Unit {
                    shape_label: shape.label(),
                    shape: shape.clone(),
                    generator,
                    seed: cfg.base_seed + k,
                });
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let rows: Vec<Vec<(ResultRecord, Option<String>)>> =
        pool.install(|| units.par_iter().map(|u| cfg.run_unit(u)).collect());
    let mut records = Vec::new();
    let mut labels = Vec::new();
    let mut errors = Vec::new();
    for (unit, rs) in units.iter().zip(rows) {
        for (r, e) in rs {
            if let Some(e) = e {
                errors.push((r.instance_id.clone(), e));
            }
            labels.push(unit.shape_label.clone());
            records.push(r);
        }
    }
    let summary = summarize(&records, &labels);
    if let Some(dir) = &cfg.out_dir {
        write_results(&records, dir.join("results.csv"))?;
        crate::io::write_atomic(&dir.join("summary.csv"), summary_csv(&summary).as_bytes())?;
    }
    Ok(ExperimentReport {
        records,
        summary,
        errors,
    })
}
