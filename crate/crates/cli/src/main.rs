use clap::{Args, Parser, Subcommand};
use robsel_core::bench::{self, run_experiment, summary_csv, ExperimentConfig};
use robsel_core::formulations::solve_formulation;
use robsel_core::hiro::{harden, HiroConfig, HiroMode};
use robsel_core::io::{self, read_instance, read_instance_as, write_instance, Layout, SetKind};
use robsel_core::milp::SolverConfig;
use robsel_core::model::{
    brute_force_robust_opt, evaluate_robust, BruteForceLimits, BudgetMode, Criterion, DeltaSemantics, ProblemInstance,
    SelectionSolution, SolutionRole,
};
use robsel_core::rational::{self, Rational};
use robsel_core::samplers::{catalog, check_sampler_invariants, sample_instance, GeneratorId, ShapeParams};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

/// Robust selection instances: sample, harden, solve, evaluate.
#[derive(Parser)]
#[command(name = "robsel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample instances with a generator.
    Gen(GenArgs),
    /// Perturb instances to raise their robust optimum.
    Harden(HardenArgs),
    /// Solve an instance with the compact formulation.
    Solve(SolveArgs),
    /// Robust value of a given solution.
    Eval(EvalArgs),
    /// Exhaustive robust optimum (small n only).
    Oracle(OracleArgs),
    /// Run an experiment config or preset.
    Bench(BenchArgs),
    /// Check files, manifests and sampler invariants.
    Validate(ValidateArgs),
}

/// For files without a manifest.
#[derive(Args, Clone)]
struct LayoutArgs {
    /// MinMax, MinMaxRegret, TwoStage or Recoverable.
    #[arg(long)]
    criterion: Option<String>,
    /// Discrete, Interval or Budgeted.
    #[arg(long, requires = "criterion")]
    uncertainty: Option<String>,
    /// ContinuousItems, DiscreteItems or VariableBudget.
    #[arg(long)]
    budget_mode: Option<String>,
    /// KeptAtLeast or ChangedAtMost.
    #[arg(long)]
    delta_semantics: Option<String>,
}

#[derive(Args)]
struct GenArgs {
    /// Print the generator catalog and exit.
    #[arg(long)]
    list: bool,
    #[arg(long, required_unless_present = "list")]
    generator: Option<String>,
    #[arg(long, required_unless_present = "list")]
    n: Option<usize>,
    #[arg(long, required_unless_present = "list")]
    p: Option<usize>,
    #[arg(long = "N")]
    big_n: Option<usize>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long)]
    delta_semantics: Option<String>,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of consecutive seeds.
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, required_unless_present = "list")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HardenArgs {
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    #[arg(long)]
    b: String,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, default_value = "100")]
    c_max: String,
    /// Seconds per instance.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    layout: LayoutArgs,
}

#[derive(Args)]
struct SolveArgs {
    path: PathBuf,
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
    #[command(flatten)]
    layout: LayoutArgs,
}

#[derive(Args)]
struct EvalArgs {
    path: PathBuf,
    /// One line of comma-separated 1-based item indices.
    solution: PathBuf,
    #[command(flatten)]
    layout: LayoutArgs,
}

#[derive(Args)]
struct OracleArgs {
    path: PathBuf,
    #[arg(long, default_value_t = 16)]
    max_n: usize,
    #[command(flatten)]
    layout: LayoutArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML experiment config.
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Full-size grid instead of desk scale (presets only).
    #[arg(long)]
    full: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// List preset names.
    #[arg(long)]
    list: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    #[command(flatten)]
    layout: LayoutArgs,
}

type Res<T> = Result<T, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn named<T>(what: &str, v: &str, f: impl Fn(&str) -> Option<T>) -> Res<T> {
    f(v).ok_or_else(|| format!("unknown {what} {v:?}"))
}

fn number(what: &str, v: &str) -> Res<Rational> {
    rational::parse(v).ok_or_else(|| format!("invalid {what} {v:?}"))
}

impl LayoutArgs {
    fn layout(&self) -> Res<Option<Layout>> {
        let Some(c) = &self.criterion else {
            return Ok(None);
        };
        let criterion = named("criterion", c, Criterion::from_name)?;
        let set = match self.uncertainty.as_deref().unwrap_or("Discrete") {
            "Discrete" => SetKind::Discrete,
            "Interval" => SetKind::Interval,
            "Budgeted" => {
                let m = self.budget_mode.as_deref().ok_or("Budgeted needs --budget-mode")?;
                SetKind::Budgeted(named("budget mode", m, BudgetMode::from_name)?)
            }
            other => return Err(format!("unknown uncertainty {other:?}")),
        };
        let delta_semantics = self
            .delta_semantics
            .as_deref()
            .map(|d| named("delta semantics", d, DeltaSemantics::from_name))
            .transpose()?;
        Ok(Some(Layout {
            criterion,
            set,
            delta_semantics,
        }))
    }

    fn read(&self, path: &Path) -> Res<ProblemInstance> {
        let inst = match self.layout()? {
            Some(l) => read_instance_as(path, &l),
            None => read_instance(path),
        };
        inst.map_err(|e| format!("{}: {e}", path.display()))
    }
}

fn secs(v: Option<f64>) -> Res<Option<Duration>> {
    v.map(|s| Duration::try_from_secs_f64(s).map_err(|_| format!("invalid time limit {s}"))).transpose()
}

fn gen(a: GenArgs) -> Res<()> {
    if a.list {
        println!("id,required,invariants");
        for e in catalog() {
            println!("{},{},\"{}\"", e.id, e.required.join(" "), e.invariants);
        }
        return Ok(());
    }
    let (Some(name), Some(n), Some(p), Some(out)) = (&a.generator, a.n, a.p, &a.out) else {
        unreachable!("clap enforces the required flags")
    };
    let g = named("generator", name, GeneratorId::parse)?;
    for seed in a.seed..a.seed + a.count {
        let mut sp = ShapeParams::new(n, p, seed);
        sp.scenarios = a.big_n;
        sp.gamma = a.gamma.as_deref().map(|v| number("gamma", v)).transpose()?;
        sp.delta = a.delta;
        sp.delta_semantics = a
            .delta_semantics
            .as_deref()
            .map(|d| named("delta semantics", d, DeltaSemantics::from_name))
            .transpose()?;
        let inst = sample_instance(g, &sp).map_err(err)?;
        let shape = bench::Shape {
            n,
            p,
            big_n: a.big_n,
            gamma: sp.gamma.clone(),
            delta: a.delta,
            delta_semantics: None,
        };
        let path = out.join(format!("{g}_{}_s{seed}.csv", shape.label()));
        write_instance(&inst, &path).map_err(err)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn harden_cmd(a: HardenArgs) -> Res<()> {
    let mut cfg = HiroConfig::new(number("budget", &a.b)?);
    cfg.c_max = number("c_max", &a.c_max)?;
    cfg.time_limit = secs(a.time_limit)?;
    cfg.max_iterations = a.max_iterations;
    cfg.mode = a.mode.as_deref().map(|m| named("mode", m, HiroMode::from_name)).transpose()?;
    for path in &a.paths {
        let inst = a.layout.read(path)?;
        let (out, trace) = harden(&inst, &cfg).map_err(|e| format!("{}: {e}", path.display()))?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let dest = a.out.join(format!("{stem}_H{}.csv", a.b.replace('/', "over")));
        write_instance(&out, &dest).map_err(err)?;
        println!(
            "{}: {} -> {} (iterations {}, converged {})",
            dest.display(),
            rational::format(&trace.initial_value),
            rational::format(&trace.best_value),
            trace.iterations.len(),
            trace.converged
        );
    }
    Ok(())
}

fn one_based(x: &SelectionSolution) -> String {
    x.indices().iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

fn solve(a: SolveArgs) -> Res<()> {
    let inst = a.layout.read(&a.path)?;
    let cfg = SolverConfig {
        time_limit: secs(a.time_limit)?,
        node_limit: a.node_limit,
        ..SolverConfig::default()
    };
    let out = solve_formulation(&inst, &cfg).map_err(err)?;
    println!("status: {}", out.milp.status.as_str());
    match &out.objective {
        Some(v) => println!("objective: {}", rational::format(v)),
        None => println!("objective: none"),
    }
    if let Some(b) = out.milp.best_bound {
        println!("bound: {b}");
    }
    println!("nodes: {}", out.milp.nodes);
    println!("time: {:.3}", out.milp.wall_time.as_secs_f64());
    if let Some(x) = &out.solution {
        println!("solution: {}", one_based(x));
    }
    Ok(())
}

fn read_solution(path: &Path, inst: &ProblemInstance) -> Res<SelectionSolution> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let line = text.lines().next().unwrap_or("").trim();
    let mut idx = Vec::new();
    for tok in line.split(',').filter(|t| !t.trim().is_empty()) {
        let i: usize = tok.trim().parse().map_err(|_| format!("{}: invalid index {tok:?}", path.display()))?;
        if i == 0 || i > inst.n {
            return Err(format!("{}: index {i} outside 1..={}", path.display(), inst.n));
        }
        idx.push(i - 1);
    }
    let role = if inst.criterion == Criterion::TwoStage {
        SolutionRole::PartialFirstStage
    } else {
        SolutionRole::Full
    };
    Ok(SelectionSolution::from_indices(inst.n, &idx, role))
}

fn eval(a: EvalArgs) -> Res<()> {
    let inst = a.layout.read(&a.path)?;
    let x = read_solution(&a.solution, &inst)?;
    let rep = evaluate_robust(&x, &inst).map_err(err)?;
    println!("objective: {}", rational::format(&rep.objective));
    println!("witness: {:?}", rep.witness.kind);
    let realized: Vec<String> = rep.witness.realized.entries().iter().map(rational::format).collect();
    println!("realized: {}", realized.join(","));
    if let Some(y) = &rep.second_stage {
        println!("second_stage: {}", one_based(y));
    }
    Ok(())
}

fn oracle(a: OracleArgs) -> Res<()> {
    let inst = a.layout.read(&a.path)?;
    let (x, v) = brute_force_robust_opt(&inst, BruteForceLimits { max_n: a.max_n }).map_err(err)?;
    println!("objective: {}", rational::format(&v));
    println!("solution: {}", one_based(&x));
    Ok(())
}

fn bench_cmd(a: BenchArgs) -> Res<()> {
    if a.list {
        for p in bench::PRESETS {
            println!("{p}");
        }
        return Ok(());
    }
    let mut cfg = match (&a.config, &a.preset) {
        (Some(path), _) => ExperimentConfig::load(path).map_err(err)?,
        (None, Some(name)) => {
            let c = bench::preset(name).map_err(err)?;
            if a.full {
                c
            } else {
                c.desk()
            }
        }
        (None, None) => return Err("bench needs a config file or --preset".into()),
    };
    if let Some(o) = a.out {
        cfg.out_dir = Some(o);
    }
    if let Some(t) = a.threads {
        cfg.threads = t;
    }
    if cfg.out_dir.is_none() {
        return Err("bench needs --out or out_dir in the config".into());
    }
    let rep = run_experiment(&cfg).map_err(err)?;
    for (id, e) in &rep.errors {
        eprintln!("{id}: {e}");
    }
    print!("{}", summary_csv(&rep.summary));
    println!(
        "{} records written to {}",
        rep.records.len(),
        cfg.out_dir.as_ref().unwrap().join("results.csv").display()
    );
    Ok(())
}

fn validate(a: ValidateArgs) -> Res<()> {
    let mut bad = 0;
    for path in &a.paths {
        let res = a.layout.read(path).and_then(|inst| {
            if inst.provenance.generator.is_some() && inst.provenance.lineage.is_none() {
                check_sampler_invariants(&inst).map_err(|v| {
                    let msgs: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                    format!("{}: sampler invariants violated: {}", path.display(), msgs.join("; "))
                })?;
            }
            io::content_hash(&inst).map_err(err)
        });
        match res {
            Ok(h) => println!("{}: ok {h}", path.display()),
            Err(e) => {
                eprintln!("{e}");
                bad += 1;
            }
        }
    }
    if bad > 0 {
        return Err(format!("{bad} of {} files invalid", a.paths.len()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Harden(a) => harden_cmd(a),
        Command::Solve(a) => solve(a),
        Command::Eval(a) => eval(a),
        Command::Oracle(a) => oracle(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Validate(a) => validate(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
