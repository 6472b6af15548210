//! Instance files in the library's comma separated format, a sidecar
//! manifest carrying what the format cannot express, and results tables.
//!
//! Layouts (one line each):
//!
//! | pairing                         | lines                                  |
//! |---------------------------------|----------------------------------------|
//! | min-max / regret, discrete      | `n,p,N`, N scenarios                   |
//! | two-stage, discrete             | `n,p,N`, C, N scenarios                |
//! | recoverable, discrete           | `n,p,N,Δ`, C, N scenarios              |
//! | regret, interval                | `n,p`, lower, deviations               |
//! | min-max, budgeted               | `n,p,Γ`, lower, deviations             |
//! | two-stage, budgeted             | `n,p,Γ`, C, lower, deviations          |
//! | recoverable, budgeted           | `n,p,Γ,Δ`, C, lower, deviations        |

mod manifest;
mod results;

pub use manifest::{manifest_path, Manifest};
pub use results::{results_csv, write_results, ResultRecord, RESULT_COLUMNS};

use crate::error::{Error, Result};
use crate::model::{
    BudgetMode, CostVector, Criterion, DeltaSemantics, Pairing, ProblemInstance, UncertaintySet,
};
use crate::rational::{self, Rational};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetKind {
    Discrete,
    Interval,
    Budgeted(BudgetMode),
}

/// What the file alone cannot tell: criterion, set kind and Δ reading.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub criterion: Criterion,
    pub set: SetKind,
    pub delta_semantics: Option<DeltaSemantics>,
}

impl Layout {
    pub fn of(inst: &ProblemInstance) -> Layout {
        let set = match &inst.uncertainty {
            UncertaintySet::Discrete { .. } => SetKind::Discrete,
            UncertaintySet::Interval { .. } => SetKind::Interval,
            UncertaintySet::Budgeted { mode, .. } => SetKind::Budgeted(*mode),
        };
        Layout {
            criterion: inst.criterion,
            set,
            delta_semantics: inst.delta_semantics,
        }
    }
}

fn join(v: &[Rational]) -> String {
    v.iter().map(rational::format).collect::<Vec<_>>().join(",")
}

fn check_writable(inst: &ProblemInstance) -> Result<Pairing> {
    inst.validate()?;
    let pairing = inst.pairing()?;
    if pairing == Pairing::MinMaxInterval {
        return Err(Error::UnsupportedPairing(
            "MinMax x Interval has no library file layout".into(),
        ));
    }
    Ok(pairing)
}

/// Canonical file bytes: no trailing separators, `\n` line endings,
/// reduced rationals.
pub fn canonical_string(inst: &ProblemInstance) -> Result<String> {
    check_writable(inst)?;
    let mut head = vec![inst.n.to_string(), inst.p.to_string()];
    let mut body: Vec<String> = Vec::new();
    if let Some(c) = &inst.first_stage_costs {
        body.push(join(c.entries()));
    }
    match &inst.uncertainty {
        UncertaintySet::Discrete { scenarios } => {
            head.push(scenarios.len().to_string());
            body.extend(scenarios.iter().map(|s| join(s.entries())));
        }
        UncertaintySet::Interval { lower, deviation } => {
            body.push(join(lower.entries()));
            body.push(join(deviation.entries()));
        }
        UncertaintySet::Budgeted {
            lower,
            deviation,
            gamma,
            ..
        } => {
            head.push(rational::format(gamma));
            body.push(join(lower.entries()));
            body.push(join(deviation.entries()));
        }
    }
    if let Some(d) = inst.delta {
        head.push(d.to_string());
    }
    let mut out = head.join(",");
    out.push('\n');
    for line in body {
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

/// Hex SHA-256 of the canonical file bytes.
pub fn content_hash(inst: &ProblemInstance) -> Result<String> {
    Ok(hash_bytes(canonical_string(inst)?.as_bytes()))
}

pub(crate) fn hash_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Lines<'a> {
    lines: Vec<&'a str>,
    next: usize,
    integers_only: bool,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, integers_only: bool) -> Result<Self> {
        let mut lines: Vec<&str> = text.split('\n').collect();
        if lines.last() == Some(&"") {
            lines.pop();
        }
        let lines = lines
            .into_iter()
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .collect();
        Ok(Lines {
            lines,
            next: 0,
            integers_only,
        })
    }

    fn line_no(&self) -> usize {
        self.next + 1
    }

    fn fields(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        let no = self.line_no();
        let line = *self
            .lines
            .get(self.next)
            .ok_or_else(|| Error::parse(no, format!("missing {what} line")))?;
        self.next += 1;
        if line.is_empty() {
            return Err(Error::parse(no, format!("empty {what} line")));
        }
        Ok((no, line.split(',').collect()))
    }

    fn number(&self, no: usize, tok: &str) -> Result<Rational> {
        let v = if self.integers_only {
            rational::parse_integer(tok)
        } else {
            rational::parse(tok)
        };
        v.ok_or_else(|| {
            let kind = if self.integers_only { "integer" } else { "number" };
            Error::parse(no, format!("expected {kind}, found {tok:?}"))
        })
    }

    fn vector(&mut self, n: usize, what: &str) -> Result<CostVector> {
        let (no, toks) = self.fields(what)?;
        if toks.len() != n {
            return Err(Error::parse(
                no,
                format!("{what} line has {} entries, expected {n}", toks.len()),
            ));
        }
        let mut v = Vec::with_capacity(n);
        for t in toks {
            let x = self.number(no, t)?;
            if x < Rational::from_integer(0.into()) {
                return Err(Error::parse(no, format!("negative cost {t}")));
            }
            v.push(x);
        }
        CostVector::new(v)
    }

    fn finish(&self) -> Result<()> {
        if self.next < self.lines.len() {
            return Err(Error::parse(
                self.line_no(),
                format!(
                    "unexpected extra line ({} lines declared, {} present)",
                    self.next,
                    self.lines.len()
                ),
            ));
        }
        Ok(())
    }
}

fn count(no: usize, tok: &str, what: &str) -> Result<usize> {
    let v = rational::parse_integer(tok)
        .ok_or_else(|| Error::parse(no, format!("{what} must be a non-negative integer, found {tok:?}")))?;
    v.to_integer()
        .try_into()
        .map_err(|_| Error::parse(no, format!("{what} out of range: {tok}")))
}

/// Parses file text under a known layout.
pub fn parse_instance(text: &str, layout: &Layout, integers_only: bool) -> Result<ProblemInstance> {
    let mut lines = Lines::new(text, integers_only)?;
    let (no, head) = lines.fields("header")?;
    let first_stage = matches!(layout.criterion, Criterion::TwoStage | Criterion::Recoverable);
    let recoverable = layout.criterion == Criterion::Recoverable;
    let arity = match (layout.set, recoverable) {
        (SetKind::Interval, _) => 2,
        (_, true) => 4,
        _ => 3,
    };
    if head.len() != arity {
        return Err(Error::parse(
            no,
            format!("header has {} fields, expected {arity}", head.len()),
        ));
    }
    let n = count(no, head[0], "n")?;
    let p = count(no, head[1], "p")?;
    let delta = if recoverable {
        Some(count(no, head[3], "delta")?)
    } else {
        None
    };
    let first = if first_stage {
        Some(lines.vector(n, "first-stage cost")?)
    } else {
        None
    };
    let uncertainty = match layout.set {
        SetKind::Budgeted(mode) => {
            let gamma = lines.number(no, head[2])?;
            let lower = lines.vector(n, "lower bound")?;
            let deviation = lines.vector(n, "deviation")?;
            UncertaintySet::Budgeted {
                lower,
                deviation,
                gamma,
                mode,
            }
        }
        SetKind::Interval => {
            let lower = lines.vector(n, "lower bound")?;
            let deviation = lines.vector(n, "deviation")?;
            UncertaintySet::Interval { lower, deviation }
        }
        SetKind::Discrete => {
            let big_n = count(no, head[2], "N")?;
            let mut scenarios = Vec::with_capacity(big_n);
            for _ in 0..big_n {
                scenarios.push(lines.vector(n, "scenario")?);
            }
            UncertaintySet::Discrete { scenarios }
        }
    };
    lines.finish()?;
    let recovery = match (delta, layout.delta_semantics) {
        (Some(d), Some(s)) => Some((d, s)),
        (Some(_), None) => {
            return Err(Error::Ambiguous(
                "recoverable file needs a delta semantics".into(),
            ))
        }
        _ => None,
    };
    let inst = ProblemInstance::new(p, layout.criterion, uncertainty, first, recovery)
        .map_err(|e| Error::parse(1, e.to_string()))?;
    if inst.n != n {
        return Err(Error::parse(1, format!("declared n = {n}, rows have {}", inst.n)));
    }
    Ok(inst)
}

/// Layout of a manifest-less file, when the header alone decides it.
fn guess_layout(text: &str) -> Result<Layout> {
    let head = text.split('\n').next().unwrap_or("");
    if head.split(',').count() == 2 {
        return Ok(Layout {
            criterion: Criterion::MinMaxRegret,
            set: SetKind::Interval,
            delta_semantics: None,
        });
    }
    Err(Error::Ambiguous(
        "no manifest; the header does not distinguish discrete from budgeted sets or the budget mode"
            .into(),
    ))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Reads an instance and its manifest. Without a manifest only two-field
/// headers (regret interval) are accepted.
pub fn read_instance(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mpath = manifest_path(path);
    if !mpath.exists() {
        let layout = guess_layout(&text)?;
        return parse_instance(&text, &layout, false);
    }
    let manifest = Manifest::parse(&read_text(&mpath)?)?;
    let integers_only = manifest.provenance.generator.is_some() && manifest.provenance.lineage.is_none();
    let mut inst = parse_instance(&text, &manifest.layout, integers_only)?;
    let actual = hash_bytes(text.as_bytes());
    if manifest.sha256 != actual {
        return Err(Error::Integrity(format!(
            "{}: manifest hash {} does not match file hash {actual}",
            path.display(),
            manifest.sha256
        )));
    }
    inst.provenance = manifest.provenance;
    Ok(inst)
}

/// Reads a file under a caller-supplied layout, ignoring any manifest.
pub fn read_instance_as(path: impl AsRef<Path>, layout: &Layout) -> Result<ProblemInstance> {
    parse_instance(&read_text(path.as_ref())?, layout, false)
}

/// Writes through a temporary file in the same directory and renames.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp: PathBuf = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Writes the instance file and its manifest.
pub fn write_instance(inst: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = canonical_string(inst)?;
    let manifest = Manifest::of(inst, hash_bytes(text.as_bytes()));
    write_atomic(path, text.as_bytes())?;
    write_atomic(&manifest_path(path), manifest.to_string().as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(v: &[i64]) -> CostVector {
        CostVector::from_ints(v).unwrap()
    }

    #[test]
    fn discrete_and_interval_bytes() {
        let d = ProblemInstance::minmax_discrete(2, vec![cv(&[1, 5, 3]), cv(&[4, 2, 1])]).unwrap();
        assert_eq!(canonical_string(&d).unwrap(), "3,2,2\n1,5,3\n4,2,1\n");
        let r = ProblemInstance::regret_interval(1, cv(&[1, 2]), cv(&[3, 0])).unwrap();
        assert_eq!(canonical_string(&r).unwrap(), "2,1\n1,2\n3,0\n");
    }

    #[test]
    fn extra_scenario_line_is_reported() {
        let layout = Layout {
            criterion: Criterion::MinMax,
            set: SetKind::Discrete,
            delta_semantics: None,
        };
        let err = parse_instance("3,2,2\n1,5,3\n4,2,1\n1,1,1\n", &layout, true).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        let err = parse_instance("3,2,2\n1,5,3\n4,x,1\n", &layout, true).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_instance("3,2,2\n1,5,3\n4,2\n", &layout, true).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }
}
