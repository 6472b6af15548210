use super::{Layout, SetKind};
use crate::error::{Error, Result};
use crate::model::{BudgetMode, Criterion, DeltaSemantics, HiroLineage, ProblemInstance, Provenance};
use crate::rational;
use crate::samplers::GeneratorId;
use std::fmt;
use std::path::{Path, PathBuf};

/// `inst.csv` → `inst.csv.manifest`.
pub fn manifest_path(path: impl AsRef<Path>) -> PathBuf {
    let mut s = path.as_ref().as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

/// Sidecar `key=value` record next to an instance file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub layout: Layout,
    pub provenance: Provenance,
    /// Hex SHA-256 of the instance file bytes.
    pub sha256: String,
}

const FORMAT: &str = "1";

impl Manifest {
    pub fn of(inst: &ProblemInstance, sha256: String) -> Self {
        Manifest {
            layout: Layout::of(inst),
            provenance: inst.provenance.clone(),
            sha256,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut criterion = None;
        let mut set = None;
        let mut budget_mode = None;
        let mut semantics = None;
        let mut sha = None;
        let mut prov = Provenance::default();
        let mut lin: Option<HiroLineage> = None;
        for (k, raw) in text.lines().enumerate() {
            let no = k + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(no, format!("manifest line without '=': {line:?}")))?;
            let bad = |what: &str| Error::parse(no, format!("invalid {what} {value:?}"));
            match key {
                "format" if value == FORMAT => {}
                "format" => return Err(bad("format version")),
                "criterion" => criterion = Some(Criterion::from_name(value).ok_or_else(|| bad("criterion"))?),
                "uncertainty" => set = Some(value.to_string()),
                "budget_mode" => budget_mode = Some(BudgetMode::from_name(value).ok_or_else(|| bad("budget mode"))?),
                "delta_semantics" => {
                    semantics = Some(DeltaSemantics::from_name(value).ok_or_else(|| bad("delta semantics"))?)
                }
                "generator" => prov.generator = Some(GeneratorId::parse(value).ok_or_else(|| bad("generator"))?),
                "seed" => prov.seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "sha256" => sha = Some(value.to_string()),
                k if k.starts_with("hiro.") => {
                    let l = lin.get_or_insert_with(HiroLineage::default);
                    match &k[5..] {
                        "parent" => l.parent_hash = value.to_string(),
                        "b" => l.b = rational::parse(value).ok_or_else(|| bad("budget"))?,
                        "mode" => l.mode = value.to_string(),
                        "iterations" => l.iterations = value.parse().map_err(|_| bad("iteration count"))?,
                        "note" => l.notes.push(value.to_string()),
                        _ => return Err(Error::parse(no, format!("unknown manifest key {key:?}"))),
                    }
                }
                _ => return Err(Error::parse(no, format!("unknown manifest key {key:?}"))),
            }
        }
        prov.lineage = lin;
        let missing = |k: &str| Error::Integrity(format!("manifest lacks {k}"));
        let criterion = criterion.ok_or_else(|| missing("criterion"))?;
        let set = match set.as_deref() {
            Some("Discrete") => SetKind::Discrete,
            Some("Interval") => SetKind::Interval,
            Some("Budgeted") => SetKind::Budgeted(
                budget_mode.ok_or_else(|| Error::Ambiguous("manifest lacks budget_mode".into()))?,
            ),
            Some(other) => return Err(Error::Integrity(format!("unknown uncertainty {other:?}"))),
            None => return Err(missing("uncertainty")),
        };
        Ok(Manifest {
            layout: Layout {
                criterion,
                set,
                delta_semantics: semantics,
            },
            provenance: prov,
            sha256: sha.ok_or_else(|| missing("sha256"))?,
        })
    }
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "format={FORMAT}")?;
        writeln!(f, "criterion={}", self.layout.criterion.name())?;
        match self.layout.set {
            SetKind::Discrete => writeln!(f, "uncertainty=Discrete")?,
            SetKind::Interval => writeln!(f, "uncertainty=Interval")?,
            SetKind::Budgeted(m) => {
                writeln!(f, "uncertainty=Budgeted")?;
                writeln!(f, "budget_mode={}", m.name())?;
            }
        }
        if let Some(s) = self.layout.delta_semantics {
            writeln!(f, "delta_semantics={}", s.name())?;
        }
        if let Some(g) = &self.provenance.generator {
            writeln!(f, "generator={g}")?;
        }
        if let Some(s) = self.provenance.seed {
            writeln!(f, "seed={s}")?;
        }
        if let Some(l) = &self.provenance.lineage {
            writeln!(f, "hiro.parent={}", l.parent_hash)?;
            writeln!(f, "hiro.b={}", rational::format(&l.b))?;
            writeln!(f, "hiro.mode={}", l.mode)?;
            writeln!(f, "hiro.iterations={}", l.iterations)?;
            for n in &l.notes {
                writeln!(f, "hiro.note={}", n.replace('\n', " "))?;
            }
        }
        writeln!(f, "sha256={}", self.sha256)
    }
}
