use super::write_atomic;
use crate::error::Result;
use crate::rational::{self, Rational};
use std::path::Path;

pub const RESULT_COLUMNS: [&str; 14] = [
    "instance_id",
    "generator",
    "n",
    "p",
    "N",
    "gamma",
    "delta",
    "b",
    "hiro_mode",
    "status",
    "objective",
    "wall_time_s",
    "nodes",
    "seed",
];

/// One solved instance. Optional fields print as empty cells.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRecord {
    pub instance_id: String,
    pub generator: String,
    pub n: usize,
    pub p: usize,
    pub big_n: Option<usize>,
    pub gamma: Option<Rational>,
    pub delta: Option<usize>,
    pub b: Option<Rational>,
    pub hiro_mode: Option<String>,
    pub status: String,
    pub objective: Option<Rational>,
    pub wall_time_s: f64,
    pub nodes: u64,
    pub seed: Option<u64>,
}

fn cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn opt_rat(v: &Option<Rational>) -> String {
    v.as_ref().map(rational::format).unwrap_or_default()
}

impl ResultRecord {
    pub fn cells(&self) -> Vec<String> {
        vec![
            cell(&self.instance_id),
            cell(&self.generator),
            self.n.to_string(),
            self.p.to_string(),
            opt(&self.big_n),
            opt_rat(&self.gamma),
            opt(&self.delta),
            opt_rat(&self.b),
            cell(self.hiro_mode.as_deref().unwrap_or("")),
            cell(&self.status),
            opt_rat(&self.objective),
            format!("{:.3}", self.wall_time_s),
            self.nodes.to_string(),
            opt(&self.seed),
        ]
    }
}

/// Header plus one line per record.
pub fn results_csv(records: &[ResultRecord]) -> String {
    let mut out = RESULT_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        out.push_str(&r.cells().join(","));
        out.push('\n');
    }
    out
}

pub fn write_results(records: &[ResultRecord], path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), results_csv(records).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn header_and_time_precision() {
        assert_eq!(results_csv(&[]).lines().count(), 1);
        let r = ResultRecord {
            instance_id: "a".into(),
            generator: "MM-D-U".into(),
            n: 4,
            p: 2,
            big_n: Some(3),
            gamma: None,
            delta: None,
            b: Some(int(1)),
            hiro_mode: None,
            status: "optimal".into(),
            objective: Some(int(5)),
            wall_time_s: 0.12345,
            nodes: 7,
            seed: Some(9),
        };
        let s = results_csv(&[r]);
        assert_eq!(s.lines().nth(1).unwrap(), "a,MM-D-U,4,2,3,,,1,,optimal,5,0.123,7,9");
    }
}
