use robsel_core::io::write_instance;
use robsel_core::model::{CostVector, ProblemInstance};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn robsel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robsel")).args(args).output().expect("spawn robsel")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_example(dir: &Path) -> String {
    let scenarios = vec![
        CostVector::from_ints(&[1, 5, 3, 4]).unwrap(),
        CostVector::from_ints(&[4, 2, 5, 1]).unwrap(),
    ];
    let inst = ProblemInstance::minmax_discrete(2, scenarios).unwrap();
    let path = dir.join("inst.csv");
    write_instance(&inst, &path).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn gen_writes_instance_and_manifest() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap();
    let o = robsel(&["gen", "--generator", "MM-D-U", "--n", "20", "--p", "11", "--N", "20", "--seed", "7", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut names: Vec<String> = fs::read_dir(d.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names, ["MM-D-U_n20_p11_N20_s7.csv", "MM-D-U_n20_p11_N20_s7.csv.manifest"]);
    let v = robsel(&["validate", d.path().join(&names[0]).to_str().unwrap()]);
    assert!(v.status.success(), "{}", stderr(&v));
}

#[test]
fn gen_count_uses_consecutive_seeds() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap();
    let o = robsel(&["gen", "--generator", "MM-B-1", "--n", "10", "--p", "5", "--gamma", "3", "--seed", "2", "--count", "3", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    for s in 2..5 {
        assert!(d.path().join(format!("MM-B-1_n10_p5_g3_s{s}.csv")).exists());
    }
}

#[test]
fn solve_small_example() {
    let d = tempfile::tempdir().unwrap();
    let path = small_example(d.path());
    let o = robsel(&["solve", &path, "--time-limit", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("status: optimal"), "{s}");
    assert!(s.contains("objective: 5\n"), "{s}");
    assert!(s.contains("solution: 1,4\n"), "{s}");
}

#[test]
fn oracle_and_eval_agree() {
    let d = tempfile::tempdir().unwrap();
    let path = small_example(d.path());
    let o = robsel(&["oracle", &path]);
    assert!(stdout(&o).contains("objective: 5\n"));
    let sol = d.path().join("x.txt");
    fs::write(&sol, "1,4\n").unwrap();
    let e = robsel(&["eval", &path, sol.to_str().unwrap()]);
    assert!(e.status.success(), "{}", stderr(&e));
    assert!(stdout(&e).contains("objective: 5\n"));
    fs::write(&sol, "2,3\n").unwrap();
    let e = robsel(&["eval", &path, sol.to_str().unwrap()]);
    assert!(stdout(&e).contains("objective: 8\n"));
    fs::write(&sol, "0,3\n").unwrap();
    assert_eq!(robsel(&["eval", &path, sol.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn manifest_less_file_needs_layout_flags() {
    let d = tempfile::tempdir().unwrap();
    let path = small_example(d.path());
    fs::remove_file(d.path().join("inst.csv.manifest")).unwrap();
    let o = robsel(&["solve", &path]);
    assert_eq!(o.status.code(), Some(2));
    let o = robsel(&["solve", &path, "--criterion", "MinMaxRegret", "--uncertainty", "Discrete"]);
    assert!(o.status.success(), "{}", stderr(&o));
    // Regret of {1,4}: max(5 − 4, 5 − 3) = 2; {1,2} gives max(6−4, 6−3) = 3.
    assert!(stdout(&o).contains("objective: 2\n"), "{}", stdout(&o));
}

#[test]
fn validate_corrupted_file_reports_line() {
    let d = tempfile::tempdir().unwrap();
    let path = small_example(d.path());
    fs::write(&path, "4,2,2\n1,5,3,4\n4,2,x,1\n").unwrap();
    let o = robsel(&["validate", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn harden_raises_value() {
    let d = tempfile::tempdir().unwrap();
    let path = small_example(d.path());
    let out = d.path().join("h");
    let o = robsel(&["harden", &path, "--b", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let hard = out.join("inst_H1.csv");
    let s = stdout(&robsel(&["oracle", hard.to_str().unwrap()]));
    let v: i64 = s.lines().next().unwrap().trim_start_matches("objective: ").parse().unwrap();
    assert!(v >= 5, "{s}");
    assert!(robsel(&["validate", hard.to_str().unwrap()]).status.success());
}

#[test]
fn bench_config_writes_results() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("exp.toml");
    fs::write(
        &cfg,
        "name = \"tiny\"\ngenerators = [\"MM-D-U\", \"MM-D-1\"]\nseeds = 2\ntime_limit = 5\n\n[[shapes]]\nn = 6\np = 3\nN = 3\n",
    )
    .unwrap();
    let out = d.path().join("out");
    let o = robsel(&["bench", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let results = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 5);
    assert!(out.join("summary.csv").exists());
}

#[test]
fn gen_lists_catalog() {
    let o = robsel(&["gen", "--list"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 31);
    assert!(s.lines().any(|l| l.starts_with("RR-DB-2,n p gamma delta,")), "{s}");
}

#[test]
fn bench_lists_presets() {
    let o = robsel(&["bench", "--list"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 22);
}

#[test]
fn exit_codes() {
    assert_eq!(robsel(&[]).status.code(), Some(1));
    assert_eq!(robsel(&["solve"]).status.code(), Some(1));
    assert_eq!(robsel(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(robsel(&["--help"]).status.code(), Some(0));
    assert_eq!(robsel(&["--version"]).status.code(), Some(0));
    assert_eq!(robsel(&["solve", "/nonexistent/file.csv"]).status.code(), Some(2));
    assert_eq!(
        robsel(&["gen", "--generator", "XX-D-U", "--n", "4", "--p", "2", "--out", "/tmp"]).status.code(),
        Some(2)
    );
}
