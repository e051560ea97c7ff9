use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adaptive-inexact"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn solve_quad_cos(dir: &Path) -> Output {
    run_in(dir, &["solve", "--problem", "quad-cos", "--eps", "1e-4", "--l0", "1", "--delta-u", "0"])
}

#[test]
fn solve_meets_the_criterion_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = solve_quad_cos(dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("stop: criterion-met"));
    assert!(dir.path().join("trace.csv").exists());
    let report = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(report.contains("theorem1_rate"));
}

#[test]
fn holder_run_reports_the_universal_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &["solve", "--problem", "holder-nu-13", "--eps", "1e-3", "--delta-u", "0", "--max-iters", "2000", "--report", "r.json"],
    );
    assert!(matches!(code(&o), 0 | 2));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    for key in ["corollary2_mk_ceiling", "corollary2_checks", "corollary2_rate"] {
        assert_eq!(report[key]["pass"], serde_json::Value::Bool(true), "{key}");
    }
    assert!(stdout(&o).contains("PASS corollary2_mk_ceiling"));
}

#[test]
fn missing_problem_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["solve", "--eps", "1e-4"]);
    assert_eq!(code(&o), 1);
    assert!(!dir.path().join("trace.csv").exists());
}

#[test]
fn unknown_flags_and_problems_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run_in(dir.path(), &["solve", "--bogus"])), 1);
    assert_eq!(code(&run_in(dir.path(), &["solve", "--problem", "nope"])), 1);
    assert_eq!(code(&run_in(dir.path(), &["--help"])), 0);
}

#[test]
fn verify_accepts_a_fresh_trace() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&solve_quad_cos(dir.path())), 0);
    let o = run_in(dir.path(), &["verify", "trace.csv", "--report", "again.json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    let a = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("again.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn verify_rejects_halved_curvature_estimates() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&solve_quad_cos(dir.path())), 0);
    let text = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut out = Vec::new();
    let mut col = None;
    for line in text.lines() {
        if line.starts_with('#') {
            out.push(line.to_string());
        } else if col.is_none() {
            col = line.split(',').position(|c| c == "M_k");
            out.push(line.to_string());
        } else {
            let mut cells: Vec<String> = line.split(',').map(String::from).collect();
            let i = col.unwrap();
            let m: f64 = cells[i].parse().unwrap();
            cells[i] = format!("{:?}", m / 2.0);
            out.push(cells.join(","));
        }
    }
    std::fs::write(dir.path().join("bad.csv"), out.join("\n") + "\n").unwrap();
    let o = run_in(dir.path(), &["verify", "bad.csv"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn verify_rejects_empty_and_malformed_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.csv"), "").unwrap();
    assert_eq!(code(&run_in(dir.path(), &["verify", "empty.csv"])), 1);
    std::fs::write(dir.path().join("junk.csv"), "k,M_k\n0,abc\n").unwrap();
    assert_eq!(code(&run_in(dir.path(), &["verify", "junk.csv"])), 1);
    assert_eq!(code(&run_in(dir.path(), &["verify", "absent.csv"])), 1);
}

#[test]
fn single_cell_sweep_matches_solve() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&solve_quad_cos(dir.path())), 0);
    let o = run_in(
        dir.path(),
        &["sweep", "--problem", "quad-cos", "--eps", "1e-4", "--l0", "1", "--delta-u", "0", "--out", "sw"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let a = std::fs::read(dir.path().join("trace.csv")).unwrap();
    let b = std::fs::read(dir.path().join("sw").join("cell-000.csv")).unwrap();
    assert_eq!(a, b);
    let summary = std::fs::read_to_string(dir.path().join("sw").join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
}

fn summary_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

fn column(path: &Path, name: &str) -> usize {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().position(|h| h == name).unwrap()
}

#[test]
fn nu_sweep_iterations_are_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &["sweep", "--nu", "1/3,1/2,1", "--eps", "1e-3", "--delta-u", "0", "--max-iters", "3000", "--out", "nu"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.path().join("nu").join("summary.csv");
    let (pc, ic) = (column(&path, "problem"), column(&path, "iterations"));
    let rows = summary_rows(&path);
    let iters = |name: &str| -> f64 {
        rows.iter().find(|r| &r[pc] == name).unwrap()[ic].parse().unwrap()
    };
    // Smaller nu needs more iterations, up to a factor of 4.
    let (a, b, c) = (iters("holder-nu-13"), iters("holder-nu-12"), iters("holder-nu-1"));
    assert!(4.0 * a >= b && 4.0 * b >= c, "{a} {b} {c}");
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.ini"),
        "# quad-cos at a loose tolerance\nproblem = quad-cos\neps = 1e-2\ndelta_u = 0\nout = from-config.csv\n",
    )
    .unwrap();
    let o = run_in(dir.path(), &["solve", "--config", "run.ini", "--eps", "1e-4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let trace = std::fs::read_to_string(dir.path().join("from-config.csv")).unwrap();
    assert!(trace.contains("# epsilon=0.0001\n"));
    assert!(trace.contains("# problem=quad-cos\n"));
}

#[test]
fn list_and_oracle_check_cover_the_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["list-problems"]);
    assert_eq!(code(&o), 0);
    let names: Vec<String> = stdout(&o).lines().map(|l| l.split_whitespace().next().unwrap().to_string()).collect();
    assert_eq!(names.len(), 9);
    for name in &names {
        let o = run_in(dir.path(), &["oracle-check", "--problem", name, "--trials", "200"]);
        assert_eq!(code(&o), 0, "{name}: {}", stdout(&o));
        assert!(stdout(&o).starts_with("PASS"));
    }
}

#[test]
fn repeated_solves_write_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "solve", "--problem", "quad-cos-noisy", "--delta-u", "1e-3", "--delta-pu", "1e-4", "--seed", "7",
            "--max-iters", "300", "--out", out,
        ]
    };
    run_in(dir.path(), &args("a.csv"));
    run_in(dir.path(), &args("b.csv"));
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}
