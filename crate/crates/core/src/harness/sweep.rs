use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{holder_problem_for, parse_f64, parse_list, parse_nu, RunSpec};
use super::execute;
use crate::error::{Error, Result};

/// A grid of runs: every combination of problem, `eps`, `delta_u` and
/// `delta_pu`, other settings shared.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub problems: Vec<String>,
    pub eps: Vec<f64>,
    pub delta_u: Vec<f64>,
    pub delta_pu: Vec<f64>,
    pub base: RunSpec,
}

impl SweepSpec {
    /// Reads a sweep from merged settings. `problem`, `nu`, `eps`,
    /// `delta-u` and `delta-pu` take comma-separated lists; `nu` values
    /// select members of the Hölder family.
    pub fn from_settings(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut problems: Vec<String> = match map.get("problem") {
            Some(v) => parse_list("problem", v, |_, t| Ok(t.to_string()))?,
            None => Vec::new(),
        };
        if let Some(v) = map.get("nu") {
            for nu in parse_list("nu", v, parse_nu)? {
                problems.push(holder_problem_for(nu)?.to_string());
            }
        }
        if problems.is_empty() {
            return Err(Error::Argument("no problem given".into()));
        }
        let list = |key: &str, default: f64| -> Result<Vec<f64>> {
            map.get(key).map_or(Ok(vec![default]), |v| parse_list(key, v, parse_f64))
        };
        let mut single = map.clone();
        for k in ["problem", "nu", "eps", "delta-u", "delta-pu"] {
            single.remove(k);
        }
        single.insert("problem".into(), problems[0].clone());
        let base = RunSpec::from_settings(&single)?;
        Ok(SweepSpec {
            problems,
            eps: list("eps", base.epsilon)?,
            delta_u: list("delta-u", base.delta_u)?,
            delta_pu: list("delta-pu", base.delta_pu)?,
            base,
        })
    }

    /// Run specs of every cell, in summary order.
    pub fn cells(&self) -> Vec<RunSpec> {
        let mut out = Vec::new();
        for p in &self.problems {
            for &eps in &self.eps {
                for &du in &self.delta_u {
                    for &dpu in &self.delta_pu {
                        let mut s = self.base.clone();
                        s.problem = p.clone();
                        s.epsilon = eps;
                        s.delta_u = du;
                        s.delta_pu = dpu;
                        out.push(s);
                    }
                }
            }
        }
        out
    }
}

/// One line of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: usize,
    pub problem: String,
    pub eps: f64,
    pub delta_u: f64,
    pub delta_pu: f64,
    /// `ok` or `error`.
    pub status: String,
    pub stop_reason: String,
    pub iterations: usize,
    pub inner_checks: usize,
    pub oracle_calls: usize,
    pub best_gmap_norm: f64,
    pub bounds_pass: bool,
    pub trace: String,
    pub error: String,
}

/// Runs every cell, possibly in parallel, writing `cell-NNN.csv` traces and
/// `summary.csv` into `out_dir`. Cell failures are recorded in the summary.
pub fn run_sweep(spec: &SweepSpec, out_dir: &Path) -> Result<Vec<SweepRow>> {
    std::fs::create_dir_all(out_dir)?;
    let cells = spec.cells();
    let rows: Vec<SweepRow> = cells
        .par_iter()
        .enumerate()
        .map(|(i, cell)| run_cell(i, cell, out_dir))
        .collect();
    let mut w = csv::Writer::from_path(out_dir.join("summary.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(rows)
}

fn run_cell(i: usize, cell: &RunSpec, out_dir: &Path) -> SweepRow {
    let name = format!("cell-{i:03}.csv");
    let path: PathBuf = out_dir.join(&name);
    let mut row = SweepRow {
        cell: i,
        problem: cell.problem.clone(),
        eps: cell.epsilon,
        delta_u: cell.delta_u,
        delta_pu: cell.delta_pu,
        status: "error".into(),
        stop_reason: String::new(),
        iterations: 0,
        inner_checks: 0,
        oracle_calls: 0,
        best_gmap_norm: f64::INFINITY,
        bounds_pass: false,
        trace: String::new(),
        error: String::new(),
    };
    match execute(cell).and_then(|out| out.trace.write(&path).map(|_| out)) {
        Ok(out) => {
            row.status = "ok".into();
            row.stop_reason = out.report.stop_reason.name().into();
            row.iterations = out.report.accepted();
            row.inner_checks = out.report.inner_checks;
            row.oracle_calls = out.report.oracle_calls;
            row.best_gmap_norm = out.report.best_gmap_norm;
            row.bounds_pass = out.bounds.all_passed();
            row.trace = name;
        }
        Err(e) => row.error = e.to_string(),
    }
    row
}
