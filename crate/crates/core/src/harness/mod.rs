//! Running configured solves and storing their traces and bound reports.

mod config;
mod sweep;
mod trace;

use std::path::Path;

use crate::error::Result;
use crate::problems::CompositeProblem;
use crate::prox::ProxSetup;
use crate::solver::{solve, verify_trace, BoundReport, RunReport};

pub use config::{holder_problem_for, parse_config, parse_list, parse_nu, RunSpec, CONFIG_KEYS};
pub use sweep::{run_sweep, SweepRow, SweepSpec};
pub use trace::{TraceFile, TraceMeta, COLUMNS};

/// Everything produced by one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub problem: CompositeProblem,
    pub setup: ProxSetup,
    pub report: RunReport,
    pub trace: TraceFile,
    /// Bounds recomputed from the trace; empty when nothing was accepted.
    pub bounds: BoundReport,
}

/// Resolves and runs `spec`.
pub fn execute(spec: &RunSpec) -> Result<RunOutput> {
    let (problem, setup, config) = spec.resolve()?;
    let report = solve(&problem, setup, &config)?;
    let trace = TraceFile {
        meta: TraceMeta {
            problem: problem.name.clone(),
            setup: setup.name().to_string(),
            epsilon: config.epsilon,
            delta_u: config.delta_u,
            delta_pu: config.delta_pu,
            l0: config.l0,
            seed: config.seed,
            psi_x0: report.psi_x0,
            psi_star: problem.psi_star,
            curvature: Some(problem.curvature),
            stop_reason: Some(report.stop_reason),
            k_out: report.k_out,
        },
        rows: report.rows(),
    };
    let bounds = verify_saved(&trace)?;
    Ok(RunOutput { problem, setup, report, trace, bounds })
}

/// Recomputes every applicable bound from a stored trace.
pub fn verify_saved(trace: &TraceFile) -> Result<BoundReport> {
    if trace.rows.is_empty() {
        return Ok(BoundReport::default());
    }
    verify_trace(&trace.rows, &trace.meta.run_meta())
}

pub fn write_report(path: &Path, bounds: &BoundReport) -> Result<()> {
    let mut s = serde_json::to_string_pretty(bounds)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<BoundReport> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
