use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adaptive_inexact::harness::{
    self, parse_config, run_sweep, verify_saved, write_report, RunSpec, SweepSpec, TraceFile,
};
use adaptive_inexact::oracle::oracle_contract_check;
use adaptive_inexact::problems::{build, catalog, ProblemOptions};
use adaptive_inexact::solver::{stationarity_residual, BoundReport, StopReason};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

/// Adaptive gradient method for composite problems with inexact oracles.
#[derive(Parser, Debug)]
#[command(name = "adaptive-inexact", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the solver once; exit 0 when the stopping criterion is met, 2 when a cap stops it.
    Solve(SolveArgs),
    /// Recompute every bound from a saved trace; exit 0 iff all pass.
    Verify(VerifyArgs),
    /// Run a grid of solves and write a summary table.
    Sweep(SweepArgs),
    /// Print the problem catalog.
    ListProblems,
    /// Check the oracle inequalities of a catalog problem against its ground truth.
    OracleCheck(OracleCheckArgs),
}

/// Settings shared by `solve` and `sweep`; flags override the config file.
#[derive(Args, Debug, Default)]
struct RunFlags {
    /// Flat `key = value` file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    /// euclidean or entropy; defaults to the problem's own setup.
    #[arg(long)]
    setup: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long = "delta-u")]
    delta_u: Option<String>,
    #[arg(long = "delta-pu")]
    delta_pu: Option<String>,
    #[arg(long)]
    l0: Option<String>,
    /// default, center, or comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long = "max-iters")]
    max_iters: Option<String>,
    #[arg(long = "max-doublings")]
    max_doublings: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

impl RunFlags {
    fn settings(&self, extra: &[(&str, &Option<String>)]) -> Result<BTreeMap<String, String>> {
        let mut map = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        let flags = [
            ("problem", &self.problem),
            ("setup", &self.setup),
            ("eps", &self.eps),
            ("delta-u", &self.delta_u),
            ("delta-pu", &self.delta_pu),
            ("l0", &self.l0),
            ("x0", &self.x0),
            ("max-iters", &self.max_iters),
            ("max-doublings", &self.max_doublings),
            ("seed", &self.seed),
        ];
        for (k, v) in flags.iter().chain(extra) {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        }
        Ok(map)
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    run: RunFlags,
    /// Trace file to write.
    #[arg(long)]
    out: Option<String>,
    /// Bound report to write.
    #[arg(long)]
    report: Option<String>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Trace written by `solve`.
    trace: PathBuf,
    /// Also write the recomputed bounds as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Settings; `problem`, `eps`, `delta-u` and `delta-pu` take comma lists.
    #[command(flatten)]
    run: RunFlags,
    /// Hölder exponents; each selects a member of the Hölder family.
    #[arg(long)]
    nu: Option<String>,
    /// Output directory for cell traces and summary.csv.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct OracleCheckArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Uncontrolled error of noise-wrapped problems.
    #[arg(long = "delta-u", default_value_t = 1e-3)]
    delta_u: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::ListProblems => cmd_list(),
        Command::OracleCheck(a) => cmd_oracle_check(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn print_bounds(bounds: &BoundReport) {
    for (name, c) in &bounds.checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {name}: observed {:e} <= bound {:e}", c.observed, c.bound_value);
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<u8> {
    let map = a.run.settings(&[("out", &a.out), ("report", &a.report)])?;
    let spec = RunSpec::from_settings(&map)?;
    let out_path = PathBuf::from(map.get("out").map_or("trace.csv", String::as_str));
    let report_path = PathBuf::from(map.get("report").map_or("report.json", String::as_str));
    // Fail on bad settings before anything runs.
    let (problem, setup, _) = spec.resolve()?;
    let out = harness::execute(&spec)?;
    out.trace.write(&out_path).with_context(|| format!("writing {}", out_path.display()))?;
    write_report(&report_path, &out.bounds).with_context(|| format!("writing {}", report_path.display()))?;

    let r = &out.report;
    println!("problem {} ({} setup)", problem.name, setup.name());
    println!("stop: {}", r.stop_reason.name());
    println!("accepted iterations: {}, inner checks: {}, oracle calls: {}", r.accepted(), r.inner_checks, r.oracle_calls);
    match r.k_out {
        Some(k) => println!("K = {k}, best gradient-mapping norm {:e}", r.best_gmap_norm),
        None => println!("no iteration was accepted"),
    }
    let coords: Vec<String> = r.x_out.iter().map(|v| format!("{v}")).collect();
    println!("x_out = [{}]", coords.join(", "));
    if let Some(truth) = &problem.truth {
        if let Ok(res) = stationarity_residual(&r.x_out, &truth.gradient(&r.x_out), &problem.set, &problem.h) {
            println!("stationarity residual {res:e}");
        }
    }
    print_bounds(&out.bounds);
    Ok(if r.stop_reason == StopReason::CriterionMet { 0 } else { 2 })
}

fn cmd_verify(a: &VerifyArgs) -> Result<u8> {
    let trace = TraceFile::read(&a.trace).with_context(|| format!("reading {}", a.trace.display()))?;
    if trace.rows.is_empty() {
        bail!("{} has no accepted iterations to verify", a.trace.display());
    }
    let bounds = verify_saved(&trace)?;
    print_bounds(&bounds);
    if let Some(p) = &a.report {
        write_report(p, &bounds)?;
    }
    Ok(if bounds.all_passed() { 0 } else { 1 })
}

fn cmd_sweep(a: &SweepArgs) -> Result<u8> {
    let map = a.run.settings(&[("nu", &a.nu), ("out-dir", &a.out)])?;
    let spec = SweepSpec::from_settings(&map)?;
    for cell in spec.cells() {
        cell.resolve().with_context(|| format!("cell for problem {}", cell.problem))?;
    }
    let dir = PathBuf::from(map.get("out-dir").map_or("sweep", String::as_str));
    let rows = run_sweep(&spec, &dir)?;
    for r in &rows {
        if r.status == "ok" {
            println!(
                "cell {:3} {} eps={} delta_u={} delta_pu={}: {} after {} iterations, best {:e}, bounds {}",
                r.cell,
                r.problem,
                r.eps,
                r.delta_u,
                r.delta_pu,
                r.stop_reason,
                r.iterations,
                r.best_gmap_norm,
                if r.bounds_pass { "pass" } else { "fail" }
            );
        } else {
            println!("cell {:3} {}: error {}", r.cell, r.problem, r.error);
        }
    }
    println!("summary written to {}", Path::new(&dir).join("summary.csv").display());
    Ok(if rows.iter().all(|r| r.status == "ok") { 0 } else { 1 })
}

fn cmd_list() -> Result<u8> {
    for p in catalog() {
        println!(
            "{:18} {:9} dim {}  {:?} oracle  {}",
            p.name,
            p.setup.name(),
            p.dim(),
            p.oracle_kind,
            p.description
        );
    }
    Ok(0)
}

fn cmd_oracle_check(a: &OracleCheckArgs) -> Result<u8> {
    let p = build(&a.problem, &ProblemOptions { delta_u: a.delta_u, seed: a.seed })?;
    let Some(truth) = p.truth.clone() else {
        bail!("problem {} has no ground truth to check against", p.name);
    };
    let model = p.curvature;
    let r = oracle_contract_check(
        p.oracle.as_ref(),
        truth.as_ref(),
        &p.set,
        p.setup.norm_kind(),
        &|d| model.l_of_delta(d),
        a.trials,
        a.seed,
    )?;
    let verdict = if r.passed() { "PASS" } else { "FAIL" };
    println!(
        "{verdict} {}: {} of {} trials violate the oracle inequalities, worst slack {:e}",
        p.name, r.failures, r.trials, r.worst_slack
    );
    Ok(if r.passed() { 0 } else { 1 })
}
