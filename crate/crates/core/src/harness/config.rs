use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::problems::{build, CompositeProblem, ProblemOptions, HOLDER_NAMES};
use crate::prox::ProxSetup;
use crate::solver::SolverConfig;

/// Keys accepted in config files, with `-` as separator.
pub const CONFIG_KEYS: [&str; 14] = [
    "problem",
    "setup",
    "eps",
    "delta-u",
    "delta-pu",
    "l0",
    "x0",
    "max-iters",
    "max-doublings",
    "seed",
    "out",
    "report",
    "nu",
    "out-dir",
];

/// Parses `key = value` lines. `#` and `;` start comments; `_` and `-` are
/// interchangeable in keys; unknown and repeated keys are errors.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Parse(format!(
                "line {}: unknown key '{}'; valid keys: {}",
                i + 1,
                k.trim(),
                CONFIG_KEYS.join(", ")
            )));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Parse(format!("line {}: '{key}' given twice", i + 1)));
        }
    }
    Ok(out)
}

/// A fully specified single run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub problem: String,
    /// `None` selects the problem's own setup.
    pub setup: Option<ProxSetup>,
    pub epsilon: f64,
    pub delta_u: f64,
    pub delta_pu: f64,
    pub l0: f64,
    /// `default`, `center`, or comma-separated coordinates.
    pub x0: String,
    pub max_iters: usize,
    pub max_doublings: usize,
    pub seed: u64,
}

impl RunSpec {
    pub fn new(problem: &str) -> Self {
        RunSpec {
            problem: problem.to_string(),
            setup: None,
            epsilon: 1e-4,
            delta_u: 0.0,
            delta_pu: 0.0,
            l0: 1.0,
            x0: "default".into(),
            max_iters: 10_000,
            max_doublings: 60,
            seed: 0,
        }
    }

    /// Reads a run from merged key-value settings. List-valued keys must
    /// hold a single value.
    pub fn from_settings(map: &BTreeMap<String, String>) -> Result<Self> {
        let problem = match (map.get("problem"), map.get("nu")) {
            (Some(p), _) => p.clone(),
            (None, Some(nu)) => holder_problem_for(parse_nu("nu", nu)?)?.to_string(),
            (None, None) => return Err(Error::Argument("no problem given".into())),
        };
        let mut s = RunSpec::new(&problem);
        for (k, v) in map {
            match k.as_str() {
                "setup" => s.setup = Some(parse_setup(v)?),
                "eps" => s.epsilon = parse_f64(k, v)?,
                "delta-u" => s.delta_u = parse_f64(k, v)?,
                "delta-pu" => s.delta_pu = parse_f64(k, v)?,
                "l0" => s.l0 = parse_f64(k, v)?,
                "x0" => s.x0 = v.clone(),
                "max-iters" => s.max_iters = parse_int(k, v)?,
                "max-doublings" => s.max_doublings = parse_int(k, v)?,
                "seed" => s.seed = parse_int(k, v)?,
                _ => {}
            }
        }
        Ok(s)
    }

    /// Builds the problem, the setup and the solver configuration, checking
    /// every field before anything runs.
    pub fn resolve(&self) -> Result<(CompositeProblem, ProxSetup, SolverConfig)> {
        let problem = build(&self.problem, &ProblemOptions { delta_u: self.delta_u, seed: self.seed })?;
        let setup = self.setup.unwrap_or(problem.setup);
        crate::prox::ProxProblem::supported(setup, &problem.set, &problem.h)?;
        let x0 = problem.resolve_x0(&self.x0)?;
        let config = SolverConfig {
            epsilon: self.epsilon,
            delta_u: self.delta_u,
            delta_pu: self.delta_pu,
            x0,
            l0: self.l0,
            max_outer_iterations: self.max_iters,
            max_inner_doublings: self.max_doublings,
            seed: self.seed,
        };
        Ok((problem, setup, config))
    }
}

pub(crate) fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Parse(format!("'{key}' expects a finite number, got '{v}'")))
}

pub(crate) fn parse_int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse::<T>()
        .map_err(|_| Error::Parse(format!("'{key}' expects a non-negative integer, got '{v}'")))
}

pub(crate) fn parse_setup(v: &str) -> Result<ProxSetup> {
    ProxSetup::from_name(v.trim()).ok_or_else(|| {
        Error::Argument(format!("unknown setup '{v}'; valid setups: euclidean, entropy"))
    })
}

/// Catalog name of the Hölder family member with exponent `nu`.
pub fn holder_problem_for(nu: f64) -> Result<&'static str> {
    HOLDER_NAMES
        .iter()
        .find(|(_, v)| (v - nu).abs() < 1e-6)
        .map(|(n, _)| *n)
        .ok_or_else(|| Error::Argument(format!("no Hölder instance with nu = {nu}; available: 1/3, 1/2, 1")))
}

/// Parses a comma-separated list.
pub fn parse_list<T>(key: &str, v: &str, item: impl Fn(&str, &str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<T> = v.split(',').map(|t| item(key, t.trim())).collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Parse(format!("'{key}' is empty")));
    }
    Ok(items)
}

/// Reads an exponent written as a fraction or a decimal, e.g. `1/3`.
pub fn parse_nu(key: &str, v: &str) -> Result<f64> {
    match v.split_once('/') {
        Some((a, b)) => Ok(parse_f64(key, a)? / parse_f64(key, b)?),
        None => parse_f64(key, v),
    }
}
