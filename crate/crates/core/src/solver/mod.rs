//! Adaptive gradient method for composite problems with an inexact oracle
//! and an inexact prox-mapping.
//!
//! Each outer iteration tries `M = L_k, 2 L_k, 4 L_k, ...`. For every trial
//! the oracle is queried at `x_k` with `delta_c = eps / (20 M)`, the prox
//! step with `gamma = 1/M` gives a candidate `w`, and the candidate is kept
//! once
//!
//! ```text
//! f~(w) <= f~(x) + <g~(x), w - x> + M/2 ||w - x||^2 + eps/(10 M) + 2 delta_u
//! ```
//!
//! On acceptance `x_{k+1} = w` and `L_{k+1} = M / 2`. The run stops as soon
//! as the smallest `||M_i (x_i - x_{i+1})||` seen so far is at most `eps`.
//! The solver never sees the oracle's curvature model.

mod bounds;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::oracle::FirstOrderOracle;
use crate::problems::CompositeProblem;
use crate::prox::{ProxProblem, ProxSetup};
use crate::rng::derive_seed;
use crate::space::{check_point, NormKind, Point};

pub use bounds::{
    corollary1_rate, corollary2_checks, corollary2_rate, corollary_bounds, holder_m_ceiling, inner_check_bound,
    stationarity_residual, theorem1_bound, verify_trace, BoundCheck, BoundReport, RunMeta,
};

/// Parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Target on `||M_i (x_i - x_{i+1})||`.
    pub epsilon: f64,
    /// Upper estimate of the oracle's uncontrolled error.
    pub delta_u: f64,
    /// Uncontrolled error injected into every prox step.
    pub delta_pu: f64,
    pub x0: Point,
    /// Initial estimate of the local curvature.
    pub l0: f64,
    pub max_outer_iterations: usize,
    pub max_inner_doublings: usize,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(x0: Point, epsilon: f64) -> Self {
        SolverConfig {
            epsilon,
            delta_u: 0.0,
            delta_pu: 0.0,
            x0,
            l0: 1.0,
            max_outer_iterations: 10_000,
            max_inner_doublings: 60,
            seed: 0,
        }
    }

    fn validate(&self, oracle: &dyn FirstOrderOracle) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return argument(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.l0 > 0.0 && self.l0.is_finite()) {
            return argument(format!("L0 must be positive, got {}", self.l0));
        }
        for (name, v) in [("delta_u", self.delta_u), ("delta_pu", self.delta_pu)] {
            if !(v >= 0.0 && v.is_finite()) {
                return argument(format!("{name} must be non-negative, got {v}"));
            }
        }
        if self.delta_u < oracle.uncontrolled_error() * (1.0 - 1e-12) {
            return argument(format!(
                "delta_u = {} is below the oracle's uncontrolled error {}",
                self.delta_u,
                oracle.uncontrolled_error()
            ));
        }
        if self.max_outer_iterations == 0 || self.max_inner_doublings == 0 {
            return argument("iteration caps must be at least 1");
        }
        check_point(&self.x0, oracle.dim(), "x0")?;
        oracle.feasible_set().require(&self.x0, "x0")
    }
}

/// One accepted outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// Number of descent checks in this iteration.
    pub i_k: usize,
    /// Accepted curvature estimate.
    pub m_k: f64,
    pub delta_c_k: f64,
    pub f_tilde_x: f64,
    pub f_tilde_w: f64,
    /// `M_k (x_k - x_{k+1})`.
    pub gmap: Point,
    pub gmap_norm: f64,
    /// `psi(x_k)` when the problem carries ground truth.
    pub psi_at_x: Option<f64>,
    pub oracle_calls_cum: usize,
    pub prox_calls_cum: usize,
}

/// The part of an [`IterationRecord`] stored in trace files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub i_k: usize,
    #[serde(rename = "M_k")]
    pub m_k: f64,
    pub delta_c_k: f64,
    pub f_tilde_x: f64,
    pub f_tilde_w: f64,
    pub gmap_norm: f64,
    pub oracle_calls_cum: usize,
    pub prox_calls_cum: usize,
}

impl IterationRecord {
    pub fn row(&self) -> TraceRow {
        TraceRow {
            k: self.k,
            i_k: self.i_k,
            m_k: self.m_k,
            delta_c_k: self.delta_c_k,
            f_tilde_x: self.f_tilde_x,
            f_tilde_w: self.f_tilde_w,
            gmap_norm: self.gmap_norm,
            oracle_calls_cum: self.oracle_calls_cum,
            prox_calls_cum: self.prox_calls_cum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    CriterionMet,
    IterationCap,
    InnerCap,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::CriterionMet => "criterion-met",
            StopReason::IterationCap => "iteration-cap",
            StopReason::InnerCap => "inner-cap",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [StopReason::CriterionMet, StopReason::IterationCap, StopReason::InnerCap]
            .into_iter()
            .find(|r| r.name() == s)
    }
}

/// Result of [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub trace: Vec<IterationRecord>,
    /// First index attaining the smallest gradient-mapping norm; `None` when
    /// no iteration was accepted.
    pub k_out: Option<usize>,
    /// `x_{K+1}`, or `x0` when no iteration was accepted.
    pub x_out: Point,
    pub best_gmap_norm: f64,
    pub stop_reason: StopReason,
    pub oracle_calls: usize,
    pub prox_calls: usize,
    pub inner_checks: usize,
    /// `psi(x0)` when the problem carries ground truth.
    pub psi_x0: Option<f64>,
}

impl RunReport {
    pub fn rows(&self) -> Vec<TraceRow> {
        self.trace.iter().map(IterationRecord::row).collect()
    }

    pub fn accepted(&self) -> usize {
        self.trace.len()
    }
}

/// Acceptance test of a trial step, with `||.||` the primal norm.
#[allow(clippy::too_many_arguments)]
pub fn descent_check(
    f_w: f64,
    f_x: f64,
    g_x: &Point,
    w: &Point,
    x: &Point,
    m: f64,
    epsilon: f64,
    delta_u: f64,
    norm: NormKind,
) -> bool {
    let d = w - x;
    let r = norm.norm(&d);
    f_w <= f_x + g_x.dot(&d) + 0.5 * m * r * r + epsilon / (10.0 * m) + 2.0 * delta_u
}

/// Runs the method on `problem` with prox setup `setup`.
pub fn solve(problem: &CompositeProblem, setup: ProxSetup, config: &SolverConfig) -> Result<RunReport> {
    let oracle = problem.oracle.as_ref();
    config.validate(oracle)?;
    ProxProblem::supported(setup, &problem.set, &problem.h)?;
    let norm = setup.norm_kind();
    let eps = config.epsilon;

    let mut x = config.x0.clone();
    let mut l = config.l0;
    let mut trace: Vec<IterationRecord> = Vec::new();
    let (mut oracle_calls, mut prox_calls, mut inner_checks) = (0, 0, 0);
    let mut best = f64::INFINITY;
    let mut k_out = None;
    let mut x_out = x.clone();
    let mut stop = StopReason::IterationCap;

    'outer: for k in 0..config.max_outer_iterations {
        let mut m = l;
        let mut doublings = 0;
        let (ax, aw, w, delta_c) = loop {
            let delta_c = eps / (20.0 * m);
            let ax = oracle.query(&x, delta_c)?;
            let prox = ProxProblem {
                setup,
                set: &problem.set,
                h: &problem.h,
                x_bar: &x,
                g: &ax.g_approx,
                gamma: 1.0 / m,
            };
            let mut step = prox.solve(delta_c)?;
            if config.delta_pu > 0.0 {
                let seed = derive_seed(config.seed, [k as u64, doublings as u64]);
                step = prox.inject_noise(&step, config.delta_pu, seed)?;
            }
            prox_calls += 1;
            let w = step.point;
            let aw = oracle.query(&w, delta_c)?;
            oracle_calls += 2;
            inner_checks += 1;
            if descent_check(aw.f_approx, ax.f_approx, &ax.g_approx, &w, &x, m, eps, config.delta_u, norm) {
                break (ax, aw, w, delta_c);
            }
            if doublings == config.max_inner_doublings {
                stop = StopReason::InnerCap;
                break 'outer;
            }
            doublings += 1;
            m *= 2.0;
        };

        let gmap = (&x - &w) * m;
        let gmap_norm = norm.norm(&gmap);
        trace.push(IterationRecord {
            k,
            i_k: doublings + 1,
            m_k: m,
            delta_c_k: delta_c,
            f_tilde_x: ax.f_approx,
            f_tilde_w: aw.f_approx,
            gmap,
            gmap_norm,
            psi_at_x: problem.psi(&x),
            oracle_calls_cum: oracle_calls,
            prox_calls_cum: prox_calls,
        });
        x = w;
        l = m / 2.0;
        if gmap_norm < best {
            best = gmap_norm;
            k_out = Some(k);
            x_out = x.clone();
        }
        if best <= eps {
            stop = StopReason::CriterionMet;
            break;
        }
    }

    Ok(RunReport {
        trace,
        k_out,
        x_out,
        best_gmap_norm: best,
        stop_reason: stop,
        oracle_calls,
        prox_calls,
        inner_checks,
        psi_x0: problem.psi(&config.x0),
    })
}
