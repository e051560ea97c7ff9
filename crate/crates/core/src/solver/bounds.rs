//! Guarantees checked against a recorded trace.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TraceRow;
use crate::error::{argument, Error, Result};
use crate::oracle::{CurvatureModel, HolderParams};
use crate::space::{FeasibleSet, Point, SimpleConvexPart};

/// Slack for the rate bounds, which involve sums of reciprocals.
const RATE_SLACK: f64 = 1e-9;
/// Slack for the check-count bounds, which involve one logarithm.
const COUNT_SLACK: f64 = 1e-12;

/// One bound compared with its observed value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub bound_value: f64,
    pub observed: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn upper(observed: f64, bound_value: f64, slack: f64) -> Self {
        BoundCheck { bound_value, observed, pass: observed <= bound_value + slack }
    }
}

/// Named bound checks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoundReport {
    pub checks: BTreeMap<String, BoundCheck>,
}

impl BoundReport {
    pub fn all_passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.values().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.get(name)
    }

    fn insert(&mut self, name: &str, c: BoundCheck) {
        self.checks.insert(name.to_string(), c);
    }
}

/// Run parameters the bounds depend on.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub epsilon: f64,
    pub delta_u: f64,
    pub delta_pu: f64,
    pub l0: f64,
    pub psi_x0: Option<f64>,
    pub psi_star: Option<f64>,
    /// Declared curvature model of the oracle, if any.
    pub curvature: Option<CurvatureModel>,
}

impl RunMeta {
    fn gap(&self) -> Option<f64> {
        Some(self.psi_x0? - self.psi_star?)
    }
}

fn observed_rate(rows: &[TraceRow]) -> f64 {
    let best = rows.iter().map(|r| r.gmap_norm).fold(f64::INFINITY, f64::min);
    best * best
}

fn observed_checks(rows: &[TraceRow]) -> f64 {
    rows.iter().map(|r| r.i_k).sum::<usize>() as f64
}

/// `(sum_k 1/(2 M_k))^{-1} (psi(x0) - psi* + N (4 delta_u + delta_pu)) + eps/2`
/// over the `N` accepted iterations of the trace.
pub fn theorem1_bound(
    rows: &[TraceRow],
    psi_x0: f64,
    psi_star: f64,
    epsilon: f64,
    delta_u: f64,
    delta_pu: f64,
) -> Result<f64> {
    if rows.is_empty() {
        return argument("the trace has no accepted iterations");
    }
    let n = rows.len() as f64;
    let s: f64 = rows.iter().map(|r| 1.0 / (2.0 * r.m_k)).sum();
    Ok((psi_x0 - psi_star + n * (4.0 * delta_u + delta_pu)) / s + epsilon / 2.0)
}

/// `2N - 1 + log2(M_last / L0)`, the total number of descent checks after
/// `N` accepted iterations.
pub fn inner_check_bound(n: usize, m_last: f64, l0: f64) -> f64 {
    debug_assert!(n >= 1 && m_last > 0.0 && l0 > 0.0);
    2.0 * n as f64 - 1.0 + (m_last / l0).log2()
}

/// Rate for a constant `L`: `4L gap/N + 4L (4 delta_u + delta_pu) + eps/2`.
pub fn corollary1_rate(l: f64, gap: f64, n: usize, delta_u: f64, delta_pu: f64, epsilon: f64) -> f64 {
    4.0 * l * gap / n as f64 + 4.0 * l * (4.0 * delta_u + delta_pu) + epsilon / 2.0
}

/// Ceiling on every accepted `M_k` for a Hölder gradient:
/// `2^((1+nu)/(2nu)) ((1-nu)/(1+nu) 40/eps)^((1-nu)/(2nu)) L_nu^(1/nu)`.
pub fn holder_m_ceiling(p: HolderParams, epsilon: f64) -> f64 {
    let nu = p.nu;
    2f64.powf((1.0 + nu) / (2.0 * nu))
        * ((1.0 - nu) / (1.0 + nu) * 40.0 / epsilon).powf((1.0 - nu) / (2.0 * nu))
        * p.l_nu.powf(1.0 / nu)
}

/// Rate for a Hölder gradient: `2 * ceiling * (gap/N + 4 delta_u + delta_pu) + eps/2`.
pub fn corollary2_rate(p: HolderParams, gap: f64, n: usize, delta_u: f64, delta_pu: f64, epsilon: f64) -> f64 {
    2.0 * holder_m_ceiling(p, epsilon) * (gap / n as f64 + 4.0 * delta_u + delta_pu) + epsilon / 2.0
}

/// Check-count bound for a Hölder gradient:
/// `2N - 1 + log2(ceiling / L0)`, expanded term by term.
pub fn corollary2_checks(p: HolderParams, n: usize, epsilon: f64, l0: f64) -> f64 {
    let nu = p.nu;
    let e = (1.0 - nu) / (2.0 * nu);
    let ratio = if nu == 1.0 { 0.0 } else { e * (40.0 * (1.0 - nu) / (1.0 + nu)).log2() };
    2.0 * n as f64 - 1.0 + (1.0 + nu) / (2.0 * nu) + ratio + e * (1.0 / epsilon).log2()
        + (p.l_nu.powf(1.0 / nu) / l0).log2()
}

/// Corollary bounds for the declared curvature model. A constant model gets
/// `corollary1_*` checks, a Hölder model with `nu < 1` gets `corollary2_*`
/// checks. Rates need `psi(x0)` and `psi*`.
pub fn corollary_bounds(rows: &[TraceRow], meta: &RunMeta) -> Result<BoundReport> {
    let Some(model) = meta.curvature else {
        return Err(Error::Capability("the run declares no curvature model".into()));
    };
    if rows.is_empty() {
        return argument("the trace has no accepted iterations");
    }
    let n = rows.len();
    let max_m = rows.iter().map(|r| r.m_k).fold(0.0, f64::max);
    let checks = observed_checks(rows);
    let mut out = BoundReport::default();
    if let Some(l) = model.constant_l() {
        if let Some(gap) = meta.gap() {
            let b = corollary1_rate(l, gap, n, meta.delta_u, meta.delta_pu, meta.epsilon);
            out.insert("corollary1_rate", BoundCheck::upper(observed_rate(rows), b, RATE_SLACK));
        }
        let b = 2.0 * n as f64 + (l / meta.l0).log2();
        out.insert("corollary1_checks", BoundCheck::upper(checks, b, 0.0));
        out.insert("corollary1_mk", BoundCheck::upper(max_m, 2.0 * l, 0.0));
        return Ok(out);
    }
    let p = model.effective_holder();
    if !(p.nu > 0.0) {
        return Err(Error::Capability("no rate is available for nu = 0".into()));
    }
    if let Some(gap) = meta.gap() {
        let b = corollary2_rate(p, gap, n, meta.delta_u, meta.delta_pu, meta.epsilon);
        out.insert("corollary2_rate", BoundCheck::upper(observed_rate(rows), b, RATE_SLACK));
    }
    let b = corollary2_checks(p, n, meta.epsilon, meta.l0);
    out.insert("corollary2_checks", BoundCheck::upper(checks, b, COUNT_SLACK * b.abs().max(1.0)));
    let ceiling = holder_m_ceiling(p, meta.epsilon);
    out.insert("corollary2_mk_ceiling", BoundCheck::upper(max_m, ceiling, COUNT_SLACK * ceiling));
    let mut worst: f64 = 0.0;
    for r in rows {
        worst = worst.max(r.m_k / (2.0 * model.l_of_delta(r.delta_c_k)?));
    }
    out.insert("corollary2_mk_local", BoundCheck::upper(worst, 1.0, COUNT_SLACK));
    Ok(out)
}

/// All bounds that apply to a trace: the general rate (when `psi(x0)` and
/// `psi*` are known), the check count, and the corollary bounds (when a
/// curvature model is declared).
pub fn verify_trace(rows: &[TraceRow], meta: &RunMeta) -> Result<BoundReport> {
    if rows.is_empty() {
        return argument("the trace has no accepted iterations");
    }
    let mut out = BoundReport::default();
    if let Some(gap) = meta.gap() {
        let b = theorem1_bound(rows, gap, 0.0, meta.epsilon, meta.delta_u, meta.delta_pu)?;
        out.insert("theorem1_rate", BoundCheck::upper(observed_rate(rows), b, RATE_SLACK));
    }
    let last = rows[rows.len() - 1].m_k;
    let b = inner_check_bound(rows.len(), last, meta.l0);
    out.insert("inner_checks", BoundCheck::upper(observed_checks(rows), b, COUNT_SLACK));
    if meta.curvature.is_some() {
        match corollary_bounds(rows, meta) {
            Ok(c) => out.checks.extend(c.checks),
            Err(Error::Capability(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// `min_{u in X} <grad, u - x> + h(u) - h(x)`. Zero at a stationary point;
/// values close to zero from below certify approximate stationarity.
pub fn stationarity_residual(x: &Point, grad: &Point, set: &FeasibleSet, h: &SimpleConvexPart) -> Result<f64> {
    crate::space::check_point(x, set.dim(), "x")?;
    crate::space::check_point(grad, set.dim(), "grad")?;
    let lambda = h.lambda();
    let min_part = if lambda == 0.0 {
        set.min_linear(grad).value
    } else {
        match set {
            FeasibleSet::WholeSpace { .. } => {
                if grad.iter().all(|g| g.abs() <= lambda) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            FeasibleSet::Box { lower, upper } => grad
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .map(|(g, (l, u))| {
                    let at = |t: f64| g * t + lambda * t.abs();
                    let mut best = at(*l).min(at(*u));
                    if *l <= 0.0 && 0.0 <= *u {
                        best = best.min(0.0);
                    }
                    best
                })
                .sum(),
            // The l1 norm is identically 1 on the simplex.
            FeasibleSet::Simplex { .. } => set.min_linear(grad).value + lambda,
            FeasibleSet::Ball { .. } => {
                return Err(Error::Capability("l1 residual over a ball is not available in closed form".into()))
            }
        }
    };
    Ok(min_part - grad.dot(x) - h.value(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: usize, i_k: usize, m_k: f64, gmap_norm: f64) -> TraceRow {
        TraceRow {
            k,
            i_k,
            m_k,
            delta_c_k: 1e-3 / (20.0 * m_k),
            f_tilde_x: 0.0,
            f_tilde_w: 0.0,
            gmap_norm,
            oracle_calls_cum: 0,
            prox_calls_cum: 0,
        }
    }

    #[test]
    fn theorem1_examples() {
        let eps = 1e-6;
        let b = theorem1_bound(&[row(0, 1, 1.0, 1.0)], 0.5, 0.0, eps, 0.0, 0.0).unwrap();
        assert_eq!(b, 1.0 + eps / 2.0);
        let rows: Vec<_> = (0..4).map(|k| row(k, 1, 3.0, 1.0)).collect();
        let b = theorem1_bound(&rows, 2.0, -1.0, eps, 0.0, 0.0).unwrap();
        assert!((b - (2.0 * 3.0 * 3.0 / 4.0 + eps / 2.0)).abs() < 1e-12);
        let b2 = theorem1_bound(&rows, 2.0, -1.0, eps, 0.01, 0.02).unwrap();
        assert!((b2 - b - 6.0 * 4.0 * 0.06 / 4.0).abs() < 1e-12);
        assert!(theorem1_bound(&[], 1.0, 0.0, eps, 0.0, 0.0).is_err());
    }

    #[test]
    fn inner_check_bound_examples() {
        assert_eq!(inner_check_bound(10, 8.0 * 0.3, 0.3), 22.0);
        assert_eq!(inner_check_bound(1, 2.5, 2.5), 1.0);
    }

    #[test]
    fn corollary2_at_nu_one_is_corollary1() {
        let p = HolderParams::new(1.0, 3.0).unwrap();
        let a = corollary2_rate(p, 1.7, 9, 1e-3, 2e-4, 1e-4);
        let b = corollary1_rate(3.0, 1.7, 9, 1e-3, 2e-4, 1e-4);
        assert!((a - b).abs() <= 1e-12 * b);
        assert!((corollary2_checks(p, 9, 1e-4, 0.5) - (18.0 + 6f64.log2())).abs() < 1e-12);
        assert_eq!(holder_m_ceiling(p, 1e-4), 6.0);
    }

    #[test]
    fn corollary2_checks_expand_the_ceiling() {
        let p = HolderParams::new(0.4, 1.3).unwrap();
        let (n, eps, l0) = (7, 1e-3, 0.2);
        let direct = 2.0 * n as f64 - 1.0 + (holder_m_ceiling(p, eps) / l0).log2();
        assert!((corollary2_checks(p, n, eps, l0) - direct).abs() < 1e-10);
    }

    #[test]
    fn report_selects_corollary() {
        let rows = vec![row(0, 2, 2.0, 3.0), row(1, 1, 1.0, 0.5)];
        let mut meta = RunMeta {
            epsilon: 1e-3,
            delta_u: 0.0,
            delta_pu: 0.0,
            l0: 1.0,
            psi_x0: Some(10.0),
            psi_star: Some(0.0),
            curvature: Some(CurvatureModel::Lipschitz { l: 1.0 }),
        };
        let r = verify_trace(&rows, &meta).unwrap();
        let names: Vec<&str> = r.checks.keys().map(|s| s.as_str()).collect();
        assert_eq!(names, ["corollary1_checks", "corollary1_mk", "corollary1_rate", "inner_checks", "theorem1_rate"]);
        assert!(r.all_passed(), "{r:?}");
        assert_eq!(r.get("inner_checks").unwrap().observed, 3.0);

        meta.curvature = Some(CurvatureModel::Holder(HolderParams::new(0.5, 1.0).unwrap()));
        let r = verify_trace(&rows, &meta).unwrap();
        assert!(r.get("corollary2_mk_local").is_some());
        assert!(r.get("corollary1_rate").is_none());

        meta.curvature = None;
        assert!(matches!(corollary_bounds(&rows, &meta), Err(Error::Capability(_))));
        meta.psi_x0 = None;
        let r = verify_trace(&rows, &meta).unwrap();
        assert_eq!(r.checks.len(), 1);
    }

    #[test]
    fn halved_constants_break_the_check_count() {
        let rows = vec![row(0, 3, 4.0, 1.0), row(1, 1, 2.0, 1e-4)];
        assert!(inner_check_bound(2, 2.0, 1.0) >= 4.0);
        let mut tampered = rows.clone();
        for r in &mut tampered {
            r.m_k /= 2.0;
        }
        assert!(inner_check_bound(2, 1.0, 1.0) < 4.0);
    }

    #[test]
    fn residual_examples() {
        let ws = FeasibleSet::whole_space(2).unwrap();
        let z = Point::zeros(2);
        assert_eq!(stationarity_residual(&z, &z, &ws, &SimpleConvexPart::Zero).unwrap(), 0.0);
        let unit = FeasibleSet::new_box(Point::from_element(1, 0.0), Point::from_element(1, 1.0)).unwrap();
        let g = Point::from_element(1, 2.0);
        let r0 = stationarity_residual(&Point::from_element(1, 0.0), &g, &unit, &SimpleConvexPart::Zero);
        assert_eq!(r0.unwrap(), 0.0);
        let r1 = stationarity_residual(&Point::from_element(1, 1.0), &g, &unit, &SimpleConvexPart::Zero);
        assert_eq!(r1.unwrap(), -2.0);
        let r = stationarity_residual(&Point::from_element(2, 1.0), &g.push(0.0), &ws, &SimpleConvexPart::Zero);
        assert_eq!(r.unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn l1_residual_matches_grid() {
        let set = FeasibleSet::new_box(Point::from_vec(vec![-1.0, 0.5]), Point::from_vec(vec![2.0, 1.5])).unwrap();
        let h = SimpleConvexPart::l1(0.7).unwrap();
        let x = Point::from_vec(vec![0.3, 1.0]);
        for g in [vec![0.2, -1.0], vec![-2.0, 0.4], vec![0.0, 0.0]] {
            let g = Point::from_vec(g);
            let r = stationarity_residual(&x, &g, &set, &h).unwrap();
            let mut best = f64::INFINITY;
            for i in 0..=300 {
                for j in 0..=100 {
                    let u = Point::from_vec(vec![-1.0 + 3.0 * i as f64 / 300.0, 0.5 + j as f64 / 100.0]);
                    best = best.min(g.dot(&(&u - &x)) + h.value(&u) - h.value(&x));
                }
            }
            assert!((r - best).abs() < 1e-12, "{r} {best}");
        }
        let ball = FeasibleSet::ball(Point::zeros(2), 1.0).unwrap();
        assert!(stationarity_residual(&Point::zeros(2), &Point::zeros(2), &ball, &h).is_err());
        let ws = FeasibleSet::whole_space(2).unwrap();
        let small = Point::from_vec(vec![0.5, -0.7]);
        assert_eq!(stationarity_residual(&Point::zeros(2), &small, &ws, &h).unwrap(), 0.0);
    }
}
