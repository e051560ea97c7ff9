use adaptive_inexact::harness::{execute, RunSpec};
use adaptive_inexact::problems::{build, ProblemOptions};
use adaptive_inexact::prox::ProxSetup;
use adaptive_inexact::solver::{solve, SolverConfig, StopReason};

fn spec(problem: &str, eps: f64, max_iters: usize) -> RunSpec {
    let mut s = RunSpec::new(problem);
    s.epsilon = eps;
    s.delta_u = 0.0;
    s.max_iters = max_iters;
    s
}

#[test]
fn exact_runs_decrease_psi_by_the_descent_amount() {
    for (name, eps) in [
        ("quad-cos", 1e-4),
        ("holder-nu-13", 1e-3),
        ("holder-nu-12", 1e-3),
        ("holder-nu-1", 1e-3),
        ("l1-log", 1e-3),
        ("simplex-quad", 1e-4),
    ] {
        let out = execute(&spec(name, eps, 2000)).unwrap();
        let t = &out.report.trace;
        for w in t.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let m = a.m_k;
            let bound = a.psi_at_x.unwrap() - a.gmap_norm.powi(2) / (2.0 * m) + eps / (4.0 * m);
            let next = b.psi_at_x.unwrap();
            assert!(
                next <= bound + 1e-12 * (1.0 + bound.abs()),
                "{name} at k = {}: psi {next} above {bound}",
                a.k
            );
        }
    }
}

#[test]
fn identical_configs_give_identical_reports() {
    for name in ["quad-cos-noisy", "inner-max-quad", "l1-log"] {
        let mut s = spec(name, 1e-4, 300);
        s.delta_u = if name == "quad-cos-noisy" { 1e-3 } else { 0.0 };
        s.delta_pu = 1e-5;
        s.seed = 9;
        let (p, setup, cfg) = s.resolve().unwrap();
        let a = solve(&p, setup, &cfg).unwrap();
        let b = solve(&p, setup, &cfg).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn output_index_attains_the_smallest_norm() {
    for name in ["quad-cos", "inner-max-quartic", "simplex-quad", "holder-nu-12"] {
        let out = execute(&spec(name, 1e-4, 500)).unwrap();
        let r = &out.report;
        let k = r.k_out.unwrap();
        let min = r.trace.iter().map(|t| t.gmap_norm).fold(f64::INFINITY, f64::min);
        assert_eq!(r.trace[k].gmap_norm, min);
        assert_eq!(r.best_gmap_norm, min);
        // First index attaining it, and unchanged by a positive rescaling.
        assert!(r.trace[..k].iter().all(|t| t.gmap_norm > min));
        let scaled: Vec<f64> = r.trace.iter().map(|t| 3.7 * t.gmap_norm).collect();
        let ks = (0..scaled.len()).min_by(|&i, &j| scaled[i].total_cmp(&scaled[j])).unwrap();
        assert_eq!(ks, k, "{name}");
    }
}

#[test]
fn trial_constants_follow_the_doubling_sequence() {
    let out = execute(&spec("inner-max-quad", 1e-4, 200)).unwrap();
    let mut l = 1.0;
    for t in &out.report.trace {
        assert_eq!(t.m_k, l * 2f64.powi(t.i_k as i32 - 1));
        assert_eq!(t.delta_c_k, 1e-4 / (20.0 * t.m_k));
        l = t.m_k / 2.0;
    }
    assert_eq!(
        out.report.inner_checks,
        out.report.trace.iter().map(|t| t.i_k).sum::<usize>()
    );
    assert_eq!(out.report.oracle_calls, 2 * out.report.inner_checks);
}

#[test]
fn corner_minimizers_stop_on_the_criterion() {
    let out = execute(&spec("quad-cos", 1e-4, 10_000)).unwrap();
    assert_eq!(out.report.stop_reason, StopReason::CriterionMet);
    assert!(out.report.best_gmap_norm <= 1e-4);
    for c in out.report.x_out.iter() {
        assert!((c.abs() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn every_catalog_run_passes_its_bounds() {
    for name in adaptive_inexact::problems::problem_names() {
        let out = execute(&spec(name, 1e-3, 1000)).unwrap();
        assert!(out.bounds.all_passed(), "{name}: {:?}", out.bounds);
    }
}

#[test]
fn initial_estimate_above_curvature_is_accepted_at_once() {
    let p = build("holder-nu-1", &ProblemOptions::default()).unwrap();
    let mut cfg = SolverConfig::new(p.x0.clone(), 1e-3);
    cfg.l0 = 64.0;
    cfg.max_outer_iterations = 1;
    let r = solve(&p, ProxSetup::Euclidean, &cfg).unwrap();
    assert_eq!(r.trace[0].i_k, 1);
    assert_eq!(r.trace[0].m_k, 64.0);
}
