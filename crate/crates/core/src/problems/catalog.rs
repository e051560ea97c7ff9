use std::sync::Arc;

use nalgebra::DMatrix;

use super::{CompositeProblem, OracleKind};
use crate::error::{Error, Result};
use crate::oracle::{
    make_noise_wrapped_oracle, CurvatureModel, ExactOracle, FirstOrderOracle, FnFunction, HolderParams,
    InnerMaxOracle, InnerMaxProblem, NoiseBudgets, Regularizer, SmoothFunction,
};
use crate::prox::ProxSetup;
use crate::space::{FeasibleSet, NormKind, Point, SimpleConvexPart};

/// Knobs for catalog entries that take parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemOptions {
    /// Uncontrolled error of the noise-wrapped oracle.
    pub delta_u: f64,
    /// Seed of the noise-wrapped oracle.
    pub seed: u64,
}

impl Default for ProblemOptions {
    fn default() -> Self {
        ProblemOptions { delta_u: 1e-3, seed: 0 }
    }
}

/// Hölder family members as `(name, nu)`.
pub const HOLDER_NAMES: [(&str, f64); 3] =
    [("holder-nu-13", 1.0 / 3.0), ("holder-nu-12", 0.5), ("holder-nu-1", 1.0)];

const NAMES: [&str; 9] = [
    "quad-cos",
    "quad-cos-noisy",
    "holder-nu-13",
    "holder-nu-12",
    "holder-nu-1",
    "inner-max-quad",
    "inner-max-quartic",
    "l1-log",
    "simplex-quad",
];

pub fn problem_names() -> &'static [&'static str] {
    &NAMES
}

/// Every catalog entry with default options.
pub fn catalog() -> Vec<CompositeProblem> {
    NAMES
        .iter()
        .map(|n| build(n, &ProblemOptions::default()).expect("catalog entries are well formed"))
        .collect()
}

/// Builds the named instance.
pub fn build(name: &str, opts: &ProblemOptions) -> Result<CompositeProblem> {
    match name {
        "quad-cos" => quad_cos(),
        "quad-cos-noisy" => quad_cos_noisy(opts),
        "inner-max-quad" => inner_max(name, Regularizer::Quadratic { sigma: 1.0 }),
        "inner-max-quartic" => inner_max(name, Regularizer::QuarticNorm { scale: 1.0 }),
        "l1-log" => l1_log(),
        "simplex-quad" => simplex_quad(),
        _ => match HOLDER_NAMES.iter().find(|(n, _)| *n == name) {
            Some((n, nu)) => holder(n, *nu),
            None => Err(Error::Argument(format!(
                "unknown problem '{name}'; valid problems: {}",
                NAMES.join(", ")
            ))),
        },
    }
}

fn pt(v: &[f64]) -> Point {
    Point::from_column_slice(v)
}

const QUAD_COS_DIM: usize = 5;

fn quad_cos_function() -> Arc<dyn SmoothFunction> {
    FnFunction::shared(
        QUAD_COS_DIM,
        |x: &Point| 0.5 * x.norm_squared() + x.iter().map(|t| (2.0 * t).cos()).sum::<f64>(),
        |x: &Point| x.map(|t| t - 2.0 * (2.0 * t).sin()),
    )
}

fn quad_cos_base(
    name: &str,
    half_width: f64,
    oracle: Arc<dyn FirstOrderOracle>,
    kind: OracleKind,
) -> CompositeProblem {
    let n = QUAD_COS_DIM;
    let (psi_star, l) = if half_width <= 1.0 {
        // Each coordinate term t^2/2 + cos 2t decreases on [0, 1] and is even,
        // so its minimum over [-1, 1] sits at the endpoints. Its second
        // derivative 1 - 4 cos 2t lies in [-3, 1 - 4 cos 2].
        (n as f64 * (0.5 + 2f64.cos()), 3.0)
    } else {
        // On [-2, 2] the minimum is interior, at about t = 1.237 with value
        // -0.0207, and the second derivative lies in [-3, 5].
        (-0.025 * n as f64, 5.0)
    };
    CompositeProblem {
        name: name.into(),
        description: format!("1/2 |x|^2 + sum cos(2 x_i) on [-{half_width}, {half_width}]^5"),
        oracle,
        oracle_kind: kind,
        h: SimpleConvexPart::Zero,
        set: FeasibleSet::cube(n, half_width).unwrap(),
        setup: ProxSetup::Euclidean,
        psi_star: Some(psi_star),
        truth: Some(quad_cos_function()),
        curvature: CurvatureModel::Lipschitz { l },
        x0: pt(&[0.5, -0.7, 0.2, -0.1, 0.9]),
        nonconvexity_witness: Some((Point::from_element(n, 0.3), Point::from_element(n, -0.3))),
    }
}

fn quad_cos() -> Result<CompositeProblem> {
    let set = FeasibleSet::cube(QUAD_COS_DIM, 1.0)?;
    let oracle = Arc::new(ExactOracle::new(quad_cos_function(), set)?);
    Ok(quad_cos_base("quad-cos", 1.0, oracle, OracleKind::Exact))
}

/// The noisy variant uses the larger box [-2, 2]^5, whose minimizers are
/// interior, so that the uncontrolled error shows up in the reachable
/// gradient-mapping norm.
fn quad_cos_noisy(opts: &ProblemOptions) -> Result<CompositeProblem> {
    if !(opts.delta_u >= 0.0 && opts.delta_u.is_finite()) {
        return Err(Error::Argument(format!("delta_u must be non-negative, got {}", opts.delta_u)));
    }
    let set = FeasibleSet::cube(QUAD_COS_DIM, 2.0)?;
    let d = set.diameter(NormKind::L2);
    let exact = Arc::new(ExactOracle::new(quad_cos_function(), set)?);
    // Half of the uncontrolled error goes to values, half to gradients.
    let budgets = NoiseBudgets {
        value_c: 1e-2,
        value_u: opts.delta_u / 2.0,
        grad_c: 1e-2 / d,
        grad_u: opts.delta_u / (2.0 * d),
    };
    let oracle = Arc::new(make_noise_wrapped_oracle(exact, budgets, d, NormKind::L2, opts.seed)?);
    let mut p = quad_cos_base("quad-cos-noisy", 2.0, oracle, OracleKind::Noisy);
    p.description = format!("{} with bounded additive noise, delta_u = {}", p.description, opts.delta_u);
    Ok(p)
}

fn holder(name: &str, nu: f64) -> Result<CompositeProblem> {
    let n = 2;
    let half = 2.0;
    // Concave perturbation: strong enough to make f non-convex, including
    // for nu = 1 where the power term is itself quadratic.
    let c = if nu == 1.0 { 0.75 } else { 0.5 };
    let set = FeasibleSet::cube(n, half)?;
    let diam = set.diameter(NormKind::L2);
    let f = FnFunction::shared(
        n,
        move |x: &Point| x.iter().map(|t| t.abs().powf(1.0 + nu) / (1.0 + nu)).sum::<f64>() - c * x.norm_squared(),
        move |x: &Point| x.map(|t| t.signum() * t.abs().powf(nu) - 2.0 * c * t),
    );
    let l_nu = if nu == 1.0 {
        (1.0 - 2.0 * c).abs()
    } else {
        2f64.powf(1.0 - nu) * (n as f64).powf((1.0 - nu) / 2.0) + 2.0 * c * diam.powf(1.0 - nu)
    };
    let phi = |t: f64| t.powf(1.0 + nu) / (1.0 + nu) - c * t * t;
    let oracle = Arc::new(ExactOracle::new(f.clone(), set.clone())?);
    Ok(CompositeProblem {
        name: name.into(),
        description: format!("sum |x_i|^(1+nu)/(1+nu) - {c} |x|^2 on [-2, 2]^2, nu = {nu}"),
        oracle,
        oracle_kind: OracleKind::Exact,
        h: SimpleConvexPart::Zero,
        set,
        setup: ProxSetup::Euclidean,
        // Each coordinate term is minimized at 0 or at the boundary.
        psi_star: Some(n as f64 * phi(half).min(0.0)),
        truth: Some(f),
        curvature: CurvatureModel::Holder(HolderParams::new(nu, l_nu)?),
        x0: pt(&[0.6, -0.4]),
        nonconvexity_witness: Some((pt(&[1.5, 0.0]), pt(&[2.0, 0.0]))),
    })
}

fn inner_max(name: &str, reg: Regularizer) -> Result<CompositeProblem> {
    let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, -0.2, 0.0, 1.5, 0.3, 0.4, -0.1, 0.8]);
    let inner = InnerMaxProblem::new(a, reg, FeasibleSet::ball(Point::zeros(3), 1.0)?)?;
    let set = FeasibleSet::cube(3, 2.0)?;
    let oracle = InnerMaxOracle::new(inner.clone(), set.clone())?;
    let params = oracle.holder_params();
    let truth_f = Arc::new(inner);
    let truth_g = truth_f.clone();
    let truth = FnFunction::shared(
        3,
        move |x: &Point| truth_f.exact_value(x).expect("ball centered at the origin"),
        move |x: &Point| &truth_g.a * truth_g.exact_maximizer(x).expect("ball centered at the origin"),
    );
    let desc = match reg {
        Regularizer::Quadratic { .. } => "max over the unit ball of -|u|^2/2 + <Au, x>, on [-2, 2]^3",
        Regularizer::QuarticNorm { .. } => "max over the unit ball of -|u|^4/4 + <Au, x>, on [-2, 2]^3",
    };
    Ok(CompositeProblem {
        name: name.into(),
        description: desc.into(),
        oracle: Arc::new(oracle),
        oracle_kind: OracleKind::InnerMax,
        h: SimpleConvexPart::Zero,
        set,
        setup: ProxSetup::Euclidean,
        // f(x) >= -G(0) + 0 = 0.
        psi_star: Some(0.0),
        truth: Some(truth),
        curvature: CurvatureModel::InnerMax(params),
        x0: pt(&[1.5, -1.0, 0.5]),
        // A maximum of linear functions is convex.
        nonconvexity_witness: None,
    })
}

const L1_SHIFT: [f64; 4] = [1.0, -2.0, 0.5, 3.0];

fn l1_log() -> Result<CompositeProblem> {
    let n = L1_SHIFT.len();
    let b = pt(&L1_SHIFT);
    let b2 = b.clone();
    let f = FnFunction::shared(
        n,
        move |x: &Point| (x - &b).iter().map(|t| (1.0 + t * t).ln()).sum::<f64>(),
        move |x: &Point| (x - &b2).map(|t| 2.0 * t / (1.0 + t * t)),
    );
    let set = FeasibleSet::whole_space(n)?;
    let oracle = Arc::new(ExactOracle::new(f.clone(), set.clone())?);
    let shift = pt(&L1_SHIFT);
    Ok(CompositeProblem {
        name: "l1-log".into(),
        description: "sum log(1 + (x_i - b_i)^2) + 0.3 |x|_1 on R^4".into(),
        oracle,
        oracle_kind: OracleKind::Exact,
        h: SimpleConvexPart::l1(0.3)?,
        set,
        setup: ProxSetup::Euclidean,
        psi_star: Some(0.0),
        truth: Some(f),
        // Second derivative 2(1 - t^2)/(1 + t^2)^2 lies in [-1/4, 2].
        curvature: CurvatureModel::Lipschitz { l: 2.0 },
        x0: pt(&[-1.0, 1.0, 2.0, 0.0]),
        nonconvexity_witness: Some((
            &shift + pt(&[2.0, 0.0, 0.0, 0.0]),
            &shift + pt(&[4.0, 0.0, 0.0, 0.0]),
        )),
    })
}

const SIMPLEX_LINEAR: [f64; 4] = [0.1, -0.2, 0.05, 0.0];

fn simplex_quad() -> Result<CompositeProblem> {
    let n = SIMPLEX_LINEAR.len();
    let q = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 });
    let q2 = q.clone();
    let c = pt(&SIMPLEX_LINEAR);
    let c2 = c.clone();
    let f = FnFunction::shared(
        n,
        move |x: &Point| 0.5 * x.dot(&(&q * x)) + c.dot(x),
        move |x: &Point| &q2 * x + &c2,
    );
    let set = FeasibleSet::simplex(n)?;
    let oracle = Arc::new(ExactOracle::new(f.clone(), set.clone())?);
    let mut e1 = Point::zeros(n);
    e1[0] = 1.0;
    let mut e2 = Point::zeros(n);
    e2[1] = 1.0;
    Ok(CompositeProblem {
        name: "simplex-quad".into(),
        description: "1/2 x'Qx + c'x on the simplex in R^4, Q with unit off-diagonal".into(),
        oracle,
        oracle_kind: OracleKind::Exact,
        h: SimpleConvexPart::Zero,
        set,
        setup: ProxSetup::Entropy,
        // x'Qx >= 0 on the simplex and c'x >= min c.
        psi_star: Some(SIMPLEX_LINEAR.iter().cloned().fold(f64::INFINITY, f64::min)),
        truth: Some(f),
        // |Q(x - y)|_inf <= max |Q_ij| |x - y|_1.
        curvature: CurvatureModel::Lipschitz { l: 1.0 },
        x0: Point::from_element(n, 0.25),
        nonconvexity_witness: Some((e1, e2)),
    })
}
