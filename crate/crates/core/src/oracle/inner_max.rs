use nalgebra::DMatrix;

use super::{holder_params_from_inner_max, validate_query, FirstOrderOracle, HolderParams, OracleAnswer};
use crate::error::{argument, Error, Result};
use crate::space::{FeasibleSet, Point};

/// Uniformly convex regularizer `G` of the inner problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer {
    /// `G(u) = sigma/2 ||u||^2`, degree 2 with parameter `sigma`.
    Quadratic { sigma: f64 },
    /// `G(u) = scale/4 ||u||^4`, degree 4 with parameter `scale/4`.
    QuarticNorm { scale: f64 },
}

impl Regularizer {
    pub fn value(&self, u: &Point) -> f64 {
        match *self {
            Regularizer::Quadratic { sigma } => 0.5 * sigma * u.norm_squared(),
            Regularizer::QuarticNorm { scale } => 0.25 * scale * u.norm_squared().powi(2),
        }
    }

    pub fn gradient(&self, u: &Point) -> Point {
        match *self {
            Regularizer::Quadratic { sigma } => u * sigma,
            Regularizer::QuarticNorm { scale } => u * (scale * u.norm_squared()),
        }
    }

    /// Degree `rho` of uniform convexity.
    pub fn degree(&self) -> f64 {
        match self {
            Regularizer::Quadratic { .. } => 2.0,
            Regularizer::QuarticNorm { .. } => 4.0,
        }
    }

    /// Largest `sigma` with `<G'(u) - G'(v), u - v> >= sigma ||u - v||^rho`.
    pub fn modulus(&self) -> f64 {
        match *self {
            Regularizer::Quadratic { sigma } => sigma,
            Regularizer::QuarticNorm { scale } => 0.25 * scale,
        }
    }

    fn validate(&self) -> Result<()> {
        let p = match *self {
            Regularizer::Quadratic { sigma } => sigma,
            Regularizer::QuarticNorm { scale } => scale,
        };
        if !(p > 0.0 && p.is_finite()) {
            return argument(format!("regularizer parameter must be positive, got {p}"));
        }
        Ok(())
    }
}

/// `f(x) = max_{u in U} { -G(u) + <A u, x> }` with `A` of shape `n x m`.
#[derive(Debug, Clone)]
pub struct InnerMaxProblem {
    pub a: DMatrix<f64>,
    pub regularizer: Regularizer,
    pub u_set: FeasibleSet,
    /// Iteration budget of the inner solver.
    pub max_iters: usize,
}

/// Spectral norm of `a` by power iteration on `a^T a`, to relative accuracy
/// about `1e-10`.
pub fn operator_norm(a: &DMatrix<f64>) -> f64 {
    let m = a.ncols();
    if m == 0 || a.nrows() == 0 {
        return 0.0;
    }
    let mut v = Point::from_iterator(m, (0..m).map(|i| 1.0 + 0.1 * i as f64));
    v /= v.norm();
    let mut est = 0.0;
    for _ in 0..100_000 {
        let w = a.transpose() * (a * &v);
        let n = w.norm();
        if n == 0.0 {
            return 0.0;
        }
        v = w / n;
        if (n - est).abs() <= 1e-12 * n {
            est = n;
            break;
        }
        est = n;
    }
    est.sqrt()
}

impl InnerMaxProblem {
    pub fn new(a: DMatrix<f64>, regularizer: Regularizer, u_set: FeasibleSet) -> Result<Self> {
        regularizer.validate()?;
        if a.ncols() != u_set.dim() {
            return Err(Error::DimensionMismatch { expected: u_set.dim(), got: a.ncols() });
        }
        if !u_set.is_bounded() {
            return Err(Error::Capability("inner feasible set must be bounded".into()));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("inner matrix"));
        }
        Ok(InnerMaxProblem { a, regularizer, u_set, max_iters: 200_000 })
    }

    /// Inner objective `-G(u) + <A u, x>`.
    pub fn objective(&self, x: &Point, u: &Point) -> f64 {
        -self.regularizer.value(u) + (&self.a * u).dot(x)
    }

    /// Closed-form maximizer when `U` is a Euclidean ball centered at the
    /// origin.
    pub fn exact_maximizer(&self, x: &Point) -> Option<Point> {
        let FeasibleSet::Ball { center, radius } = &self.u_set else {
            return None;
        };
        if center.iter().any(|v| *v != 0.0) {
            return None;
        }
        let c = self.a.transpose() * x;
        let cn = c.norm();
        if cn == 0.0 {
            return Some(Point::zeros(c.len()));
        }
        let t = match self.regularizer {
            Regularizer::Quadratic { sigma } => cn / sigma,
            Regularizer::QuarticNorm { scale } => (cn / scale).cbrt(),
        };
        Some(c * (t.min(*radius) / cn))
    }

    /// `f(x)` from the closed-form maximizer, when available.
    pub fn exact_value(&self, x: &Point) -> Option<f64> {
        self.exact_maximizer(x).map(|u| self.objective(x, &u))
    }

    /// Maximizes the inner objective to Frank-Wolfe gap at most `delta`.
    /// Returns the point and its certified gap.
    pub fn solve(&self, x: &Point, delta: f64) -> Result<(Point, f64)> {
        let c = self.a.transpose() * x;
        // Minimize F(u) = G(u) - <c, u> by projected gradient with adaptive steps.
        let obj = |u: &Point| self.regularizer.value(u) - c.dot(u);
        let mut u = self.u_set.center();
        let mut fu = obj(&u);
        let mut step = 1.0;
        let mut gap = f64::INFINITY;
        for _ in 0..self.max_iters {
            let ascent = &c - self.regularizer.gradient(&u);
            let lm = self.u_set.min_linear(&(-&ascent));
            gap = (-lm.value - ascent.dot(&u)).max(0.0);
            if gap <= delta {
                return Ok((u, gap));
            }
            step *= 2.0;
            let mut accepted = false;
            for _ in 0..200 {
                let cand = self.u_set.project(&(&u + &ascent * step));
                let d = &cand - &u;
                let fc = obj(&cand);
                let model = fu - ascent.dot(&d) + d.norm_squared() / (2.0 * step);
                // Close to the optimum function differences drown in rounding;
                // the gradient-change test still resolves the local curvature.
                let grad_change = (self.regularizer.gradient(&cand) - self.regularizer.gradient(&u)).norm();
                if fc <= model || grad_change * step <= d.norm() {
                    u = cand;
                    fu = fc;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Err(Error::Oracle { message: format!("inner solver could not reach gap {delta:e}"), achieved: gap })
    }
}

/// Oracle for `f(x) = max_u {-G(u) + <A u, x>}` that solves the inner
/// problem to accuracy `delta_c / 4`. Its curvature model is
/// `L(delta_c) = 2 L_holder(delta_c / 4)` with the Hölder parameters
/// returned by [`InnerMaxOracle::holder_params`].
#[derive(Debug, Clone)]
pub struct InnerMaxOracle {
    problem: InnerMaxProblem,
    x_set: FeasibleSet,
    a_norm: f64,
}

impl InnerMaxOracle {
    pub fn new(problem: InnerMaxProblem, x_set: FeasibleSet) -> Result<Self> {
        if problem.a.nrows() != x_set.dim() {
            return Err(Error::DimensionMismatch { expected: x_set.dim(), got: problem.a.nrows() });
        }
        let a_norm = operator_norm(&problem.a);
        Ok(InnerMaxOracle { problem, x_set, a_norm })
    }

    pub fn problem(&self) -> &InnerMaxProblem {
        &self.problem
    }

    pub fn operator_norm(&self) -> f64 {
        self.a_norm
    }

    pub fn holder_params(&self) -> HolderParams {
        let r = &self.problem.regularizer;
        holder_params_from_inner_max(r.degree(), r.modulus(), self.a_norm)
            .expect("regularizer parameters were validated")
    }
}

impl FirstOrderOracle for InnerMaxOracle {
    fn dim(&self) -> usize {
        self.x_set.dim()
    }

    fn feasible_set(&self) -> &FeasibleSet {
        &self.x_set
    }

    fn uncontrolled_error(&self) -> f64 {
        0.0
    }

    fn query(&self, x: &Point, delta_c: f64) -> Result<OracleAnswer> {
        validate_query(&self.x_set, x, delta_c)?;
        let (u, _) = self.problem.solve(x, delta_c / 4.0)?;
        Ok(OracleAnswer {
            f_approx: self.problem.objective(x, &u),
            g_approx: &self.problem.a * &u,
            delta_c_used: delta_c,
            delta_u_bound: 0.0,
        })
    }
}
