//! Composite problems `min_{x in X} f(x) + h(x)` and a catalog of test
//! instances with known lower bounds.

mod catalog;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oracle::{CurvatureModel, FirstOrderOracle, SmoothFunction};
use crate::prox::ProxSetup;
use crate::space::{FeasibleSet, Point, SimpleConvexPart};

pub use catalog::{build, catalog, problem_names, ProblemOptions, HOLDER_NAMES};

/// How the oracle of a problem was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Exact,
    Noisy,
    InnerMax,
}

/// A composite minimization problem.
#[derive(Clone)]
pub struct CompositeProblem {
    pub name: String,
    pub description: String,
    pub oracle: Arc<dyn FirstOrderOracle>,
    pub oracle_kind: OracleKind,
    pub h: SimpleConvexPart,
    pub set: FeasibleSet,
    /// Prox setup the instance is meant for.
    pub setup: ProxSetup,
    /// Lower bound on `f + h` over the set.
    pub psi_star: Option<f64>,
    /// Exact `f` and its gradient.
    pub truth: Option<Arc<dyn SmoothFunction>>,
    /// Declared `L(delta_c)` of the oracle.
    pub curvature: CurvatureModel,
    pub x0: Point,
    /// Two points whose midpoint value of `f` exceeds the average of their
    /// values, when `f` is non-convex.
    pub nonconvexity_witness: Option<(Point, Point)>,
}

impl fmt::Debug for CompositeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompositeProblem")
            .field("name", &self.name)
            .field("oracle_kind", &self.oracle_kind)
            .field("h", &self.h)
            .field("set", &self.set)
            .field("setup", &self.setup)
            .field("psi_star", &self.psi_star)
            .field("curvature", &self.curvature)
            .finish_non_exhaustive()
    }
}

impl CompositeProblem {
    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    /// Exact `psi(x) = f(x) + h(x)`, when the instance carries ground truth.
    pub fn psi(&self, x: &Point) -> Option<f64> {
        self.truth.as_ref().map(|t| t.value(x) + self.h.value(x))
    }

    /// Resolves a starting-point spec: `default`, `center`, or a
    /// comma-separated list of coordinates.
    pub fn resolve_x0(&self, spec: &str) -> Result<Point> {
        let x = match spec.trim() {
            "default" => self.x0.clone(),
            "center" => self.set.center(),
            list => {
                let coords = list
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Parse(format!("bad coordinate '{t}' in x0")))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Point::from_vec(coords)
            }
        };
        crate::space::check_point(&x, self.dim(), "x0")?;
        self.set.require(&x, "x0")?;
        Ok(x)
    }

    /// Lipschitz constant of the exact gradient, when the oracle is exact and
    /// the gradient is Lipschitz.
    pub fn gradient_lipschitz(&self) -> Option<f64> {
        match self.oracle_kind {
            OracleKind::Exact => self.curvature.constant_l(),
            _ => None,
        }
    }
}
