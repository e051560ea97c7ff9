//! Inexact first-order oracles
//!
//! An oracle for `f` answers a query `(x, delta_c)` with a value `f_approx`
//! and a dual vector `g_approx` such that, with some `L(delta_c)`,
//!
//! ```text
//! |f(x) - f_approx| <= delta_c + delta_u
//! f(y) <= f_approx + <g_approx, y - x> + L(delta_c)/2 ||y - x||^2 + delta_c + delta_u   for y in X
//! ```
//!
//! `delta_c` is requested per query and can be made arbitrarily small;
//! `delta_u` is a fixed floor of the oracle. The solver only sees the
//! [`FirstOrderOracle`] trait. The curvature model `L(.)` lives in a
//! separate [`CurvatureModel`] that verifiers use, so the solver cannot
//! depend on it.

mod contract;
mod exact;
mod inner_max;
mod noisy;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::space::{check_point, FeasibleSet, Point};

pub use contract::{oracle_contract_check, ContractReport, CONTRACT_TOL};
pub use exact::ExactOracle;
pub use inner_max::{operator_norm, InnerMaxOracle, InnerMaxProblem, Regularizer};
pub use noisy::{make_noise_wrapped_oracle, NoiseBudgets, NoisyOracle};

/// Answer to one oracle query.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleAnswer {
    pub f_approx: f64,
    pub g_approx: Point,
    /// Controlled error the answer honors.
    pub delta_c_used: f64,
    /// Uncontrolled error floor of the oracle.
    pub delta_u_bound: f64,
}

/// A function equipped with an inexact first-order oracle.
pub trait FirstOrderOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn feasible_set(&self) -> &FeasibleSet;

    /// The uncontrolled error `delta_u` every answer carries.
    fn uncontrolled_error(&self) -> f64;

    fn query(&self, x: &Point, delta_c: f64) -> Result<OracleAnswer>;
}

/// Exact value and gradient of a differentiable function.
pub trait SmoothFunction: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &Point) -> f64;
    fn gradient(&self, x: &Point) -> Point;
}

/// [`SmoothFunction`] built from a pair of closures.
pub struct FnFunction<F, G> {
    dim: usize,
    f: F,
    g: G,
}

impl<F, G> FnFunction<F, G>
where
    F: Fn(&Point) -> f64 + Send + Sync,
    G: Fn(&Point) -> Point + Send + Sync,
{
    pub fn new(dim: usize, f: F, g: G) -> Self {
        FnFunction { dim, f, g }
    }

    pub fn shared(dim: usize, f: F, g: G) -> Arc<dyn SmoothFunction>
    where
        F: 'static,
        G: 'static,
    {
        Arc::new(Self::new(dim, f, g))
    }
}

impl<F, G> SmoothFunction for FnFunction<F, G>
where
    F: Fn(&Point) -> f64 + Send + Sync,
    G: Fn(&Point) -> Point + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Point) -> f64 {
        (self.f)(x)
    }
    fn gradient(&self, x: &Point) -> Point {
        (self.g)(x)
    }
}

pub(crate) fn validate_query(set: &FeasibleSet, x: &Point, delta_c: f64) -> Result<()> {
    if !(delta_c > 0.0 && delta_c.is_finite()) {
        return argument(format!("delta_c must be positive and finite, got {delta_c}"));
    }
    check_point(x, set.dim(), "query point")?;
    set.require(x, "query point")
}

/// Hölder exponent `nu` and constant `L_nu` of a gradient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderParams {
    pub nu: f64,
    pub l_nu: f64,
}

impl HolderParams {
    pub fn new(nu: f64, l_nu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&nu) {
            return argument(format!("Hölder exponent must lie in [0, 1], got {nu}"));
        }
        if !(l_nu >= 0.0 && l_nu.is_finite()) {
            return argument(format!("Hölder constant must be finite and non-negative, got {l_nu}"));
        }
        Ok(HolderParams { nu, l_nu })
    }
}

/// Quadratic constant that makes a Hölder-gradient function look smooth up
/// to an additive error `delta`:
/// `L(delta) = ((1-nu)/(1+nu) * 2/delta)^((1-nu)/(1+nu)) * L_nu^(2/(1+nu))`.
pub fn holder_l_of_delta(p: HolderParams, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return argument(format!("delta must be positive, got {delta}"));
    }
    let scale = p.l_nu.powf(2.0 / (1.0 + p.nu));
    if p.nu == 1.0 {
        return Ok(scale);
    }
    let expo = (1.0 - p.nu) / (1.0 + p.nu);
    Ok((expo * 2.0 / delta).powf(expo) * scale)
}

/// Hölder parameters of `f(x) = max_u {-G(u) + <Au, x>}` for a uniformly
/// convex `G` of degree `rho` with parameter `sigma_rho`:
/// `nu = 1/(rho-1)`, `L_nu = ||A||^(rho/(rho-1)) / sigma_rho^(1/(rho-1))`.
pub fn holder_params_from_inner_max(rho: f64, sigma_rho: f64, a_norm: f64) -> Result<HolderParams> {
    if !(rho >= 2.0 && rho.is_finite()) {
        return argument(format!("uniform convexity degree must be >= 2, got {rho}"));
    }
    if !(sigma_rho > 0.0) {
        return argument("sigma_rho must be positive");
    }
    if !(a_norm >= 0.0) {
        return argument("operator norm must be non-negative");
    }
    let nu = 1.0 / (rho - 1.0);
    let l_nu = a_norm.powf(rho / (rho - 1.0)) / sigma_rho.powf(1.0 / (rho - 1.0));
    HolderParams::new(nu, l_nu)
}

/// Declared dependence `L(delta_c)` of an oracle, used only by verifiers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvatureModel {
    /// `L(delta_c) = L` for every `delta_c`.
    Lipschitz { l: f64 },
    /// Exact oracle of a Hölder-gradient function: `L(delta_c)` is
    /// [`holder_l_of_delta`] at `delta_c`.
    Holder(HolderParams),
    /// Inner-maximization oracle: the inner problem is solved to
    /// `delta = delta_c / 4` and `L(delta_c) = 2 L_holder(delta_c / 4)`.
    InnerMax(HolderParams),
}

impl CurvatureModel {
    pub fn l_of_delta(&self, delta_c: f64) -> Result<f64> {
        match self {
            CurvatureModel::Lipschitz { l } => {
                if !(delta_c > 0.0) {
                    return argument("delta must be positive");
                }
                Ok(*l)
            }
            CurvatureModel::Holder(p) => holder_l_of_delta(*p, delta_c),
            CurvatureModel::InnerMax(p) => Ok(2.0 * holder_l_of_delta(*p, delta_c / 4.0)?),
        }
    }

    /// Constant `L` with `L(delta_c) <= L` for all `delta_c`, when one exists.
    pub fn constant_l(&self) -> Option<f64> {
        match self {
            CurvatureModel::Lipschitz { l } => Some(*l),
            CurvatureModel::Holder(p) if p.nu == 1.0 => Some(p.l_nu),
            CurvatureModel::InnerMax(p) if p.nu == 1.0 => Some(2.0 * p.l_nu),
            _ => None,
        }
    }

    /// Parameters `(nu, L_nu)` such that `L(delta_c)` equals
    /// [`holder_l_of_delta`] with them. For the inner-max model the constant
    /// absorbs the factor 2 and the `delta_c / 4` rescaling:
    /// `L_nu' = 2^((3-nu)/2) L_nu`.
    pub fn effective_holder(&self) -> HolderParams {
        match self {
            CurvatureModel::Lipschitz { l } => HolderParams { nu: 1.0, l_nu: *l },
            CurvatureModel::Holder(p) => *p,
            CurvatureModel::InnerMax(p) => HolderParams {
                nu: p.nu,
                l_nu: 2f64.powf((3.0 - p.nu) / 2.0) * p.l_nu,
            },
        }
    }
}

impl fmt::Display for CurvatureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvatureModel::Lipschitz { l } => write!(f, "lipschitz:{l}"),
            CurvatureModel::Holder(p) => write!(f, "holder:{}:{}", p.nu, p.l_nu),
            CurvatureModel::InnerMax(p) => write!(f, "inner-max:{}:{}", p.nu, p.l_nu),
        }
    }
}

impl FromStr for CurvatureModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> Result<f64> {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{t}' in curvature model '{s}'")))
        };
        match parts.as_slice() {
            ["lipschitz", l] => Ok(CurvatureModel::Lipschitz { l: num(l)? }),
            ["holder", nu, l] => Ok(CurvatureModel::Holder(HolderParams::new(num(nu)?, num(l)?)?)),
            ["inner-max", nu, l] => Ok(CurvatureModel::InnerMax(HolderParams::new(num(nu)?, num(l)?)?)),
            _ => Err(Error::Parse(format!("unknown curvature model '{s}'"))),
        }
    }
}
