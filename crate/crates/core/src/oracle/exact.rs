use std::sync::Arc;

use super::{validate_query, FirstOrderOracle, OracleAnswer, SmoothFunction};
use crate::error::{Error, Result};
use crate::space::{FeasibleSet, Point};

/// Oracle returning the exact value and gradient. It honors any requested
/// `delta_c` and has no uncontrolled error.
#[derive(Clone)]
pub struct ExactOracle {
    f: Arc<dyn SmoothFunction>,
    set: FeasibleSet,
}

impl ExactOracle {
    pub fn new(f: Arc<dyn SmoothFunction>, set: FeasibleSet) -> Result<Self> {
        if f.dim() != set.dim() {
            return Err(Error::DimensionMismatch { expected: set.dim(), got: f.dim() });
        }
        Ok(ExactOracle { f, set })
    }

    pub fn function(&self) -> &Arc<dyn SmoothFunction> {
        &self.f
    }
}

impl FirstOrderOracle for ExactOracle {
    fn dim(&self) -> usize {
        self.set.dim()
    }

    fn feasible_set(&self) -> &FeasibleSet {
        &self.set
    }

    fn uncontrolled_error(&self) -> f64 {
        0.0
    }

    fn query(&self, x: &Point, delta_c: f64) -> Result<OracleAnswer> {
        validate_query(&self.set, x, delta_c)?;
        let f_approx = self.f.value(x);
        let g_approx = self.f.gradient(x);
        if !f_approx.is_finite() || g_approx.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("oracle answer"));
        }
        Ok(OracleAnswer { f_approx, g_approx, delta_c_used: delta_c, delta_u_bound: 0.0 })
    }
}
