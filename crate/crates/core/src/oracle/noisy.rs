use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{validate_query, ExactOracle, FirstOrderOracle, OracleAnswer};
use crate::error::{argument, Error, Result};
use crate::rng::derived_rng;
use crate::space::{sample_ball, FeasibleSet, NormKind, Point};

/// Error budgets of an additively perturbed oracle.
///
/// The value is perturbed by at most `value_c + value_u` and the gradient by
/// at most `grad_c + grad_u` in the dual norm. The `*_c` parts shrink with the
/// requested accuracy, the `*_u` parts do not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBudgets {
    pub value_c: f64,
    pub value_u: f64,
    pub grad_c: f64,
    pub grad_u: f64,
}

impl NoiseBudgets {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("value_c", self.value_c),
            ("value_u", self.value_u),
            ("grad_c", self.grad_c),
            ("grad_u", self.grad_u),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return argument(format!("noise budget {name} must be finite and non-negative, got {v}"));
            }
        }
        Ok(())
    }
}

/// Wraps an exact oracle on a bounded set and adds bounded value and gradient noise.
///
/// With diameter `D`, the controlled error is `value_c + grad_c * D` and the
/// uncontrolled error grows by `value_u + grad_u * D`. When the caller asks
/// for less than the full controlled error, the controlled noise is scaled
/// down to match. Noise is a deterministic function of the seed, the query
/// point and the requested accuracy.
pub struct NoisyOracle {
    inner: Arc<ExactOracle>,
    budgets: NoiseBudgets,
    diameter: f64,
    dual: NormKind,
    seed: u64,
}

/// Builds a [`NoisyOracle`]. `diameter` must bound the diameter of the
/// feasible set in `norm`; the gradient noise is bounded in the dual norm.
pub fn make_noise_wrapped_oracle(
    inner: Arc<ExactOracle>,
    budgets: NoiseBudgets,
    diameter: f64,
    norm: NormKind,
    seed: u64,
) -> Result<NoisyOracle> {
    budgets.validate()?;
    let set = inner.feasible_set();
    if !set.is_bounded() {
        return Err(Error::Capability("noise wrapping needs a bounded feasible set".into()));
    }
    let true_diam = set.diameter(norm);
    if !(diameter.is_finite() && diameter >= true_diam * (1.0 - 1e-12)) {
        return argument(format!("diameter {diameter} is below the set diameter {true_diam}"));
    }
    Ok(NoisyOracle { inner, budgets, diameter, dual: norm, seed })
}

impl NoisyOracle {
    pub fn budgets(&self) -> NoiseBudgets {
        self.budgets
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Largest controlled error the wrapper ever reports.
    pub fn full_controlled_error(&self) -> f64 {
        self.budgets.value_c + self.budgets.grad_c * self.diameter
    }

    fn query_rng(&self, x: &Point, delta_c: f64) -> ChaCha8Rng {
        derived_rng(self.seed, x.iter().map(|v| v.to_bits()).chain([delta_c.to_bits()]))
    }
}

fn symmetric<R: Rng>(rng: &mut R, a: f64) -> f64 {
    if a > 0.0 {
        rng.random_range(-a..=a)
    } else {
        0.0
    }
}

impl FirstOrderOracle for NoisyOracle {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn feasible_set(&self) -> &FeasibleSet {
        self.inner.feasible_set()
    }

    fn uncontrolled_error(&self) -> f64 {
        self.budgets.value_u + self.budgets.grad_u * self.diameter
    }

    fn query(&self, x: &Point, delta_c: f64) -> Result<OracleAnswer> {
        validate_query(self.feasible_set(), x, delta_c)?;
        let base = self.inner.query(x, delta_c)?;
        let full = self.full_controlled_error();
        let scale = if full > 0.0 { (delta_c / full).min(1.0) } else { 0.0 };
        let b = &self.budgets;
        let mut rng = self.query_rng(x, delta_c);

        let value_amp = scale * b.value_c + b.value_u;
        let f_approx = base.f_approx + symmetric(&mut rng, value_amp);

        let grad_amp = scale * b.grad_c + b.grad_u;
        let n = x.len();
        let noise = match self.dual {
            // Dual of l2 is l2.
            NormKind::L2 => sample_ball(&mut rng, &Point::zeros(n), grad_amp),
            // Dual of l1 is l-infinity.
            NormKind::L1 => Point::from_iterator(n, (0..n).map(|_| symmetric(&mut rng, grad_amp))),
        };
        Ok(OracleAnswer {
            f_approx,
            g_approx: base.g_approx + noise,
            delta_c_used: scale * full,
            delta_u_bound: b.value_u + b.grad_u * self.diameter,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{ExactOracle, FnFunction};

    fn wrapped(budgets: NoiseBudgets) -> NoisyOracle {
        let f = FnFunction::shared(2, |x: &Point| 0.5 * x.norm_squared(), |x: &Point| x.clone());
        let inner = Arc::new(ExactOracle::new(f, FeasibleSet::cube(2, 1.0).unwrap()).unwrap());
        let d = 2.0 * 2f64.sqrt();
        make_noise_wrapped_oracle(inner, budgets, d, NormKind::L2, 11).unwrap()
    }

    const B: NoiseBudgets = NoiseBudgets { value_c: 0.01, value_u: 0.002, grad_c: 0.03, grad_u: 0.001 };

    #[test]
    fn errors_stay_within_budgets() {
        let o = wrapped(B);
        let d = o.diameter();
        let x = Point::from_vec(vec![0.3, -0.7]);
        for &dc in &[1.0, 0.05, 1e-3, 1e-7] {
            let a = o.query(&x, dc).unwrap();
            let scale = (dc / o.full_controlled_error()).min(1.0);
            assert!((a.f_approx - 0.29).abs() <= scale * B.value_c + B.value_u + 1e-15);
            assert!((&a.g_approx - &x).norm() <= scale * B.grad_c + B.grad_u + 1e-15);
            assert!(a.delta_c_used <= dc * (1.0 + 1e-12));
            assert!((a.delta_u_bound - (B.value_u + B.grad_u * d)).abs() < 1e-15);
        }
        assert_eq!(o.uncontrolled_error(), B.value_u + B.grad_u * d);
    }

    #[test]
    fn deterministic_per_query() {
        let o = wrapped(B);
        let x = Point::from_vec(vec![0.1, 0.2]);
        assert_eq!(o.query(&x, 0.1).unwrap(), o.query(&x, 0.1).unwrap());
        assert_ne!(o.query(&x, 0.1).unwrap().f_approx, o.query(&x, 0.01).unwrap().f_approx);
    }

    #[test]
    fn zero_budgets_are_exact() {
        let o = wrapped(NoiseBudgets { value_c: 0.0, value_u: 0.0, grad_c: 0.0, grad_u: 0.0 });
        let x = Point::from_vec(vec![0.1, 0.2]);
        let a = o.query(&x, 0.1).unwrap();
        assert_eq!(a.f_approx, 0.5 * x.norm_squared());
        assert_eq!(a.g_approx, x);
    }

    #[test]
    fn rejects_unbounded_sets_and_small_diameters() {
        let f = FnFunction::shared(2, |x: &Point| x.sum(), |_: &Point| Point::from_element(2, 1.0));
        let inner = Arc::new(ExactOracle::new(f.clone(), FeasibleSet::whole_space(2).unwrap()).unwrap());
        assert!(matches!(
            make_noise_wrapped_oracle(inner, B, 1.0, NormKind::L2, 0),
            Err(Error::Capability(_))
        ));
        let inner = Arc::new(ExactOracle::new(f, FeasibleSet::cube(2, 1.0).unwrap()).unwrap());
        assert!(make_noise_wrapped_oracle(inner.clone(), B, 1.0, NormKind::L2, 0).is_err());
        let bad = NoiseBudgets { value_c: -1.0, ..B };
        assert!(make_noise_wrapped_oracle(inner, bad, 3.0, NormKind::L2, 0).is_err());
    }
}
