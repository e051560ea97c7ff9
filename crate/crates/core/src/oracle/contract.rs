use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FirstOrderOracle, SmoothFunction};
use crate::error::{argument, Result};
use crate::space::{FeasibleSet, NormKind};

/// Slack allowed for floating-point error in the contract inequalities.
pub const CONTRACT_TOL: f64 = 1e-9;

/// Outcome of [`oracle_contract_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContractReport {
    pub trials: usize,
    pub failures: usize,
    /// Smallest slack seen over both inequalities; negative means violated.
    pub worst_slack: f64,
}

impl ContractReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Checks the oracle inequalities against the true function on random pairs
/// `(x, y)` of `set` and random accuracies `delta_c` in `[1e-6, 1]`.
///
/// Half of the `y` are drawn uniformly from the set, half close to `x` at
/// distances between `1e-4` and `1`. Whole-space samples come from the ball
/// of radius 10.
pub fn oracle_contract_check(
    oracle: &dyn FirstOrderOracle,
    truth: &dyn SmoothFunction,
    set: &FeasibleSet,
    norm: NormKind,
    l_of_delta: &dyn Fn(f64) -> Result<f64>,
    trials: usize,
    seed: u64,
) -> Result<ContractReport> {
    if trials == 0 {
        return argument("trials must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for t in 0..trials {
        let x = set.sample(&mut rng, 10.0);
        let y = if t % 2 == 0 {
            set.sample(&mut rng, 10.0)
        } else {
            let scale = 10f64.powf(rng.random_range(-4.0..=0.0));
            set.sample_near(&mut rng, &x, scale)
        };
        let delta_c = 10f64.powf(rng.random_range(-6.0..=0.0));
        let ans = oracle.query(&x, delta_c)?;
        let err = ans.delta_c_used + ans.delta_u_bound;
        let fx = truth.value(&x);
        let value_slack = err - (fx - ans.f_approx).abs();
        let l = l_of_delta(ans.delta_c_used.max(f64::MIN_POSITIVE))?;
        let d = &y - &x;
        let upper = ans.f_approx + ans.g_approx.dot(&d) + 0.5 * l * norm.norm(&d).powi(2) + err;
        let upper_slack = upper - truth.value(&y);
        let slack = value_slack.min(upper_slack);
        let scale = 1.0 + fx.abs();
        if slack < -CONTRACT_TOL * scale {
            failures += 1;
        }
        worst = worst.min(slack);
    }
    Ok(ContractReport { trials, failures, worst_slack: worst })
}
