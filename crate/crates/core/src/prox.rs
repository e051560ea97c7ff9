//! Proximal setups, Bregman divergences and the composite prox-mapping
//!
//! A proximal setup fixes a norm and a 1-strongly convex prox-function `d`.
//! The composite prox-mapping at `x_bar` with dual vector `g` and step
//! `gamma` is the minimizer of
//!
//! ```text
//! <g, x> + V[x_bar](x) / gamma + h(x)   over x in X
//! ```
//!
//! A candidate `x_tilde` is accepted with error `eps` when, for some
//! `p` in the subdifferential of `h` at `x_tilde`,
//!
//! ```text
//! <g + (d'(x_tilde) - d'(x_bar)) / gamma + p, u - x_tilde> >= -eps   for all u in X.
//! ```
//!
//! [`ProxProblem::certificate`] computes the smallest such `eps`. Every
//! supported set admits exact linear minimization, so the certificate is
//! exact rather than estimated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::space::{check_point, random_unit, soft_threshold, FeasibleSet, NormKind, Point, SimpleConvexPart};

/// Coordinates of entropy iterates are floored here before taking logarithms.
pub const ENTROPY_FLOOR: f64 = 1e-300;

/// Relative tolerance under which a whole-space residual counts as zero.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Prox-function together with the norm it is 1-strongly convex in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProxSetup {
    /// `d(x) = ||x||_2^2 / 2` with the Euclidean norm.
    Euclidean,
    /// `d(x) = sum x_i ln x_i` on the simplex with the `l1` norm.
    Entropy,
}

impl ProxSetup {
    pub fn name(self) -> &'static str {
        match self {
            ProxSetup::Euclidean => "euclidean",
            ProxSetup::Entropy => "entropy",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "euclidean" => Some(ProxSetup::Euclidean),
            "entropy" => Some(ProxSetup::Entropy),
            _ => None,
        }
    }

    pub fn norm_kind(self) -> NormKind {
        match self {
            ProxSetup::Euclidean => NormKind::L2,
            ProxSetup::Entropy => NormKind::L1,
        }
    }

    pub fn norm(self, v: &Point) -> f64 {
        self.norm_kind().norm(v)
    }

    pub fn dual_norm(self, v: &Point) -> f64 {
        self.norm_kind().dual_norm(v)
    }

    /// Prox-function value. Entropy uses `0 ln 0 = 0` and rejects negative
    /// coordinates.
    pub fn d(self, x: &Point) -> Result<f64> {
        match self {
            ProxSetup::Euclidean => Ok(0.5 * x.norm_squared()),
            ProxSetup::Entropy => {
                if x.iter().any(|v| *v < 0.0) {
                    return Err(Error::Domain("entropy is undefined for negative coordinates".into()));
                }
                Ok(x.iter().map(|v| if *v > 0.0 { v * v.ln() } else { 0.0 }).sum())
            }
        }
    }

    /// Gradient of `d`. For entropy it exists only at strictly positive
    /// coordinates.
    pub fn d_prime(self, x: &Point) -> Result<Point> {
        match self {
            ProxSetup::Euclidean => Ok(x.clone()),
            ProxSetup::Entropy => {
                if x.iter().any(|v| *v <= 0.0) {
                    return Err(Error::Domain(
                        "entropy gradient needs strictly positive coordinates".into(),
                    ));
                }
                Ok(x.map(|v| v.ln() + 1.0))
            }
        }
    }

    /// `d'` with entropy coordinates floored at [`ENTROPY_FLOOR`], for
    /// iterates that may have underflowed.
    fn d_prime_floored(self, x: &Point) -> Point {
        match self {
            ProxSetup::Euclidean => x.clone(),
            ProxSetup::Entropy => x.map(|v| v.max(ENTROPY_FLOOR).ln() + 1.0),
        }
    }

    /// Bregman divergence `V[z](x) = d(x) - d(z) - <d'(z), x - z>`.
    pub fn bregman(self, z: &Point, x: &Point) -> Result<f64> {
        check_point(z, z.len(), "z")?;
        check_point(x, z.len(), "x")?;
        match self {
            ProxSetup::Euclidean => Ok(0.5 * (x - z).norm_squared()),
            ProxSetup::Entropy => {
                self.d_prime(z)?;
                if x.iter().any(|v| *v < 0.0) {
                    return Err(Error::Domain("entropy is undefined for negative coordinates".into()));
                }
                // Written as a sum of non-negative terms so that V >= 0 holds
                // in floating point.
                Ok(x.iter()
                    .zip(z.iter())
                    .map(|(xi, zi)| {
                        let t = if *xi > 0.0 { xi * (xi / zi).ln() } else { 0.0 };
                        t - xi + zi
                    })
                    .sum::<f64>()
                    .max(0.0))
            }
        }
    }
}

/// Bregman divergence of `setup` between `z` and `x`.
pub fn bregman_divergence(setup: ProxSetup, z: &Point, x: &Point) -> Result<f64> {
    setup.bregman(z, x)
}

/// How a prox result's error bound was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    ClosedFormExact,
    VerifiedNumeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxResult {
    pub point: Point,
    /// Smallest `eps` for which the prox inequality holds at `point`.
    pub certified_error: f64,
    pub kind: CertificateKind,
}

/// Inputs of one composite prox-mapping.
#[derive(Debug, Clone, Copy)]
pub struct ProxProblem<'a> {
    pub setup: ProxSetup,
    pub set: &'a FeasibleSet,
    pub h: &'a SimpleConvexPart,
    pub x_bar: &'a Point,
    pub g: &'a Point,
    pub gamma: f64,
}

impl<'a> ProxProblem<'a> {
    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return argument(format!("prox step gamma must be positive and finite, got {}", self.gamma));
        }
        let n = self.set.dim();
        check_point(self.g, n, "g")?;
        self.set.require(self.x_bar, "x_bar")?;
        Ok(())
    }

    /// Whether a closed form exists for this (setup, set, h) combination.
    pub fn supported(setup: ProxSetup, set: &FeasibleSet, h: &SimpleConvexPart) -> Result<()> {
        match (setup, set) {
            (ProxSetup::Euclidean, FeasibleSet::WholeSpace { .. } | FeasibleSet::Box { .. }) => Ok(()),
            (ProxSetup::Euclidean, FeasibleSet::Ball { center, .. }) => {
                if h.lambda() > 0.0 && center.iter().any(|c| *c != 0.0) {
                    Err(Error::Capability(
                        "l1 prox over a ball is closed-form only for balls centred at the origin".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            (ProxSetup::Entropy, FeasibleSet::Simplex { .. }) => Ok(()),
            (s, set) => Err(Error::Capability(format!(
                "no closed-form prox for the {} setup on a {} set",
                s.name(),
                set.kind_name()
            ))),
        }
    }

    /// Solves the prox-mapping. All supported combinations are closed-form,
    /// so `delta_pc` only has to be positive.
    pub fn solve(&self, delta_pc: f64) -> Result<ProxResult> {
        self.validate()?;
        if !(delta_pc > 0.0) {
            return argument("delta_pc must be positive");
        }
        Self::supported(self.setup, self.set, self.h)?;
        let point = match self.setup {
            ProxSetup::Euclidean => {
                let v = self.x_bar - self.g * self.gamma;
                let v = soft_threshold(&v, self.gamma * self.h.lambda());
                self.set.project(&v)
            }
            ProxSetup::Entropy => {
                // On the simplex ||x||_1 = 1, so an l1 term is a constant and
                // the multiplicative-weights update is the minimizer.
                let logits: Vec<f64> = self
                    .x_bar
                    .iter()
                    .zip(self.g.iter())
                    .map(|(x, g)| x.max(ENTROPY_FLOOR).ln() - self.gamma * g)
                    .collect();
                let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = logits.iter().map(|a| (a - m).exp()).collect();
                let s: f64 = w.iter().sum();
                Point::from_iterator(w.len(), w.iter().map(|v| (v / s).max(ENTROPY_FLOOR)))
            }
        };
        let certified_error = self.certificate(&point)?;
        Ok(ProxResult {
            point,
            certified_error,
            kind: CertificateKind::ClosedFormExact,
        })
    }

    /// Smallest `eps >= 0` with which `candidate` satisfies the prox
    /// inequality. Returns `+inf` over the whole space when the residual
    /// does not vanish.
    pub fn certificate(&self, candidate: &Point) -> Result<f64> {
        self.validate()?;
        self.set.require(candidate, "prox candidate")?;
        let dp_c = self.setup.d_prime_floored(candidate);
        let dp_x = self.setup.d_prime_floored(self.x_bar);
        let mut q = self.g + (&dp_c - &dp_x) / self.gamma;
        // Best admissible subgradient of h: fixed off zero, free in
        // [-lambda, lambda] at zero coordinates.
        for (qi, ci) in q.iter_mut().zip(candidate.iter()) {
            let (lo, hi) = self.h.subdifferential_interval(*ci);
            *qi += (-*qi).clamp(lo, hi);
        }
        let inf = |v: &Point| v.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        let scale = 1.0 + inf(self.g) + (inf(&dp_c) + inf(&dp_x)) / self.gamma;
        match self.set {
            FeasibleSet::WholeSpace { .. } => {
                if inf(&q) <= RESIDUAL_TOL * scale {
                    Ok(0.0)
                } else {
                    Ok(f64::INFINITY)
                }
            }
            set => {
                let lm = set.min_linear(&q);
                let gap = q.dot(candidate) - lm.value;
                // Gaps at the rounding level of q and the two inner products
                // are reported as zero.
                let reach = 1.0 + candidate.lp_norm(1) + lm.argmin.as_ref().map_or(0.0, |a| a.lp_norm(1));
                let rounding = 8.0 * (candidate.len() + 1) as f64 * f64::EPSILON * scale * reach;
                Ok(if gap <= rounding { 0.0 } else { gap })
            }
        }
    }

    /// Perturbs a prox result so that its certificate grows by at most
    /// `delta_pu`. Deterministic for a fixed seed.
    pub fn inject_noise(&self, result: &ProxResult, delta_pu: f64, seed: u64) -> Result<ProxResult> {
        if !(delta_pu >= 0.0 && delta_pu.is_finite()) {
            return argument("delta_pu must be finite and non-negative");
        }
        if delta_pu == 0.0 {
            return Ok(result.clone());
        }
        let budget = result.certified_error + delta_pu;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dir = random_unit(&mut rng, result.point.len());
        let candidate = |t: f64| -> Point {
            match self.set {
                FeasibleSet::Simplex { .. } => {
                    let mut y = Point::from_iterator(
                        dir.len(),
                        result
                            .point
                            .iter()
                            .zip(dir.iter())
                            .map(|(x, d)| (x.max(ENTROPY_FLOOR) * (t * d).exp()).max(ENTROPY_FLOOR)),
                    );
                    let s = y.sum();
                    y /= s;
                    y
                }
                set => set.project(&(&result.point + &dir * t)),
            }
        };
        let within = |t: f64| -> bool {
            let y = candidate(t);
            self.set.contains(&y) && self.certificate(&y).map(|c| c <= budget).unwrap_or(false)
        };

        // Bracket the largest admissible step, then bisect.
        let (mut lo, mut hi) = (0.0, delta_pu);
        let mut grew = 0;
        while within(hi) && grew < 64 {
            lo = hi;
            hi *= 2.0;
            grew += 1;
        }
        if grew < 64 {
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if within(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        let mut t = lo * rng.random_range(0.5..=1.0);
        if !within(t) {
            t = lo;
        }
        let point = candidate(t);
        let certified_error = match self.certificate(&point) {
            Ok(c) if c <= budget && self.set.contains(&point) => c,
            // Only reachable through rounding at t == 0; keep the input.
            _ => return Ok(result.clone()),
        };
        Ok(ProxResult {
            point,
            certified_error,
            kind: CertificateKind::VerifiedNumeric,
        })
    }
}

/// Composite prox step; see [`ProxProblem::solve`].
#[allow(clippy::too_many_arguments)]
pub fn prox_step(
    setup: ProxSetup,
    set: &FeasibleSet,
    h: &SimpleConvexPart,
    x_bar: &Point,
    g: &Point,
    gamma: f64,
    delta_pc: f64,
) -> Result<ProxResult> {
    ProxProblem {
        setup,
        set,
        h,
        x_bar,
        g,
        gamma,
    }
    .solve(delta_pc)
}

/// Gradient mapping `(x_bar - x_tilde) / gamma`.
pub fn gradient_mapping(x_bar: &Point, x_tilde: &Point, gamma: f64) -> Result<Point> {
    if !(gamma > 0.0) {
        return argument("gamma must be positive");
    }
    check_point(x_tilde, x_bar.len(), "x_tilde")?;
    Ok((x_bar - x_tilde) / gamma)
}
