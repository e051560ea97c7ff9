//! Points, norms, feasible sets and the simple convex part `h`.
//!
//! Every set kind here supports exact linear minimization, Euclidean
//! projection and uniform sampling. The prox, certificate and stationarity
//! code is built on those three primitives.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};

/// Iterates and query points. Gradients (elements of the dual space) use the
/// same representation.
pub type Point = DVector<f64>;

/// Absolute tolerance used by membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Rejects dimension mismatches and non-finite coordinates.
pub fn check_point(x: &Point, dim: usize, what: &'static str) -> Result<()> {
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(())
}

/// Primal norm of a proximal setup. The dual norm is derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L2,
    L1,
}

impl NormKind {
    pub fn norm(self, v: &Point) -> f64 {
        match self {
            NormKind::L2 => v.norm(),
            NormKind::L1 => v.iter().map(|c| c.abs()).sum(),
        }
    }

    /// Norm of the dual space: `l2` is self-dual, the dual of `l1` is `l-inf`.
    pub fn dual_norm(self, v: &Point) -> f64 {
        match self {
            NormKind::L2 => v.norm(),
            NormKind::L1 => v.iter().fold(0.0_f64, |m, c| m.max(c.abs())),
        }
    }
}

/// Result of minimizing a linear function `<c, u>` over a set.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMin {
    /// `-inf` when the set is unbounded in the direction `-c`.
    pub value: f64,
    pub argmin: Option<Point>,
}

/// A closed convex feasible set `X`.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    WholeSpace { dim: usize },
    Box { lower: Point, upper: Point },
    Ball { center: Point, radius: f64 },
    /// The standard simplex `{x >= 0, sum x = 1}`.
    Simplex { dim: usize },
}

impl FeasibleSet {
    pub fn whole_space(dim: usize) -> Result<Self> {
        if dim == 0 {
            return argument("dimension must be at least 1");
        }
        Ok(FeasibleSet::WholeSpace { dim })
    }

    pub fn new_box(lower: Point, upper: Point) -> Result<Self> {
        if lower.is_empty() {
            return argument("dimension must be at least 1");
        }
        check_point(&upper, lower.len(), "box upper bound")?;
        if lower.iter().any(|v| v.is_nan()) {
            return Err(Error::NonFinite("box lower bound"));
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return argument("box requires lower <= upper coordinatewise");
        }
        if lower.iter().chain(upper.iter()).any(|v| v.is_infinite()) {
            return argument("box bounds must be finite");
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// The cube `[-half_width, half_width]^dim`.
    pub fn cube(dim: usize, half_width: f64) -> Result<Self> {
        Self::new_box(
            Point::from_element(dim, -half_width),
            Point::from_element(dim, half_width),
        )
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return argument("dimension must be at least 1");
        }
        check_point(&center, center.len(), "ball center")?;
        if !(radius > 0.0 && radius.is_finite()) {
            return argument("ball radius must be positive and finite");
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return argument("dimension must be at least 1");
        }
        Ok(FeasibleSet::Simplex { dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::WholeSpace { dim } | FeasibleSet::Simplex { dim } => *dim,
            FeasibleSet::Box { lower, .. } => lower.len(),
            FeasibleSet::Ball { center, .. } => center.len(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FeasibleSet::WholeSpace { .. } => "whole-space",
            FeasibleSet::Box { .. } => "box",
            FeasibleSet::Ball { .. } => "ball",
            FeasibleSet::Simplex { .. } => "simplex",
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, FeasibleSet::WholeSpace { .. })
    }

    pub fn contains(&self, x: &Point) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let tol = MEMBERSHIP_TOL;
        match self {
            FeasibleSet::WholeSpace { .. } => true,
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .all(|(v, (l, u))| *v >= l - tol * (1.0 + l.abs()) && *v <= u + tol * (1.0 + u.abs())),
            FeasibleSet::Ball { center, radius } => {
                (x - center).norm() <= radius * (1.0 + tol) + tol
            }
            FeasibleSet::Simplex { .. } => {
                x.iter().all(|v| *v >= -tol) && (x.sum() - 1.0).abs() <= tol
            }
        }
    }

    /// Membership test returning a domain error for infeasible points.
    pub fn require(&self, x: &Point, what: &'static str) -> Result<()> {
        check_point(x, self.dim(), what)?;
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{what} lies outside the {} set", self.kind_name())))
        }
    }

    /// Diameter `max ||x - y||` in the given norm; `inf` for the whole space.
    pub fn diameter(&self, norm: NormKind) -> f64 {
        match self {
            FeasibleSet::WholeSpace { .. } => f64::INFINITY,
            FeasibleSet::Box { lower, upper } => norm.norm(&(upper - lower)),
            FeasibleSet::Ball { center, radius } => match norm {
                NormKind::L2 => 2.0 * radius,
                // The l1 diameter of an l2 ball is 2r * sqrt(n).
                NormKind::L1 => 2.0 * radius * (center.len() as f64).sqrt(),
            },
            FeasibleSet::Simplex { dim } => match (norm, dim) {
                (_, 1) => 0.0,
                (NormKind::L1, _) => 2.0,
                (NormKind::L2, _) => std::f64::consts::SQRT_2,
            },
        }
    }

    /// A canonical interior (or relative interior) point.
    pub fn center(&self) -> Point {
        match self {
            FeasibleSet::WholeSpace { dim } => Point::zeros(*dim),
            FeasibleSet::Box { lower, upper } => (lower + upper) * 0.5,
            FeasibleSet::Ball { center, .. } => center.clone(),
            FeasibleSet::Simplex { dim } => Point::from_element(*dim, 1.0 / *dim as f64),
        }
    }

    /// Exact minimization of `<c, u>` over the set.
    pub fn min_linear(&self, c: &Point) -> LinearMin {
        match self {
            FeasibleSet::WholeSpace { dim } => {
                if c.iter().all(|v| *v == 0.0) {
                    LinearMin {
                        value: 0.0,
                        argmin: Some(Point::zeros(*dim)),
                    }
                } else {
                    LinearMin {
                        value: f64::NEG_INFINITY,
                        argmin: None,
                    }
                }
            }
            FeasibleSet::Box { lower, upper } => {
                let u = Point::from_iterator(
                    c.len(),
                    c.iter()
                        .zip(lower.iter().zip(upper.iter()))
                        .map(|(ci, (l, u))| if *ci > 0.0 { *l } else { *u }),
                );
                LinearMin {
                    value: c.dot(&u),
                    argmin: Some(u),
                }
            }
            FeasibleSet::Ball { center, radius } => {
                let n = c.norm();
                let u = if n > 0.0 { center - c * (radius / n) } else { center.clone() };
                LinearMin {
                    value: c.dot(center) - radius * n,
                    argmin: Some(u),
                }
            }
            FeasibleSet::Simplex { dim } => {
                let (i, v) = c
                    .iter()
                    .enumerate()
                    .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if *v < bv { (i, *v) } else { (bi, bv) });
                let mut u = Point::zeros(*dim);
                u[i] = 1.0;
                LinearMin {
                    value: v,
                    argmin: Some(u),
                }
            }
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, v: &Point) -> Point {
        match self {
            FeasibleSet::WholeSpace { .. } => v.clone(),
            FeasibleSet::Box { lower, upper } => Point::from_iterator(
                v.len(),
                v.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(x, (l, u))| x.clamp(*l, *u)),
            ),
            FeasibleSet::Ball { center, radius } => {
                let d = v - center;
                let n = d.norm();
                if n <= *radius {
                    v.clone()
                } else {
                    center + d * (radius / n)
                }
            }
            FeasibleSet::Simplex { .. } => project_simplex(v),
        }
    }

    /// Uniform sample from the set. Whole-space samples are drawn from the
    /// ball of radius `whole_space_radius` around the origin.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, whole_space_radius: f64) -> Point {
        match self {
            FeasibleSet::WholeSpace { dim } => {
                sample_ball(rng, &Point::zeros(*dim), whole_space_radius)
            }
            FeasibleSet::Box { lower, upper } => Point::from_iterator(
                lower.len(),
                lower
                    .iter()
                    .zip(upper.iter())
                    .map(|(l, u)| if l == u { *l } else { rng.random_range(*l..=*u) }),
            ),
            FeasibleSet::Ball { center, radius } => sample_ball(rng, center, *radius),
            FeasibleSet::Simplex { dim } => {
                let e: Vec<f64> = (0..*dim).map(|_| Exp1.sample(rng)).collect();
                let s: f64 = e.iter().sum();
                Point::from_iterator(*dim, e.into_iter().map(|v| v / s))
            }
        }
    }

    /// A feasible point at distance about `scale` from `x`.
    pub fn sample_near<R: Rng + ?Sized>(&self, rng: &mut R, x: &Point, scale: f64) -> Point {
        match self {
            FeasibleSet::Simplex { dim } => {
                // Multiplicative perturbation keeps the point in the relative interior.
                let mut y = Point::from_iterator(
                    *dim,
                    x.iter().map(|v| {
                        let z: f64 = StandardNormal.sample(rng);
                        v.max(1e-300) * (scale * z).exp()
                    }),
                );
                let s = y.sum();
                y /= s;
                y
            }
            _ => {
                let d = random_unit(rng, x.len());
                self.project(&(x + d * scale))
            }
        }
    }
}

/// Uniformly distributed unit vector.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Point {
    loop {
        let v = Point::from_iterator(dim, (0..dim).map(|_| StandardNormal.sample(rng)));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

pub(crate) fn sample_ball<R: Rng + ?Sized>(rng: &mut R, center: &Point, radius: f64) -> Point {
    let d = random_unit(rng, center.len());
    let r: f64 = rng.random::<f64>().powf(1.0 / center.len() as f64) * radius;
    center + d * r
}

/// Euclidean projection onto the standard simplex (sort-based).
pub fn project_simplex(v: &Point) -> Point {
    let mut s: Vec<f64> = v.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, si) in s.iter().enumerate() {
        cum += si;
        let t = (cum - 1.0) / (i as f64 + 1.0);
        if *si - t > 0.0 {
            theta = t;
        }
    }
    v.map(|x| (x - theta).max(0.0))
}

/// Componentwise soft-thresholding `sign(v) * max(|v| - t, 0)`.
pub fn soft_threshold(v: &Point, t: f64) -> Point {
    v.map(|x| x.signum() * (x.abs() - t).max(0.0))
}

/// The simple convex part `h` of the composite objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SimpleConvexPart {
    Zero,
    /// `lambda * ||x||_1`.
    L1 { lambda: f64 },
}

impl SimpleConvexPart {
    pub fn l1(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return argument("l1 weight must be finite and non-negative");
        }
        Ok(SimpleConvexPart::L1 { lambda })
    }

    pub fn value(&self, x: &Point) -> f64 {
        match self {
            SimpleConvexPart::Zero => 0.0,
            SimpleConvexPart::L1 { lambda } => lambda * x.iter().map(|v| v.abs()).sum::<f64>(),
        }
    }

    /// Subgradient selection; at a zero coordinate of the l1 part the
    /// selection is 0.
    pub fn subgradient(&self, x: &Point) -> Point {
        match self {
            SimpleConvexPart::Zero => Point::zeros(x.len()),
            SimpleConvexPart::L1 { lambda } => x.map(|v| {
                if v > 0.0 {
                    *lambda
                } else if v < 0.0 {
                    -lambda
                } else {
                    0.0
                }
            }),
        }
    }

    /// Interval `[lo, hi]` of admissible subgradients for coordinate value `v`.
    pub(crate) fn subdifferential_interval(&self, v: f64) -> (f64, f64) {
        match self {
            SimpleConvexPart::Zero => (0.0, 0.0),
            SimpleConvexPart::L1 { lambda } => {
                if v > 0.0 {
                    (*lambda, *lambda)
                } else if v < 0.0 {
                    (-lambda, -lambda)
                } else {
                    (-lambda, *lambda)
                }
            }
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            SimpleConvexPart::Zero => 0.0,
            SimpleConvexPart::L1 { lambda } => *lambda,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(v: &[f64]) -> Point {
        Point::from_row_slice(v)
    }

    #[test]
    fn box_rejects_inverted_bounds() {
        assert!(FeasibleSet::new_box(p(&[1.0]), p(&[0.0])).is_err());
        assert!(FeasibleSet::ball(p(&[0.0]), 0.0).is_err());
    }

    #[test]
    fn linear_minimization_closed_forms() {
        let b = FeasibleSet::new_box(p(&[0.0, -1.0]), p(&[1.0, 2.0])).unwrap();
        let m = b.min_linear(&p(&[1.0, -1.0]));
        assert_eq!(m.value, -2.0);
        assert_eq!(m.argmin.unwrap(), p(&[0.0, 2.0]));

        let ball = FeasibleSet::ball(p(&[1.0, 0.0]), 2.0).unwrap();
        let m = ball.min_linear(&p(&[0.0, 3.0]));
        assert!((m.value + 6.0).abs() < 1e-15);

        let s = FeasibleSet::simplex(3).unwrap();
        assert_eq!(s.min_linear(&p(&[0.3, -0.2, 0.1])).value, -0.2);

        let w = FeasibleSet::whole_space(2).unwrap();
        assert_eq!(w.min_linear(&p(&[0.0, 1e-30])).value, f64::NEG_INFINITY);
        assert_eq!(w.min_linear(&p(&[0.0, 0.0])).value, 0.0);
    }

    #[test]
    fn samples_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sets = [
            FeasibleSet::cube(3, 2.0).unwrap(),
            FeasibleSet::ball(p(&[1.0, -1.0, 0.5]), 0.7).unwrap(),
            FeasibleSet::simplex(3).unwrap(),
        ];
        for set in &sets {
            for _ in 0..200 {
                let x = set.sample(&mut rng, 10.0);
                assert!(set.contains(&x), "{set:?} {x}");
                let y = set.sample_near(&mut rng, &x, 0.1);
                assert!(set.contains(&y), "{set:?} {y}");
            }
        }
    }

    #[test]
    fn simplex_projection_sums_to_one() {
        let v = p(&[0.9, 0.8, -0.3]);
        let x = project_simplex(&v);
        assert!((x.sum() - 1.0).abs() < 1e-15);
        assert!((x[0] - 0.55).abs() < 1e-15 && (x[1] - 0.45).abs() < 1e-15 && x[2] == 0.0);
    }

    #[test]
    fn l1_subgradient_selection_is_zero_at_zero() {
        let h = SimpleConvexPart::l1(0.3).unwrap();
        assert_eq!(h.subgradient(&p(&[-2.0, 0.0, 1.0])), p(&[-0.3, 0.0, 0.3]));
        assert!(SimpleConvexPart::l1(-1.0).is_err());
    }

    #[test]
    fn l1_subgradient_inequality_on_samples() {
        let h = SimpleConvexPart::l1(0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let set = FeasibleSet::cube(4, 3.0).unwrap();
        for _ in 0..500 {
            let mut x = set.sample(&mut rng, 1.0);
            x[0] = 0.0;
            let y = set.sample(&mut rng, 1.0);
            let lhs = h.value(&y);
            let rhs = h.value(&x) + h.subgradient(&x).dot(&(&y - &x));
            assert!(lhs >= rhs - 1e-12);
        }
    }

    #[test]
    fn diameters() {
        let b = FeasibleSet::cube(4, 1.0).unwrap();
        assert_eq!(b.diameter(NormKind::L2), 4.0);
        assert_eq!(b.diameter(NormKind::L1), 8.0);
        assert_eq!(FeasibleSet::simplex(3).unwrap().diameter(NormKind::L1), 2.0);
        assert!(FeasibleSet::whole_space(2).unwrap().diameter(NormKind::L2).is_infinite());
    }
}
