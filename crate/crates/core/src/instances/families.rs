//! Epigraph test families: `K = epi f` in `R^{n+1}` against the hyperplane
//! `U = {s = 0}`.
//!
//! Family one uses `f` with `f(0) = 0` and `grad f(x) = 0` only at the
//! origin, so `K ∩ U = {0}` and the approximate methods slow down near it.
//! Family two uses radial functions `f(x) = phi(|x|)` with `phi(0) < 0`, so
//! `K ∩ U` is a full-dimensional disk and the error bound holds.

use std::fmt;
use std::sync::Arc;

use crate::analysis::SolutionSet;
use crate::error::{CfpError, Result};
use crate::geometry::{AffineSubspace, Vector};
use crate::sets::{ConvexSet, Epigraph, SmoothFunction};
use crate::solvers::{Problem, Subspace};

/// Tolerance for the hypothesis checks at the origin.
pub const HYPOTHESIS_TOL: f64 = 1e-12;

/// A scalar profile `phi` on `[0, inf)`.
pub trait RadialProfile: Send + Sync {
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;

    fn name(&self) -> String {
        "radial profile".to_string()
    }
}

/// `phi(t) = t^p - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedPower {
    power: u32,
}

impl ShiftedPower {
    pub fn new(power: u32) -> Self {
        Self { power }
    }

    pub fn power(&self) -> u32 {
        self.power
    }
}

impl RadialProfile for ShiftedPower {
    fn value(&self, t: f64) -> f64 {
        t.powi(self.power as i32) - 1.0
    }

    fn derivative(&self, t: f64) -> f64 {
        match self.power {
            0 => 0.0,
            p => p as f64 * t.powi(p as i32 - 1),
        }
    }

    fn name(&self) -> String {
        format!("t^{} - 1", self.power)
    }
}

/// `f(x) = |x|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticNorm {
    dim: usize,
}

impl QuadraticNorm {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl SmoothFunction for QuadraticNorm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        (x.norm_squared(), x * 2.0)
    }

    fn name(&self) -> String {
        "|x|^2".to_string()
    }
}

/// `f(x) = |x|^4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticNorm {
    dim: usize,
}

impl QuarticNorm {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl SmoothFunction for QuarticNorm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        let sq = x.norm_squared();
        (sq * sq, x * (4.0 * sq))
    }

    fn name(&self) -> String {
        "|x|^4".to_string()
    }
}

/// `f(x) = sum_i w_i x_i^2` with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedQuadratic {
    weights: Vector,
}

impl WeightedQuadratic {
    pub fn new(weights: Vector) -> Result<Self> {
        if weights.is_empty() {
            return Err(CfpError::EmptyVector);
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(CfpError::InvalidSet("weights must be positive".into()));
        }
        Ok(Self { weights })
    }
}

impl SmoothFunction for WeightedQuadratic {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        let wx = self.weights.component_mul(x);
        (wx.dot(x), wx * 2.0)
    }

    fn name(&self) -> String {
        "x^T diag(w) x".to_string()
    }
}

/// `f(x) = phi(|x|)` on `R^n`; the gradient at the origin is taken as zero.
#[derive(Clone)]
pub struct RadialFunction {
    profile: Arc<dyn RadialProfile>,
    dim: usize,
}

impl RadialFunction {
    pub fn new(profile: Arc<dyn RadialProfile>, dim: usize) -> Self {
        Self { profile, dim }
    }
}

impl SmoothFunction for RadialFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        let t = x.norm();
        let value = self.profile.value(t);
        if t == 0.0 {
            return (value, Vector::zeros(x.len()));
        }
        (value, x * (self.profile.derivative(t) / t))
    }

    fn name(&self) -> String {
        format!("phi(|x|), phi(t) = {}", self.profile.name())
    }
}

#[derive(Clone)]
pub enum Family {
    One(Arc<dyn SmoothFunction>),
    Two {
        profile: Arc<dyn RadialProfile>,
        dim: usize,
    },
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::One(g) => f.debug_tuple("One").field(&g.name()).finish(),
            Family::Two { profile, dim } => f
                .debug_struct("Two")
                .field("profile", &profile.name())
                .field("dim", dim)
                .finish(),
        }
    }
}

impl Family {
    /// Family one with `f = |x|^2` on `R^dim`.
    pub fn quadratic_norm(dim: usize) -> Self {
        Family::One(Arc::new(QuadraticNorm::new(dim)))
    }

    /// Family two with `phi(t) = t^power - 1` on `R^dim`.
    pub fn shifted_power(power: u32, dim: usize) -> Self {
        Family::Two {
            profile: Arc::new(ShiftedPower::new(power)),
            dim,
        }
    }

    /// Looks up a named shape: family one takes `quadratic` or `quartic`,
    /// family two `quadratic` (`t^2 - 1`) or `quartic` (`t^4 - 1`).
    pub fn by_name(family: u8, shape: &str, dim: usize) -> Result<Self> {
        match (family, shape) {
            (1, "quadratic") => Ok(Family::quadratic_norm(dim)),
            (1, "quartic") => Ok(Family::One(Arc::new(QuarticNorm::new(dim)))),
            (2, "quadratic") => Ok(Family::shifted_power(2, dim)),
            (2, "quartic") => Ok(Family::shifted_power(4, dim)),
            (1 | 2, other) => Err(CfpError::InvalidConfig(format!("unknown shape `{other}`"))),
            (other, _) => Err(CfpError::InvalidConfig(format!("unknown family {other}"))),
        }
    }

    pub fn index(&self) -> u8 {
        match self {
            Family::One(_) => 1,
            Family::Two { .. } => 2,
        }
    }

    /// Dimension `n` of the base space; the problem lives in `R^{n+1}`.
    pub fn dim(&self) -> usize {
        match self {
            Family::One(f) => f.dim(),
            Family::Two { dim, .. } => *dim,
        }
    }

    pub fn function(&self) -> Arc<dyn SmoothFunction> {
        match self {
            Family::One(f) => f.clone(),
            Family::Two { profile, dim } => Arc::new(RadialFunction::new(profile.clone(), *dim)),
        }
    }

    pub fn check_hypotheses(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 {
            return Err(CfpError::EmptyVector);
        }
        match self {
            Family::One(f) => {
                let (value, grad) = f.value_and_gradient(&Vector::zeros(n));
                if value.abs() > HYPOTHESIS_TOL {
                    return Err(CfpError::HypothesisViolation(format!("f(0) = 0 fails: f(0) = {value}")));
                }
                let g = grad.norm();
                if g > HYPOTHESIS_TOL {
                    return Err(CfpError::HypothesisViolation(format!(
                        "grad f(0) = 0 fails: |grad f(0)| = {g}"
                    )));
                }
            }
            Family::Two { profile, .. } => {
                let value = profile.value(0.0);
                if !(value < 0.0) {
                    return Err(CfpError::HypothesisViolation(format!(
                        "phi(0) < 0 fails: phi(0) = {value}"
                    )));
                }
                let d = profile.derivative(0.0);
                if d.abs() > HYPOTHESIS_TOL {
                    return Err(CfpError::HypothesisViolation(format!(
                        "phi'(0) = 0 fails: phi'(0) = {d}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Radius of `{t : phi(t) <= 0}` for family two, by bisection.
    pub fn disk_radius(&self) -> Option<f64> {
        let Family::Two { profile, .. } = self else {
            return None;
        };
        let mut hi = 1.0;
        while profile.value(hi) <= 0.0 {
            hi *= 2.0;
            if hi > 1e150 {
                return None;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if profile.value(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }

    /// Default start `(x, 0)` in `U`, with `x` along `(1, ..., 1)`: at
    /// distance 1 from the origin for family one, and at twice the disk
    /// radius for family two.
    pub fn default_start(&self) -> Vector {
        let n = self.dim();
        let scale = match self {
            Family::One(_) => 1.0,
            Family::Two { .. } => 2.0 * self.disk_radius().unwrap_or(1.0),
        };
        let mut x = Vector::zeros(n + 1);
        x.rows_mut(0, n).fill(scale / (n as f64).sqrt());
        x
    }
}

/// The problem `epi f ∩ {s = 0}` with linearization cuts of `f(x) - s`.
pub fn make_family(family: &Family) -> Result<Problem> {
    family.check_hypotheses()?;
    let n = family.dim();
    let set = ConvexSet::Epigraph(Epigraph::new(family.function()));
    let mut normal = Vector::zeros(n + 1);
    normal[n] = 1.0;
    let u = AffineSubspace::hyperplane(&normal, 0.0)?;
    Problem::with_subgradient_separator(set, Subspace::Affine(u))
}

/// `K ∩ U`: the origin for family one, a flat disk for family two.
pub fn family_solution_set(family: &Family) -> Result<SolutionSet> {
    match family {
        Family::One(_) => Ok(SolutionSet::Point(Vector::zeros(family.dim() + 1))),
        Family::Two { .. } => family
            .disk_radius()
            .map(|radius| SolutionSet::FlatDisk { radius })
            .ok_or_else(|| CfpError::HypothesisViolation("phi has no positive root".into())),
    }
}
