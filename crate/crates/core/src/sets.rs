//! Closed convex sets: membership, exact projection where one exists, and
//! the level-function oracle `(g(x), grad g(x))` with `K = {g <= 0}`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{check_dim, CfpError, Result};
use crate::geometry::{ensure_finite, project_affine, project_halfspace, AffineSubspace, HalfSpace, Vector};

/// Iteration budget for the scalar multiplier search in ellipsoid projection.
pub const NEWTON_MAX_ITER: usize = 200;

/// A differentiable convex function on `R^n`.
pub trait SmoothFunction: Send + Sync {
    fn dim(&self) -> usize;

    /// Returns `(f(x), grad f(x))`.
    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector);

    fn value(&self, x: &Vector) -> f64 {
        self.value_and_gradient(x).0
    }

    fn name(&self) -> String {
        "smooth function".to_string()
    }
}

/// Adapts a closure into a [`SmoothFunction`].
pub struct FnOracle<F> {
    dim: usize,
    name: String,
    f: F,
}

impl<F> FnOracle<F>
where
    F: Fn(&Vector) -> (f64, Vector) + Send + Sync,
{
    pub fn new(dim: usize, name: impl Into<String>, f: F) -> Self {
        Self {
            dim,
            name: name.into(),
            f,
        }
    }
}

impl<F> SmoothFunction for FnOracle<F>
where
    F: Fn(&Vector) -> (f64, Vector) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        (self.f)(x)
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

/// `{x : x^T A x + 2 x^T b - alpha <= 0}` with `A` symmetric positive definite.
#[derive(Clone)]
pub struct Ellipsoid {
    a: Arc<DMatrix<f64>>,
    b: Vector,
    alpha: f64,
    /// `alpha + b^T A^{-1} b`: the squared radius in the `A`-norm around the
    /// center `-A^{-1} b`.
    radius_sq: f64,
}

impl fmt::Debug for Ellipsoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ellipsoid")
            .field("dim", &self.dim())
            .field("alpha", &self.alpha)
            .finish()
    }
}

impl Ellipsoid {
    pub fn new(a: DMatrix<f64>, b: Vector, alpha: f64) -> Result<Self> {
        let n = b.len();
        if n == 0 {
            return Err(CfpError::EmptyVector);
        }
        if a.nrows() != n || a.ncols() != n {
            return Err(CfpError::DimensionMismatch {
                expected: n,
                found: a.nrows(),
            });
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(CfpError::NonFinite("ellipsoid matrix"));
        }
        ensure_finite(&b, "ellipsoid vector")?;
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(CfpError::InvalidSet(format!(
                "ellipsoid alpha must be positive, got {alpha}"
            )));
        }
        let scale = a.amax().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..i {
                if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                    return Err(CfpError::InvalidSet(format!(
                        "ellipsoid matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let chol = Cholesky::new(a.clone())
            .ok_or_else(|| CfpError::InvalidSet("ellipsoid matrix is not positive definite".into()))?;
        let center_shift = chol.solve(&b);
        let radius_sq = alpha + b.dot(&center_shift);
        Ok(Self {
            a: Arc::new(a),
            b,
            alpha,
            radius_sq,
        })
    }

    /// The Euclidean ball `|x - center| <= radius` as an ellipsoid.
    pub fn ball(center: &Vector, radius: f64) -> Result<Self> {
        let n = center.len();
        let alpha = radius * radius - center.norm_squared();
        Self::new(DMatrix::identity(n, n), -center, alpha)
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn linear(&self) -> &Vector {
        &self.b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn value(&self, x: &Vector) -> f64 {
        let ax = &*self.a * x;
        x.dot(&ax) + 2.0 * x.dot(&self.b) - self.alpha
    }

    /// `(g(x), 2 (A x + b))`.
    pub fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        let ax = &*self.a * x;
        let value = x.dot(&ax) + 2.0 * x.dot(&self.b) - self.alpha;
        (value, (ax + &self.b) * 2.0)
    }

    /// Exact projection together with the multiplier `lambda` of the
    /// parametrization `z(lambda) = (I + lambda A)^{-1} (x - lambda b)`, so that
    /// `x - z = (lambda / 2) grad g(z)`. Interior points return `lambda = 0`.
    pub fn project_with_multiplier(&self, x: &Vector) -> Result<(Vector, f64)> {
        check_dim(self.dim(), x.len())?;
        if self.value(x) <= 0.0 {
            return Ok((x.clone(), 0.0));
        }
        let tol = 1e-12 * (1.0 + self.alpha.abs());

        // g(z(lambda)) decreases strictly in lambda; grow the upper end of the
        // bracket until it turns negative.
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut at_hi = self.eval_multiplier(x, hi)?;
        let mut growth = 0;
        while at_hi.value >= 0.0 {
            if at_hi.value <= tol {
                return Ok((at_hi.point, hi));
            }
            lo = hi;
            hi *= 10.0;
            growth += 1;
            if growth > 300 {
                return Err(CfpError::NewtonStall { iterations: growth });
            }
            at_hi = self.eval_multiplier(x, hi)?;
        }

        // Newton on psi(lambda) = q^{-1/2} - r^{-1}, q = g(z(lambda)) + r^2,
        // which is close to linear in lambda; bisection when a step leaves
        // the bracket.
        let inv_radius = self.radius_sq.sqrt().recip();
        let mut lambda = lo;
        for _ in 0..NEWTON_MAX_ITER {
            let at = self.eval_multiplier(x, lambda)?;
            if at.value.abs() <= tol {
                return Ok((at.point, lambda));
            }
            if at.value > 0.0 {
                lo = lambda;
            } else {
                hi = lambda;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok((at.point, lambda));
            }
            let q = at.value + self.radius_sq;
            let mut next = f64::NAN;
            if q > 0.0 && at.slope < 0.0 {
                let psi = q.sqrt().recip() - inv_radius;
                let dpsi = -0.5 * at.slope / (q * q.sqrt());
                next = lambda - psi / dpsi;
            }
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            lambda = next;
        }
        Err(CfpError::NewtonStall {
            iterations: NEWTON_MAX_ITER,
        })
    }

    fn eval_multiplier(&self, x: &Vector, lambda: f64) -> Result<MultiplierPoint> {
        let n = self.dim();
        let mut m = &*self.a * lambda;
        for i in 0..n {
            m[(i, i)] += 1.0;
        }
        let chol: Cholesky<f64, Dyn> =
            Cholesky::new(m).ok_or_else(|| CfpError::InvalidSet("I + lambda A lost positive definiteness".into()))?;
        let point = chol.solve(&(x - &self.b * lambda));
        let half_grad = &*self.a * &point + &self.b;
        let value = point.dot(&(&half_grad + &self.b)) - self.alpha;
        let dz = chol.solve(&half_grad);
        let slope = -2.0 * half_grad.dot(&dz);
        Ok(MultiplierPoint { point, value, slope })
    }
}

struct MultiplierPoint {
    point: Vector,
    value: f64,
    slope: f64,
}

/// The closed ball `|x - center| <= radius`, with `g(x) = |x - c|^2 - r^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Vector,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        ensure_finite(&center, "ball center")?;
        if center.is_empty() {
            return Err(CfpError::EmptyVector);
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(CfpError::InvalidSet(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }
}

/// `{x : g(x) <= 0}` for a smooth convex `g`.
#[derive(Clone)]
pub struct SublevelSet {
    g: Arc<dyn SmoothFunction>,
    slater_point: Option<Vector>,
}

impl fmt::Debug for SublevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SublevelSet")
            .field("g", &self.g.name())
            .field("slater_point", &self.slater_point)
            .finish()
    }
}

impl SublevelSet {
    pub fn new(g: Arc<dyn SmoothFunction>, slater_point: Option<Vector>) -> Result<Self> {
        if let Some(p) = &slater_point {
            check_dim(g.dim(), p.len())?;
            let value = g.value(p);
            if !(value < 0.0) {
                return Err(CfpError::InvalidSet(format!(
                    "Slater point has g = {value}, expected g < 0"
                )));
            }
        }
        Ok(Self { g, slater_point })
    }

    pub fn function(&self) -> &Arc<dyn SmoothFunction> {
        &self.g
    }

    pub fn slater_point(&self) -> Option<&Vector> {
        self.slater_point.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }
}

/// Epigraph `{(x, s) : f(x) <= s}` in `R^{n+1}`; its level function is
/// `g(x, s) = f(x) - s`.
#[derive(Clone)]
pub struct Epigraph {
    f: Arc<dyn SmoothFunction>,
}

impl fmt::Debug for Epigraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Epigraph").field("f", &self.f.name()).finish()
    }
}

impl Epigraph {
    pub fn new(f: Arc<dyn SmoothFunction>) -> Self {
        Self { f }
    }

    pub fn function(&self) -> &Arc<dyn SmoothFunction> {
        &self.f
    }

    pub fn dim(&self) -> usize {
        self.f.dim() + 1
    }

    pub fn value_and_gradient(&self, point: &Vector) -> (f64, Vector) {
        let n = self.f.dim();
        let x = point.rows(0, n).into_owned();
        let (fx, grad_f) = self.f.value_and_gradient(&x);
        let mut grad = Vector::zeros(n + 1);
        grad.rows_mut(0, n).copy_from(&grad_f);
        grad[n] = -1.0;
        (fx - point[n], grad)
    }
}

/// Cartesian product `K_1 x ... x K_m` of sets sharing a block dimension.
#[derive(Debug, Clone)]
pub struct ProductSet {
    factors: Vec<ConvexSet>,
    block_dim: usize,
}

impl ProductSet {
    pub fn new(factors: Vec<ConvexSet>) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| CfpError::InvalidSet("product of zero sets".into()))?;
        let block_dim = first.dim();
        for f in &factors {
            check_dim(block_dim, f.dim())?;
        }
        Ok(Self { factors, block_dim })
    }

    pub fn factors(&self) -> &[ConvexSet] {
        &self.factors
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

/// The closed convex sets handled by the solvers.
#[derive(Debug, Clone)]
pub enum ConvexSet {
    HalfSpace(HalfSpace),
    Affine(AffineSubspace),
    Ball(Ball),
    Ellipsoid(Ellipsoid),
    Sublevel(SublevelSet),
    Epigraph(Epigraph),
    Product(ProductSet),
}

impl ConvexSet {
    pub fn product(factors: Vec<ConvexSet>) -> Result<Self> {
        Ok(ConvexSet::Product(ProductSet::new(factors)?))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ConvexSet::HalfSpace(_) => "half-space",
            ConvexSet::Affine(_) => "affine subspace",
            ConvexSet::Ball(_) => "ball",
            ConvexSet::Ellipsoid(_) => "ellipsoid",
            ConvexSet::Sublevel(_) => "sublevel set",
            ConvexSet::Epigraph(_) => "epigraph",
            ConvexSet::Product(_) => "product set",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::HalfSpace(h) => h.dim(),
            ConvexSet::Affine(u) => u.ambient_dim(),
            ConvexSet::Ball(b) => b.dim(),
            ConvexSet::Ellipsoid(e) => e.dim(),
            ConvexSet::Sublevel(s) => s.dim(),
            ConvexSet::Epigraph(e) => e.dim(),
            ConvexSet::Product(p) => p.block_dim * p.len(),
        }
    }

    /// Membership up to an additive tolerance on the defining inequality.
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            ConvexSet::Affine(u) => u.distance(x).map(|d| d <= tol).unwrap_or(false),
            ConvexSet::Product(p) => {
                let n = p.block_dim;
                p.factors
                    .iter()
                    .enumerate()
                    .all(|(i, f)| f.contains(&x.rows(i * n, n).into_owned(), tol))
            }
            _ => self.eval_oracle(x).map(|(g, _)| g <= tol).unwrap_or(false),
        }
    }

    /// Euclidean projection onto the set.
    pub fn project_exact(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        match self {
            ConvexSet::HalfSpace(h) => project_halfspace(h, x),
            ConvexSet::Affine(u) => project_affine(u, x),
            ConvexSet::Ball(b) => {
                let d = x - &b.center;
                let dist = d.norm();
                if dist <= b.radius {
                    Ok(x.clone())
                } else {
                    Ok(&b.center + d * (b.radius / dist))
                }
            }
            ConvexSet::Ellipsoid(e) => e.project_with_multiplier(x).map(|(z, _)| z),
            ConvexSet::Sublevel(_) => Err(CfpError::NoExactProjector("sublevel set")),
            ConvexSet::Epigraph(_) => Err(CfpError::NoExactProjector("epigraph")),
            ConvexSet::Product(p) => {
                let n = p.block_dim;
                let mut out = Vector::zeros(x.len());
                for (i, f) in p.factors.iter().enumerate() {
                    let block = f.project_exact(&x.rows(i * n, n).into_owned())?;
                    out.rows_mut(i * n, n).copy_from(&block);
                }
                Ok(out)
            }
        }
    }

    /// `(g(x), grad g(x))` for sets described as `{g <= 0}`.
    pub fn eval_oracle(&self, x: &Vector) -> Result<(f64, Vector)> {
        check_dim(self.dim(), x.len())?;
        match self {
            ConvexSet::HalfSpace(h) => Ok((h.violation(x)?, h.normal().clone())),
            ConvexSet::Ball(b) => {
                let d = x - &b.center;
                Ok((d.norm_squared() - b.radius * b.radius, d * 2.0))
            }
            ConvexSet::Ellipsoid(e) => Ok(e.value_and_gradient(x)),
            ConvexSet::Sublevel(s) => Ok(s.g.value_and_gradient(x)),
            ConvexSet::Epigraph(e) => Ok(e.value_and_gradient(x)),
            ConvexSet::Affine(_) => Err(CfpError::NoOracle("affine subspace")),
            ConvexSet::Product(_) => Err(CfpError::NoOracle("product set")),
        }
    }
}

pub fn project_exact(set: &ConvexSet, x: &Vector) -> Result<Vector> {
    set.project_exact(x)
}

pub fn contains(set: &ConvexSet, x: &Vector, tol: f64) -> bool {
    set.contains(x, tol)
}

pub fn eval_oracle(set: &ConvexSet, x: &Vector) -> Result<(f64, Vector)> {
    set.eval_oracle(x)
}
