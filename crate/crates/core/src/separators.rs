//! Separating operators and the outer-approximate projections they induce.
//!
//! A separator maps a query point `x` to a closed convex set `S(x)` that
//! contains `K` and excludes `x` whenever `x` lies outside `K`. The
//! subgradient separator of a level set `{g <= 0}` returns the linearization
//! cut `{z : <grad g(x), z - x> + g(x) <= 0}`; its projection has the closed
//! form `x - max(0, g(x)) / |grad g(x)|^2 * grad g(x)`.

use crate::error::{check_dim, CfpError, Result};
use crate::geometry::{project_halfspace, HalfSpace, Vector};
use crate::sets::ConvexSet;

#[derive(Debug, Clone)]
pub enum Separator {
    /// The trivial operator `S(x) = K`.
    Exact(ConvexSet),
    /// Linearization cuts of the set's level function.
    Subgradient(ConvexSet),
    /// Blockwise product `S_1(x^1) x ... x S_m(x^m)`.
    Product(ProductSeparator),
}

#[derive(Debug, Clone)]
pub struct ProductSeparator {
    blocks: Vec<Separator>,
    block_dim: usize,
}

impl ProductSeparator {
    pub fn blocks(&self) -> &[Separator] {
        &self.blocks
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }
}

/// The set `S(x)` returned for a query point.
#[derive(Debug, Clone, PartialEq)]
pub enum SeparatingSet {
    /// `S(x) = K`; for cut separators this means `x` was already in `K`.
    WholeSet,
    CutHalfSpace(HalfSpace),
    Product(Vec<SeparatingSet>),
}

/// `P_{S(x)}(x)` together with `dist(x, S(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxProjection {
    pub point: Vector,
    pub distance: f64,
}

impl Separator {
    pub fn product(blocks: Vec<Separator>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| CfpError::InvalidSet("product of zero separators".into()))?;
        let block_dim = first.dim();
        for b in &blocks {
            check_dim(block_dim, b.dim())?;
        }
        Ok(Separator::Product(ProductSeparator { blocks, block_dim }))
    }

    /// Subgradient separator for every factor of a product set, or for the
    /// set itself otherwise.
    pub fn subgradient_for(set: &ConvexSet) -> Result<Self> {
        match set {
            ConvexSet::Product(p) => Separator::product(
                p.factors()
                    .iter()
                    .map(Separator::subgradient_for)
                    .collect::<Result<_>>()?,
            ),
            other => Ok(Separator::Subgradient(other.clone())),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Separator::Exact(k) | Separator::Subgradient(k) => k.dim(),
            Separator::Product(p) => p.block_dim * p.blocks.len(),
        }
    }

    pub fn separate(&self, x: &Vector) -> Result<SeparatingSet> {
        separate(self, x)
    }

    pub fn approx_project(&self, x: &Vector) -> Result<ApproxProjection> {
        approx_project(self, x)
    }
}

pub fn separate(s: &Separator, x: &Vector) -> Result<SeparatingSet> {
    check_dim(s.dim(), x.len())?;
    match s {
        Separator::Exact(_) => Ok(SeparatingSet::WholeSet),
        Separator::Subgradient(k) => {
            let (g, grad) = k.eval_oracle(x)?;
            if g <= 0.0 {
                return Ok(SeparatingSet::WholeSet);
            }
            if grad.norm_squared() == 0.0 {
                return Err(CfpError::ZeroGradient);
            }
            // <grad, z - x> + g <= 0  <=>  <grad, z> <= <grad, x> - g
            let offset = grad.dot(x) - g;
            Ok(SeparatingSet::CutHalfSpace(HalfSpace::new(grad, offset)?))
        }
        Separator::Product(p) => {
            let n = p.block_dim;
            p.blocks
                .iter()
                .enumerate()
                .map(|(i, b)| separate(b, &x.rows(i * n, n).into_owned()))
                .collect::<Result<Vec<_>>>()
                .map(SeparatingSet::Product)
        }
    }
}

pub fn approx_project(s: &Separator, x: &Vector) -> Result<ApproxProjection> {
    check_dim(s.dim(), x.len())?;
    match s {
        Separator::Exact(k) => {
            let point = k.project_exact(x)?;
            let distance = (x - &point).norm();
            Ok(ApproxProjection { point, distance })
        }
        Separator::Subgradient(k) => {
            let (g, grad) = k.eval_oracle(x)?;
            if g <= 0.0 {
                return Ok(ApproxProjection {
                    point: x.clone(),
                    distance: 0.0,
                });
            }
            let grad_sq = grad.norm_squared();
            if grad_sq == 0.0 {
                return Err(CfpError::ZeroGradient);
            }
            Ok(ApproxProjection {
                point: x - &grad * (g / grad_sq),
                distance: g / grad_sq.sqrt(),
            })
        }
        Separator::Product(p) => {
            let n = p.block_dim;
            let mut point = Vector::zeros(x.len());
            let mut dist_sq = 0.0;
            for (i, b) in p.blocks.iter().enumerate() {
                let block = approx_project(b, &x.rows(i * n, n).into_owned())?;
                point.rows_mut(i * n, n).copy_from(&block.point);
                dist_sq += block.distance * block.distance;
            }
            Ok(ApproxProjection {
                point,
                distance: dist_sq.sqrt(),
            })
        }
    }
}

/// Projection onto an explicit separating set; `set` stands in for `K` in the
/// `WholeSet` case.
pub fn project_onto_separating(sep: &SeparatingSet, set: &ConvexSet, x: &Vector) -> Result<Vector> {
    match (sep, set) {
        (SeparatingSet::WholeSet, k) => k.project_exact(x).or_else(|e| match e {
            // cut separators only report WholeSet for members of K
            CfpError::NoExactProjector(_) => Ok(x.clone()),
            other => Err(other),
        }),
        (SeparatingSet::CutHalfSpace(h), _) => project_halfspace(h, x),
        (SeparatingSet::Product(blocks), ConvexSet::Product(p)) => {
            let n = p.block_dim();
            let mut out = Vector::zeros(x.len());
            for (i, (b, f)) in blocks.iter().zip(p.factors()).enumerate() {
                let y = project_onto_separating(b, f, &x.rows(i * n, n).into_owned())?;
                out.rows_mut(i * n, n).copy_from(&y);
            }
            Ok(out)
        }
        (SeparatingSet::Product(_), other) => Err(CfpError::InvalidSet(format!(
            "product separating set paired with a {}",
            other.kind()
        ))),
    }
}
