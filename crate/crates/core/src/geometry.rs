//! Dense vector geometry: circumcenters, reflections, and exact projections
//! onto half-spaces, hyperplanes and affine subspaces.

use nalgebra::DVector;

use crate::error::{check_dim, CfpError, Result};

/// Dense point of `R^n`.
pub type Vector = DVector<f64>;

/// Relative threshold on the Gram determinant below which the three
/// circumcenter arguments are treated as collinear.
pub const CIRCUMCENTER_RANK_TOL: f64 = 1e-12;

/// In the collinear branch, the third point counts as coinciding with an
/// extreme point when within this fraction of the extreme distance.
pub const COINCIDENCE_TOL: f64 = 1e-6;

/// Builds a vector, rejecting empty input and non-finite entries.
pub fn vector(coords: &[f64]) -> Result<Vector> {
    if coords.is_empty() {
        return Err(CfpError::EmptyVector);
    }
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(CfpError::NonFinite("vector"));
    }
    Ok(Vector::from_column_slice(coords))
}

pub(crate) fn ensure_finite(v: &Vector, what: &'static str) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(CfpError::NonFinite(what))
    }
}

/// Circumcenter of `x`, `y`, `z`: the point of their affine hull equidistant
/// from all three.
///
/// Coincident arguments reduce to the midpoint of the two distinct points
/// (or to `x` when all three coincide). Collinear, pairwise distinct points
/// have no circumcenter and yield [`CfpError::DegenerateCircumcenter`].
pub fn circumcenter(x: &Vector, y: &Vector, z: &Vector) -> Result<Vector> {
    check_dim(x.len(), y.len())?;
    check_dim(x.len(), z.len())?;

    let u = y - x;
    let v = z - x;
    let uu = u.norm_squared();
    let vv = v.norm_squared();

    if uu == 0.0 && vv == 0.0 {
        return Ok(x.clone());
    }
    if uu == 0.0 {
        return Ok(midpoint(x, z));
    }
    if vv == 0.0 {
        return Ok(midpoint(x, y));
    }

    // Gram system [[uu, uv], [uv, vv]] (s, t) = (uu, vv) / 2, solved through
    // the component w of v orthogonal to u so the determinant uu * |w|^2 is
    // formed from coordinates rather than by cancellation.
    let uv = u.dot(&v);
    let w = &v - &u * (uv / uu);
    let ww = w.norm_squared();
    if ww > CIRCUMCENTER_RANK_TOL * vv {
        let t = v.dot(&(&v - &u)) / (2.0 * ww);
        let s = 0.5 - t * uv / uu;
        return Ok(x + u * s + v * t);
    }

    collinear_circumcenter(x, y, z)
}

fn collinear_circumcenter(x: &Vector, y: &Vector, z: &Vector) -> Result<Vector> {
    let dxy = (y - x).norm();
    let dxz = (z - x).norm();
    let dyz = (z - y).norm();
    // (extreme pair, distance from the third point to the nearer extreme)
    let (a, b, far, near) = if dxy >= dxz && dxy >= dyz {
        (x, y, dxy, dxz.min(dyz))
    } else if dxz >= dyz {
        (x, z, dxz, dxy.min(dyz))
    } else {
        (y, z, dyz, dxy.min(dxz))
    };
    if near <= COINCIDENCE_TOL * far {
        Ok(midpoint(a, b))
    } else {
        Err(CfpError::DegenerateCircumcenter)
    }
}

fn midpoint(a: &Vector, b: &Vector) -> Vector {
    (a + b) * 0.5
}

/// Reflection `2 p - x` of `x` through its projection `p`.
pub fn reflect(projected: &Vector, x: &Vector) -> Result<Vector> {
    check_dim(projected.len(), x.len())?;
    Ok(projected * 2.0 - x)
}

/// The half-space `{y : <a, y> <= alpha}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    normal: Vector,
    offset: f64,
    normal_sq: f64,
}

impl HalfSpace {
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        ensure_finite(&normal, "half-space normal")?;
        if normal.is_empty() {
            return Err(CfpError::EmptyVector);
        }
        if !offset.is_finite() {
            return Err(CfpError::NonFinite("half-space offset"));
        }
        let normal_sq = normal.norm_squared();
        if normal_sq == 0.0 {
            return Err(CfpError::InvalidSet("half-space normal must be nonzero".into()));
        }
        Ok(Self {
            normal,
            offset,
            normal_sq,
        })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// `<a, x> - alpha`; positive exactly outside the half-space.
    pub fn violation(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.normal.dot(x) - self.offset)
    }

    pub fn project(&self, x: &Vector) -> Result<Vector> {
        project_halfspace(self, x)
    }

    /// Projection onto the bounding hyperplane `{y : <a, y> = alpha}`.
    pub fn project_boundary(&self, x: &Vector) -> Result<Vector> {
        let excess = self.violation(x)?;
        Ok(x - &self.normal * (excess / self.normal_sq))
    }

    /// Euclidean distance from `x` to the half-space.
    pub fn distance(&self, x: &Vector) -> Result<f64> {
        Ok(self.violation(x)?.max(0.0) / self.normal_sq.sqrt())
    }
}

/// `x - max(0, <a, x> - alpha) / |a|^2 * a`.
pub fn project_halfspace(h: &HalfSpace, x: &Vector) -> Result<Vector> {
    let excess = h.violation(x)?;
    if excess <= 0.0 {
        Ok(x.clone())
    } else {
        Ok(x - &h.normal * (excess / h.normal_sq))
    }
}

/// An affine subspace `anchor + span(basis)` with an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace {
    anchor: Vector,
    basis: Vec<Vector>,
}

impl AffineSubspace {
    /// Builds the subspace from an arbitrary spanning set. The basis is
    /// orthonormalized by modified Gram-Schmidt with one re-orthogonalization
    /// pass; numerically dependent directions are dropped.
    pub fn from_spanning(anchor: Vector, spanning: &[Vector]) -> Result<Self> {
        ensure_finite(&anchor, "affine anchor")?;
        if anchor.is_empty() {
            return Err(CfpError::EmptyVector);
        }
        let n = anchor.len();
        let mut basis: Vec<Vector> = Vec::with_capacity(spanning.len());
        for d in spanning {
            check_dim(n, d.len())?;
            ensure_finite(d, "affine direction")?;
            let scale = d.norm();
            if scale == 0.0 {
                continue;
            }
            let mut w = d.clone();
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dot(&w);
                    w.axpy(-c, b, 1.0);
                }
            }
            let norm = w.norm();
            if norm > 1e-10 * scale {
                basis.push(w / norm);
            }
        }
        Ok(Self { anchor, basis })
    }

    /// Wraps an already orthonormal basis, checking orthonormality to 1e-12.
    pub fn from_orthonormal(anchor: Vector, basis: Vec<Vector>) -> Result<Self> {
        ensure_finite(&anchor, "affine anchor")?;
        if anchor.is_empty() {
            return Err(CfpError::EmptyVector);
        }
        for (i, b) in basis.iter().enumerate() {
            check_dim(anchor.len(), b.len())?;
            if (b.norm_squared() - 1.0).abs() > 1e-12 {
                return Err(CfpError::InvalidSet(format!("basis vector {i} is not unit norm")));
            }
            for (j, c) in basis.iter().enumerate().take(i) {
                if b.dot(c).abs() > 1e-12 {
                    return Err(CfpError::InvalidSet(format!(
                        "basis vectors {j} and {i} are not orthogonal"
                    )));
                }
            }
        }
        Ok(Self { anchor, basis })
    }

    /// The hyperplane `{y : <a, y> = alpha}`.
    pub fn hyperplane(normal: &Vector, offset: f64) -> Result<Self> {
        let h = HalfSpace::new(normal.clone(), offset)?;
        let n = normal.len();
        let anchor = h.project_boundary(&Vector::zeros(n))?;
        let unit = normal / normal.norm();
        let mut spanning = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = Vector::zeros(n);
            e[j] = 1.0;
            let c = unit.dot(&e);
            e.axpy(-c, &unit, 1.0);
            spanning.push(e);
        }
        let mut u = Self::from_spanning(anchor, &spanning)?;
        u.basis.truncate(n - 1);
        Ok(u)
    }

    /// A line `point + t * direction`.
    pub fn line(point: Vector, direction: Vector) -> Result<Self> {
        let u = Self::from_spanning(point, std::slice::from_ref(&direction))?;
        if u.basis.is_empty() {
            return Err(CfpError::InvalidSet("line direction must be nonzero".into()));
        }
        Ok(u)
    }

    pub fn anchor(&self) -> &Vector {
        &self.anchor
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.anchor.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn project(&self, x: &Vector) -> Result<Vector> {
        project_affine(self, x)
    }

    pub fn reflect(&self, x: &Vector) -> Result<Vector> {
        reflect(&self.project(x)?, x)
    }

    pub fn distance(&self, x: &Vector) -> Result<f64> {
        Ok((x - self.project(x)?).norm())
    }
}

/// `anchor + sum_j <x - anchor, b_j> b_j`.
pub fn project_affine(u: &AffineSubspace, x: &Vector) -> Result<Vector> {
    check_dim(u.ambient_dim(), x.len())?;
    let d = x - &u.anchor;
    let mut p = u.anchor.clone();
    for b in &u.basis {
        p.axpy(b.dot(&d), b, 1.0);
    }
    Ok(p)
}
