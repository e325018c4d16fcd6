//! Seeded random ellipsoid-intersection instances.
//!
//! Each ellipsoid is `{x : x^T A x + 2 x^T b - alpha <= 0}` with
//! `A = gamma I + B^T B`, `B` sparse with standard-normal nonzeros, `b`
//! uniform on `[0, 1]^n` and `alpha = b^T A b + u`, `u` uniform on
//! `(0.1, 10]`, so the origin is always strictly feasible. The starting
//! point `(eta, ..., eta)` is validated to lie outside every ellipsoid.
//!
//! Randomness comes from ChaCha8 seeded with the instance seed; ellipsoid
//! `i` draws from stream `i`, so it does not depend on how many ellipsoids
//! the instance has.

use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{CfpError, Result};
use crate::geometry::Vector;
use crate::productspace::lift;
use crate::sets::{ConvexSet, Ellipsoid};
use crate::solvers::{Problem, Subspace};

pub const DEFAULT_GAMMA: f64 = 1.0;
pub const FILE_EXTENSION: &str = "cfp.json";

const ALPHA_MARGIN_MIN: f64 = 0.1;
const ALPHA_MARGIN_MAX: f64 = 10.0;

/// Sparse `B` entry `(row, col, value)`.
pub type Triplet = (usize, usize, f64);

#[derive(Debug, Clone)]
pub struct EllipsoidInstance {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub gamma: f64,
    pub density: f64,
    pub b_triplets: Vec<Vec<Triplet>>,
    pub b: Vec<Vector>,
    pub alpha: Vec<f64>,
    pub x0: Vector,
    pub ellipsoids: Vec<Ellipsoid>,
}

impl PartialEq for EllipsoidInstance {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.m == other.m
            && self.seed == other.seed
            && self.gamma == other.gamma
            && self.density == other.density
            && self.b_triplets == other.b_triplets
            && self.b == other.b
            && self.alpha == other.alpha
            && self.x0 == other.x0
    }
}

/// Default nonzero probability `2 / n` for the entries of `B`.
pub fn default_density(n: usize) -> f64 {
    (2.0 / n as f64).min(1.0)
}

pub fn gen_ellipsoids(
    n: usize,
    m: usize,
    seed: u64,
    gamma: f64,
    density_override: Option<f64>,
) -> Result<EllipsoidInstance> {
    if n < 2 {
        return Err(CfpError::InvalidConfig(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    if m < 1 {
        return Err(CfpError::InvalidConfig("need at least one ellipsoid".into()));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(CfpError::InvalidConfig(format!("gamma must be positive, got {gamma}")));
    }
    let density = density_override.unwrap_or_else(|| default_density(n));
    if !(density > 0.0 && density <= 1.0) {
        return Err(CfpError::InvalidConfig(format!(
            "density must be in (0, 1], got {density}"
        )));
    }

    let mut b_triplets = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    let mut alpha = Vec::with_capacity(m);
    for i in 0..m {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut triplets = Vec::new();
        for r in 0..n {
            for c in 0..n {
                if rng.random::<f64>() < density {
                    let value: f64 = rng.sample(StandardNormal);
                    triplets.push((r, c, value));
                }
            }
        }
        let bi = Vector::from_fn(n, |_, _| rng.random::<f64>());
        let a = shape_matrix(n, gamma, &triplets);
        let margin = ALPHA_MARGIN_MAX - (ALPHA_MARGIN_MAX - ALPHA_MARGIN_MIN) * rng.random::<f64>();
        let ab = &a * &bi;
        alpha.push(bi.dot(&ab) + margin);
        b_triplets.push(triplets);
        b.push(bi);
    }

    let ellipsoids = build_ellipsoids(n, gamma, &b_triplets, &b, &alpha)?;
    let x0 = exterior_start(n, gamma, &alpha, &ellipsoids)?;
    Ok(EllipsoidInstance {
        n,
        m,
        seed,
        gamma,
        density,
        b_triplets,
        b,
        alpha,
        x0,
        ellipsoids,
    })
}

/// `gamma I + B^T B`, exactly symmetric.
pub fn shape_matrix(n: usize, gamma: f64, triplets: &[Triplet]) -> DMatrix<f64> {
    let mut bm = DMatrix::zeros(n, n);
    for &(r, c, v) in triplets {
        bm[(r, c)] += v;
    }
    let mut a = bm.transpose() * &bm;
    for i in 0..n {
        for j in 0..i {
            a[(i, j)] = a[(j, i)];
        }
        a[(i, i)] += gamma;
    }
    a
}

fn build_ellipsoids(
    n: usize,
    gamma: f64,
    b_triplets: &[Vec<Triplet>],
    b: &[Vector],
    alpha: &[f64],
) -> Result<Vec<Ellipsoid>> {
    b_triplets
        .iter()
        .zip(b)
        .zip(alpha)
        .map(|((t, bi), &ai)| Ellipsoid::new(shape_matrix(n, gamma, t), bi.clone(), ai))
        .collect()
}

// eta = -max_i (1 + sqrt(alpha_i / gamma)), doubled until (eta, ..., eta)
// violates every ellipsoid.
fn exterior_start(n: usize, gamma: f64, alpha: &[f64], ellipsoids: &[Ellipsoid]) -> Result<Vector> {
    let mut eta = -alpha.iter().map(|a| 1.0 + (a / gamma).sqrt()).fold(0.0, f64::max);
    for _ in 0..64 {
        let x0 = Vector::from_element(n, eta);
        if ellipsoids.iter().all(|e| e.value(&x0) > 0.0) {
            return Ok(x0);
        }
        eta *= 2.0;
    }
    Err(CfpError::InvalidConfig(
        "could not place the starting point outside every ellipsoid".into(),
    ))
}

impl EllipsoidInstance {
    pub fn id(&self) -> String {
        format!("n{}-m{}-s{}", self.n, self.m, self.seed)
    }

    pub fn product_set(&self) -> ConvexSet {
        ConvexSet::product(self.ellipsoids.iter().cloned().map(ConvexSet::Ellipsoid).collect())
            .expect("instance ellipsoids share the dimension")
    }

    /// The product-space problem `K_1 x ... x K_m` against the diagonal, with
    /// blockwise linearization cuts as separator.
    pub fn to_problem(&self) -> Problem {
        Problem::with_subgradient_separator(
            self.product_set(),
            Subspace::Diagonal {
                blocks: self.m,
                block_dim: self.n,
            },
        )
        .expect("product set and diagonal share the dimension")
    }

    /// `x0` lifted to the diagonal.
    pub fn initial_point(&self) -> Vector {
        lift(&self.x0, self.m).into_flat()
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            n: self.n,
            m: self.m,
            seed: self.seed,
            gamma: self.gamma,
            density: self.density,
            b_triplets: self.b_triplets.clone(),
            b: self.b.iter().map(|v| v.as_slice().to_vec()).collect(),
            alpha: self.alpha.clone(),
            x0: self.x0.as_slice().to_vec(),
        };
        serde_json::to_string_pretty(&file).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| CfpError::Parse {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        file.validate()?;
        let b: Vec<Vector> = file.b.iter().map(|v| Vector::from_column_slice(v)).collect();
        let ellipsoids = build_ellipsoids(file.n, file.gamma, &file.b_triplets, &b, &file.alpha)
            .map_err(|e| parse_err("B_triplets", e.to_string()))?;
        Ok(Self {
            n: file.n,
            m: file.m,
            seed: file.seed,
            gamma: file.gamma,
            density: file.density,
            b_triplets: file.b_triplets,
            b,
            alpha: file.alpha,
            x0: Vector::from_column_slice(&file.x0),
            ellipsoids,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn parse_err(field: &str, message: impl Into<String>) -> CfpError {
    CfpError::Parse {
        location: format!("field `{field}`"),
        message: message.into(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    m: usize,
    seed: u64,
    gamma: f64,
    density: f64,
    #[serde(rename = "B_triplets")]
    b_triplets: Vec<Vec<Triplet>>,
    b: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    x0: Vec<f64>,
}

impl InstanceFile {
    fn validate(&self) -> Result<()> {
        let (n, m) = (self.n, self.m);
        if n < 1 {
            return Err(parse_err("n", "dimension must be positive"));
        }
        if m < 1 {
            return Err(parse_err("m", "set count must be positive"));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(parse_err("gamma", format!("must be positive, got {}", self.gamma)));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(parse_err("density", format!("must be in (0, 1], got {}", self.density)));
        }
        for (field, len) in [
            ("B_triplets", self.b_triplets.len()),
            ("b", self.b.len()),
            ("alpha", self.alpha.len()),
        ] {
            if len != m {
                return Err(parse_err(field, format!("expected {m} entries, found {len}")));
            }
        }
        for (i, triplets) in self.b_triplets.iter().enumerate() {
            for (k, &(r, c, v)) in triplets.iter().enumerate() {
                if r >= n || c >= n {
                    return Err(parse_err(
                        &format!("B_triplets[{i}][{k}]"),
                        format!("index ({r}, {c}) out of range for n = {n}"),
                    ));
                }
                if !v.is_finite() {
                    return Err(parse_err(&format!("B_triplets[{i}][{k}]"), "value is not finite"));
                }
            }
        }
        for (i, bi) in self.b.iter().enumerate() {
            if bi.len() != n {
                return Err(parse_err(
                    &format!("b[{i}]"),
                    format!("expected {n} entries, found {}", bi.len()),
                ));
            }
            if bi.iter().any(|v| !v.is_finite()) {
                return Err(parse_err(&format!("b[{i}]"), "value is not finite"));
            }
        }
        for (i, &a) in self.alpha.iter().enumerate() {
            if !(a > 0.0) || !a.is_finite() {
                return Err(parse_err(
                    &format!("alpha[{i}]"),
                    format!("alpha must be positive, got {a}"),
                ));
            }
        }
        if self.x0.len() != n {
            return Err(parse_err(
                "x0",
                format!("expected {n} entries, found {}", self.x0.len()),
            ));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(parse_err("x0", "value is not finite"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_feasible_and_start_is_exterior() {
        let inst = gen_ellipsoids(10, 5, 42, DEFAULT_GAMMA, None).unwrap();
        let origin = Vector::zeros(10);
        for (e, &a) in inst.ellipsoids.iter().zip(&inst.alpha) {
            assert!(ConvexSet::Ellipsoid(e.clone()).contains(&origin, 0.0));
            assert_eq!(e.value(&origin), -a);
            assert!(e.value(&inst.x0) > 0.0);
        }
        assert!(inst.x0.iter().all(|&c| c < 0.0 && c == inst.x0[0]));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_ellipsoids(8, 3, 7, 1.0, None).unwrap();
        let b = gen_ellipsoids(8, 3, 7, 1.0, None).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = gen_ellipsoids(8, 3, 8, 1.0, None).unwrap();
        assert_ne!(a.to_json(), c.to_json());
    }

    #[test]
    fn ellipsoids_do_not_depend_on_set_count() {
        let small = gen_ellipsoids(6, 2, 11, 1.0, None).unwrap();
        let large = gen_ellipsoids(6, 4, 11, 1.0, None).unwrap();
        assert_eq!(small.b_triplets[..], large.b_triplets[..2]);
        assert_eq!(small.alpha[..], large.alpha[..2]);
    }

    #[test]
    fn margin_respects_the_strict_inequality() {
        let inst = gen_ellipsoids(5, 6, 3, 1.0, Some(0.5)).unwrap();
        for i in 0..inst.m {
            let a = shape_matrix(inst.n, inst.gamma, &inst.b_triplets[i]);
            let bab = inst.b[i].dot(&(&a * &inst.b[i]));
            let margin = inst.alpha[i] - bab;
            assert!(margin > ALPHA_MARGIN_MIN - 1e-12 && margin <= ALPHA_MARGIN_MAX + 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let inst = gen_ellipsoids(7, 3, 99, 1.5, None).unwrap();
        let text = inst.to_json();
        let back = EllipsoidInstance::from_json(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_json(), text);
        for (e, f) in back.ellipsoids.iter().zip(&inst.ellipsoids) {
            assert_eq!(e.matrix(), f.matrix());
        }
    }

    #[test]
    fn reconstructed_matrices_are_symmetric() {
        let inst = gen_ellipsoids(12, 2, 5, 1.0, None).unwrap();
        let back = EllipsoidInstance::from_json(&inst.to_json()).unwrap();
        for e in &back.ellipsoids {
            let a = e.matrix();
            assert!((a - a.transpose()).amax() <= 1e-15);
        }
    }

    #[test]
    fn nonpositive_alpha_is_a_parse_error() {
        let inst = gen_ellipsoids(4, 2, 1, 1.0, None).unwrap();
        let mut value: serde_json::Value = serde_json::from_str(&inst.to_json()).unwrap();
        value["alpha"][1] = serde_json::json!(-0.5);
        let err = EllipsoidInstance::from_json(&value.to_string()).unwrap_err();
        match err {
            CfpError::Parse { location, message } => {
                assert!(location.contains("alpha[1]"), "{location}");
                assert!(message.contains("alpha must be positive"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = EllipsoidInstance::from_json("{\n  \"n\": 3,\n  oops\n}").unwrap_err();
        match err {
            CfpError::Parse { location, .. } => assert!(location.starts_with("line 3"), "{location}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_range_triplet_is_rejected() {
        let inst = gen_ellipsoids(4, 1, 1, 1.0, Some(1.0)).unwrap();
        let mut value: serde_json::Value = serde_json::from_str(&inst.to_json()).unwrap();
        value["B_triplets"][0][0][0] = serde_json::json!(9);
        assert!(matches!(
            EllipsoidInstance::from_json(&value.to_string()),
            Err(CfpError::Parse { .. })
        ));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(gen_ellipsoids(1, 3, 0, 1.0, None).is_err());
        assert!(gen_ellipsoids(3, 0, 0, 1.0, None).is_err());
        assert!(gen_ellipsoids(3, 1, 0, 0.0, None).is_err());
        assert!(gen_ellipsoids(3, 1, 0, 1.0, Some(1.5)).is_err());
    }
}
