//! Empirical convergence-rate analysis.
//!
//! Q- and R-rate estimates over the tail of an iterate trace, sampled
//! error-bound constants, audits of the linear-rate bounds
//! `sqrt(1 - w^2)` (MAP/MAAP) and `sqrt((1 - w^2) / (1 + w^2))` (CRM/CARM),
//! and closed-form step maps for the two epigraph families.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, CfpError, Result};
use crate::geometry::{AffineSubspace, Vector};
use crate::instances::Family;
use crate::productspace::lift;
use crate::separators::approx_project;
use crate::solvers::{Method, Problem, RunRecord, Subspace};

/// `q <= SUPERLINEAR_Q` classifies a trace as superlinear.
pub const SUPERLINEAR_Q: f64 = 0.05;
/// `q >= SUBLINEAR_Q` classifies a trace as sublinear.
pub const SUBLINEAR_Q: f64 = 0.95;
pub const DEFAULT_TAIL_WINDOW: usize = 10;
/// Iterates closer than this (times `max(1, |limit|)`) to the limit are
/// dropped before ratios are formed.
pub const LIMIT_TRUNCATION: f64 = 1e-14;
/// Slack added to the theoretical rate bounds in audits.
pub const AUDIT_SLACK: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Superlinear,
    Linear,
    Sublinear,
}

impl Classification {
    pub fn from_q(q: f64) -> Self {
        if q <= SUPERLINEAR_Q {
            Classification::Superlinear
        } else if q >= SUBLINEAR_Q {
            Classification::Sublinear
        } else {
            Classification::Linear
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Superlinear => "superlinear",
            Classification::Linear => "linear",
            Classification::Sublinear => "sublinear",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Classification {
    type Err = CfpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "superlinear" => Ok(Classification::Superlinear),
            "linear" => Ok(Classification::Linear),
            "sublinear" => Ok(Classification::Sublinear),
            _ => Err(CfpError::InvalidConfig(format!("unknown classification `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// Largest successive distance ratio over the tail window.
    pub q_estimate: f64,
    /// Largest `d_k^{1/k}` over the tail window.
    pub r_estimate: f64,
    pub classification: Classification,
    pub tail_window: usize,
    /// The tail ratios `d_{k+1} / d_k`, oldest first.
    pub tail_ratios: Vec<f64>,
}

/// Half the available ratios, capped at [`DEFAULT_TAIL_WINDOW`]; at least one.
pub fn default_tail_window(distances: usize) -> usize {
    (distances.saturating_sub(1) / 2).clamp(1, DEFAULT_TAIL_WINDOW)
}

/// Rate estimates for a trace converging to `limit`.
pub fn estimate_rates(trace: &[Vector], limit: &Vector, tail_window: usize) -> Result<RateReport> {
    let mut distances = Vec::with_capacity(trace.len());
    for z in trace {
        check_dim(limit.len(), z.len())?;
        distances.push((z - limit).norm());
    }
    let cutoff = LIMIT_TRUNCATION * limit.norm().max(1.0);
    estimate_rates_from_distances(&distances, tail_window, cutoff)
}

/// Rate estimates from distances `d_k = |z^k - z*|`. The sequence is cut at
/// the first distance not exceeding `cutoff`.
pub fn estimate_rates_from_distances(distances: &[f64], tail_window: usize, cutoff: f64) -> Result<RateReport> {
    let usable = truncate(distances, cutoff);
    let needed = tail_window + 2;
    if tail_window == 0 || usable.len() < needed {
        return Err(CfpError::InsufficientTrace {
            needed,
            found: usable.len(),
        });
    }
    let last = usable.len() - 1;
    let first = last - tail_window;
    let tail_ratios: Vec<f64> = (first..last).map(|k| usable[k + 1] / usable[k]).collect();
    let q_estimate = tail_ratios.iter().copied().fold(0.0, f64::max);
    let r_estimate = (first + 1..=last)
        .map(|k| usable[k].powf(1.0 / k as f64))
        .fold(0.0, f64::max);
    Ok(RateReport {
        q_estimate,
        r_estimate,
        classification: Classification::from_q(q_estimate),
        tail_window,
        tail_ratios,
    })
}

fn truncate(distances: &[f64], cutoff: f64) -> &[f64] {
    let end = distances.iter().position(|&d| !(d > cutoff)).unwrap_or(distances.len());
    &distances[..end]
}

/// A solution set `K ∩ U` with a closed-form distance.
#[derive(Debug, Clone, PartialEq)]
pub enum SolutionSet {
    Point(Vector),
    Segment(Vector, Vector),
    /// `{origin + t * direction : t >= 0}`.
    Ray {
        origin: Vector,
        direction: Vector,
    },
    Affine(AffineSubspace),
    /// `{(y, 0) : |y| <= radius}` in `R^{n+1}`.
    FlatDisk {
        radius: f64,
    },
}

impl SolutionSet {
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        match self {
            SolutionSet::Point(p) => {
                check_dim(p.len(), x.len())?;
                Ok(p.clone())
            }
            SolutionSet::Segment(a, b) => {
                check_dim(a.len(), x.len())?;
                let d = b - a;
                let len_sq = d.norm_squared();
                let t = if len_sq == 0.0 {
                    0.0
                } else {
                    ((x - a).dot(&d) / len_sq).clamp(0.0, 1.0)
                };
                Ok(a + d * t)
            }
            SolutionSet::Ray { origin, direction } => {
                check_dim(origin.len(), x.len())?;
                let t = ((x - origin).dot(direction) / direction.norm_squared()).max(0.0);
                Ok(origin + direction * t)
            }
            SolutionSet::Affine(u) => u.project(x),
            SolutionSet::FlatDisk { radius } => {
                let n = x.len() - 1;
                let mut p = x.clone();
                p[n] = 0.0;
                let r = p.rows(0, n).norm();
                if r > *radius {
                    p.rows_mut(0, n).scale_mut(radius / r);
                }
                Ok(p)
            }
        }
    }

    pub fn distance(&self, x: &Vector) -> Result<f64> {
        Ok((x - self.project(x)?).norm())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBoundEstimate {
    /// Smallest sampled `dist(x, S(x)) / dist(x, K ∩ U)`; `None` when every
    /// sample was skipped.
    pub omega: Option<f64>,
    pub sample_count: usize,
    pub sampling_radius: f64,
}

/// Samples `x in U ∩ B(reference, radius)` outside `K` and returns the
/// smallest ratio `dist(x, S(x)) / dist(x, K ∩ U)`, with `S` the problem's
/// separator.
pub fn estimate_error_bound(
    problem: &Problem,
    solution: Option<&SolutionSet>,
    reference: &Vector,
    sampling_radius: f64,
    samples: usize,
    seed: u64,
) -> Result<ErrorBoundEstimate> {
    let solution = solution.ok_or(CfpError::NoIntersectionOracle)?;
    check_dim(problem.dim(), reference.len())?;
    if !(sampling_radius > 0.0) {
        return Err(CfpError::InvalidConfig("sampling radius must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut omega: Option<f64> = None;
    let mut used = 0;
    for _ in 0..samples {
        let dir = random_direction(problem.subspace(), &mut rng);
        let scale: f64 = sampling_radius * (1.0 - rng.random::<f64>());
        let x = reference + dir * scale;
        let s = approx_project(problem.separator(), &x)?;
        if s.distance == 0.0 {
            continue;
        }
        let d = solution.distance(&x)?;
        if d == 0.0 {
            continue;
        }
        used += 1;
        let ratio = s.distance / d;
        omega = Some(omega.map_or(ratio, |w| w.min(ratio)));
    }
    Ok(ErrorBoundEstimate {
        omega,
        sample_count: used,
        sampling_radius,
    })
}

fn random_direction(u: &Subspace, rng: &mut ChaCha8Rng) -> Vector {
    loop {
        let d = match u {
            Subspace::Affine(a) => {
                let mut d = Vector::zeros(a.ambient_dim());
                for b in a.basis() {
                    let c: f64 = rng.sample(StandardNormal);
                    d.axpy(c, b, 1.0);
                }
                d
            }
            Subspace::Diagonal { blocks, block_dim } => {
                let y = Vector::from_fn(*block_dim, |_, _| rng.sample(StandardNormal));
                lift(&y, *blocks).into_flat()
            }
        };
        let norm = d.norm();
        if norm > 0.0 {
            return d / norm;
        }
    }
}

/// Theoretical bound on the asymptotic constant of `method` under an error
/// bound with constant `omega`.
pub fn rate_bound(method: Method, omega: f64) -> f64 {
    let w2 = (omega * omega).min(1.0);
    if method.is_circumcentered() {
        ((1.0 - w2) / (1.0 + w2)).sqrt()
    } else {
        (1.0 - w2).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateAudit {
    pub method: Method,
    pub omega: f64,
    pub bound: f64,
    /// Largest tail ratio of `dist(x^k, K ∩ U)`; zero when the run reached
    /// the solution set before any ratio could be formed.
    pub max_ratio: f64,
    pub ratios_checked: usize,
    pub passed: bool,
}

/// Checks the tail distance ratios of a recorded run against
/// [`rate_bound`] plus [`AUDIT_SLACK`].
pub fn audit_rate_bounds(record: &RunRecord, omega: f64, solution: Option<&SolutionSet>) -> Result<RateAudit> {
    let solution = solution.ok_or(CfpError::NoIntersectionOracle)?;
    let trace = record
        .iterate_trace
        .as_ref()
        .ok_or(CfpError::InsufficientTrace { needed: 2, found: 0 })?;
    let distances = trace.iter().map(|x| solution.distance(x)).collect::<Result<Vec<_>>>()?;
    let scale = trace.first().map_or(1.0, |x| x.norm().max(1.0));
    let usable = truncate(&distances, LIMIT_TRUNCATION * scale);
    let bound = rate_bound(record.method, omega);

    let (max_ratio, ratios_checked) = if usable.len() < 2 {
        if usable.len() == distances.len() {
            // Nothing reached the solution set and fewer than two iterates.
            return Err(CfpError::InsufficientTrace {
                needed: 2,
                found: usable.len(),
            });
        }
        (0.0, 0)
    } else {
        let window = default_tail_window(usable.len());
        let last = usable.len() - 1;
        let max = (last - window..last)
            .map(|k| usable[k + 1] / usable[k])
            .fold(0.0, f64::max);
        (max, window)
    };
    Ok(RateAudit {
        method: record.method,
        omega,
        bound,
        max_ratio,
        ratios_checked,
        passed: max_ratio <= bound + AUDIT_SLACK,
    })
}

/// Closed-form images `(T_S(x, 0), C_S(x, 0))` of the MAAP and CARM maps on
/// the epigraph families, for `x in R^n`. Both are returned in `R^{n+1}`.
///
/// Family one: `T = x - f / (|grad f|^2 + 1) grad f` and
/// `C = x - f / |grad f|^2 grad f`. Family two, with `t = |x|`:
/// `T = [1 - phi phi' / ((phi'^2 + 1) t)] x` and `C = [1 - phi / (phi' t)] x`.
pub fn family_oracles(family: &Family, x: &Vector) -> Result<(Vector, Vector)> {
    let n = x.len();
    let embed = |y: Vector| {
        let mut out = Vector::zeros(n + 1);
        out.rows_mut(0, n).copy_from(&y);
        out
    };
    match family {
        Family::One(f) => {
            check_dim(f.dim(), n)?;
            let (fx, grad) = f.value_and_gradient(x);
            if fx <= 0.0 {
                return Ok((embed(x.clone()), embed(x.clone())));
            }
            let grad_sq = grad.norm_squared();
            if grad_sq == 0.0 {
                return Err(CfpError::ZeroGradient);
            }
            let maap = x - &grad * (fx / (grad_sq + 1.0));
            let carm = x - &grad * (fx / grad_sq);
            Ok((embed(maap), embed(carm)))
        }
        Family::Two { profile, dim } => {
            check_dim(*dim, n)?;
            let t = x.norm();
            if t == 0.0 {
                return Err(CfpError::RadialSingularity);
            }
            let phi = profile.value(t);
            if phi <= 0.0 {
                return Ok((embed(x.clone()), embed(x.clone())));
            }
            let dphi = profile.derivative(t);
            let maap = x * (1.0 - phi * dphi / ((dphi * dphi + 1.0) * t));
            let carm = x * (1.0 - phi / (dphi * t));
            Ok((embed(maap), embed(carm)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vector;
    use crate::instances::{QuadraticNorm, ShiftedPower};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn scalar_trace(values: impl Iterator<Item = f64>) -> Vec<Vector> {
        values.map(|v| vector(&[v]).unwrap()).collect()
    }

    #[test]
    fn geometric_sequence_is_linear() {
        let trace = scalar_trace((0..30).map(|k| 0.5f64.powi(k)));
        let r = estimate_rates(&trace, &vector(&[0.0]).unwrap(), 10).unwrap();
        assert_relative_eq!(r.q_estimate, 0.5, epsilon = 1e-12);
        assert_eq!(r.classification, Classification::Linear);
        assert!(r.r_estimate <= r.q_estimate + 1e-12);
    }

    #[test]
    fn harmonic_sequence_is_sublinear() {
        let trace = scalar_trace((0..2000).map(|k| 1.0 / (k as f64 + 1.0)));
        let r = estimate_rates(&trace, &vector(&[0.0]).unwrap(), 10).unwrap();
        assert!(r.q_estimate > 0.99);
        assert_eq!(r.classification, Classification::Sublinear);
    }

    #[test]
    fn doubly_exponential_sequence_is_superlinear() {
        // 2^{-2^k}: 0.5, 0.25, 0.0625, 0.0039, 1.5e-5, 2.3e-10, then below the cutoff.
        let trace = scalar_trace((0..9).map(|k| 0.5f64.powf(2f64.powi(k))));
        let r = estimate_rates(&trace, &vector(&[0.0]).unwrap(), 2).unwrap();
        assert!(r.q_estimate < SUPERLINEAR_Q, "q = {}", r.q_estimate);
        assert_eq!(r.classification, Classification::Superlinear);
    }

    #[test]
    fn short_trace_is_rejected() {
        let trace = scalar_trace([1.0, 0.5, 0.25].into_iter());
        let err = estimate_rates(&trace, &vector(&[0.0]).unwrap(), 10).unwrap_err();
        assert!(matches!(err, CfpError::InsufficientTrace { .. }));
    }

    #[test]
    fn iterates_at_the_limit_are_truncated() {
        let mut values: Vec<f64> = (0..12).map(|k| 0.5f64.powi(k)).collect();
        values.extend([0.0, 0.0]);
        let r = estimate_rates(&scalar_trace(values.into_iter()), &vector(&[0.0]).unwrap(), 10).unwrap();
        assert_relative_eq!(r.q_estimate, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn solution_set_distances() {
        let ray = SolutionSet::Ray {
            origin: vector(&[0.0, 0.0]).unwrap(),
            direction: vector(&[1.0, 0.0]).unwrap(),
        };
        assert_relative_eq!(ray.distance(&vector(&[-3.0, 4.0]).unwrap()).unwrap(), 5.0);
        assert_relative_eq!(ray.distance(&vector(&[3.0, 4.0]).unwrap()).unwrap(), 4.0);

        let seg = SolutionSet::Segment(vector(&[0.0, 0.0]).unwrap(), vector(&[2.0, 0.0]).unwrap());
        assert_relative_eq!(seg.distance(&vector(&[3.0, 0.0]).unwrap()).unwrap(), 1.0);

        let disk = SolutionSet::FlatDisk { radius: 1.0 };
        assert_relative_eq!(disk.distance(&vector(&[3.0, 4.0, 0.0]).unwrap()).unwrap(), 4.0);
        assert_relative_eq!(disk.distance(&vector(&[0.3, 0.0, 2.0]).unwrap()).unwrap(), 2.0);
    }

    #[test]
    fn bounds() {
        let w = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(rate_bound(Method::Maap, w), w, epsilon = 1e-15);
        assert_relative_eq!(rate_bound(Method::Carm, w), (0.5f64 / 1.5).sqrt(), epsilon = 1e-15);
        assert_eq!(rate_bound(Method::Carm, 1.0), 0.0);
    }

    #[test]
    fn family_one_oracle_values() {
        let f = Family::One(Arc::new(QuadraticNorm::new(1)));
        let (t, c) = family_oracles(&f, &vector(&[1.0]).unwrap()).unwrap();
        assert_relative_eq!(t, vector(&[0.6, 0.0]).unwrap(), epsilon = 1e-15);
        assert_relative_eq!(c, vector(&[0.5, 0.0]).unwrap(), epsilon = 1e-15);
        let (t, c) = family_oracles(&f, &vector(&[0.0]).unwrap()).unwrap();
        assert_eq!(t, vector(&[0.0, 0.0]).unwrap());
        assert_eq!(c, vector(&[0.0, 0.0]).unwrap());
    }

    #[test]
    fn family_two_oracle_values() {
        let f = Family::Two {
            profile: Arc::new(ShiftedPower::new(2)),
            dim: 2,
        };
        let x = vector(&[1.2, -0.9]).unwrap();
        let t = x.norm();
        let (_, c) = family_oracles(&f, &x).unwrap();
        let factor = 1.0 - (t * t - 1.0) / (2.0 * t * t);
        assert_relative_eq!(c.rows(0, 2).into_owned(), &x * factor, epsilon = 1e-15);
        assert_eq!(c[2], 0.0);
        assert_eq!(
            family_oracles(&f, &vector(&[0.0, 0.0]).unwrap()),
            Err(CfpError::RadialSingularity)
        );
    }
}
