//! Small problems whose intersection `K ∩ U` is known in closed form.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::analysis::SolutionSet;
use crate::error::{CfpError, Result};
use crate::geometry::{AffineSubspace, HalfSpace, Vector};
use crate::sets::{Ball, ConvexSet};
use crate::solvers::{Problem, Subspace};

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub problem: Problem,
    pub x0: Vector,
    pub solution: SolutionSet,
    /// Error-bound constant near the limit, when known.
    pub omega: Option<f64>,
}

// Smallest |cos| between the half-space normal and the line.
const MIN_CROSSING: f64 = 0.1;

/// A random half-space and a line in `R^n` crossing its boundary, with
/// `x0` on the line outside the half-space. The intersection is a ray.
pub fn halfspace_line(n: usize, seed: u64) -> Result<Fixture> {
    if n < 2 {
        return Err(CfpError::InvalidConfig(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian = |rng: &mut ChaCha8Rng| Vector::from_fn(n, |_, _| rng.sample(StandardNormal));
    let (normal, dir) = loop {
        let a = gaussian(&mut rng);
        let d = gaussian(&mut rng);
        let (an, dn) = (a.norm(), d.norm());
        if an == 0.0 || dn == 0.0 {
            continue;
        }
        let d = d / dn;
        if (a.dot(&d) / an).abs() >= MIN_CROSSING {
            break (a, d);
        }
    };
    let point = gaussian(&mut rng);
    let offset = normal.dot(&point);
    let outward = if normal.dot(&dir) > 0.0 {
        dir.clone()
    } else {
        -dir.clone()
    };
    let t = 0.5 + 4.5 * rng.random::<f64>();
    let x0 = &point + &outward * t;

    let h = HalfSpace::new(normal, offset)?;
    let line = AffineSubspace::line(point.clone(), dir)?;
    let problem = Problem::with_subgradient_separator(ConvexSet::HalfSpace(h), Subspace::Affine(line))?;
    Ok(Fixture {
        name: format!("halfspace-line-n{n}-s{seed}"),
        problem,
        x0,
        solution: SolutionSet::Ray {
            origin: point,
            direction: -outward,
        },
        omega: None,
    })
}

fn angle_geometry(theta: f64) -> Result<(Vector, Subspace)> {
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2) {
        return Err(CfpError::InvalidConfig(format!(
            "angle must be in (0, pi/2], got {theta}"
        )));
    }
    let outward = Vector::from_vec(vec![-theta.sin(), theta.cos()]);
    let axis = AffineSubspace::line(Vector::zeros(2), Vector::from_vec(vec![1.0, 0.0]))?;
    Ok((outward, Subspace::Affine(axis)))
}

/// The half-plane bounded by the line through the origin at angle `theta`
/// against the x-axis, started from `(-1, 0)`. The intersection is the
/// nonnegative half-axis and the error-bound constant is `sin(theta)`.
pub fn two_lines(theta: f64) -> Result<Fixture> {
    let (outward, axis) = angle_geometry(theta)?;
    let h = HalfSpace::new(outward, 0.0)?;
    Ok(Fixture {
        name: format!("two-lines-{:.1}deg", theta.to_degrees()),
        problem: Problem::with_subgradient_separator(ConvexSet::HalfSpace(h), axis)?,
        x0: Vector::from_vec(vec![-1.0, 0.0]),
        solution: SolutionSet::Ray {
            origin: Vector::zeros(2),
            direction: Vector::from_vec(vec![1.0, 0.0]),
        },
        omega: Some(theta.sin()),
    })
}

/// Smooth strongly convex version of [`two_lines`]: the disk of radius `r`
/// tangent at the origin to the boundary line of angle `theta`, i.e.
/// centered at `r (sin theta, -cos theta)`. The intersection with the
/// x-axis is the segment `[0, 2 r sin theta]` and iterates started at
/// `(-r, 0)` approach its left endpoint, where the local error-bound
/// constant is `sin(theta)`.
pub fn tangent_disk(theta: f64, radius: f64) -> Result<Fixture> {
    let (outward, axis) = angle_geometry(theta)?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(CfpError::InvalidConfig(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let center = -outward * radius;
    let disk = Ball::new(center, radius)?;
    Ok(Fixture {
        name: format!("tangent-disk-{:.1}deg", theta.to_degrees()),
        problem: Problem::with_subgradient_separator(ConvexSet::Ball(disk), axis)?,
        x0: Vector::from_vec(vec![-radius, 0.0]),
        solution: SolutionSet::Segment(
            Vector::zeros(2),
            Vector::from_vec(vec![2.0 * radius * theta.sin(), 0.0]),
        ),
        omega: Some(theta.sin()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn halfspace_line_start_is_exterior() {
        for seed in 0..50 {
            let fx = halfspace_line(2 + (seed as usize % 9), seed).unwrap();
            assert!(!fx.problem.set().contains(&fx.x0, 0.0));
            assert!(fx.problem.subspace().residual(&fx.x0).unwrap() < 1e-9 * (1.0 + fx.x0.norm()));
            let p = fx.solution.project(&fx.x0).unwrap();
            assert!(fx.problem.set().contains(&p, 1e-9));
        }
    }

    #[test]
    fn two_lines_geometry() {
        let fx = two_lines(std::f64::consts::FRAC_PI_6).unwrap();
        let (_, gap) = fx.problem.gap_projection(crate::solvers::Method::Map, &fx.x0).unwrap();
        assert_relative_eq!(gap, 0.5, epsilon = 1e-15);
        assert_relative_eq!(fx.solution.distance(&fx.x0).unwrap(), 1.0);
    }

    #[test]
    fn tangent_disk_touches_origin_and_segment_end() {
        let theta = std::f64::consts::FRAC_PI_3;
        let fx = tangent_disk(theta, 2.0).unwrap();
        let set = fx.problem.set();
        assert!(set.contains(&Vector::zeros(2), 1e-14));
        let end = Vector::from_vec(vec![4.0 * theta.sin(), 0.0]);
        let (g, _) = set.eval_oracle(&end).unwrap();
        assert!(g.abs() < 1e-12);
        assert!(!set.contains(&fx.x0, 0.0));
    }

    #[test]
    fn rejects_bad_angles() {
        assert!(two_lines(0.0).is_err());
        assert!(tangent_disk(2.0, 1.0).is_err());
        assert!(tangent_disk(0.5, -1.0).is_err());
        assert!(halfspace_line(1, 0).is_err());
    }
}
