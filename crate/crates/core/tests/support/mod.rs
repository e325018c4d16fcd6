//! Property checks shared by the invariant suite and the acceptance run.
#![allow(dead_code)]

use cfp_core::bench::{read_csv, write_csv, BenchResult, BenchRow};
use cfp_core::geometry::{circumcenter, AffineSubspace, HalfSpace, Vector};
use cfp_core::instances::gen_ellipsoids;
use cfp_core::separators::{separate, SeparatingSet, Separator};
use cfp_core::sets::{Ball, ConvexSet, Ellipsoid};
use cfp_core::solvers::{carm_step, crm_step, maap_step, map_step, step, Method, Problem, RunStatus, Subspace};
use cfp_core::CfpError;
use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const CASES: u32 = 1000;

pub type Check = std::result::Result<(), TestCaseError>;

pub fn config() -> Config {
    Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    }
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Random SPD ellipsoid containing the origin in its interior.
pub fn random_ellipsoid(rng: &mut ChaCha8Rng, n: usize) -> Ellipsoid {
    let b = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut a = b.transpose() * b;
    for i in 0..n {
        for j in 0..i {
            a[(i, j)] = a[(j, i)];
        }
        a[(i, i)] += 0.2 + rng.random::<f64>();
    }
    let lin = gaussian(rng, n) * 0.5;
    let alpha = 0.1 + 3.0 * rng.random::<f64>();
    Ellipsoid::new(a, lin, alpha).expect("valid ellipsoid")
}

/// One of the sets with an exact projector, chosen by `seed`.
pub fn random_set(seed: u64, n: usize) -> ConvexSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match seed % 4 {
        0 => ConvexSet::HalfSpace(HalfSpace::new(gaussian(&mut rng, n), rng.random::<f64>() - 0.5).unwrap()),
        1 => {
            let k = 1 + (seed as usize / 4) % (n - 1).max(1);
            let spanning: Vec<Vector> = (0..k).map(|_| gaussian(&mut rng, n)).collect();
            ConvexSet::Affine(AffineSubspace::from_spanning(gaussian(&mut rng, n), &spanning).unwrap())
        }
        2 => ConvexSet::Ball(Ball::new(gaussian(&mut rng, n), 0.1 + 2.0 * rng.random::<f64>()).unwrap()),
        _ => ConvexSet::Ellipsoid(random_ellipsoid(&mut rng, n)),
    }
}

pub fn vec_strategy(n: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, n)
}

pub fn triple_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2usize..7).prop_flat_map(|n| (vec_strategy(n, 10.0), vec_strategy(n, 10.0), vec_strategy(n, 10.0)))
}

pub fn pair_strategy() -> impl Strategy<Value = (u64, Vec<f64>, Vec<f64>)> {
    (2usize..6, any::<u64>()).prop_flat_map(|(n, seed)| (Just(seed), vec_strategy(n, 5.0), vec_strategy(n, 5.0)))
}

pub fn point_strategy() -> impl Strategy<Value = (u64, Vec<f64>)> {
    (2usize..6, any::<u64>()).prop_flat_map(|(n, seed)| (Just(seed), vec_strategy(n, 5.0)))
}

/// `(n, m, seed)` for small ellipsoid instances.
pub fn instance_strategy() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..6, 2usize..5, any::<u64>())
}

pub fn check_circumcenter((x, y, z): (Vec<f64>, Vec<f64>, Vec<f64>)) -> Check {
    let (x, y, z) = (Vector::from_vec(x), Vector::from_vec(y), Vector::from_vec(z));
    let u = &y - &x;
    let v = &z - &x;
    let (uu, vv, uv) = (u.norm_squared(), v.norm_squared(), u.dot(&v));
    // non-collinear triples only
    prop_assume!(uu * vv - uv * uv > 1e-6 * uu * vv);
    let c = circumcenter(&x, &y, &z).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let r = (&c - &x).norm();
    let tol = 1e-9 * (1.0 + r);
    prop_assert!(
        ((&c - &y).norm() - r).abs() <= tol,
        "|c-y| = {}, |c-x| = {r}",
        (&c - &y).norm()
    );
    prop_assert!(
        ((&c - &z).norm() - r).abs() <= tol,
        "|c-z| = {}, |c-x| = {r}",
        (&c - &z).norm()
    );
    let span = AffineSubspace::from_spanning(Vector::zeros(x.len()), &[u, v]).unwrap();
    let residual = span.distance(&(&c - &x)).unwrap();
    prop_assert!(residual <= 1e-9 * (1.0 + r), "affine hull residual {residual}");
    Ok(())
}

fn firm(px: &Vector, py: &Vector, x: &Vector, y: &Vector) -> Check {
    let d = px - py;
    let lhs = d.norm_squared();
    let rhs = d.dot(&(x - y));
    prop_assert!(
        lhs <= rhs + 1e-10 * (1.0 + rhs.abs()),
        "|Px-Py|^2 = {lhs} > <Px-Py, x-y> = {rhs}"
    );
    Ok(())
}

/// Firm nonexpansiveness of the exact projectors and of the diagonal projection.
pub fn check_firm_nonexpansive((seed, x, y): (u64, Vec<f64>, Vec<f64>)) -> Check {
    let (x, y) = (Vector::from_vec(x), Vector::from_vec(y));
    let n = x.len();
    let set = random_set(seed, n);
    let px = set.project_exact(&x).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let py = set.project_exact(&y).map_err(|e| TestCaseError::fail(e.to_string()))?;
    firm(&px, &py, &x, &y)?;

    // diagonal of (R^1)^n
    let diag = Subspace::Diagonal {
        blocks: n,
        block_dim: 1,
    };
    firm(&diag.project(&x).unwrap(), &diag.project(&y).unwrap(), &x, &y)
}

/// Separating sets contain `K` and exclude the query point when it is outside.
pub fn check_separator((seed, x): (u64, Vec<f64>)) -> Check {
    let x = Vector::from_vec(x);
    let n = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = random_ellipsoid(&mut rng, n);
    let set = ConvexSet::Ellipsoid(e.clone());
    let sep = Separator::subgradient_for(&set).unwrap();
    let cut = match separate(&sep, &x) {
        Ok(s) => s,
        Err(CfpError::ZeroGradient) => return Ok(()),
        Err(err) => return Err(TestCaseError::fail(err.to_string())),
    };
    match cut {
        SeparatingSet::WholeSet => prop_assert!(e.value(&x) <= 0.0),
        SeparatingSet::CutHalfSpace(h) => {
            prop_assert!(h.violation(&x).unwrap() > 0.0, "query point not excluded");
            // points of K: boundary projections and random interior points
            for _ in 0..8 {
                let probe = gaussian(&mut rng, n) * 5.0;
                let on_boundary = set.project_exact(&probe).unwrap();
                let inside = &on_boundary * rng.random::<f64>();
                for z in [on_boundary, inside] {
                    let scale = 1.0 + h.normal().norm() * z.norm() + h.offset().abs();
                    prop_assert!(h.violation(&z).unwrap() <= 1e-9 * scale, "K point outside the cut");
                }
            }
        }
        SeparatingSet::Product(_) => prop_assert!(false, "unexpected product cut"),
    }
    Ok(())
}

const STEPS: usize = 6;

fn step_or_stop(problem: &Problem, method: Method, x: &Vector) -> std::result::Result<Option<Vector>, TestCaseError> {
    match step(problem, method, x) {
        Ok(next) => Ok(Some(next)),
        Err(CfpError::DegenerateCircumcenter) => Ok(None),
        Err(e) => Err(TestCaseError::fail(format!("{method}: {e}"))),
    }
}

/// Fejér monotonicity toward the origin for all methods, circumcentered
/// iterates staying on the diagonal, and the segment property of CARM.
pub fn check_fejer((n, m, seed): (usize, usize, u64)) -> Check {
    let inst = gen_ellipsoids(n, m, seed, 1.0, None).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let problem = inst.to_problem();
    let x0 = inst.initial_point();
    for method in Method::ALL {
        let mut x = x0.clone();
        for _ in 0..STEPS {
            let Some(next) = step_or_stop(&problem, method, &x)? else {
                break;
            };
            prop_assert!(
                next.norm() <= x.norm() + 1e-9,
                "{method}: |x+| = {} > |x| = {}",
                next.norm(),
                x.norm()
            );
            if method.is_circumcentered() {
                let residual = problem.subspace().residual(&next).unwrap();
                prop_assert!(residual <= 1e-8, "{method}: residual {residual}");
            }
            if method == Method::Carm {
                check_segment(&problem, &x, &next)?;
            }
            x = next;
        }
    }
    Ok(())
}

// T^S(x) = x + theta (C^S(x) - x) with theta in [0, 1].
fn check_segment(problem: &Problem, x: &Vector, carm: &Vector) -> Check {
    let t = maap_step(problem, x).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let dc = carm - x;
    let dt = &t - x;
    let len_sq = dc.norm_squared();
    if len_sq == 0.0 {
        prop_assert!(dt.norm() <= 1e-8, "CARM fixed but MAAP moved by {}", dt.norm());
        return Ok(());
    }
    let theta = dt.dot(&dc) / len_sq;
    let residual = (&dt - &dc * theta).norm();
    prop_assert!(residual <= 1e-8, "colinearity residual {residual}");
    prop_assert!((-1e-8..=1.0 + 1e-8).contains(&theta), "theta = {theta}");
    Ok(())
}

/// With `S(x) = K`, MAAP is MAP and CARM is CRM.
pub fn check_exact_reduction((n, m, seed): (usize, usize, u64)) -> Check {
    let inst = gen_ellipsoids(n, m, seed, 1.0, None).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let problem = Problem::with_exact_separator(
        inst.product_set(),
        Subspace::Diagonal {
            blocks: m,
            block_dim: n,
        },
    )
    .unwrap();
    let mut x = inst.initial_point();
    for _ in 0..3 {
        let a = maap_step(&problem, &x).unwrap();
        let b = map_step(&problem, &x).unwrap();
        prop_assert!((&a - &b).amax() <= 1e-12, "MAAP vs MAP {}", (&a - &b).amax());
        let c = carm_step(&problem, &x);
        let d = crm_step(&problem, &x);
        match (c, d) {
            (Ok(c), Ok(d)) => {
                prop_assert!((&c - &d).amax() <= 1e-12, "CARM vs CRM {}", (&c - &d).amax());
                x = c;
            }
            (Err(c), Err(d)) => {
                prop_assert_eq!(c, d);
                break;
            }
            (c, d) => prop_assert!(false, "CARM {c:?} vs CRM {d:?}"),
        }
    }
    Ok(())
}

pub fn row_strategy() -> impl Strategy<Value = BenchRow> {
    (
        "[a-z0-9-]{1,12}",
        1usize..500,
        1usize..60,
        prop::sample::select(Method::ALL.to_vec()),
        0usize..60_000,
        1e-9f64..1e3,
        prop_oneof![Just(0.0), 1e-300f64..1.0, Just(f64::NAN)],
        prop::sample::select(vec![
            RunStatus::Converged,
            RunStatus::IterationCapReached,
            RunStatus::DegenerateCircumcenter,
            RunStatus::Failed,
        ]),
    )
        .prop_map(
            |(instance_id, n, m, method, iterations, wall_time_s, final_gap, status)| BenchRow {
                instance_id,
                n,
                m,
                method,
                iterations,
                wall_time_s,
                final_gap,
                status,
            },
        )
}

pub fn check_csv_round_trip(rows: Vec<BenchRow>) -> Check {
    let res = BenchResult { rows };
    let mut buf = Vec::new();
    write_csv(&res, &mut buf).unwrap();
    let back = read_csv(&buf[..]).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(back.rows.len(), res.rows.len());
    for (a, b) in back.rows.iter().zip(&res.rows) {
        prop_assert_eq!(&a.instance_id, &b.instance_id);
        prop_assert_eq!(
            (a.n, a.m, a.method, a.iterations, a.status),
            (b.n, b.m, b.method, b.iterations, b.status)
        );
        prop_assert_eq!(a.wall_time_s.to_bits(), b.wall_time_s.to_bits());
        prop_assert!(a.final_gap.to_bits() == b.final_gap.to_bits() || (a.final_gap.is_nan() && b.final_gap.is_nan()));
    }
    Ok(())
}

/// Runs one property under [`config`], returning the failure message if any.
pub fn run_property<S, F>(strategy: S, check: F) -> std::result::Result<(), String>
where
    S: Strategy,
    F: Fn(S::Value) -> Check,
{
    let mut runner = TestRunner::new(config());
    runner.run(&strategy, check).map_err(|e| e.to_string())
}
