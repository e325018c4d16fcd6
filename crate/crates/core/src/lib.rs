//! Convex feasibility solvers built around the circumcentered-reflection
//! method (CRM), its approximate-reflection variant (CARM), alternating
//! projections (MAP) and approximate alternating projections (MAAP).
//!
//! The library covers the whole pipeline used to compare these methods:
//!
//! - [`geometry`], [`sets`], [`separators`], [`productspace`]: the
//!   projection, reflection and circumcenter building blocks;
//! - [`solvers`]: the four iteration maps and the fixed-point driver;
//! - [`analysis`]: convergence-rate estimation and audits of the
//!   theoretical rate bounds;
//! - [`instances`]: seeded random ellipsoid problems, epigraph families and
//!   small fixtures with known solution sets;
//! - [`bench`]: the benchmark harness, summary statistics and performance
//!   profiles.
//!
//! Batch workloads (benchmark suites, sampling) run on rayon when the
//! `parallel` feature is enabled and fall back to sequential loops otherwise;
//! see [`exec`].

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bench;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod instances;
pub mod productspace;
pub mod separators;
pub mod sets;
pub mod solvers;

pub use error::{CfpError, Result};
pub use geometry::{circumcenter, reflect, vector, AffineSubspace, HalfSpace, Vector};
pub use productspace::{diag_project, diag_reflect, lift, BlockVector};
pub use separators::{approx_project, separate, ApproxProjection, SeparatingSet, Separator};
pub use sets::{Ball, ConvexSet, Ellipsoid, Epigraph, FnOracle, SmoothFunction, SublevelSet};
pub use solvers::{solve, Method, Problem, RunRecord, RunStatus, SolverConfig, Subspace};
