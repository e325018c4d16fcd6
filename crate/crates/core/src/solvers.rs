//! The four iteration maps and the common fixed-point driver.
//!
//! Every method seeks a point of `K ∩ U`:
//!
//! * MAP:  `x+ = P_U(P_K(x))`
//! * MAAP: `x+ = P_U(P_S(x))`, with `P_S` the projection onto a separating set
//! * CRM:  `x+ = circ(x, R_K(x), R_U(R_K(x)))`
//! * CARM: `x+ = circ(x, R_S(x), R_U(R_S(x)))`
//!
//! The driver evaluates one projection per iteration. The gap `|x - P(x)|`
//! is tested against the tolerance and the same projection is then fed into
//! the step.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{check_dim, CfpError, Result};
use crate::geometry::{circumcenter, AffineSubspace, Vector};
use crate::productspace::{diag_project_flat, diag_reflect_flat};
use crate::separators::{approx_project, Separator};
use crate::sets::ConvexSet;

/// Tolerance for the `x in U` precondition of the circumcentered steps,
/// relative to `1 + |x|`.
pub const SUBSPACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Carm,
    Maap,
    Crm,
    Map,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Carm, Method::Maap, Method::Crm, Method::Map];

    pub fn is_circumcentered(self) -> bool {
        matches!(self, Method::Crm | Method::Carm)
    }

    pub fn uses_exact_projection(self) -> bool {
        matches!(self, Method::Map | Method::Crm)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Carm => "CARM",
            Method::Maap => "MAAP",
            Method::Crm => "CRM",
            Method::Map => "MAP",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = CfpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "carm" => Ok(Method::Carm),
            "maap" => Ok(Method::Maap),
            "crm" => Ok(Method::Crm),
            "map" => Ok(Method::Map),
            _ => Err(CfpError::InvalidConfig(format!("unknown method `{s}`"))),
        }
    }
}

/// The subspace `U`.
#[derive(Debug, Clone, PartialEq)]
pub enum Subspace {
    Affine(AffineSubspace),
    /// The diagonal `{(x, ..., x)}` of `R^{n * blocks}`.
    Diagonal {
        blocks: usize,
        block_dim: usize,
    },
}

impl Subspace {
    pub fn dim(&self) -> usize {
        match self {
            Subspace::Affine(u) => u.ambient_dim(),
            Subspace::Diagonal { blocks, block_dim } => blocks * block_dim,
        }
    }

    pub fn project(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        match self {
            Subspace::Affine(u) => u.project(x),
            Subspace::Diagonal { block_dim, .. } => Ok(diag_project_flat(x, *block_dim)),
        }
    }

    pub fn reflect(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        match self {
            Subspace::Affine(u) => u.reflect(x),
            Subspace::Diagonal { block_dim, .. } => Ok(diag_reflect_flat(x, *block_dim)),
        }
    }

    /// `|x - P_U(x)|`.
    pub fn residual(&self, x: &Vector) -> Result<f64> {
        Ok((x - self.project(x)?).norm())
    }
}

/// A feasibility problem `find x in K ∩ U` with the separator used by the
/// approximate methods.
#[derive(Debug, Clone)]
pub struct Problem {
    set: ConvexSet,
    subspace: Subspace,
    separator: Separator,
}

impl Problem {
    pub fn new(set: ConvexSet, subspace: Subspace, separator: Separator) -> Result<Self> {
        check_dim(set.dim(), subspace.dim())?;
        check_dim(set.dim(), separator.dim())?;
        Ok(Self {
            set,
            subspace,
            separator,
        })
    }

    /// Problem whose approximate methods use linearization cuts of `set`.
    pub fn with_subgradient_separator(set: ConvexSet, subspace: Subspace) -> Result<Self> {
        let separator = Separator::subgradient_for(&set)?;
        Self::new(set, subspace, separator)
    }

    /// Problem with the trivial separator `S(x) = K`.
    pub fn with_exact_separator(set: ConvexSet, subspace: Subspace) -> Result<Self> {
        let separator = Separator::Exact(set.clone());
        Self::new(set, subspace, separator)
    }

    pub fn set(&self) -> &ConvexSet {
        &self.set
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn separator(&self) -> &Separator {
        &self.separator
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    /// Projection used by `method` together with the gap `|x - P(x)|`.
    pub fn gap_projection(&self, method: Method, x: &Vector) -> Result<(Vector, f64)> {
        if method.uses_exact_projection() {
            let p = self.set.project_exact(x)?;
            let gap = (x - &p).norm();
            Ok((p, gap))
        } else {
            let p = approx_project(&self.separator, x)?;
            Ok((p.point, p.distance))
        }
    }

    fn require_in_subspace(&self, x: &Vector) -> Result<()> {
        let residual = self.subspace.residual(x)?;
        if residual <= SUBSPACE_TOL * (1.0 + x.norm()) {
            Ok(())
        } else {
            Err(CfpError::NotInSubspace { residual })
        }
    }
}

// One iteration given the projection of x computed for the gap test.
fn advance(problem: &Problem, method: Method, x: &Vector, projected: &Vector) -> Result<Vector> {
    if method.is_circumcentered() {
        let reflected = projected * 2.0 - x;
        let twice = problem.subspace.reflect(&reflected)?;
        circumcenter(x, &reflected, &twice)
    } else {
        problem.subspace.project(projected)
    }
}

/// One iteration of `method` from `x`.
pub fn step(problem: &Problem, method: Method, x: &Vector) -> Result<Vector> {
    check_dim(problem.dim(), x.len())?;
    if method.is_circumcentered() {
        problem.require_in_subspace(x)?;
    }
    let (projected, _) = problem.gap_projection(method, x)?;
    advance(problem, method, x, &projected)
}

/// `P_U(P_K(x))`.
pub fn map_step(problem: &Problem, x: &Vector) -> Result<Vector> {
    step(problem, Method::Map, x)
}

/// `P_U(P_S(x))`.
pub fn maap_step(problem: &Problem, x: &Vector) -> Result<Vector> {
    step(problem, Method::Maap, x)
}

/// `circ(x, R_K(x), R_U(R_K(x)))`; requires `x in U`.
pub fn crm_step(problem: &Problem, x: &Vector) -> Result<Vector> {
    step(problem, Method::Crm, x)
}

/// `circ(x, R_S(x), R_U(R_S(x)))`; requires `x in U`.
pub fn carm_step(problem: &Problem, x: &Vector) -> Result<Vector> {
    step(problem, Method::Carm, x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub eps: f64,
    pub max_iter: usize,
    pub record_iterates: bool,
}

impl SolverConfig {
    pub const DEFAULT_EPS: f64 = 1e-6;
    pub const DEFAULT_MAX_ITER: usize = 50_000;

    pub fn new(method: Method) -> Self {
        Self {
            method,
            eps: Self::DEFAULT_EPS,
            max_iter: Self::DEFAULT_MAX_ITER,
            record_iterates: false,
        }
    }

    pub fn eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn record_iterates(mut self, record: bool) -> Self {
        self.record_iterates = record;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(CfpError::InvalidConfig(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if self.max_iter == 0 {
            return Err(CfpError::InvalidConfig("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Converged,
    IterationCapReached,
    DegenerateCircumcenter,
    /// Any other step error; the error is kept in [`RunRecord::failure`].
    Failed,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::IterationCapReached => "iteration_cap",
            RunStatus::DegenerateCircumcenter => "degenerate_circumcenter",
            RunStatus::Failed => "failed",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunStatus {
    type Err = CfpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converged" => Ok(RunStatus::Converged),
            "iteration_cap" => Ok(RunStatus::IterationCapReached),
            "degenerate_circumcenter" => Ok(RunStatus::DegenerateCircumcenter),
            "failed" => Ok(RunStatus::Failed),
            _ => Err(CfpError::InvalidConfig(format!("unknown run status `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub method: Method,
    pub status: RunStatus,
    pub iterations: usize,
    /// Seconds spent in the iterate loop.
    pub wall_time: f64,
    pub final_point: Vector,
    /// Gap at every visited iterate, `iterations + 1` entries.
    pub gap_trace: Vec<f64>,
    pub iterate_trace: Option<Vec<Vector>>,
    pub failure: Option<CfpError>,
}

impl RunRecord {
    pub fn final_gap(&self) -> f64 {
        *self.gap_trace.last().expect("gap trace is never empty")
    }

    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }
}

/// Runs `cfg.method` from `x0` until the gap drops below `cfg.eps` or the
/// iteration cap is hit.
///
/// Circumcentered methods start from `P_U(x0)`. Step failures end the run
/// and are reported through the status; only an invalid configuration or a
/// dimension mismatch makes this return `Err`.
pub fn solve(problem: &Problem, cfg: &SolverConfig, x0: &Vector) -> Result<RunRecord> {
    cfg.validate()?;
    check_dim(problem.dim(), x0.len())?;
    let method = cfg.method;

    let mut x = x0.clone();
    if method.is_circumcentered() && problem.require_in_subspace(&x).is_err() {
        log::debug!("{method}: initial point moved onto U");
        x = problem.subspace.project(&x)?;
    }

    let mut gap_trace = Vec::new();
    let mut iterate_trace = cfg.record_iterates.then(Vec::new);
    let mut iterations = 0;
    let mut failure = None;

    let start = Instant::now();
    let status = loop {
        let (projected, gap) = match problem.gap_projection(method, &x) {
            Ok(pg) => pg,
            Err(e) => {
                // No gap for this iterate; keep the trace length invariant.
                gap_trace.push(f64::NAN);
                if let Some(t) = iterate_trace.as_mut() {
                    t.push(x.clone());
                }
                failure = Some(e);
                break RunStatus::Failed;
            }
        };
        gap_trace.push(gap);
        if let Some(t) = iterate_trace.as_mut() {
            t.push(x.clone());
        }
        if gap < cfg.eps {
            break RunStatus::Converged;
        }
        if iterations == cfg.max_iter {
            break RunStatus::IterationCapReached;
        }
        match advance(problem, method, &x, &projected) {
            Ok(next) => {
                x = next;
                iterations += 1;
            }
            Err(CfpError::DegenerateCircumcenter) => {
                failure = Some(CfpError::DegenerateCircumcenter);
                break RunStatus::DegenerateCircumcenter;
            }
            Err(e) => {
                failure = Some(e);
                break RunStatus::Failed;
            }
        }
    };
    let wall_time = start.elapsed().as_secs_f64();

    Ok(RunRecord {
        method,
        status,
        iterations,
        wall_time,
        final_point: x,
        gap_trace,
        iterate_trace,
        failure,
    })
}
