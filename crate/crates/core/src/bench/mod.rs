//! Benchmark harness: seeded ellipsoid suites run under every method, with
//! per-run rows, summary statistics and performance profiles.

mod experiments;
mod profile;
mod records;
mod stats;

pub use experiments::{family_rates, write_rates_csv, FamilyRate, FAMILY_RATE_HEADER};
pub use profile::{perf_profile, render_svg, write_profile_tsv, Measure, PerfProfile, ProfileCurve};
pub use records::{read_csv, write_csv, BenchResult, BenchRow, CSV_HEADER};
pub use stats::{summarize, MethodSummary, Stats};

use std::time::Instant;

use crate::error::{CfpError, Result};
use crate::exec::{map_ordered, Execution};
use crate::instances::{gen_ellipsoids, DEFAULT_GAMMA};
use crate::solvers::{solve, Method, RunStatus, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub dims: Vec<usize>,
    pub set_counts: Vec<usize>,
    pub instances_per_cell: usize,
    pub base_seed: u64,
    pub eps: f64,
    pub max_iter: usize,
    pub methods: Vec<Method>,
    pub gamma: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self::paper_protocol()
    }
}

impl SuiteConfig {
    /// 160 instances: n in {10, 50, 100, 200}, m in {5, 10, 20, 50}, ten per cell.
    pub fn paper_protocol() -> Self {
        Self {
            dims: vec![10, 50, 100, 200],
            set_counts: vec![5, 10, 20, 50],
            instances_per_cell: 10,
            base_seed: 0,
            eps: 1e-6,
            max_iter: 50_000,
            methods: Method::ALL.to_vec(),
            gamma: DEFAULT_GAMMA,
        }
    }

    /// n in {10, 50}, m in {5, 10}, five per cell.
    pub fn reduced() -> Self {
        Self {
            dims: vec![10, 50],
            set_counts: vec![5, 10],
            instances_per_cell: 5,
            ..Self::paper_protocol()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.set_counts.is_empty() || self.methods.is_empty() {
            return Err(CfpError::InvalidConfig(
                "dims, set counts and methods must be nonempty".into(),
            ));
        }
        if self.instances_per_cell == 0 {
            return Err(CfpError::InvalidConfig("instances per cell must be positive".into()));
        }
        if let Some(n) = self.dims.iter().find(|&&n| n < 2) {
            return Err(CfpError::InvalidConfig(format!(
                "dimension must be at least 2, got {n}"
            )));
        }
        if self.set_counts.contains(&0) {
            return Err(CfpError::InvalidConfig("set counts must be positive".into()));
        }
        SolverConfig::new(self.methods[0])
            .eps(self.eps)
            .max_iter(self.max_iter)
            .validate()
    }

    pub fn instance_count(&self) -> usize {
        self.dims.len() * self.set_counts.len() * self.instances_per_cell
    }
}

/// Seed of instance `index` in cell `(n, m)`: splitmix64 over the inputs.
pub fn instance_seed(base_seed: u64, n: usize, m: usize, index: usize) -> u64 {
    let mut h = base_seed;
    for v in [n as u64, m as u64, index as u64] {
        h = splitmix64(h ^ v);
    }
    h
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs every method on every instance. Instances run concurrently under
/// `exec`; rows come back in `(n, m, index, method)` order.
pub fn run_suite(cfg: &SuiteConfig, exec: Execution) -> Result<BenchResult> {
    cfg.validate()?;
    let mut cells = Vec::with_capacity(cfg.instance_count());
    for &n in &cfg.dims {
        for &m in &cfg.set_counts {
            for index in 0..cfg.instances_per_cell {
                cells.push((n, m, index));
            }
        }
    }
    let started = Instant::now();
    let per_instance = map_ordered(exec, &cells, |&(n, m, index)| run_instance(cfg, n, m, index))?;
    log::info!(
        "suite of {} instances finished in {:.2} s",
        cells.len(),
        started.elapsed().as_secs_f64()
    );
    let mut rows = Vec::with_capacity(cells.len() * cfg.methods.len());
    for r in per_instance {
        rows.extend(r?);
    }
    Ok(BenchResult { rows })
}

fn run_instance(cfg: &SuiteConfig, n: usize, m: usize, index: usize) -> Result<Vec<BenchRow>> {
    let seed = instance_seed(cfg.base_seed, n, m, index);
    let inst = gen_ellipsoids(n, m, seed, cfg.gamma, None)?;
    let problem = inst.to_problem();
    let x0 = inst.initial_point();
    let id = format!("n{n}-m{m}-i{index}");
    let mut rows = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let scfg = SolverConfig::new(method).eps(cfg.eps).max_iter(cfg.max_iter);
        let rec = solve(&problem, &scfg, &x0)?;
        if let Some(e) = &rec.failure {
            log::warn!("{id} {method}: {e}");
        }
        rows.push(BenchRow {
            instance_id: id.clone(),
            n,
            m,
            method,
            iterations: rec.iterations,
            wall_time_s: rec.wall_time,
            final_gap: rec.final_gap(),
            status: rec.status,
        });
        log::debug!("{id} {method}: {} iterations, {}", rec.iterations, rec.status);
    }
    Ok(rows)
}

impl BenchResult {
    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &BenchRow> + '_ {
        self.rows.iter().filter(move |r| r.method == method)
    }

    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.status == RunStatus::Converged)
    }
}
