use crate::error::{CfpError, Result};
use crate::solvers::{Method, RunStatus};

use super::BenchResult;

/// Mean, extremes and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    pub std: f64,
    pub count: usize,
}

impl Stats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let std = if count > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self {
            mean,
            max,
            min,
            std,
            count,
        })
    }
}

/// Statistics over the converged rows of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub iterations: Option<Stats>,
    pub wall_time: Option<Stats>,
    pub converged: usize,
    pub not_converged: usize,
}

/// Per-method summaries in [`Method::ALL`] order, for methods present in
/// the result.
pub fn summarize(result: &BenchResult) -> Result<Vec<MethodSummary>> {
    if result.rows.is_empty() {
        return Err(CfpError::EmptyResult);
    }
    let mut out = Vec::new();
    for method in Method::ALL {
        let rows: Vec<_> = result.rows_for(method).collect();
        if rows.is_empty() {
            continue;
        }
        let ok: Vec<_> = rows.iter().filter(|r| r.status == RunStatus::Converged).collect();
        let iters: Vec<f64> = ok.iter().map(|r| r.iterations as f64).collect();
        let times: Vec<f64> = ok.iter().map(|r| r.wall_time_s).collect();
        out.push(MethodSummary {
            method,
            iterations: Stats::from_values(&iters),
            wall_time: Stats::from_values(&times),
            converged: ok.len(),
            not_converged: rows.len() - ok.len(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::BenchRow;
    use approx::assert_relative_eq;

    fn row(method: Method, iterations: usize, status: RunStatus) -> BenchRow {
        BenchRow {
            instance_id: "x".into(),
            n: 2,
            m: 1,
            method,
            iterations,
            wall_time_s: iterations as f64 * 1e-3,
            final_gap: 0.0,
            status,
        }
    }

    #[test]
    fn single_row() {
        let s = summarize(&BenchResult {
            rows: vec![row(Method::Map, 12, RunStatus::Converged)],
        })
        .unwrap();
        assert_eq!(s.len(), 1);
        let it = s[0].iterations.unwrap();
        assert_eq!((it.mean, it.max, it.min, it.std), (12.0, 12.0, 12.0, 0.0));
    }

    #[test]
    fn sample_std_and_failures() {
        let s = summarize(&BenchResult {
            rows: vec![
                row(Method::Carm, 2, RunStatus::Converged),
                row(Method::Carm, 4, RunStatus::Converged),
                row(Method::Carm, 9, RunStatus::Converged),
                row(Method::Carm, 50, RunStatus::IterationCapReached),
            ],
        })
        .unwrap();
        let it = s[0].iterations.unwrap();
        assert_relative_eq!(it.mean, 5.0);
        // deviations -3, -1, 4: (9 + 1 + 16) / 2 = 13
        assert_relative_eq!(it.std, 13f64.sqrt());
        assert_eq!((s[0].converged, s[0].not_converged), (3, 1));
    }

    #[test]
    fn empty_is_an_error() {
        assert_eq!(summarize(&BenchResult::default()), Err(CfpError::EmptyResult));
    }
}
