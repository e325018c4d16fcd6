//! Rate experiments on the epigraph families.

use std::io::Write;

use crate::analysis::{default_tail_window, estimate_rates_from_distances, RateReport, LIMIT_TRUNCATION};
use crate::error::Result;
use crate::instances::{family_solution_set, make_family, Family};
use crate::solvers::{solve, Method, RunStatus, SolverConfig};

pub const FAMILY_RATE_HEADER: &str =
    "family,function,n,method,iterations,final_gap,status,q_estimate,r_estimate,classification";

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyRate {
    pub family: u8,
    pub function: String,
    pub n: usize,
    pub method: Method,
    pub iterations: usize,
    pub final_gap: f64,
    pub status: RunStatus,
    /// Distances `dist(x^k, K ∩ U)` along the run.
    pub distances: Vec<f64>,
    /// `None` when the run was too short to estimate a rate.
    pub rates: Option<RateReport>,
}

/// Runs each method on the family from its default start and estimates
/// rates from the exact distances to `K ∩ U`.
pub fn family_rates(family: &Family, methods: &[Method], eps: f64, max_iter: usize) -> Result<Vec<FamilyRate>> {
    let problem = make_family(family)?;
    let solution = family_solution_set(family)?;
    let x0 = family.default_start();
    let mut out = Vec::with_capacity(methods.len());
    for &method in methods {
        let cfg = SolverConfig::new(method)
            .eps(eps)
            .max_iter(max_iter)
            .record_iterates(true);
        let rec = solve(&problem, &cfg, &x0)?;
        let trace = rec.iterate_trace.as_deref().unwrap_or_default();
        let distances = trace.iter().map(|x| solution.distance(x)).collect::<Result<Vec<_>>>()?;
        let cutoff = LIMIT_TRUNCATION * x0.norm().max(1.0);
        let usable = distances.iter().take_while(|&&d| d > cutoff).count();
        let rates = estimate_rates_from_distances(&distances, default_tail_window(usable), cutoff).ok();
        out.push(FamilyRate {
            family: family.index(),
            function: family.function().name(),
            n: family.dim(),
            method,
            iterations: rec.iterations,
            final_gap: rec.final_gap(),
            status: rec.status,
            distances,
            rates,
        });
    }
    Ok(out)
}

pub fn write_rates_csv<W: Write>(rates: &[FamilyRate], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FAMILY_RATE_HEADER.split(','))?;
    for r in rates {
        let (q, rr, class) = match &r.rates {
            Some(rep) => (
                rep.q_estimate.to_string(),
                rep.r_estimate.to_string(),
                rep.classification.to_string(),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        w.write_record([
            r.family.to_string(),
            r.function.clone(),
            r.n.to_string(),
            r.method.to_string(),
            r.iterations.to_string(),
            r.final_gap.to_string(),
            r.status.to_string(),
            q,
            rr,
            class,
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Classification;

    #[test]
    fn family_two_constants() {
        let fam = Family::shifted_power(2, 2);
        let rates = family_rates(&fam, &[Method::Maap, Method::Carm], 1e-12, 1000).unwrap();
        let maap = rates[0].rates.as_ref().unwrap();
        assert!((maap.q_estimate - 0.2).abs() < 0.02, "{maap:?}");
        assert_eq!(rates[1].status, RunStatus::Converged);
        assert!(rates[1].iterations <= 15);
    }

    #[test]
    fn family_one_carm_halves() {
        let fam = Family::quadratic_norm(3);
        let rates = family_rates(&fam, &[Method::Carm], 1e-8, 1000).unwrap();
        let rep = rates[0].rates.as_ref().unwrap();
        assert!((rep.q_estimate - 0.5).abs() < 1e-6, "{:?}", rep.tail_ratios);
        assert_eq!(rep.classification, Classification::Linear);
    }

    #[test]
    fn csv_has_one_row_per_method() {
        let fam = Family::shifted_power(2, 1);
        let rates = family_rates(&fam, &[Method::Maap, Method::Carm], 1e-6, 1000).unwrap();
        let mut buf = Vec::new();
        write_rates_csv(&rates, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with(FAMILY_RATE_HEADER));
    }
}
