//! Performance profiles: for each problem `p` and method `s`,
//! `r_{p,s} = t_{p,s} / min_s t_{p,s}`, and `rho_s(tau)` is the fraction of
//! problems with `r_{p,s} <= tau`. Failed runs get `r = inf`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use crate::error::{CfpError, Result};
use crate::solvers::{Method, RunStatus};

use super::BenchResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Time,
    Iterations,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Time => "time",
            Measure::Iterations => "iterations",
        }
    }
}

impl FromStr for Measure {
    type Err = CfpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" => Ok(Measure::Time),
            "iterations" => Ok(Measure::Iterations),
            _ => Err(CfpError::InvalidConfig(format!("unknown measure `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub method: Method,
    /// Ratio per problem, in problem order.
    pub ratios: Vec<f64>,
    /// `(tau, rho(tau))` at every finite breakpoint, increasing in `tau`.
    pub points: Vec<(f64, f64)>,
}

impl ProfileCurve {
    /// Fraction of problems with ratio at most `tau`.
    pub fn rho(&self, tau: f64) -> f64 {
        let hits = self.ratios.iter().filter(|&&r| r <= tau).count();
        hits as f64 / self.ratios.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerfProfile {
    pub measure: Measure,
    pub problems: Vec<String>,
    pub curves: Vec<ProfileCurve>,
}

impl PerfProfile {
    pub fn curve(&self, method: Method) -> Option<&ProfileCurve> {
        self.curves.iter().find(|c| c.method == method)
    }

    /// All finite breakpoints of all curves, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut taus: Vec<f64> = self.curves.iter().flat_map(|c| c.points.iter().map(|p| p.0)).collect();
        taus.sort_by(f64::total_cmp);
        taus.dedup();
        taus
    }

    /// Whether `a`'s curve is at least `b`'s at every breakpoint.
    pub fn dominates(&self, a: Method, b: Method) -> bool {
        let (Some(ca), Some(cb)) = (self.curve(a), self.curve(b)) else {
            return false;
        };
        self.breakpoints().into_iter().all(|t| ca.rho(t) >= cb.rho(t))
    }
}

pub fn perf_profile(result: &BenchResult, measure: Measure) -> Result<PerfProfile> {
    let methods: Vec<Method> = Method::ALL
        .into_iter()
        .filter(|m| result.rows.iter().any(|r| r.method == *m))
        .collect();
    if methods.is_empty() {
        return Err(CfpError::InsufficientData("no runs".into()));
    }

    // problem -> method -> value (inf on failure)
    let mut table: BTreeMap<&str, BTreeMap<Method, f64>> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    for r in &result.rows {
        let value = if r.status == RunStatus::Converged {
            match measure {
                Measure::Time => r.wall_time_s,
                Measure::Iterations => r.iterations as f64,
            }
        } else {
            f64::INFINITY
        };
        if !table.contains_key(r.instance_id.as_str()) {
            order.push(&r.instance_id);
        }
        table.entry(&r.instance_id).or_default().insert(r.method, value);
    }

    let mut curves: Vec<ProfileCurve> = methods
        .iter()
        .map(|&method| ProfileCurve {
            method,
            ratios: Vec::with_capacity(order.len()),
            points: Vec::new(),
        })
        .collect();
    for p in &order {
        let values = &table[p];
        let best = values.values().copied().fold(f64::INFINITY, f64::min);
        for c in curves.iter_mut() {
            let v = values.get(&c.method).copied().unwrap_or(f64::INFINITY);
            c.ratios.push(ratio(v, best));
        }
    }
    for c in curves.iter_mut() {
        let mut finite: Vec<f64> = c.ratios.iter().copied().filter(|r| r.is_finite()).collect();
        finite.sort_by(f64::total_cmp);
        finite.dedup();
        c.points = finite.iter().map(|&t| (t, c.rho(t))).collect();
    }
    Ok(PerfProfile {
        measure,
        problems: order.into_iter().map(str::to_string).collect(),
        curves,
    })
}

// A zero best value (e.g. zero iterations) gives ratio 1 to every method
// that also scored zero.
fn ratio(value: f64, best: f64) -> f64 {
    if !value.is_finite() || !best.is_finite() {
        f64::INFINITY
    } else if best == 0.0 {
        if value == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        value / best
    }
}

/// `method, tau, log2_tau, rho` rows for every breakpoint of every curve.
pub fn write_profile_tsv<W: Write>(profile: &PerfProfile, mut out: W) -> Result<()> {
    writeln!(out, "method\ttau\tlog2_tau\trho")?;
    for c in &profile.curves {
        for &(tau, rho) in &c.points {
            writeln!(out, "{}\t{}\t{}\t{}", c.method, tau, tau.log2(), rho)?;
        }
    }
    Ok(())
}

const SVG_WIDTH: f64 = 640.0;
const SVG_HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 4] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd"];

/// Step curves of `rho` against `log2(tau)` as a standalone SVG document.
pub fn render_svg(profile: &PerfProfile) -> String {
    let max_log = profile.breakpoints().last().map_or(1.0, |t| t.log2()).max(1.0);
    let plot_w = SVG_WIDTH - 2.0 * MARGIN;
    let plot_h = SVG_HEIGHT - 2.0 * MARGIN;
    let x = |l: f64| MARGIN + plot_w * l / (max_log * 1.05);
    let y = |rho: f64| SVG_HEIGHT - MARGIN - plot_h * rho;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{x0} {y0} L{x1} {y0} M{x0} {y0} L{x0} {y1}" stroke="black" fill="none"/>"#,
        x0 = MARGIN,
        y0 = y(0.0),
        x1 = SVG_WIDTH - MARGIN,
        y1 = y(1.0),
    );
    for tick in [0.0, 0.5, 1.0] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{tick}</text>"#,
            MARGIN - 6.0,
            y(tick) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">log2(tau), {} ratio</text>"#,
        SVG_WIDTH / 2.0,
        SVG_HEIGHT - 12.0,
        profile.measure.as_str()
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">0</text><text x="{}" y="{}" text-anchor="middle">{:.2}</text>"#,
        x(0.0) + 4.0,
        y(0.0) + 16.0,
        x(max_log),
        y(0.0) + 16.0,
        max_log
    );
    for (i, c) in profile.curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = format!("M{} {}", x(0.0), y(0.0));
        let mut prev = 0.0;
        for &(tau, rho) in &c.points {
            let xt = x(tau.log2());
            let _ = write!(d, " L{xt:.2} {:.2} L{xt:.2} {:.2}", y(prev), y(rho));
            prev = rho;
        }
        let _ = write!(d, " L{:.2} {:.2}", x(max_log * 1.05), y(prev));
        let _ = writeln!(s, r#"<path d="{d}" stroke="{color}" stroke-width="2" fill="none"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            SVG_WIDTH - MARGIN - 50.0,
            MARGIN + 16.0 * i as f64 + 10.0,
            c.method
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::BenchRow;

    fn row(id: &str, method: Method, time: f64, status: RunStatus) -> BenchRow {
        BenchRow {
            instance_id: id.into(),
            n: 2,
            m: 1,
            method,
            iterations: 1,
            wall_time_s: time,
            final_gap: 0.0,
            status,
        }
    }

    #[test]
    fn single_method_is_always_best() {
        let res = BenchResult {
            rows: vec![
                row("a", Method::Map, 3.0, RunStatus::Converged),
                row("b", Method::Map, 1.0, RunStatus::Converged),
            ],
        };
        let p = perf_profile(&res, Measure::Time).unwrap();
        assert_eq!(p.curves[0].rho(1.0), 1.0);
        assert_eq!(p.curves[0].points, vec![(1.0, 1.0)]);
    }

    #[test]
    fn two_methods_one_problem() {
        let res = BenchResult {
            rows: vec![
                row("a", Method::Carm, 1.0, RunStatus::Converged),
                row("a", Method::Crm, 2.0, RunStatus::Converged),
            ],
        };
        let p = perf_profile(&res, Measure::Time).unwrap();
        let fast = p.curve(Method::Carm).unwrap();
        let slow = p.curve(Method::Crm).unwrap();
        for tau in [1.0, 1.5, 2.0, 10.0] {
            assert_eq!(fast.rho(tau), 1.0);
        }
        assert_eq!(slow.rho(1.0), 0.0);
        assert_eq!(slow.rho(1.999), 0.0);
        assert_eq!(slow.rho(2.0), 1.0);
        assert!(p.dominates(Method::Carm, Method::Crm));
        assert!(!p.dominates(Method::Crm, Method::Carm));
    }

    #[test]
    fn failures_never_count() {
        let res = BenchResult {
            rows: vec![
                row("a", Method::Carm, 1.0, RunStatus::Converged),
                row("a", Method::Map, 1.0, RunStatus::IterationCapReached),
            ],
        };
        let p = perf_profile(&res, Measure::Time).unwrap();
        assert_eq!(p.curve(Method::Map).unwrap().ratios, vec![f64::INFINITY]);
        assert_eq!(p.curve(Method::Map).unwrap().rho(1e300), 0.0);
    }

    #[test]
    fn empty_is_insufficient() {
        assert!(matches!(
            perf_profile(&BenchResult::default(), Measure::Time),
            Err(CfpError::InsufficientData(_))
        ));
    }

    #[test]
    fn tsv_and_svg() {
        let res = BenchResult {
            rows: vec![
                row("a", Method::Carm, 1.0, RunStatus::Converged),
                row("a", Method::Crm, 4.0, RunStatus::Converged),
            ],
        };
        let p = perf_profile(&res, Measure::Time).unwrap();
        let mut buf = Vec::new();
        write_profile_tsv(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("method\ttau\tlog2_tau\trho\n"));
        assert!(text.contains("CRM\t4\t2\t1"));
        let svg = render_svg(&p);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<path").count(), 3);
    }
}
