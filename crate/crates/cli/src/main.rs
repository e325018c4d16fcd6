use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cfp_core::analysis::{audit_rate_bounds, SolutionSet};
use cfp_core::bench::{
    family_rates, instance_seed, perf_profile, render_svg, run_suite, summarize, write_csv, write_profile_tsv,
    write_rates_csv, Measure, SuiteConfig,
};
use cfp_core::exec::Execution;
use cfp_core::instances::{gen_ellipsoids, tangent_disk, EllipsoidInstance, Family, DEFAULT_GAMMA};
use cfp_core::solvers::{solve, Method, RunRecord, RunStatus, SolverConfig};

#[derive(Parser)]
#[command(name = "cfp", version, about = "Convex feasibility solvers: CARM, CRM, MAAP and MAP")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Stopping tolerance on the gap distance.
    #[arg(long, global = true, default_value_t = 1e-6)]
    eps: f64,
    /// Iteration cap per run.
    #[arg(long, global = true, default_value_t = 50_000)]
    max_iter: usize,
    /// Base seed for instance generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true, env = "CFP_THREADS")]
    threads: Option<usize>,
    /// Keep every iterate (solve writes them to trace.csv under --out).
    #[arg(long, global = true)]
    record_iterates: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write seeded ellipsoid instances as .cfp.json files.
    Gen {
        #[arg(long, short)]
        n: usize,
        #[arg(long, short)]
        m: usize,
        /// Number of instances.
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_GAMMA)]
        gamma: f64,
        /// Nonzero probability of B entries (default 2/n).
        #[arg(long)]
        density: Option<f64>,
    },
    /// Solve one instance with one method.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "carm")]
        method: Method,
    },
    /// Run a benchmark suite and write results.csv, profile.tsv and profile.svg.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [10, 50, 100, 200])]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [5, 10, 20, 50])]
        sets: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        per_cell: usize,
        #[arg(long, value_delimiter = ',', default_values_t = Method::ALL)]
        methods: Vec<Method>,
        /// Measure for the performance profile.
        #[arg(long, default_value = "time", value_parser = ["time", "iterations"])]
        measure: String,
    },
    /// Rate experiments on the epigraph families; writes rates.csv.
    Families {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        family: u8,
        /// Shape of f (family 1) or phi (family 2): quadratic or quartic.
        #[arg(long, default_value = "quadratic", value_parser = ["quadratic", "quartic"])]
        phi: String,
        #[arg(long, value_delimiter = ',', default_values_t = [1, 3])]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [Method::Maap, Method::Carm])]
        methods: Vec<Method>,
    },
    /// Audit recorded runs: Fejér monotonicity and subspace residuals on an
    /// instance, or rate bounds on the tangent-disk fixture.
    Audit {
        /// Instance to audit; without it the tangent-disk fixture is used.
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Fixture angles in degrees.
        #[arg(long, value_delimiter = ',', default_values_t = [30.0, 45.0, 60.0])]
        angles: Vec<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Returns `false` when some run failed.
fn run(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    if let Some(dir) = &g.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    match cli.command {
        Command::Gen {
            n,
            m,
            count,
            gamma,
            density,
        } => gen(g, n, m, count, gamma, density),
        Command::Solve { instance, method } => solve_one(g, &instance, method),
        Command::Bench {
            dims,
            sets,
            per_cell,
            methods,
            measure,
        } => bench(g, dims, sets, per_cell, methods, &measure),
        Command::Families {
            family,
            phi,
            dims,
            methods,
        } => families(g, family, &phi, &dims, &methods),
        Command::Audit { instance, angles } => audit(g, instance.as_deref(), &angles),
    }
}

fn out_dir(g: &Global) -> &Path {
    g.out.as_deref().unwrap_or(Path::new("."))
}

fn solver_config(g: &Global, method: Method) -> SolverConfig {
    SolverConfig::new(method)
        .eps(g.eps)
        .max_iter(g.max_iter)
        .record_iterates(g.record_iterates)
}

fn is_failure(status: RunStatus) -> bool {
    matches!(status, RunStatus::Failed | RunStatus::DegenerateCircumcenter)
}

fn gen(g: &Global, n: usize, m: usize, count: usize, gamma: f64, density: Option<f64>) -> Result<bool> {
    for index in 0..count {
        let seed = if count == 1 {
            g.seed
        } else {
            instance_seed(g.seed, n, m, index)
        };
        let inst = gen_ellipsoids(n, m, seed, gamma, density)?;
        let path = out_dir(g).join(format!("{}.{}", inst.id(), cfp_core::instances::FILE_EXTENSION));
        inst.write(&path)
            .with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(true)
}

fn print_record(label: &str, rec: &RunRecord) {
    println!(
        "{label} {}: status={} iterations={} final_gap={:e} wall_time_s={:.6}",
        rec.method,
        rec.status,
        rec.iterations,
        rec.final_gap(),
        rec.wall_time
    );
    if let Some(e) = &rec.failure {
        println!("  failure: {e}");
    }
}

fn solve_one(g: &Global, path: &Path, method: Method) -> Result<bool> {
    let inst = EllipsoidInstance::read(path).with_context(|| format!("reading {}", path.display()))?;
    let problem = inst.to_problem();
    let rec = solve(&problem, &solver_config(g, method), &inst.initial_point())?;
    print_record(&inst.id(), &rec);
    if let (Some(trace), Some(_)) = (&rec.iterate_trace, &g.out) {
        let path = out_dir(g).join("trace.csv");
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "k,gap,x")?;
        for (k, (x, gap)) in trace.iter().zip(&rec.gap_trace).enumerate() {
            let coords: Vec<String> = x.iter().map(f64::to_string).collect();
            writeln!(w, "{k},{gap},{}", coords.join(" "))?;
        }
        w.flush()?;
        println!("iterates written to {}", path.display());
    }
    Ok(rec.converged())
}

fn bench(
    g: &Global,
    dims: Vec<usize>,
    sets: Vec<usize>,
    per_cell: usize,
    methods: Vec<Method>,
    measure: &str,
) -> Result<bool> {
    let cfg = SuiteConfig {
        dims,
        set_counts: sets,
        instances_per_cell: per_cell,
        base_seed: g.seed,
        eps: g.eps,
        max_iter: g.max_iter,
        methods,
        ..SuiteConfig::paper_protocol()
    };
    let result = run_suite(&cfg, Execution::from_threads(g.threads))?;
    let dir = out_dir(g);
    write_csv(&result, BufWriter::new(File::create(dir.join("results.csv"))?))?;

    println!("method   conv  fail  iter mean    max    min     std   time mean (s)     max     min     std");
    for s in summarize(&result)? {
        let (it, t) = (s.iterations, s.wall_time);
        let fmt = |x: Option<cfp_core::bench::Stats>, f: &dyn Fn(cfp_core::bench::Stats) -> String| {
            x.map_or("-".to_string(), f)
        };
        println!(
            "{:<7} {:>5} {:>5}  {}  {}",
            s.method.to_string(),
            s.converged,
            s.not_converged,
            fmt(it, &|v| format!(
                "{:>9.2} {:>6} {:>6} {:>7.2}",
                v.mean, v.max, v.min, v.std
            )),
            fmt(t, &|v| format!(
                "{:>13.3e} {:>9.2e} {:>9.2e} {:>9.2e}",
                v.mean, v.max, v.min, v.std
            )),
        );
    }

    let measure: Measure = measure.parse()?;
    let profile = perf_profile(&result, measure)?;
    write_profile_tsv(&profile, BufWriter::new(File::create(dir.join("profile.tsv"))?))?;
    fs::write(dir.join("profile.svg"), render_svg(&profile))?;
    println!(
        "wrote {} rows to {}",
        result.rows.len(),
        dir.join("results.csv").display()
    );
    Ok(!result.rows.iter().any(|r| is_failure(r.status)))
}

fn families(g: &Global, family: u8, phi: &str, dims: &[usize], methods: &[Method]) -> Result<bool> {
    let mut all = Vec::new();
    for &n in dims {
        let fam = Family::by_name(family, phi, n)?;
        all.extend(family_rates(&fam, methods, g.eps, g.max_iter)?);
    }
    match &g.out {
        Some(dir) => {
            let path = dir.join("rates.csv");
            write_rates_csv(&all, BufWriter::new(File::create(&path)?))?;
            println!("wrote {}", path.display());
        }
        None => write_rates_csv(&all, io::stdout().lock())?,
    }
    Ok(!all.iter().any(|r| is_failure(r.status)))
}

fn audit(g: &Global, instance: Option<&Path>, angles: &[f64]) -> Result<bool> {
    let mut ok = true;
    match instance {
        Some(path) => {
            let inst = EllipsoidInstance::read(path).with_context(|| format!("reading {}", path.display()))?;
            let problem = inst.to_problem();
            let x0 = inst.initial_point();
            for method in Method::ALL {
                let rec = solve(&problem, &solver_config(g, method).record_iterates(true), &x0)?;
                let trace = rec.iterate_trace.as_deref().unwrap_or_default();
                // the origin lies in every ellipsoid of a generated instance
                let fejer = trace.windows(2).all(|w| w[1].norm() <= w[0].norm() + 1e-9);
                let mut residual = 0.0f64;
                if method.is_circumcentered() {
                    for x in trace {
                        residual = residual.max(problem.subspace().residual(x)?);
                    }
                }
                let passed = fejer && residual <= 1e-8 && !is_failure(rec.status);
                ok &= passed;
                println!(
                    "{} {method}: {} fejer={fejer} max_u_residual={residual:.1e} iterations={} status={}",
                    inst.id(),
                    if passed { "PASS" } else { "FAIL" },
                    rec.iterations,
                    rec.status
                );
            }
        }
        None => {
            for &deg in angles {
                let fx = tangent_disk(deg.to_radians(), 1.0)?;
                let omega = fx.omega.expect("fixture has a known constant");
                for method in [Method::Carm, Method::Maap] {
                    let rec = solve(&fx.problem, &solver_config(g, method).record_iterates(true), &fx.x0)?;
                    let a = audit_rate_bounds(&rec, omega, Some(&fx.solution as &SolutionSet))?;
                    ok &= a.passed;
                    println!(
                        "{} {method}: {} omega={:.4} bound={:.4} max_ratio={:.4} ratios={}",
                        fx.name,
                        if a.passed { "PASS" } else { "FAIL" },
                        a.omega,
                        a.bound,
                        a.max_ratio,
                        a.ratios_checked
                    );
                }
            }
        }
    }
    if !ok {
        bail!("audit found violations");
    }
    Ok(true)
}
