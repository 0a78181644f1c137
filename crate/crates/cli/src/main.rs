use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cplxsym::harness::{
    coefficients_csv, exit_code, load_problem, run_benchmark, write_artifacts, BenchmarkRecord, BenchmarkSpec,
    ProblemSpec, RhsSpec, SolverChoice, SyntheticKind,
};
use cplxsym::innersolve::SpdSolverKind;
use cplxsym::mhss::{cost_model_c, kappa_bound, spectral_radius_pq, upper_bound_u};
use cplxsym::orthopoly::{cheb_coeffs_from_delta, closed_jacobi_coeffs};
use cplxsym::PrecondSpec;

/// Largest order for which `diagnose` forms P⁻¹Q densely.
const DENSE_DIAGNOSE_LIMIT: usize = 1500;

#[derive(Parser)]
#[command(name = "cplxsym", version, about = "MHSS-preconditioned COCG/COCR for (B + iC) x = b")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one system and print a summary.
    Solve(RunArgs),
    /// Run one benchmark, write report.json, residuals.csv and residuals.svg,
    /// and print a one-line CSV summary.
    Bench {
        #[command(flatten)]
        run: RunArgs,
        /// Read the whole benchmark description from a JSON file instead of flags.
        #[arg(long, conflicts_with_all = ["b", "c", "synthetic"])]
        spec: Option<PathBuf>,
    },
    /// Print the primed recurrence coefficients as CSV.
    Coeffs {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = 0.2)]
        delta: f64,
        /// Write to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the U, κ and cost-model tables, and the spectral radius of
    /// P⁻¹Q when a problem is given.
    Diagnose {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Jacobi,
    Cheb,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Cocg,
    Cocr,
    Mhss,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PrecondArg {
    None,
    Ilu0,
    MhssIlu0,
    MhssCheb,
    MhssJacobi,
    MhssExact,
    MhssIc0Pcg,
}

#[derive(Clone, Copy, ValueEnum)]
enum RhsArg {
    Ones,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum SyntheticArg {
    Laplacian2d,
    DiagSpectrum,
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// Matrix Market file holding B.
    #[arg(long, requires = "c")]
    b: Option<PathBuf>,
    /// Matrix Market file holding C.
    #[arg(long, requires = "b")]
    c: Option<PathBuf>,
    /// Generate a synthetic problem instead of reading files.
    #[arg(long, value_enum, conflicts_with = "b")]
    synthetic: Option<SyntheticArg>,
    /// Order of the synthetic problem.
    #[arg(long, default_value_t = 4096)]
    n: usize,
    /// Smallest eigenvalue of B + C for diag-spectrum.
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
}

impl ProblemArgs {
    fn spec(&self) -> Option<ProblemSpec> {
        match (&self.b, &self.c, self.synthetic) {
            (Some(b), Some(c), _) => Some(ProblemSpec::Pair { b: b.clone(), c: c.clone() }),
            (_, _, Some(kind)) => Some(ProblemSpec::Synthetic {
                kind: match kind {
                    SyntheticArg::Laplacian2d => SyntheticKind::Laplacian2d,
                    SyntheticArg::DiagSpectrum => SyntheticKind::DiagSpectrum { epsilon: self.epsilon },
                },
                n: self.n,
            }),
            _ => None,
        }
    }
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "cocg")]
    solver: SolverArg,
    #[arg(long, value_enum, default_value = "mhss-jacobi")]
    precond: PrecondArg,
    /// Polynomial degree m of the Jacobi or Chebyshev preconditioner.
    #[arg(long, default_value_t = 50)]
    degree: usize,
    /// Chebyshev stripe half-width.
    #[arg(long, default_value_t = 0.2)]
    delta: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 5000)]
    maxit: usize,
    /// Relative tolerance of the inner CG solves for mhss-ic0-pcg.
    #[arg(long, default_value_t = SpdSolverKind::DEFAULT_INNER_TOL)]
    inner_tol: f64,
    #[arg(long, default_value_t = SpdSolverKind::DEFAULT_INNER_MAXIT)]
    inner_maxit: usize,
    #[arg(long, value_enum, default_value = "ones")]
    rhs: RhsArg,
    /// Right-hand side file for `--rhs file`: one `re [im]` pair per line.
    #[arg(long)]
    rhs_file: Option<PathBuf>,
    /// Worker threads for sparse products; 1 keeps runs bit-reproducible.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip the diagonal equilibration of B + C.
    #[arg(long)]
    no_scale: bool,
    /// Directory for report.json, residuals.csv and residuals.svg.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn benchmark_spec(&self) -> Result<BenchmarkSpec> {
        let Some(problem) = self.problem.spec() else {
            bail!("no problem given: pass --b and --c, or --synthetic");
        };
        let precond = match self.precond {
            PrecondArg::None => PrecondSpec::None,
            PrecondArg::Ilu0 => PrecondSpec::Ilu0,
            PrecondArg::MhssIlu0 => PrecondSpec::MhssIlu0,
            PrecondArg::MhssExact => PrecondSpec::MhssExact,
            PrecondArg::MhssIc0Pcg => PrecondSpec::MhssIc0Pcg { tol: self.inner_tol, maxit: self.inner_maxit },
            PrecondArg::MhssCheb => PrecondSpec::MhssCheb { degree: self.degree, delta: self.delta },
            PrecondArg::MhssJacobi => PrecondSpec::MhssJacobi { degree: self.degree },
        };
        let solver = match self.solver {
            SolverArg::Cocg => SolverChoice::Cocg,
            SolverArg::Cocr => SolverChoice::Cocr,
            SolverArg::Mhss => SolverChoice::Mhss,
        };
        let rhs = match (self.rhs, &self.rhs_file) {
            (RhsArg::Ones, None) => RhsSpec::OnesComplex,
            (RhsArg::File, Some(p)) => RhsSpec::FromFile(p.clone()),
            (RhsArg::File, None) => bail!("--rhs file needs --rhs-file PATH"),
            (RhsArg::Ones, Some(_)) => bail!("--rhs-file is only used with --rhs file"),
        };
        Ok(BenchmarkSpec {
            tol: self.tol,
            maxit: self.maxit,
            rhs,
            seed: self.seed,
            threads: self.threads,
            scale: !self.no_scale,
            ..BenchmarkSpec::new(problem, solver, precond)
        })
    }
}

fn init_threads(threads: usize) -> Result<()> {
    if threads == 0 {
        bail!("--threads must be at least 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().context("starting the thread pool")
}

fn describe(record: &BenchmarkRecord) -> String {
    let r = &record.report;
    let mut lines = vec![
        format!(
            "problem       n = {}, nnz(B) = {}, nnz(C) = {}, nnz(B ∪ C) = {}",
            record.n, record.nnz_b, record.nnz_c, record.nnz_union
        ),
        format!("solver        {:?} with {:?}", record.spec.solver, record.spec.precond),
        format!("status        {:?} after {} iterations", r.status, r.iterations),
        format!(
            "residual      {:.3e} (solver), {:.3e} (recomputed, unscaled)",
            r.relative_residual, record.true_relative_residual
        ),
        format!(
            "work          {} products with A, {} preconditioner applications",
            r.matvec_count, r.precond_applications
        ),
        format!("time          setup {:.3}s, solve {:.3}s", record.setup_time, r.wall_time),
    ];
    if let Some(c) = &record.coefficients {
        let eps = c.epsilon.map(|e| format!(", epsilon = {e:.6e}")).unwrap_or_default();
        lines.push(format!("polynomial    {:?}, degree {}{eps}", c.family, c.degree));
    }
    if let Some(s) = record.ic0_shift {
        lines.push(format!("ic0 shift     {s:e}"));
    }
    lines.join("\n")
}

fn run_solve(args: &RunArgs) -> Result<i32> {
    init_threads(args.threads)?;
    let spec = args.benchmark_spec()?;
    let outcome = run_benchmark(&spec, args.out.as_deref())?;
    println!("{}", describe(&outcome.record));
    if let Some(dir) = &args.out {
        println!("artifacts     {}", dir.display());
    }
    Ok(exit_code(outcome.record.report.status))
}

fn run_bench(args: &RunArgs, spec_file: Option<&Path>) -> Result<i32> {
    let spec = match spec_file {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<BenchmarkSpec>(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => args.benchmark_spec()?,
    };
    init_threads(spec.threads)?;
    let Some(out) = &args.out else {
        bail!("bench needs --out DIR");
    };
    let outcome = run_benchmark(&spec, None)?;
    write_artifacts(out, &outcome.record)?;
    let r = &outcome.record.report;
    println!("n,nnz_union,status,iterations,relative_residual,setup_time,solve_time");
    println!(
        "{},{},{},{},{:e},{:.6},{:.6}",
        outcome.record.n,
        outcome.record.nnz_union,
        serde_json::to_value(r.status)?.as_str().unwrap_or("unknown"),
        r.iterations,
        r.relative_residual,
        outcome.record.setup_time,
        r.wall_time
    );
    Ok(exit_code(r.status))
}

fn run_coeffs(family: Family, degree: usize, delta: f64, out: Option<&Path>) -> Result<i32> {
    let coeffs = match family {
        Family::Jacobi => closed_jacobi_coeffs::<f64>(degree),
        Family::Cheb => cheb_coeffs_from_delta(delta, degree)?,
    };
    let csv = coefficients_csv(&coeffs);
    match out {
        Some(p) => std::fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn run_diagnose(problem: &ProblemArgs, seed: u64) -> Result<i32> {
    println!("U(alpha, beta)");
    for (a, b) in [(1.0, 1.0), (0.5, 0.5), (2.0, 2.0), (1.0, 0.5), (0.5, 1.0)] {
        println!("  U({a}, {b}) = {:.6}", upper_bound_u(a, b)?);
    }
    println!("n,kappa_bound,cost_model_c");
    for n in 1..=10 {
        println!("{n},{:.6},{:.4}", kappa_bound(n)?, cost_model_c(n)?);
    }
    if let Some(p) = problem.spec() {
        let spec = BenchmarkSpec { seed, ..BenchmarkSpec::new(p, SolverChoice::Cocg, PrecondSpec::MhssExact) };
        spec.validate()?;
        let sys = load_problem(&spec)?;
        if sys.n() > DENSE_DIAGNOSE_LIMIT {
            bail!("spectral radius is computed densely; n = {} exceeds {DENSE_DIAGNOSE_LIMIT}", sys.n());
        }
        let rho = spectral_radius_pq(sys.n(), &sys.real_part().to_dense(), &sys.imag_part().to_dense())?;
        println!("spectral radius of P^-1 Q: {rho:.12} (bound {:.12})", std::f64::consts::FRAC_1_SQRT_2);
    }
    Ok(0)
}

fn main() -> ExitCode {
    // Usage errors exit with 1; 2 is reserved for a solve that did not converge.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Bench { run, spec } => run_bench(run, spec.as_deref()),
        Command::Coeffs { family, degree, delta, out } => run_coeffs(*family, *degree, *delta, out.as_deref()),
        Command::Diagnose { problem, seed } => run_diagnose(problem, *seed),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
