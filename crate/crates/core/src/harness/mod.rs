//! Benchmark driver: build a problem, scale, precondition, solve, unscale,
//! and write `report.json`, `residuals.csv` and `residuals.svg`.

mod mtx;
mod problems;
mod report;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::innersolve::{SpdSolverHandle, SpdSolverKind};
use crate::krylov::{
    cocg, cocr, PrecondSpec, PreconditionerHandle, PreconditionerKind, SolveReport, SolveStatus, SolverOptions,
};
use crate::linalg::{ComplexSymSystem, ComplexVector};
use crate::mhss::mhss_solve;
use crate::orthopoly::PolyFamily;
use crate::scaling::{apply_scaling, compute_scaling, unscale_solution};

pub use mtx::{parse_matrix_market, read_matrix_market, write_matrix_market};
pub use problems::{laplacian_2d, pair_and_pad, synthetic_problem, SyntheticKind};
pub use report::{coefficients_csv, residuals_csv, residuals_svg, COEFFS_HEADER, CSV_HEADER};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProblemSpec {
    /// Two Matrix Market files, padded to a common size.
    Pair {
        b: PathBuf,
        c: PathBuf,
    },
    Synthetic {
        kind: SyntheticKind,
        n: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Cocg,
    Cocr,
    /// The stationary MHSS iteration.
    Mhss,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "path", rename_all = "snake_case")]
pub enum RhsSpec {
    OnesComplex,
    /// Whitespace-separated `re [im]` per line; `%` and `#` start comments.
    FromFile(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub problem: ProblemSpec,
    pub solver: SolverChoice,
    pub precond: PrecondSpec,
    pub tol: f64,
    pub maxit: usize,
    pub rhs: RhsSpec,
    pub seed: u64,
    pub threads: usize,
    /// Apply symmetric diagonal equilibration before solving.
    pub scale: bool,
}

impl BenchmarkSpec {
    pub fn new(problem: ProblemSpec, solver: SolverChoice, precond: PrecondSpec) -> Self {
        let d = SolverOptions::default();
        BenchmarkSpec {
            problem,
            solver,
            precond,
            tol: d.tol,
            maxit: d.maxit,
            rhs: RhsSpec::OnesComplex,
            seed: 0,
            threads: 1,
            scale: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if self.maxit == 0 {
            return Err(Error::InvalidArgument("maxit must be at least 1".into()));
        }
        let files: Vec<&Path> = match (&self.problem, &self.rhs) {
            (ProblemSpec::Pair { b, c }, RhsSpec::FromFile(r)) => vec![b, c, r],
            (ProblemSpec::Pair { b, c }, _) => vec![b, c],
            (_, RhsSpec::FromFile(r)) => vec![r],
            _ => vec![],
        };
        if let Some(missing) = files.into_iter().find(|p| !p.is_file()) {
            return Err(Error::InvalidArgument(format!("file not found: {}", missing.display())));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientInfo {
    pub family: PolyFamily,
    pub degree: usize,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
}

/// Everything written to `report.json`.
#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkRecord {
    pub spec: BenchmarkSpec,
    pub report: SolveReport,
    pub n: usize,
    pub nnz_b: usize,
    pub nnz_c: usize,
    pub nnz_union: usize,
    pub preconditioner: PreconditionerKind,
    pub ic0_shift: Option<f64>,
    pub coefficients: Option<CoefficientInfo>,
    /// `‖b - A x‖/‖b‖` of the unscaled system at the returned solution.
    pub true_relative_residual: f64,
    /// Norm the residual history is relative to (the scaled `b` when
    /// scaling is on).
    pub reference_norm: f64,
    pub setup_time: f64,
    pub crate_version: String,
}

pub struct BenchmarkOutcome {
    pub record: BenchmarkRecord,
    pub solution: ComplexVector<f64>,
}

/// Process exit code for a finished solve: 0 converged, 2 not converged,
/// 3 breakdown or numerical failure.
pub fn exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Converged => 0,
        SolveStatus::NotConverged => 2,
        SolveStatus::Breakdown | SolveStatus::NumericalFailure => 3,
    }
}

pub fn load_problem(spec: &BenchmarkSpec) -> Result<ComplexSymSystem<f64>> {
    let sys = match &spec.problem {
        ProblemSpec::Pair { b, c } => pair_and_pad(read_matrix_market(b)?, read_matrix_market(c)?)?,
        ProblemSpec::Synthetic { kind, n } => synthetic_problem(*kind, *n, spec.seed)?,
    };
    let sys = match &spec.rhs {
        RhsSpec::OnesComplex => sys,
        RhsSpec::FromFile(p) => {
            let rhs = read_rhs(p)?;
            sys.with_rhs(rhs)?
        }
    };
    Ok(sys.with_parallel(spec.threads > 1))
}

/// Reads a complex vector, one `re [im]` pair per line.
pub fn read_rhs(path: &Path) -> Result<ComplexVector<f64>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let (mut re, mut im) = (Vec::new(), Vec::new());
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { path: path.to_path_buf(), line: k + 1, msg };
        let parts: Vec<&str> = t.split_whitespace().collect();
        if parts.is_empty() || parts.len() > 2 {
            return Err(err(format!("expected `re [im]`, got `{t}`")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number `{s}`")));
        re.push(num(parts[0])?);
        im.push(if parts.len() == 2 { num(parts[1])? } else { 0.0 });
    }
    ComplexVector::new(re, im)
}

fn spd_kind_for_mhss(p: &PrecondSpec) -> Result<SpdSolverKind> {
    match *p {
        PrecondSpec::MhssExact => Ok(SpdSolverKind::Exact),
        PrecondSpec::MhssIlu0 => Ok(SpdSolverKind::Ic0Direct),
        PrecondSpec::MhssIc0Pcg { tol, maxit } => Ok(SpdSolverKind::Ic0Pcg { tol, maxit }),
        other => Err(Error::InvalidArgument(format!(
            "the MHSS iteration needs a solver for B + C (mhss-exact, mhss-ilu0 or mhss-ic0-pcg), got {other:?}"
        ))),
    }
}

/// Runs one benchmark and, when `out_dir` is given, writes its artifacts
/// there (creating the directory).
pub fn run_benchmark(spec: &BenchmarkSpec, out_dir: Option<&Path>) -> Result<BenchmarkOutcome> {
    spec.validate()?;
    let sys = load_problem(spec)?;
    run_on_system(spec, &sys, out_dir)
}

/// As [`run_benchmark`] for an already assembled system.
pub fn run_on_system(
    spec: &BenchmarkSpec,
    sys: &ComplexSymSystem<f64>,
    out_dir: Option<&Path>,
) -> Result<BenchmarkOutcome> {
    let setup_start = Instant::now();
    let s = if spec.scale {
        compute_scaling(sys.real_part(), sys.imag_part())?
    } else {
        crate::scaling::ScalingVector::ones(sys.n())
    };
    let scaled = apply_scaling(sys, &s)?;
    let opts = SolverOptions::new(spec.tol, spec.maxit);

    let (w, report, kind, shift, coeffs) = match spec.solver {
        SolverChoice::Mhss => {
            let h = SpdSolverHandle::build(&scaled.sum_matrix(), spd_kind_for_mhss(&spec.precond)?)?;
            let kind = PreconditionerKind::for_mhss(&h);
            let shift = (!h.is_exact()).then(|| h.ic0_shift());
            let (w, rep) = mhss_solve(&scaled, &h, &opts)?;
            (w, rep, kind, shift, None)
        }
        SolverChoice::Cocg | SolverChoice::Cocr => {
            let p = PreconditionerHandle::build(&scaled, &spec.precond)?;
            let shift = match &p {
                PreconditionerHandle::Mhss(h) if !h.is_exact() => Some(h.ic0_shift()),
                _ => None,
            };
            let coeffs = p.coefficients().map(|c| CoefficientInfo {
                family: c.family,
                degree: c.degree,
                epsilon: c.epsilon,
                delta: c.delta,
            });
            let solve = if spec.solver == SolverChoice::Cocg { cocg::<f64, _, _> } else { cocr::<f64, _, _> };
            let (w, rep) = solve(&scaled, &p, scaled.rhs(), &opts, None)?;
            (w, rep, p.kind(), shift, coeffs)
        }
    };
    let setup_time = setup_start.elapsed().as_secs_f64() - report.wall_time;
    let x = unscale_solution(&w, &s)?;
    let bnorm = sys.rhs().norm2();
    let true_rel = if bnorm > 0.0 { sys.rhs().sub(&sys.apply_a(&x)?)?.norm2() / bnorm } else { 0.0 };

    let record = BenchmarkRecord {
        spec: spec.clone(),
        n: sys.n(),
        nnz_b: sys.real_part().nnz(),
        nnz_c: sys.imag_part().nnz(),
        nnz_union: sys.real_part().union_nnz(sys.imag_part())?,
        preconditioner: kind,
        ic0_shift: shift,
        coefficients: coeffs,
        true_relative_residual: true_rel,
        reference_norm: scaled.rhs().norm2(),
        setup_time,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        report,
    };
    if let Some(dir) = out_dir {
        write_artifacts(dir, &record)?;
    }
    Ok(BenchmarkOutcome { record, solution: x })
}

pub fn write_artifacts(dir: &Path, record: &BenchmarkRecord) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json = serde_json::to_string_pretty(record)?;
    report::write_file(&dir.join("report.json"), &json)?;
    report::write_file(&dir.join("residuals.csv"), &residuals_csv(&record.report, record.reference_norm))?;
    let rel: Vec<f64> = record.report.residual_history.iter().map(|r| r / record.reference_norm).collect();
    let label = format!("{:?}", record.spec.solver).to_lowercase();
    report::write_file(&dir.join("residuals.svg"), &residuals_svg(&[(&label, &rel)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lap(n: usize) -> ProblemSpec {
        ProblemSpec::Synthetic { kind: SyntheticKind::Laplacian2d, n }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(SolveStatus::Converged), 0);
        assert_eq!(exit_code(SolveStatus::NotConverged), 2);
        assert_eq!(exit_code(SolveStatus::Breakdown), 3);
        assert_eq!(exit_code(SolveStatus::NumericalFailure), 3);
    }

    #[test]
    fn small_run_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let spec = BenchmarkSpec::new(lap(64), SolverChoice::Cocr, PrecondSpec::MhssJacobi { degree: 20 });
        let out = run_benchmark(&spec, Some(dir.path())).unwrap();
        assert!(out.record.report.converged());
        assert!(out.record.true_relative_residual < 1e-7);
        let csv = std::fs::read_to_string(dir.path().join("residuals.csv")).unwrap();
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), out.record.report.residual_history.len() + 1);
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(json["report"]["status"], "converged");
        assert_eq!(json["coefficients"]["degree"], 20);
        assert_eq!(json["spec"]["precond"]["kind"], "mhss-jacobi");
        assert!(dir.path().join("residuals.svg").is_file());
    }

    #[test]
    fn mhss_needs_spd_solver() {
        let spec = BenchmarkSpec::new(lap(16), SolverChoice::Mhss, PrecondSpec::None);
        assert!(run_benchmark(&spec, None).is_err());
        let spec = BenchmarkSpec::new(lap(16), SolverChoice::Mhss, PrecondSpec::MhssExact);
        let out = run_benchmark(&spec, None).unwrap();
        assert!(out.record.report.converged());
        assert_eq!(out.record.preconditioner, PreconditionerKind::MhssExactCholesky);
    }

    #[test]
    fn spec_validation() {
        let mut spec = BenchmarkSpec::new(lap(16), SolverChoice::Cocg, PrecondSpec::None);
        spec.tol = 0.0;
        assert!(spec.validate().is_err());
        let spec = BenchmarkSpec::new(
            ProblemSpec::Pair { b: "/nonexistent/b.mtx".into(), c: "/nonexistent/c.mtx".into() },
            SolverChoice::Cocg,
            PrecondSpec::None,
        );
        assert!(spec.validate().is_err());
    }

    #[test]
    fn spec_round_trips_through_json() {
        let mut spec = BenchmarkSpec::new(
            ProblemSpec::Synthetic { kind: SyntheticKind::DiagSpectrum { epsilon: 0.01 }, n: 100 },
            SolverChoice::Cocg,
            PrecondSpec::MhssIc0Pcg { tol: 1e-2, maxit: 100 },
        );
        spec.rhs = RhsSpec::FromFile("rhs.txt".into());
        let j = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<BenchmarkSpec>(&j).unwrap(), spec);
    }

    #[test]
    fn rhs_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rhs.txt");
        std::fs::write(&p, "# comment\n1.0 2.0\n3\n\n-1e-3 0\n").unwrap();
        let v = read_rhs(&p).unwrap();
        assert_eq!(v.re(), &[1.0, 3.0, -1e-3]);
        assert_eq!(v.im(), &[2.0, 0.0, 0.0]);
        std::fs::write(&p, "1 2 3\n").unwrap();
        assert!(matches!(read_rhs(&p), Err(Error::Parse { line: 1, .. })));
    }
}
