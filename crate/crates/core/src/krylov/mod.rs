//! COCG and COCR for complex symmetric systems, real PCG, and the
//! preconditioners they run with.
//!
//! Both complex solvers use the unconjugated bilinear form `[u, v] = uᵀv`.
//! They record `‖r‖` of the recursively updated residual at every step and
//! stop on `‖r‖ ≤ tol·‖b‖`.

mod ic0;
mod pcg;
mod precond;

use std::time::Instant;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{check_dim, Result};
use crate::linalg::{bilinear_unchecked, ComplexOperator, ComplexVector};
use crate::scalar::Scalar;

pub use ic0::{
    complex_ic0, ic0_factorize, ic0_factorize_with_retry, ic0_shifted, triangular_solves, ComplexLowerFactor,
    LowerFactor, IC0_SHIFTS,
};
pub use pcg::{pcg_real, IdentityReal, JacobiDiagonal, RealPreconditioner};
pub use precond::{Identity, PrecondSpec, Preconditioner, PreconditionerHandle, PreconditionerKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    NotConverged,
    Breakdown,
    NumericalFailure,
}

/// Outcome of one solve. `residual_history[0]` is the initial residual
/// norm, and `iterations == residual_history.len() - 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub relative_residual: f64,
    /// Seconds.
    pub wall_time: f64,
    pub matvec_count: usize,
    pub precond_applications: usize,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub maxit: usize,
    /// `[u, v]` counts as zero when `|[u, v]| ≤ breakdown_tol·‖u‖·‖v‖`.
    pub breakdown_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, maxit: 5000, breakdown_tol: 1e-30 }
    }
}

impl SolverOptions {
    pub fn new(tol: f64, maxit: usize) -> Self {
        SolverOptions { tol, maxit, ..Default::default() }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.maxit == 0 {
            return Err(crate::error::Error::InvalidArgument(format!(
                "need tol > 0 and maxit >= 1, got tol = {}, maxit = {}",
                self.tol, self.maxit
            )));
        }
        Ok(())
    }
}

/// Residual bookkeeping shared by every iterative solver in the crate.
pub(crate) struct Recorder {
    start: Instant,
    bnorm: f64,
    history: Vec<f64>,
    pub matvecs: usize,
    pub precs: usize,
}

impl Recorder {
    pub fn new(bnorm: f64) -> Self {
        Recorder { start: Instant::now(), bnorm, history: Vec::new(), matvecs: 0, precs: 0 }
    }

    pub fn push(&mut self, rnorm: f64) {
        self.history.push(rnorm);
    }

    pub fn finish(self, status: SolveStatus) -> SolveReport {
        let last = *self.history.last().unwrap_or(&0.0);
        let relative_residual = if self.bnorm > 0.0 { last / self.bnorm } else { 0.0 };
        SolveReport {
            status,
            iterations: self.history.len().saturating_sub(1),
            residual_history: self.history,
            relative_residual,
            wall_time: self.start.elapsed().as_secs_f64(),
            matvec_count: self.matvecs,
            precond_applications: self.precs,
        }
    }
}

fn is_zero_form<T: Scalar>(v: Complex<T>, nu: T, nv: T, tol: f64) -> bool {
    v.norm() <= T::lit(tol) * nu * nv
}

fn finite<T: Scalar>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn initial_residual<T: Scalar, A: ComplexOperator<T> + ?Sized>(
    a: &A,
    b: &ComplexVector<T>,
    x: &ComplexVector<T>,
    rec: &mut Recorder,
) -> ComplexVector<T> {
    if x.max_abs() == T::zero() {
        return b.clone();
    }
    let mut ax = ComplexVector::zeros(b.len());
    a.apply_into(x, &mut ax);
    rec.matvecs += 1;
    b.sub(&ax).expect("equal lengths")
}

fn setup<T: Scalar, A: ComplexOperator<T> + ?Sized>(
    a: &A,
    b: &ComplexVector<T>,
    x0: Option<&ComplexVector<T>>,
    opts: &SolverOptions,
) -> Result<ComplexVector<T>> {
    opts.validate()?;
    check_dim(a.dim(), b.len())?;
    match x0 {
        Some(x) => {
            check_dim(a.dim(), x.len())?;
            Ok(x.clone())
        }
        None => Ok(ComplexVector::zeros(b.len())),
    }
}

/// Preconditioned conjugate orthogonal CG.
pub fn cocg<T, A, P>(
    a: &A,
    precond: &P,
    b: &ComplexVector<T>,
    opts: &SolverOptions,
    x0: Option<&ComplexVector<T>>,
) -> Result<(ComplexVector<T>, SolveReport)>
where
    T: Scalar,
    A: ComplexOperator<T> + ?Sized,
    P: Preconditioner<T> + ?Sized,
{
    let mut x = setup(a, b, x0, opts)?;
    let bnorm = b.norm2();
    let mut rec = Recorder::new(bnorm.to_f64_lossy());
    let stop = T::lit(opts.tol) * bnorm;
    let btol = opts.breakdown_tol;

    let mut r = initial_residual(a, b, &x, &mut rec);
    let mut rnorm = r.norm2();
    rec.push(rnorm.to_f64_lossy());
    if rnorm <= stop {
        return Ok((x, rec.finish(SolveStatus::Converged)));
    }
    let mut rt = precond.apply(&r)?;
    rec.precs += 1;
    let mut p = rt.clone();
    let mut rho = bilinear_unchecked(&rt, &r);
    let mut q = ComplexVector::zeros(b.len());

    for _ in 0..opts.maxit {
        if !finite(rho) {
            return Ok((x, rec.finish(SolveStatus::NumericalFailure)));
        }
        if is_zero_form(rho, rt.norm2(), rnorm, btol) {
            return Ok((x, rec.finish(SolveStatus::Breakdown)));
        }
        a.apply_into(&p, &mut q);
        rec.matvecs += 1;
        let mu = bilinear_unchecked(&q, &p);
        if !finite(mu) {
            return Ok((x, rec.finish(SolveStatus::NumericalFailure)));
        }
        if is_zero_form(mu, q.norm2(), p.norm2(), btol) {
            return Ok((x, rec.finish(SolveStatus::Breakdown)));
        }
        let alpha = rho / mu;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &q);
        rnorm = r.norm2();
        rec.push(rnorm.to_f64_lossy());
        if !rnorm.is_finite() {
            return Ok((x, rec.finish(SolveStatus::NumericalFailure)));
        }
        if rnorm <= stop {
            return Ok((x, rec.finish(SolveStatus::Converged)));
        }
        rt = precond.apply(&r)?;
        rec.precs += 1;
        let rho_new = bilinear_unchecked(&rt, &r);
        let beta = rho_new / rho;
        rho = rho_new;
        p.xpby(&rt, beta);
    }
    Ok((x, rec.finish(SolveStatus::NotConverged)))
}

/// Preconditioned conjugate orthogonal conjugate residual.
pub fn cocr<T, A, P>(
    a: &A,
    precond: &P,
    b: &ComplexVector<T>,
    opts: &SolverOptions,
    x0: Option<&ComplexVector<T>>,
) -> Result<(ComplexVector<T>, SolveReport)>
where
    T: Scalar,
    A: ComplexOperator<T> + ?Sized,
    P: Preconditioner<T> + ?Sized,
{
    let mut x = setup(a, b, x0, opts)?;
    let n = b.len();
    let bnorm = b.norm2();
    let mut rec = Recorder::new(bnorm.to_f64_lossy());
    let stop = T::lit(opts.tol) * bnorm;
    let btol = opts.breakdown_tol;

    let mut r = initial_residual(a, b, &x, &mut rec);
    let rnorm = r.norm2();
    rec.push(rnorm.to_f64_lossy());
    if rnorm <= stop {
        return Ok((x, rec.finish(SolveStatus::Converged)));
    }
    let mut rt = precond.apply(&r)?;
    rec.precs += 1;
    let mut p = rt.clone();
    let mut q = ComplexVector::zeros(n);
    a.apply_into(&p, &mut q);
    rec.matvecs += 1;
    let mut rho = bilinear_unchecked(&rt, &q);
    let mut t = ComplexVector::zeros(n);

    for _ in 0..opts.maxit {
        if !finite(rho) {
            return Ok((x, rec.finish(SolveStatus::NumericalFailure)));
        }
        if is_zero_form(rho, rt.norm2(), q.norm2(), btol) {
            return Ok((x, rec.finish(SolveStatus::Breakdown)));
        }
        let qt = precond.apply(&q)?;
        rec.precs += 1;
        let sigma = bilinear_unchecked(&qt, &q);
        if !finite(sigma) {
            return Ok((x, rec.finish(SolveStatus::NumericalFailure)));
        }
        if is_zero_form(sigma, qt.norm2(), q.norm2(), btol) {
            return Ok((x, rec.finish(SolveStatus::Breakdown)));
        }
        let alpha = rho / sigma;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &q);
        rt.axpy(-alpha, &qt);
        let rnorm = r.norm2();
        rec.push(rnorm.to_f64_lossy());
        if !rnorm.is_finite() {
            return Ok((x, rec.finish(SolveStatus::NumericalFailure)));
        }
        if rnorm <= stop {
            return Ok((x, rec.finish(SolveStatus::Converged)));
        }
        a.apply_into(&rt, &mut t);
        rec.matvecs += 1;
        let rho_new = bilinear_unchecked(&rt, &t);
        let beta = rho_new / rho;
        rho = rho_new;
        p.xpby(&rt, beta);
        q.xpby(&t, beta);
    }
    Ok((x, rec.finish(SolveStatus::NotConverged)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ComplexSymSystem, SparseSymMatrix};

    fn small_system() -> ComplexSymSystem<f64> {
        let b = SparseSymMatrix::from_dense(3, &[4.0, -1.0, 0.0, -1.0, 4.0, -1.0, 0.0, -1.0, 4.0]).unwrap();
        let c = SparseSymMatrix::from_diagonal(&[1.0, 0.0, 2.0]).unwrap();
        ComplexSymSystem::new(b, c, ComplexVector::ones_complex(3)).unwrap()
    }

    #[test]
    fn identity_operator_one_iteration() {
        let sys = ComplexSymSystem::new(
            SparseSymMatrix::identity(5),
            SparseSymMatrix::zeros(5),
            ComplexVector::new(vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![0.5; 5]).unwrap(),
        )
        .unwrap();
        let opts = SolverOptions::default();
        for solve in [cocg::<f64, _, _>, cocr::<f64, _, _>] {
            let (x, rep) = solve(&sys, &Identity, sys.rhs(), &opts, None).unwrap();
            assert_eq!(rep.status, SolveStatus::Converged);
            assert_eq!(rep.iterations, 1);
            assert!(x.sub(sys.rhs()).unwrap().max_abs() < 1e-15);
        }
    }

    #[test]
    fn zero_rhs_returns_immediately() {
        let sys = small_system();
        let b = ComplexVector::zeros(3);
        let (x, rep) = cocg(&sys, &Identity, &b, &SolverOptions::default(), None).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.residual_history, vec![0.0]);
        assert!(rep.converged());
        assert_eq!(x, b);
    }

    #[test]
    fn report_invariants_hold() {
        let sys = small_system();
        for solve in [cocg::<f64, _, _>, cocr::<f64, _, _>] {
            let (x, rep) = solve(&sys, &Identity, sys.rhs(), &SolverOptions::new(1e-12, 50), None).unwrap();
            assert!(rep.converged());
            assert_eq!(rep.iterations + 1, rep.residual_history.len());
            let bnorm = sys.rhs().norm2();
            assert_eq!(rep.relative_residual, rep.residual_history.last().unwrap() / bnorm);
            let true_res = sys.rhs().sub(&sys.apply_a(&x).unwrap()).unwrap().norm2();
            assert!(true_res <= 1e-11 * bnorm);
            assert!(rep.iterations <= 3 + 3);
        }
    }

    #[test]
    fn maxit_one_is_not_converged() {
        let sys = small_system();
        let (_, rep) = cocg(&sys, &Identity, sys.rhs(), &SolverOptions::new(1e-12, 1), None).unwrap();
        assert_eq!(rep.status, SolveStatus::NotConverged);
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn isotropic_start_breaks_down() {
        // b = (1, i): [b, b] = 1 + i² = 0 while b ≠ 0.
        let sys = ComplexSymSystem::new(
            SparseSymMatrix::identity(2),
            SparseSymMatrix::zeros(2),
            ComplexVector::new(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap(),
        )
        .unwrap();
        let (_, rep) = cocg(&sys, &Identity, sys.rhs(), &SolverOptions::default(), None).unwrap();
        assert_eq!(rep.status, SolveStatus::Breakdown);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn warm_start_at_solution() {
        let sys = small_system();
        let (x, _) = cocr(&sys, &Identity, sys.rhs(), &SolverOptions::new(1e-14, 50), None).unwrap();
        let (_, rep) = cocr(&sys, &Identity, sys.rhs(), &SolverOptions::new(1e-8, 50), Some(&x)).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.matvec_count, 1);
    }

    #[test]
    fn rejects_bad_options() {
        let sys = small_system();
        assert!(cocg(&sys, &Identity, sys.rhs(), &SolverOptions::new(0.0, 10), None).is_err());
        assert!(cocr(&sys, &Identity, sys.rhs(), &SolverOptions::new(1e-8, 0), None).is_err());
        assert!(cocg(&sys, &Identity, &ComplexVector::zeros(2), &SolverOptions::default(), None).is_err());
    }
}
