//! Preconditioned conjugate gradients for real SPD systems.

use crate::error::{check_dim, Error, Result};
use crate::linalg::SparseSymMatrix;
use crate::scalar::{sum, Scalar};

use super::ic0::LowerFactor;
use super::{Recorder, SolveReport, SolveStatus, SolverOptions};

/// Approximate inverse of a real SPD matrix.
pub trait RealPreconditioner<T: Scalar>: Sync {
    fn apply_real(&self, r: &[T]) -> Result<Vec<T>>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityReal;

impl<T: Scalar> RealPreconditioner<T> for IdentityReal {
    fn apply_real(&self, r: &[T]) -> Result<Vec<T>> {
        Ok(r.to_vec())
    }
}

/// Diagonal scaling by `diag(M)⁻¹`.
#[derive(Clone, Debug)]
pub struct JacobiDiagonal<T> {
    inv: Vec<T>,
}

impl<T: Scalar> JacobiDiagonal<T> {
    pub fn new(m: &SparseSymMatrix<T>) -> Result<Self> {
        let d = m.diagonal();
        if let Some(i) = d.iter().position(|v| *v <= T::zero()) {
            return Err(Error::NotSpd { row: i });
        }
        Ok(JacobiDiagonal { inv: d.iter().map(|v| v.recip()).collect() })
    }
}

impl<T: Scalar> RealPreconditioner<T> for JacobiDiagonal<T> {
    fn apply_real(&self, r: &[T]) -> Result<Vec<T>> {
        check_dim(self.inv.len(), r.len())?;
        Ok(r.iter().zip(&self.inv).map(|(&a, &b)| a * b).collect())
    }
}

impl<T: Scalar> RealPreconditioner<T> for LowerFactor<T> {
    fn apply_real(&self, r: &[T]) -> Result<Vec<T>> {
        check_dim(self.n(), r.len())?;
        let mut z = r.to_vec();
        self.solve_in_place(&mut z);
        Ok(z)
    }
}

fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    sum(x.iter().zip(y).map(|(&a, &b)| a * b))
}

/// Standard PCG from `x = 0`, stopping on `‖r‖ ≤ tol·‖rhs‖`. Reports
/// `Breakdown` when `pᵀMp` or `rᵀz` stops being positive.
pub fn pcg_real<T: Scalar, P: RealPreconditioner<T> + ?Sized>(
    m: &SparseSymMatrix<T>,
    rhs: &[T],
    precond: &P,
    opts: &SolverOptions,
) -> Result<(Vec<T>, SolveReport)> {
    opts.validate()?;
    check_dim(m.n(), rhs.len())?;
    let n = rhs.len();
    let bnorm = dot(rhs, rhs).sqrt();
    let mut rec = Recorder::new(bnorm.to_f64_lossy());
    let stop = T::lit(opts.tol) * bnorm;
    let mut x = vec![T::zero(); n];
    let mut r = rhs.to_vec();
    rec.push(bnorm.to_f64_lossy());
    if bnorm <= stop {
        return Ok((x, rec.finish(SolveStatus::Converged)));
    }
    let mut z = precond.apply_real(&r)?;
    rec.precs += 1;
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![T::zero(); n];
    for _ in 0..opts.maxit {
        if !rz.is_finite() {
            return Ok((x, rec.finish(SolveStatus::NumericalFailure)));
        }
        if rz <= T::zero() {
            return Ok((x, rec.finish(SolveStatus::Breakdown)));
        }
        m.mul_real_into(&p, &mut q);
        rec.matvecs += 1;
        let pq = dot(&p, &q);
        if !(pq > T::zero()) {
            let status = if pq.is_finite() { SolveStatus::Breakdown } else { SolveStatus::NumericalFailure };
            return Ok((x, rec.finish(status)));
        }
        let alpha = rz / pq;
        for k in 0..n {
            x[k] = x[k] + alpha * p[k];
            r[k] = r[k] - alpha * q[k];
        }
        let rnorm = dot(&r, &r).sqrt();
        rec.push(rnorm.to_f64_lossy());
        if !rnorm.is_finite() {
            return Ok((x, rec.finish(SolveStatus::NumericalFailure)));
        }
        if rnorm <= stop {
            return Ok((x, rec.finish(SolveStatus::Converged)));
        }
        z = precond.apply_real(&r)?;
        rec.precs += 1;
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Ok((x, rec.finish(SolveStatus::NotConverged)))
}
