use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::innersolve::{SpdSolverHandle, SpdSolverKind};
use crate::linalg::{ComplexSymSystem, ComplexVector, SparseSymMatrix};
use crate::mhss::mhss_apply_exact;
use crate::orthopoly::{cheb_coeffs_from_delta, closed_jacobi_coeffs, RecurrenceCoeffs};
use crate::polyprecond::apply_polynomial_p_inverse;
use crate::scalar::Scalar;

use super::ic0::{complex_ic0, ComplexLowerFactor};

/// Approximate inverse of `A`, applied once per solver step.
pub trait Preconditioner<T: Scalar>: Sync {
    fn apply(&self, r: &ComplexVector<T>) -> Result<ComplexVector<T>>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl<T: Scalar> Preconditioner<T> for Identity {
    fn apply(&self, r: &ComplexVector<T>) -> Result<ComplexVector<T>> {
        Ok(r.clone())
    }
}

/// Serializable description of a preconditioner, resolved against a
/// system by [`PreconditionerHandle::build`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PrecondSpec {
    None,
    /// IC(0) of `B + iC`.
    Ilu0,
    /// `(1+i)M` with an exact Cholesky solve.
    MhssExact,
    /// `(1+i) L Lᵀ` with `L` the IC(0) factor of `M`.
    MhssIlu0,
    /// `(1+i)M` with loose IC(0)-preconditioned CG solves.
    MhssIc0Pcg {
        tol: f64,
        maxit: usize,
    },
    MhssCheb {
        degree: usize,
        delta: f64,
    },
    MhssJacobi {
        degree: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PreconditionerKind {
    Identity,
    ComplexIc0,
    MhssExactCholesky,
    MhssIc0,
    MhssIc0Pcg,
    MhssPoly,
}

impl PreconditionerKind {
    /// Kind of the MHSS preconditioner whose `M` solves use `h`.
    pub fn for_mhss<T>(h: &SpdSolverHandle<T>) -> Self {
        match h {
            SpdSolverHandle::DenseCholesky(_) | SpdSolverHandle::EnvelopeCholesky(_) => {
                PreconditionerKind::MhssExactCholesky
            }
            SpdSolverHandle::Ic0Direct { .. } => PreconditionerKind::MhssIc0,
            SpdSolverHandle::Ic0Pcg { .. } => PreconditionerKind::MhssIc0Pcg,
        }
    }
}

#[derive(Clone, Debug)]
pub enum PreconditionerHandle<T> {
    Identity,
    ComplexIc0(ComplexLowerFactor<T>),
    Mhss(SpdSolverHandle<T>),
    /// `(1-i)/2 · s_m(M)`; `M` must have its spectrum in `(0, 1]`.
    MhssPoly {
        m: SparseSymMatrix<T>,
        coeffs: RecurrenceCoeffs<T>,
    },
}

impl<T: Scalar> PreconditionerHandle<T> {
    pub fn build(sys: &ComplexSymSystem<T>, spec: &PrecondSpec) -> Result<Self> {
        let sum = || sys.sum_matrix();
        Ok(match *spec {
            PrecondSpec::None => PreconditionerHandle::Identity,
            PrecondSpec::Ilu0 => PreconditionerHandle::ComplexIc0(complex_ic0(sys.real_part(), sys.imag_part())?),
            PrecondSpec::MhssExact => PreconditionerHandle::Mhss(SpdSolverHandle::build(&sum(), SpdSolverKind::Exact)?),
            PrecondSpec::MhssIlu0 => {
                PreconditionerHandle::Mhss(SpdSolverHandle::build(&sum(), SpdSolverKind::Ic0Direct)?)
            }
            PrecondSpec::MhssIc0Pcg { tol, maxit } => {
                PreconditionerHandle::Mhss(SpdSolverHandle::build(&sum(), SpdSolverKind::Ic0Pcg { tol, maxit })?)
            }
            PrecondSpec::MhssCheb { degree, delta } => {
                PreconditionerHandle::MhssPoly { m: sum(), coeffs: cheb_coeffs_from_delta(T::lit(delta), degree)? }
            }
            PrecondSpec::MhssJacobi { degree } => {
                PreconditionerHandle::MhssPoly { m: sum(), coeffs: closed_jacobi_coeffs(degree) }
            }
        })
    }

    pub fn kind(&self) -> PreconditionerKind {
        match self {
            PreconditionerHandle::Identity => PreconditionerKind::Identity,
            PreconditionerHandle::ComplexIc0(_) => PreconditionerKind::ComplexIc0,
            PreconditionerHandle::Mhss(h) => PreconditionerKind::for_mhss(h),
            PreconditionerHandle::MhssPoly { .. } => PreconditionerKind::MhssPoly,
        }
    }

    pub fn coefficients(&self) -> Option<&RecurrenceCoeffs<T>> {
        match self {
            PreconditionerHandle::MhssPoly { coeffs, .. } => Some(coeffs),
            _ => None,
        }
    }
}

impl<T: Scalar> Preconditioner<T> for PreconditionerHandle<T> {
    fn apply(&self, r: &ComplexVector<T>) -> Result<ComplexVector<T>> {
        match self {
            PreconditionerHandle::Identity => Ok(r.clone()),
            PreconditionerHandle::ComplexIc0(l) => l.solve_complex(r),
            PreconditionerHandle::Mhss(h) => {
                check_dim(h.n(), r.len())?;
                mhss_apply_exact(h, r)
            }
            PreconditionerHandle::MhssPoly { m, coeffs } => apply_polynomial_p_inverse(m, coeffs, r),
        }
    }
}
