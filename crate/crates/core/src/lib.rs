//! Preconditioned Krylov solvers for complex symmetric systems
//! `(B + iC) x = b` with `B`, `C` real symmetric positive semidefinite and
//! `B + C` positive definite.
//!
//! The preconditioner is the MHSS matrix `P = (1+i)(B+C)`, applied exactly,
//! through incomplete Cholesky, or through a Jacobi or Chebyshev polynomial
//! in the scaled `B + C`.

pub mod error;
pub mod harness;
pub mod innersolve;
pub mod krylov;
pub mod linalg;
pub mod mhss;
pub mod orthopoly;
pub mod polyprecond;
pub mod scalar;
pub mod scaling;

pub use error::{Error, Result};
pub use krylov::{cocg, cocr, PrecondSpec, PreconditionerHandle, SolveReport, SolveStatus, SolverOptions};
pub use linalg::{bilinear, ComplexOperator, ComplexSymSystem, ComplexVector, SparseSymMatrix};
pub use orthopoly::{PolyFamily, RecurrenceCoeffs};
pub use scalar::Scalar;
pub use scaling::ScalingVector;

pub use twofloat::TwoFloat;

pub type SparseSymMatrixF64 = SparseSymMatrix<f64>;
pub type SparseSymMatrixF32 = SparseSymMatrix<f32>;
pub type ComplexVectorF64 = ComplexVector<f64>;
pub type ComplexVectorF32 = ComplexVector<f32>;
pub type ComplexSymSystemF64 = ComplexSymSystem<f64>;
pub type ComplexSymSystemF32 = ComplexSymSystem<f32>;
pub type RecurrenceCoeffsF64 = RecurrenceCoeffs<f64>;
pub type PreconditionerHandleF64 = PreconditionerHandle<f64>;
pub type SparseSymMatrixDD = SparseSymMatrix<TwoFloat>;
pub type ComplexVectorDD = ComplexVector<TwoFloat>;
