//! Symmetric diagonal equilibration.
//!
//! With `s_i = (Σ_j |M_ij|)^{-1/2}` and `M = B + C`, the matrix `S M S` is
//! similar to `S² M`, whose infinity norm is one, so its spectrum lies in
//! `(0, 1]`. The polynomial preconditioners rely on that interval.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{ComplexSymSystem, ComplexVector, SparseSymMatrix};
use crate::scalar::Scalar;

/// Strictly positive per-index scale factors.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingVector<T> {
    s: Vec<T>,
}

impl<T: Scalar> ScalingVector<T> {
    pub fn new(s: Vec<T>) -> Result<Self> {
        if let Some(i) = s.iter().position(|v| !v.is_finite() || *v <= T::zero()) {
            return Err(Error::InvalidArgument(format!("scale factor {i} must be positive and finite, got {}", s[i])));
        }
        Ok(ScalingVector { s })
    }

    pub fn ones(n: usize) -> Self {
        ScalingVector { s: vec![T::one(); n] }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.s
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Componentwise reciprocal; scaling by it undoes scaling by `self`.
    pub fn reciprocal(&self) -> Self {
        ScalingVector { s: self.s.iter().map(|&v| v.recip()).collect() }
    }
}

/// Scale factors from the absolute row sums of `B + C`. Rows whose sum is
/// exactly zero (zero padding) get a factor of one.
pub fn compute_scaling<T: Scalar>(b: &SparseSymMatrix<T>, c: &SparseSymMatrix<T>) -> Result<ScalingVector<T>> {
    check_dim(b.n(), c.n())?;
    let m = b.add(c)?;
    let s = m.abs_row_sums().into_iter().map(|r| if r == T::zero() { T::one() } else { r.sqrt().recip() }).collect();
    ScalingVector::new(s)
}

/// `(S B S, S C S, S b)`.
pub fn apply_scaling<T: Scalar>(sys: &ComplexSymSystem<T>, s: &ScalingVector<T>) -> Result<ComplexSymSystem<T>> {
    check_dim(sys.n(), s.len())?;
    let b = sys.real_part().symmetric_scale(s.as_slice())?;
    let c = sys.imag_part().symmetric_scale(s.as_slice())?;
    let rhs = scale_vector(sys.rhs(), s)?;
    ComplexSymSystem::new(b, c, rhs)
}

/// `x = S w`.
pub fn unscale_solution<T: Scalar>(w: &ComplexVector<T>, s: &ScalingVector<T>) -> Result<ComplexVector<T>> {
    scale_vector(w, s)
}

fn scale_vector<T: Scalar>(v: &ComplexVector<T>, s: &ScalingVector<T>) -> Result<ComplexVector<T>> {
    check_dim(v.len(), s.len())?;
    let s = s.as_slice();
    Ok(ComplexVector {
        re: v.re.iter().zip(s).map(|(&x, &f)| x * f).collect(),
        im: v.im.iter().zip(s).map(|(&x, &f)| x * f).collect(),
    })
}
