//! Zero-fill incomplete Cholesky factorizations.
//!
//! Both the real factor of `M = B + C` and the complex factor of `B + iC`
//! come out of one row-oriented kernel; the complex one uses the plain
//! (unconjugated) transpose, so `A ≈ L Lᵀ`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{ComplexVector, SparseSymMatrix};
use crate::scalar::Scalar;

/// Lower-triangular factor in compressed-row storage. Each row holds its
/// strictly-lower entries in increasing column order, then the diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerFactor<E> {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<E>,
}

pub type ComplexLowerFactor<T> = LowerFactor<Complex<T>>;

impl<E: Copy> LowerFactor<E> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[E]) {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    pub fn diagonal(&self) -> Vec<E> {
        (0..self.n).map(|i| self.values[self.row_offsets[i + 1] - 1]).collect()
    }

    /// `L` from a lower-triangular dense row-major matrix, dropping zeros
    /// below the diagonal.
    pub fn from_dense_lower(n: usize, dense: &[E]) -> Result<Self>
    where
        E: Zero + PartialEq,
    {
        check_dim(n * n, dense.len())?;
        let mut row_offsets = vec![0];
        let (mut col_indices, mut values) = (Vec::new(), Vec::new());
        for i in 0..n {
            for j in 0..i {
                let v = dense[i * n + j];
                if v != E::zero() {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            col_indices.push(i);
            values.push(dense[i * n + i]);
            row_offsets.push(values.len());
        }
        Ok(LowerFactor { n, row_offsets, col_indices, values })
    }

    /// Row-major dense copy of `L`.
    pub fn to_dense(&self) -> Vec<E>
    where
        E: Zero,
    {
        let mut d = vec![E::zero(); self.n * self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[i * self.n + j] = v;
            }
        }
        d
    }
}

trait FactorField:
    Copy + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + std::ops::Div<Output = Self>
{
}

impl<E> FactorField for E where
    E: Copy + Zero + Add<Output = E> + Sub<Output = E> + Mul<Output = E> + std::ops::Div<Output = E>
{
}

/// Lower pattern plus values of the matrix to factor; the diagonal must be
/// present in every row.
struct LowerPattern<E> {
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<E>,
}

fn ic0_kernel<E: FactorField>(
    n: usize,
    a: LowerPattern<E>,
    pivot_sqrt: impl Fn(E, usize) -> Result<E>,
) -> Result<LowerFactor<E>> {
    let LowerPattern { row_offsets, col_indices, mut values } = a;
    let mut work = vec![E::zero(); n];
    let mut mark = vec![usize::MAX; n];
    for i in 0..n {
        let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
        for p in lo..hi - 1 {
            let k = col_indices[p];
            let mut acc = values[p];
            for q in row_offsets[k]..row_offsets[k + 1] - 1 {
                let j = col_indices[q];
                if mark[j] == i {
                    acc = acc - work[j] * values[q];
                }
            }
            let v = acc / values[row_offsets[k + 1] - 1];
            values[p] = v;
            work[k] = v;
            mark[k] = i;
        }
        let mut d = values[hi - 1];
        for p in lo..hi - 1 {
            d = d - values[p] * values[p];
        }
        values[hi - 1] = pivot_sqrt(d, i)?;
    }
    Ok(LowerFactor { n, row_offsets, col_indices, values })
}

fn lower_pattern<T: Scalar, E: Copy>(
    m: &SparseSymMatrix<T>,
    mut value: impl FnMut(usize, usize, T) -> E,
    zero: E,
) -> Result<LowerPattern<E>> {
    let n = m.n();
    let mut row_offsets = Vec::with_capacity(n + 1);
    row_offsets.push(0);
    let (mut col_indices, mut values) = (Vec::new(), Vec::new());
    for i in 0..n {
        let (cols, vals) = m.row(i);
        let mut has_diag = false;
        for (&j, &v) in cols.iter().zip(vals) {
            if j > i {
                break;
            }
            if j == i {
                has_diag = true;
            }
            col_indices.push(j);
            values.push(value(i, j, v));
        }
        if !has_diag {
            col_indices.push(i);
            values.push(zero);
        }
        row_offsets.push(values.len());
    }
    Ok(LowerPattern { row_offsets, col_indices, values })
}

/// IC(0) of a real symmetric matrix. Fails with `PivotBreakdown` on the
/// first pivot that is not strictly positive.
pub fn ic0_factorize<T: Scalar>(m: &SparseSymMatrix<T>) -> Result<LowerFactor<T>> {
    ic0_shifted(m, T::zero())
}

/// IC(0) of `M + σ·diag(M)`.
pub fn ic0_shifted<T: Scalar>(m: &SparseSymMatrix<T>, sigma: T) -> Result<LowerFactor<T>> {
    let pattern = lower_pattern(m, |i, j, v| if i == j { v + sigma * v } else { v }, T::zero())?;
    ic0_kernel(m.n(), pattern, |d, row| {
        if d > T::zero() && d.is_finite() {
            Ok(d.sqrt())
        } else {
            Err(Error::PivotBreakdown { row })
        }
    })
}

pub const IC0_SHIFTS: [f64; 3] = [1e-3, 1e-2, 1e-1];

/// IC(0) with the usual rescue: on pivot breakdown retry with
/// `M + σ·diag(M)` for σ in [`IC0_SHIFTS`]. Returns the factor and the shift
/// that succeeded (zero when none was needed).
pub fn ic0_factorize_with_retry<T: Scalar>(m: &SparseSymMatrix<T>) -> Result<(LowerFactor<T>, T)> {
    let mut last = match ic0_factorize(m) {
        Ok(l) => return Ok((l, T::zero())),
        Err(e) => e,
    };
    for s in IC0_SHIFTS {
        let sigma = T::lit(s);
        match ic0_shifted(m, sigma) {
            Ok(l) => return Ok((l, sigma)),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// IC(0) of the complex symmetric `B + iC` on the union pattern of `B`
/// and `C`, with principal square roots on the diagonal. A pivot whose
/// modulus falls below `1e-14` times the modulus of the original diagonal
/// entry counts as a breakdown.
pub fn complex_ic0<T: Scalar>(b: &SparseSymMatrix<T>, c: &SparseSymMatrix<T>) -> Result<ComplexLowerFactor<T>> {
    check_dim(b.n(), c.n())?;
    let union = b.add(c)?;
    let pattern = lower_pattern(
        &union,
        |i, j, _| Complex::new(b.get(i, j).unwrap_or_else(T::zero), c.get(i, j).unwrap_or_else(T::zero)),
        Complex::zero(),
    )?;
    let diag_scale: Vec<T> = (0..b.n())
        .map(|i| Complex::new(b.get(i, i).unwrap_or_else(T::zero), c.get(i, i).unwrap_or_else(T::zero)).norm())
        .collect();
    let threshold = T::lit(1e-14);
    ic0_kernel(b.n(), pattern, |d: Complex<T>, row| {
        let tiny = d.norm() <= threshold * diag_scale[row];
        if tiny || !d.re.is_finite() || !d.im.is_finite() {
            Err(Error::PivotBreakdown { row })
        } else {
            Ok(d.sqrt())
        }
    })
}

/// Solves `L Lᵀ z = v` in place: forward substitution with `L`, then
/// backward substitution with `Lᵀ` by column sweeps over the rows of `L`.
fn llt_solve<E: FactorField>(l: &LowerFactor<E>, v: &mut [E]) {
    debug_assert_eq!(v.len(), l.n);
    for i in 0..l.n {
        let (cols, vals) = l.row(i);
        let last = cols.len() - 1;
        let mut acc = v[i];
        for p in 0..last {
            acc = acc - vals[p] * v[cols[p]];
        }
        v[i] = acc / vals[last];
    }
    for i in (0..l.n).rev() {
        let (cols, vals) = l.row(i);
        let last = cols.len() - 1;
        let zi = v[i] / vals[last];
        v[i] = zi;
        for p in 0..last {
            v[cols[p]] = v[cols[p]] - vals[p] * zi;
        }
    }
}

impl<T: Scalar> LowerFactor<T> {
    /// Overwrites `v` with `(L Lᵀ)⁻¹ v`.
    pub fn solve_in_place(&self, v: &mut [T]) {
        llt_solve(self, v);
    }
}

/// `(L Lᵀ)⁻¹ v` for a real lower factor.
pub fn triangular_solves<T: Scalar>(l: &LowerFactor<T>, v: &[T]) -> Result<Vec<T>> {
    check_dim(l.n, v.len())?;
    if let Some(i) = l.diagonal().iter().position(|d| *d == T::zero()) {
        return Err(Error::InvalidArgument(format!("zero diagonal in triangular factor at row {i}")));
    }
    let mut z = v.to_vec();
    l.solve_in_place(&mut z);
    Ok(z)
}

impl<T: Scalar> ComplexLowerFactor<T> {
    /// `(L Lᵀ)⁻¹ v` for the complex factor.
    pub fn solve_complex(&self, v: &ComplexVector<T>) -> Result<ComplexVector<T>> {
        check_dim(self.n, v.len())?;
        let mut z = v.to_complex();
        llt_solve(self, &mut z);
        ComplexVector::from_complex(&z)
    }
}
