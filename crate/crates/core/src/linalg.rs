//! Real sparse symmetric matrices, split complex vectors and the
//! unconjugated bilinear form used by COCG/COCR.
//!
//! The complex matrix `A = B + iC` is never stored as complex data: it lives
//! in a [`ComplexSymSystem`] as the real pair `(B, C)`, and every product
//! with a [`ComplexVector`] is assembled from real sparse products.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

/// Real symmetric matrix in compressed-row storage with both triangles
/// stored explicitly.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymMatrix<T> {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<T>,
    parallel: bool,
}

impl<T: Scalar> SparseSymMatrix<T> {
    /// Builds a matrix from raw CSR arrays, validating every structural
    /// invariant: monotone offsets, sorted unique in-range columns, finite
    /// values and exact symmetry.
    pub fn new(n: usize, row_offsets: Vec<usize>, col_indices: Vec<usize>, values: Vec<T>) -> Result<Self> {
        if row_offsets.len() != n + 1 {
            return Err(Error::Structure(format!("row_offsets has length {}, expected {}", row_offsets.len(), n + 1)));
        }
        if row_offsets[0] != 0 {
            return Err(Error::Structure("row_offsets must start at 0".into()));
        }
        if col_indices.len() != values.len() || *row_offsets.last().unwrap() != values.len() {
            return Err(Error::Structure("col_indices, values and row_offsets disagree on nnz".into()));
        }
        for i in 0..n {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::Structure(format!("row_offsets decreases at row {i}")));
            }
            let cols = &col_indices[lo..hi];
            for (k, &j) in cols.iter().enumerate() {
                if j >= n {
                    return Err(Error::Structure(format!("column {j} out of range in row {i}")));
                }
                if k > 0 && cols[k - 1] >= j {
                    return Err(Error::Structure(format!("columns not strictly increasing in row {i}")));
                }
            }
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let m = SparseSymMatrix { n, row_offsets, col_indices, values, parallel: false };
        m.check_symmetric()?;
        Ok(m)
    }

    fn check_symmetric(&self) -> Result<()> {
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j != i && self.get(j, i) != Some(v) {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    /// Builds from `(row, col, value)` triplets covering both triangles.
    /// Duplicates are summed; the result must be symmetric.
    pub fn from_triplets<I>(n: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for (i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::Structure(format!("entry ({i}, {j}) out of range for n = {n}")));
            }
            rows[i].push((j, v));
        }
        Self::from_rows(n, rows)
    }

    /// Builds from triplets of one triangle; off-diagonal entries are mirrored.
    pub fn from_lower_triplets<I>(n: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let mut full = Vec::new();
        for (i, j, v) in triplets {
            full.push((i, j, v));
            if i != j {
                full.push((j, i, v));
            }
        }
        Self::from_triplets(n, full)
    }

    fn from_rows(n: usize, mut rows: Vec<Vec<(usize, T)>>) -> Result<Self> {
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for row in rows.iter_mut() {
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut v = row[k].1;
                k += 1;
                while k < row.len() && row[k].0 == j {
                    v = v + row[k].1;
                    k += 1;
                }
                col_indices.push(j);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Self::new(n, row_offsets, col_indices, values)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n]).expect("identity is valid")
    }

    pub fn zeros(n: usize) -> Self {
        SparseSymMatrix { n, row_offsets: vec![0; n + 1], col_indices: Vec::new(), values: Vec::new(), parallel: false }
    }

    pub fn from_diagonal(d: &[T]) -> Result<Self> {
        let n = d.len();
        Self::new(n, (0..=n).collect(), (0..n).collect(), d.to_vec())
    }

    /// Row-major dense input; exact zeros are dropped from the pattern.
    pub fn from_dense(n: usize, dense: &[T]) -> Result<Self> {
        check_dim(n * n, dense.len())?;
        let trips = (0..n).flat_map(|i| (0..n).map(move |j| (i, j)));
        Self::from_triplets(
            n,
            trips.filter_map(|(i, j)| {
                let v = dense[i * n + j];
                (v != T::zero()).then_some((i, j, v))
            }),
        )
    }

    /// Enables row-parallel products. Results are bit-identical to the
    /// sequential path because each row is still summed in index order.
    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn is_parallel(&self) -> bool {
        self.parallel
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).ok().map(|k| vals[k])
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i).unwrap_or_else(T::zero)).collect()
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n * self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[i * self.n + j] = v;
            }
        }
        d
    }

    pub fn frobenius_norm(&self) -> T {
        crate::scalar::sum(self.values.iter().map(|&v| v * v)).sqrt()
    }

    /// `Σ_j |m_ij|` for every row.
    pub fn abs_row_sums(&self) -> Vec<T> {
        (0..self.n).map(|i| crate::scalar::sum(self.row(i).1.iter().map(|v| v.abs()))).collect()
    }

    #[inline]
    fn row_dot(&self, i: usize, x: &[T]) -> T {
        let (cols, vals) = self.row(i);
        let mut acc = T::zero();
        for (&j, &v) in cols.iter().zip(vals) {
            acc = acc + v * x[j];
        }
        acc
    }

    /// Real product `y = M x`.
    pub fn mul_real_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        if self.parallel {
            y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = self.row_dot(i, x));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = self.row_dot(i, x);
            }
        }
    }

    pub fn mul_real(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(self.n, x.len())?;
        let mut y = vec![T::zero(); self.n];
        self.mul_real_into(x, &mut y);
        Ok(y)
    }

    /// `M (xr + i xi)` in one row sweep over both parts.
    pub(crate) fn mul_pair_into(&self, xr: &[T], xi: &[T], yr: &mut [T], yi: &mut [T]) {
        let kernel = |i: usize| {
            let (cols, vals) = self.row(i);
            let (mut ar, mut ai) = (T::zero(), T::zero());
            for (&j, &v) in cols.iter().zip(vals) {
                ar = ar + v * xr[j];
                ai = ai + v * xi[j];
            }
            (ar, ai)
        };
        if self.parallel {
            yr.par_iter_mut().zip(yi.par_iter_mut()).enumerate().for_each(|(i, (a, b))| {
                (*a, *b) = kernel(i);
            });
        } else {
            for i in 0..self.n {
                (yr[i], yi[i]) = kernel(i);
            }
        }
    }

    /// Real matrix times complex vector, applied to each part independently.
    pub fn spmv(&self, v: &ComplexVector<T>) -> Result<ComplexVector<T>> {
        check_dim(self.n, v.len())?;
        let mut out = ComplexVector::zeros(self.n);
        self.mul_pair_into(&v.re, &v.im, &mut out.re, &mut out.im);
        Ok(out)
    }

    /// Entrywise sum over the union pattern.
    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        let mut row_offsets = vec![0];
        let mut col_indices = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(col_indices.capacity());
        for i in 0..self.n {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let take_a = q == cb.len() || (p < ca.len() && ca[p] < cb[q]);
                let take_b = p == ca.len() || (q < cb.len() && cb[q] < ca[p]);
                if take_a {
                    col_indices.push(ca[p]);
                    values.push(va[p]);
                    p += 1;
                } else if take_b {
                    col_indices.push(cb[q]);
                    values.push(vb[q]);
                    q += 1;
                } else {
                    col_indices.push(ca[p]);
                    values.push(va[p] + vb[q]);
                    p += 1;
                    q += 1;
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseSymMatrix { n: self.n, row_offsets, col_indices, values, parallel: self.parallel })
    }

    /// `S M S` for diagonal `S = diag(s)`; the pattern is kept exactly.
    pub fn symmetric_scale(&self, s: &[T]) -> Result<Self> {
        check_dim(self.n, s.len())?;
        let mut out = self.clone();
        for i in 0..self.n {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                let j = self.col_indices[k];
                out.values[k] = s[i] * self.values[k] * s[j];
            }
        }
        Ok(out)
    }

    /// Embeds the matrix top-left in an `n × n` zero matrix.
    pub fn pad_to(&self, n: usize) -> Result<Self> {
        if n < self.n {
            return Err(Error::InvalidArgument(format!("cannot pad a {}×{} matrix down to {n}", self.n, self.n)));
        }
        let mut out = self.clone();
        let last = *out.row_offsets.last().unwrap();
        out.row_offsets.resize(n + 1, last);
        out.n = n;
        Ok(out)
    }

    /// Number of positions stored in either `self` or `other`.
    pub fn union_nnz(&self, other: &Self) -> Result<usize> {
        Ok(self.add(other)?.nnz())
    }

    /// Converts the value type, e.g. to run a reference computation in
    /// extended precision.
    pub fn cast<U: Scalar>(&self) -> SparseSymMatrix<U> {
        SparseSymMatrix {
            n: self.n,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values: self.values.iter().map(|&v| U::lit(v.to_f64_lossy())).collect(),
            parallel: self.parallel,
        }
    }
}

/// Complex vector held as separate real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector<T> {
    pub(crate) re: Vec<T>,
    pub(crate) im: Vec<T>,
}

impl<T: Scalar> ComplexVector<T> {
    pub fn new(re: Vec<T>, im: Vec<T>) -> Result<Self> {
        check_dim(re.len(), im.len())?;
        let bad = re.iter().chain(&im).position(|v| !v.is_finite());
        if let Some(index) = bad {
            return Err(Error::NonFinite { index: index % re.len().max(1) });
        }
        Ok(ComplexVector { re, im })
    }

    pub fn zeros(n: usize) -> Self {
        ComplexVector { re: vec![T::zero(); n], im: vec![T::zero(); n] }
    }

    pub fn from_real(re: Vec<T>) -> Result<Self> {
        let im = vec![T::zero(); re.len()];
        Self::new(re, im)
    }

    /// `(1 + i)·𝟙`, the default right-hand side.
    pub fn ones_complex(n: usize) -> Self {
        ComplexVector { re: vec![T::one(); n], im: vec![T::one(); n] }
    }

    pub fn from_complex(v: &[Complex<T>]) -> Result<Self> {
        Self::new(v.iter().map(|z| z.re).collect(), v.iter().map(|z| z.im).collect())
    }

    pub fn to_complex(&self) -> Vec<Complex<T>> {
        self.re.iter().zip(&self.im).map(|(&r, &i)| Complex::new(r, i)).collect()
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn re(&self) -> &[T] {
        &self.re
    }

    pub fn im(&self) -> &[T] {
        &self.im
    }

    pub fn get(&self, i: usize) -> Complex<T> {
        Complex::new(self.re[i], self.im[i])
    }

    pub fn is_finite(&self) -> bool {
        self.re.iter().chain(&self.im).all(|v| v.is_finite())
    }

    /// Euclidean norm `sqrt(Σ |v_k|²)`.
    pub fn norm2(&self) -> T {
        crate::scalar::sum(self.re.iter().zip(&self.im).map(|(&r, &i)| r * r + i * i)).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.re.iter().zip(&self.im).map(|(&r, &i)| (r * r + i * i).sqrt()).fold(T::zero(), T::max)
    }

    /// `self += alpha * x`
    pub(crate) fn axpy(&mut self, alpha: Complex<T>, x: &Self) {
        for k in 0..self.re.len() {
            let (xr, xi) = (x.re[k], x.im[k]);
            self.re[k] = self.re[k] + alpha.re * xr - alpha.im * xi;
            self.im[k] = self.im[k] + alpha.re * xi + alpha.im * xr;
        }
    }

    /// `self = x + beta * self`
    pub(crate) fn xpby(&mut self, x: &Self, beta: Complex<T>) {
        for k in 0..self.re.len() {
            let (sr, si) = (self.re[k], self.im[k]);
            self.re[k] = x.re[k] + beta.re * sr - beta.im * si;
            self.im[k] = x.im[k] + beta.re * si + beta.im * sr;
        }
    }

    pub fn scale(&self, alpha: Complex<T>) -> Self {
        let mut out = ComplexVector::zeros(self.len());
        out.axpy(alpha, self);
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.len(), other.len())?;
        Ok(ComplexVector {
            re: self.re.iter().zip(&other.re).map(|(&a, &b)| a - b).collect(),
            im: self.im.iter().zip(&other.im).map(|(&a, &b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.len(), other.len())?;
        Ok(ComplexVector {
            re: self.re.iter().zip(&other.re).map(|(&a, &b)| a + b).collect(),
            im: self.im.iter().zip(&other.im).map(|(&a, &b)| a + b).collect(),
        })
    }

    pub fn cast<U: Scalar>(&self) -> ComplexVector<U> {
        let c = |v: &Vec<T>| v.iter().map(|&x| U::lit(x.to_f64_lossy())).collect();
        ComplexVector { re: c(&self.re), im: c(&self.im) }
    }
}

/// `Σ u_k v_k` without conjugation.
pub fn bilinear<T: Scalar>(u: &ComplexVector<T>, v: &ComplexVector<T>) -> Result<Complex<T>> {
    check_dim(u.len(), v.len())?;
    Ok(bilinear_unchecked(u, v))
}

pub(crate) fn bilinear_unchecked<T: Scalar>(u: &ComplexVector<T>, v: &ComplexVector<T>) -> Complex<T> {
    let (mut re, mut im) = (T::zero(), T::zero());
    for k in 0..u.re.len() {
        re = re + u.re[k] * v.re[k] - u.im[k] * v.im[k];
        im = im + u.re[k] * v.im[k] + u.im[k] * v.re[k];
    }
    Complex::new(re, im)
}

pub fn norm2<T: Scalar>(v: &ComplexVector<T>) -> T {
    v.norm2()
}

/// A linear map on complex vectors of fixed dimension.
pub trait ComplexOperator<T: Scalar>: Sync {
    fn dim(&self) -> usize;

    fn apply_into(&self, x: &ComplexVector<T>, y: &mut ComplexVector<T>);

    fn apply(&self, x: &ComplexVector<T>) -> Result<ComplexVector<T>> {
        check_dim(self.dim(), x.len())?;
        let mut y = ComplexVector::zeros(self.dim());
        self.apply_into(x, &mut y);
        Ok(y)
    }
}

/// `A = B + iC` together with a right-hand side `b = c + id`.
#[derive(Clone, Debug)]
pub struct ComplexSymSystem<T> {
    b: SparseSymMatrix<T>,
    c: SparseSymMatrix<T>,
    rhs: ComplexVector<T>,
}

impl<T: Scalar> ComplexSymSystem<T> {
    pub fn new(b: SparseSymMatrix<T>, c: SparseSymMatrix<T>, rhs: ComplexVector<T>) -> Result<Self> {
        check_dim(b.n(), c.n())?;
        check_dim(b.n(), rhs.len())?;
        Ok(ComplexSymSystem { b, c, rhs })
    }

    pub fn n(&self) -> usize {
        self.b.n()
    }

    pub fn real_part(&self) -> &SparseSymMatrix<T> {
        &self.b
    }

    pub fn imag_part(&self) -> &SparseSymMatrix<T> {
        &self.c
    }

    pub fn rhs(&self) -> &ComplexVector<T> {
        &self.rhs
    }

    pub fn with_rhs(mut self, rhs: ComplexVector<T>) -> Result<Self> {
        check_dim(self.n(), rhs.len())?;
        self.rhs = rhs;
        Ok(self)
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.b = self.b.with_parallel(parallel);
        self.c = self.c.with_parallel(parallel);
        self
    }

    /// `M = B + C`, the real SPD matrix behind the MHSS preconditioner.
    pub fn sum_matrix(&self) -> SparseSymMatrix<T> {
        self.b.add(&self.c).expect("B and C have equal size")
    }

    /// `(B + iC) x`.
    pub fn apply_a(&self, x: &ComplexVector<T>) -> Result<ComplexVector<T>> {
        self.apply(x)
    }

    /// Cheap necessary condition for `B`, `C` semi-SPD: no negative
    /// diagonal entry. Returns the first offending `(matrix, row)`.
    pub fn semi_spd_smoke_check(&self) -> std::result::Result<(), (char, usize)> {
        for (name, m) in [('B', &self.b), ('C', &self.c)] {
            if let Some(i) = m.diagonal().iter().position(|&d| d < T::zero()) {
                return Err((name, i));
            }
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> ComplexSymSystem<U> {
        ComplexSymSystem { b: self.b.cast(), c: self.c.cast(), rhs: self.rhs.cast() }
    }
}

impl<T: Scalar> ComplexOperator<T> for ComplexSymSystem<T> {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply_into(&self, x: &ComplexVector<T>, y: &mut ComplexVector<T>) {
        let n = self.n();
        let mut cr = vec![T::zero(); n];
        let mut ci = vec![T::zero(); n];
        self.b.mul_pair_into(&x.re, &x.im, &mut y.re, &mut y.im);
        self.c.mul_pair_into(&x.re, &x.im, &mut cr, &mut ci);
        for k in 0..n {
            y.re[k] = y.re[k] - ci[k];
            y.im[k] = y.im[k] + cr[k];
        }
    }
}
