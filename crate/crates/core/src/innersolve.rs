//! Real SPD solves with `M = B + C`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::krylov::{ic0_factorize_with_retry, pcg_real, LowerFactor, SolveStatus, SolverOptions};
use crate::linalg::SparseSymMatrix;
use crate::scalar::Scalar;

/// Largest order the dense path accepts.
pub const DENSE_LIMIT: usize = 2000;

/// Largest number of stored entries accepted for an envelope factor.
pub const ENVELOPE_LIMIT: usize = 60_000_000;

/// Dense Cholesky factor `M = L Lᵀ`, row-major lower triangle.
#[derive(Clone, Debug)]
pub struct DenseCholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Scalar> DenseCholesky<T> {
    /// Factors a dense row-major SPD matrix; only the lower triangle is read.
    pub fn factor(n: usize, a: &[T]) -> Result<Self> {
        Self::factor_with_limit(n, a, DENSE_LIMIT)
    }

    pub fn factor_with_limit(n: usize, a: &[T], limit: usize) -> Result<Self> {
        if n > limit {
            return Err(Error::TooLarge { n, limit });
        }
        check_dim(n * n, a.len())?;
        let mut l = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s = s - l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(s > T::zero()) {
                        return Err(Error::NotSpd { row: i });
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(DenseCholesky { n, l })
    }

    pub fn from_sparse(m: &SparseSymMatrix<T>) -> Result<Self> {
        if m.n() > DENSE_LIMIT {
            return Err(Error::TooLarge { n: m.n(), limit: DENSE_LIMIT });
        }
        Self::factor(m.n(), &m.to_dense())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, v: &[T]) -> Result<Vec<T>> {
        check_dim(self.n, v.len())?;
        let n = self.n;
        let mut z = v.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for k in 0..i {
                s = s - self.l[i * n + k] * z[k];
            }
            z[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..n {
                s = s - self.l[k * n + i] * z[k];
            }
            z[i] = s / self.l[i * n + i];
        }
        Ok(z)
    }
}

/// `M⁻¹ v` for a dense row-major SPD matrix.
pub fn dense_cholesky_solve<T: Scalar>(n: usize, m: &[T], v: &[T]) -> Result<Vec<T>> {
    DenseCholesky::factor(n, m)?.solve(v)
}

/// Exact Cholesky in variable-band (envelope) storage. Row `i` keeps
/// `L[i, first[i]..=i]`; the factor has no fill outside the envelope of `M`.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky<T> {
    n: usize,
    first: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> EnvelopeCholesky<T> {
    pub fn from_sparse(m: &SparseSymMatrix<T>) -> Result<Self> {
        let n = m.n();
        let first: Vec<usize> = (0..n).map(|i| m.row(i).0.first().copied().unwrap_or(i).min(i)).collect();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for i in 0..n {
            offsets.push(offsets[i] + i - first[i] + 1);
        }
        let size = offsets[n];
        if size > ENVELOPE_LIMIT {
            return Err(Error::TooLarge { n: size, limit: ENVELOPE_LIMIT });
        }
        let mut values = vec![T::zero(); size];
        for i in 0..n {
            let (cols, vals) = m.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j <= i {
                    values[offsets[i] + j - first[i]] = v;
                }
            }
        }
        let at = |i: usize, j: usize| offsets[i] + j - first[i];
        for i in 0..n {
            for j in first[i]..=i {
                let lo = first[i].max(first[j]);
                let mut s = values[at(i, j)];
                for k in lo..j {
                    s = s - values[at(i, k)] * values[at(j, k)];
                }
                if i == j {
                    if !(s > T::zero()) {
                        return Err(Error::NotSpd { row: i });
                    }
                    values[at(i, i)] = s.sqrt();
                } else {
                    values[at(i, j)] = s / values[at(j, j)];
                }
            }
        }
        Ok(EnvelopeCholesky { n, first, offsets, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, v: &[T]) -> Result<Vec<T>> {
        check_dim(self.n, v.len())?;
        let mut z = v.to_vec();
        for i in 0..self.n {
            let row = &self.values[self.offsets[i]..self.offsets[i + 1]];
            let f = self.first[i];
            let mut s = z[i];
            for (k, &l) in row[..row.len() - 1].iter().enumerate() {
                s = s - l * z[f + k];
            }
            z[i] = s / row[row.len() - 1];
        }
        for i in (0..self.n).rev() {
            let row = &self.values[self.offsets[i]..self.offsets[i + 1]];
            let f = self.first[i];
            let zi = z[i] / row[row.len() - 1];
            z[i] = zi;
            for (k, &l) in row[..row.len() - 1].iter().enumerate() {
                z[f + k] = z[f + k] - l * zi;
            }
        }
        Ok(z)
    }
}

/// Which SPD solver to build for `M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpdSolverKind {
    DenseCholesky,
    EnvelopeCholesky,
    /// Dense Cholesky up to [`DENSE_LIMIT`], envelope Cholesky above.
    Exact,
    Ic0Direct,
    Ic0Pcg {
        tol: f64,
        maxit: usize,
    },
}

impl SpdSolverKind {
    pub const DEFAULT_INNER_TOL: f64 = 1e-2;
    pub const DEFAULT_INNER_MAXIT: usize = 200;

    pub fn ic0_pcg_default() -> Self {
        SpdSolverKind::Ic0Pcg { tol: Self::DEFAULT_INNER_TOL, maxit: Self::DEFAULT_INNER_MAXIT }
    }
}

/// A ready-to-use solver for `M z = v`.
#[derive(Clone, Debug)]
pub enum SpdSolverHandle<T> {
    DenseCholesky(DenseCholesky<T>),
    EnvelopeCholesky(EnvelopeCholesky<T>),
    Ic0Direct { factor: LowerFactor<T>, shift: T },
    Ic0Pcg { m: SparseSymMatrix<T>, factor: LowerFactor<T>, shift: T, opts: SolverOptions },
}

impl<T: Scalar> SpdSolverHandle<T> {
    pub fn build(m: &SparseSymMatrix<T>, kind: SpdSolverKind) -> Result<Self> {
        Ok(match kind {
            SpdSolverKind::DenseCholesky => SpdSolverHandle::DenseCholesky(DenseCholesky::from_sparse(m)?),
            SpdSolverKind::EnvelopeCholesky => SpdSolverHandle::EnvelopeCholesky(EnvelopeCholesky::from_sparse(m)?),
            SpdSolverKind::Exact if m.n() <= DENSE_LIMIT => {
                SpdSolverHandle::DenseCholesky(DenseCholesky::from_sparse(m)?)
            }
            SpdSolverKind::Exact => SpdSolverHandle::EnvelopeCholesky(EnvelopeCholesky::from_sparse(m)?),
            SpdSolverKind::Ic0Direct => {
                let (factor, shift) = ic0_factorize_with_retry(m)?;
                SpdSolverHandle::Ic0Direct { factor, shift }
            }
            SpdSolverKind::Ic0Pcg { tol, maxit } => {
                let opts = SolverOptions::new(tol, maxit);
                opts.validate()?;
                let (factor, shift) = ic0_factorize_with_retry(m)?;
                SpdSolverHandle::Ic0Pcg { m: m.clone(), factor, shift, opts }
            }
        })
    }

    pub fn n(&self) -> usize {
        match self {
            SpdSolverHandle::DenseCholesky(f) => f.n(),
            SpdSolverHandle::EnvelopeCholesky(f) => f.n(),
            SpdSolverHandle::Ic0Direct { factor, .. } | SpdSolverHandle::Ic0Pcg { factor, .. } => factor.n(),
        }
    }

    /// Diagonal shift used by the IC(0) kinds, zero otherwise.
    pub fn ic0_shift(&self) -> T {
        match self {
            SpdSolverHandle::Ic0Direct { shift, .. } | SpdSolverHandle::Ic0Pcg { shift, .. } => *shift,
            _ => T::zero(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, SpdSolverHandle::DenseCholesky(_) | SpdSolverHandle::EnvelopeCholesky(_))
    }

    /// `z ≈ M⁻¹ v`. An inner PCG that runs out of iterations still returns
    /// its iterate; breakdown or non-finite values are errors.
    pub fn solve(&self, v: &[T]) -> Result<Vec<T>> {
        match self {
            SpdSolverHandle::DenseCholesky(f) => f.solve(v),
            SpdSolverHandle::EnvelopeCholesky(f) => f.solve(v),
            SpdSolverHandle::Ic0Direct { factor, .. } => crate::krylov::triangular_solves(factor, v),
            SpdSolverHandle::Ic0Pcg { m, factor, opts, .. } => {
                let (z, rep) = pcg_real(m, v, factor, opts)?;
                match rep.status {
                    SolveStatus::Converged | SolveStatus::NotConverged => Ok(z),
                    s => Err(Error::InnerSolve(format!(
                        "inner PCG stopped with {s:?} after {} iterations",
                        rep.iterations
                    ))),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| g[i * n + k] * g[j * n + k]).sum::<f64>();
            }
            a[i * n + i] += n as f64 * 0.1;
        }
        a
    }

    fn residual(n: usize, a: &[f64], z: &[f64], v: &[f64]) -> f64 {
        (0..n).map(|i| ((0..n).map(|j| a[i * n + j] * z[j]).sum::<f64>() - v[i]).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn identity_and_hand_example() {
        assert_eq!(dense_cholesky_solve(2, &[1.0, 0.0, 0.0, 1.0], &[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
        let z = dense_cholesky_solve::<f64>(2, &[4.0, 2.0, 2.0, 3.0], &[2.0, 1.0]).unwrap();
        assert!((z[0] - 0.5).abs() < 1e-15 && z[1].abs() < 1e-15);
    }

    #[test]
    fn random_spd_residual() {
        let n = 50;
        let a = random_spd(n, 3);
        let v: Vec<f64> = (0..n).map(|k| (k as f64).sin()).collect();
        let z = dense_cholesky_solve(n, &a, &v).unwrap();
        assert!(residual(n, &a, &z, &v) <= 1e-10);
    }

    #[test]
    fn rejects_indefinite_and_oversize() {
        assert!(matches!(dense_cholesky_solve(2, &[1.0, 2.0, 2.0, 1.0], &[1.0, 1.0]), Err(Error::NotSpd { row: 1 })));
        assert!(matches!(DenseCholesky::factor_with_limit(3, &[0.0; 9], 2), Err(Error::TooLarge { n: 3, limit: 2 })));
    }

    #[test]
    fn envelope_matches_dense() {
        let n = 30;
        let mut a = random_spd(n, 11);
        // Sparsify to a banded matrix that keeps positive definiteness.
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) > 3 {
                    a[i * n + j] = 0.0;
                }
            }
            a[i * n + i] += 20.0;
        }
        let m = SparseSymMatrix::from_dense(n, &a).unwrap();
        let env = EnvelopeCholesky::from_sparse(&m).unwrap();
        assert!(env.envelope_size() <= n * 4);
        let v: Vec<f64> = (0..n).map(|k| 1.0 + k as f64).collect();
        let ze = env.solve(&v).unwrap();
        let zd = dense_cholesky_solve(n, &a, &v).unwrap();
        assert!(ze.iter().zip(&zd).all(|(x, y)| (x - y).abs() < 1e-12 * y.abs().max(1.0)));
    }

    #[test]
    fn handles_meet_their_tolerance() {
        let k = 12;
        let mut t = Vec::new();
        for i in 0..k * k {
            t.push((i, i, 4.5));
            if i % k > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i >= k {
                t.push((i, i - k, -1.0));
            }
        }
        let m = SparseSymMatrix::from_lower_triplets(k * k, t).unwrap();
        let v: Vec<f64> = (0..k * k).map(|i| ((i * 5 % 7) as f64) - 3.0).collect();
        let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let kinds = [
            (SpdSolverKind::DenseCholesky, 1e-12),
            (SpdSolverKind::EnvelopeCholesky, 1e-12),
            (SpdSolverKind::Exact, 1e-12),
            (SpdSolverKind::Ic0Pcg { tol: 1e-6, maxit: 100 }, 1e-6),
            (SpdSolverKind::ic0_pcg_default(), 1e-2),
        ];
        for (kind, tol) in kinds {
            let h = SpdSolverHandle::build(&m, kind).unwrap();
            let z = h.solve(&v).unwrap();
            let r = m.mul_real(&z).unwrap();
            let res = r.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(res <= tol * vn, "{kind:?}: {res}");
        }
        let direct = SpdSolverHandle::build(&m, SpdSolverKind::Ic0Direct).unwrap();
        assert!(!direct.is_exact());
        assert_eq!(direct.ic0_shift(), 0.0);
    }
}
