//! Test problems: file pairs padded to a common size, and seeded synthetic
//! stand-ins.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexSymSystem, ComplexVector, SparseSymMatrix};
use crate::scalar::Scalar;

/// Embeds the smaller matrix top-left in a zero matrix of the larger size
/// and sets the right-hand side to `(1+i)𝟙`.
pub fn pair_and_pad<T: Scalar>(b: SparseSymMatrix<T>, c: SparseSymMatrix<T>) -> Result<ComplexSymSystem<T>> {
    let n = b.n().max(c.n());
    let (b, c) = (b.pad_to(n)?, c.pad_to(n)?);
    ComplexSymSystem::new(b, c, ComplexVector::ones_complex(n))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticKind {
    /// `B` is the 5-point Laplacian on a `k×k` grid (`n = k²`), `C` a
    /// positive diagonal of size about `10h²`, `h = 1/(k+1)`.
    Laplacian2d,
    /// Diagonal `B` and `C` whose sum has the equispaced eigenvalues
    /// `ε, …, 1`. Already equilibrated in spirit: run it unscaled, since
    /// diagonal scaling would map every eigenvalue to one.
    DiagSpectrum { epsilon: f64 },
}

pub fn synthetic_problem<T: Scalar>(kind: SyntheticKind, n: usize, seed: u64) -> Result<ComplexSymSystem<T>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("synthetic problems need n >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        SyntheticKind::Laplacian2d => {
            let k = (n as f64).sqrt().round() as usize;
            if k * k != n {
                return Err(Error::InvalidArgument(format!("laplacian2d needs a square n, got {n}")));
            }
            let b = laplacian_2d(k)?;
            let h = 1.0 / (k as f64 + 1.0);
            let d: Vec<T> = (0..n).map(|_| T::lit(10.0 * h * h * rng.random_range(0.5..1.5))).collect();
            ComplexSymSystem::new(b, SparseSymMatrix::from_diagonal(&d)?, ComplexVector::ones_complex(n))
        }
        SyntheticKind::DiagSpectrum { epsilon } => {
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")));
            }
            let mut db = Vec::with_capacity(n);
            let mut dc = Vec::with_capacity(n);
            for i in 0..n {
                let lambda = epsilon + (1.0 - epsilon) * i as f64 / (n - 1) as f64;
                let theta: f64 = rng.random_range(0.0..=1.0);
                let bi = theta * lambda;
                db.push(T::lit(bi));
                dc.push(T::lit(lambda) - T::lit(bi));
            }
            ComplexSymSystem::new(
                SparseSymMatrix::from_diagonal(&db)?,
                SparseSymMatrix::from_diagonal(&dc)?,
                ComplexVector::ones_complex(n),
            )
        }
    }
}

/// 5-point Laplacian with Dirichlet boundary on a `k×k` grid, unscaled
/// (4 on the diagonal, -1 for each neighbour).
pub fn laplacian_2d<T: Scalar>(k: usize) -> Result<SparseSymMatrix<T>> {
    let mut t = Vec::with_capacity(3 * k * k);
    for i in 0..k {
        for j in 0..k {
            let p = i * k + j;
            t.push((p, p, T::lit(4.0)));
            if j > 0 {
                t.push((p, p - 1, T::lit(-1.0)));
            }
            if i > 0 {
                t.push((p, p - k, T::lit(-1.0)));
            }
        }
    }
    SparseSymMatrix::from_lower_triplets(k * k, t)
}
