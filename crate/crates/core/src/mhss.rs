//! The MHSS splitting with `α = β = 1`: the one-step preconditioner
//! `P = (1+i)(B+C)`, the stationary iteration built on it, and closed-form
//! diagnostics for its convergence.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::innersolve::{DenseCholesky, SpdSolverHandle};
use crate::krylov::{Recorder, SolveReport, SolveStatus, SolverOptions};
use crate::linalg::{ComplexOperator, ComplexSymSystem, ComplexVector};
use crate::scalar::Scalar;

/// `h = P⁻¹ r = M⁻¹ ((1-i)/2 · r)` as two real solves with `M`.
pub fn mhss_apply_exact<T: Scalar>(solve_m: &SpdSolverHandle<T>, r: &ComplexVector<T>) -> Result<ComplexVector<T>> {
    check_dim(solve_m.n(), r.len())?;
    let half = T::lit(0.5);
    let wr: Vec<T> = r.re.iter().zip(&r.im).map(|(&x, &y)| (x + y) * half).collect();
    let wi: Vec<T> = r.re.iter().zip(&r.im).map(|(&x, &y)| (y - x) * half).collect();
    let hr = solve_m.solve(&wr).map_err(|e| Error::InnerSolve(format!("real part: {e}")))?;
    let hi = solve_m.solve(&wi).map_err(|e| Error::InnerSolve(format!("imaginary part: {e}")))?;
    Ok(ComplexVector { re: hr, im: hi })
}

/// Stationary MHSS iteration `x ← x + P⁻¹(b - A x)` from `x = 0`, with the
/// residual recomputed from the original right-hand side at every step.
pub fn mhss_solve<T: Scalar>(
    sys: &ComplexSymSystem<T>,
    solve_m: &SpdSolverHandle<T>,
    opts: &SolverOptions,
) -> Result<(ComplexVector<T>, SolveReport)> {
    opts.validate()?;
    check_dim(sys.n(), solve_m.n())?;
    let b = sys.rhs();
    let n = sys.n();
    let bnorm = b.norm2();
    let mut rec = Recorder::new(bnorm.to_f64_lossy());
    let stop = T::lit(opts.tol) * bnorm;
    let mut x = ComplexVector::zeros(n);
    let mut r = b.clone();
    let mut ax = ComplexVector::zeros(n);
    rec.push(bnorm.to_f64_lossy());
    if bnorm <= stop {
        return Ok((x, rec.finish(SolveStatus::Converged)));
    }
    for _ in 0..opts.maxit {
        let h = mhss_apply_exact(solve_m, &r)?;
        rec.precs += 1;
        x.axpy(Complex::new(T::one(), T::zero()), &h);
        sys.apply_into(&x, &mut ax);
        rec.matvecs += 1;
        r = b.sub(&ax)?;
        let rnorm = r.norm2();
        rec.push(rnorm.to_f64_lossy());
        if !rnorm.is_finite() {
            return Ok((x, rec.finish(SolveStatus::NumericalFailure)));
        }
        if rnorm <= stop {
            return Ok((x, rec.finish(SolveStatus::Converged)));
        }
    }
    Ok((x, rec.finish(SolveStatus::NotConverged)))
}

/// `U(α, β) = √(1+β²)/(1+α) · max(1, α/β)`, the bound on the spectral radius
/// of the two-parameter iteration with `V = αM`, `W = βM`.
pub fn upper_bound_u(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha >= 0.0) || !(beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("need alpha >= 0 and beta > 0, got ({alpha}, {beta})")));
    }
    Ok((1.0 + beta * beta).sqrt() / (1.0 + alpha) * (alpha / beta).max(1.0))
}

/// `(1 + 0.8ⁿ)/(1 - 0.8ⁿ)`, the condition estimate after `n` MHSS steps.
/// Evaluated as `(5ⁿ + 4ⁿ)/(5ⁿ - 4ⁿ)` while the powers are exact integers.
pub fn kappa_bound(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("kappa_bound needs n >= 1".into()));
    }
    if n <= 22 {
        let (p5, p4) = (5f64.powi(n as i32), 4f64.powi(n as i32));
        return Ok((p5 + p4) / (p5 - p4));
    }
    let q = 0.8f64.powi(n as i32);
    Ok((1.0 + q) / (1.0 - q))
}

/// Critical relative cost below which `n` MHSS steps per application beat
/// `n - 1`, with contraction factor `a = 0.8`:
/// `C(n) = -aⁿ ln a / (n aⁿ ln a - a²ⁿ + 1)`.
pub fn cost_model_c(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("cost_model_c needs n >= 1".into()));
    }
    let a: f64 = 0.8;
    let an = a.powi(n as i32);
    let la = a.ln();
    Ok(-an * la / (n as f64 * an * la - an * an + 1.0))
}

/// Settings for [`spectral_radius_pq_with`].
#[derive(Clone, Copy, Debug)]
pub struct PowerIteration {
    pub restarts: usize,
    pub steps: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration { restarts: 20, steps: 500, tol: 1e-10, seed: 0x5eed }
    }
}

/// Spectral radius of `P⁻¹Q` with `P = (1+i)(B+C)`, `Q = C + iB`, for dense
/// row-major `B` and `C` of order `n`.
pub fn spectral_radius_pq(n: usize, b: &[f64], c: &[f64]) -> Result<f64> {
    spectral_radius_pq_with(n, b, c, &PowerIteration::default())
}

/// Power iteration on `T = P⁻¹Q` with random restarts, normalized in the
/// `M`-energy norm, `M = B + C`. In that inner product `T` is normal (it is
/// a polynomial in `M^{-1/2} C M^{-1/2}`), so the growth ratio converges
/// to the spectral radius even when several eigenvalues share the largest
/// modulus.
pub fn spectral_radius_pq_with(n: usize, b: &[f64], c: &[f64], cfg: &PowerIteration) -> Result<f64> {
    check_dim(n * n, b.len())?;
    check_dim(n * n, c.len())?;
    let m: Vec<f64> = b.iter().zip(c).map(|(x, y)| x + y).collect();
    let chol = DenseCholesky::factor_with_limit(n, &m, usize::MAX)?;
    let matvec =
        |a: &[f64], x: &[f64]| -> Vec<f64> { (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect() };
    let m_norm = |vr: &[f64], vi: &[f64]| -> f64 {
        let (mr, mi) = (matvec(&m, vr), matvec(&m, vi));
        let s: f64 = (0..n).map(|k| vr[k] * mr[k] + vi[k] * mi[k]).sum();
        s.max(0.0).sqrt()
    };
    let apply = |vr: &[f64], vi: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        let (cr, ci, br, bi) = (matvec(c, vr), matvec(c, vi), matvec(b, vr), matvec(b, vi));
        let ur: Vec<f64> = (0..n).map(|k| cr[k] - bi[k]).collect();
        let ui: Vec<f64> = (0..n).map(|k| ci[k] + br[k]).collect();
        let wr: Vec<f64> = (0..n).map(|k| 0.5 * (ur[k] + ui[k])).collect();
        let wi: Vec<f64> = (0..n).map(|k| 0.5 * (ui[k] - ur[k])).collect();
        Ok((chol.solve(&wr)?, chol.solve(&wi)?))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: f64 = 0.0;
    for _ in 0..cfg.restarts {
        let mut vr: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut vi: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nrm = m_norm(&vr, &vi);
        if nrm == 0.0 {
            continue;
        }
        vr.iter_mut().chain(vi.iter_mut()).for_each(|x| *x /= nrm);
        let mut est: f64 = 0.0;
        for _ in 0..cfg.steps {
            let (wr, wi) = apply(&vr, &vi)?;
            let g = m_norm(&wr, &wi);
            if g == 0.0 {
                est = 0.0;
                break;
            }
            vr = wr.into_iter().map(|x| x / g).collect();
            vi = wi.into_iter().map(|x| x / g).collect();
            let done = (g - est).abs() <= cfg.tol * g;
            est = g;
            if done {
                break;
            }
        }
        best = best.max(est);
    }
    Ok(best)
}
