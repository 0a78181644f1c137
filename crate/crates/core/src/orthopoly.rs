//! Recurrence coefficients for the polynomial preconditioner `s_m`.
//!
//! A family of orthogonal polynomials `q_n` with three-term recurrence
//! `q_{n+1} = (a_n x + b_n) q_n + c_n q_{n-1}` induces the normalised
//! residual polynomials `r_n = q_n / q_n(0)` and the preconditioner
//! polynomials `s_n = (1 - r_{n+1}) / x`, both of which again obey
//! three-term recurrences. The "primed" coefficients of those recurrences
//! are what [`RecurrenceCoeffs`] stores:
//!
//! ```text
//! s_0 = a'_0
//! s_1 = a'_1 x + b'_1
//! s_n = (a'_n x + b'_n) s_{n-1} + c'_n s_{n-2} - a'_n        n >= 2
//! ```
//!
//! Two families are provided in closed form: shifted/scaled Chebyshev
//! polynomials on `[ε, 1]` (minimax residual) and the Jacobi kernel
//! polynomials `p^{0,1}` (least-squares residual on `[0, 1]`). The general
//! transform [`lemma_transform`] computes the same coefficients from any base
//! recurrence and is generic over any field, so it can be run in exact
//! rational arithmetic.

use std::ops::Neg;

use num_complex::Complex;
use num_traits::{FromPrimitive, Num};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Arithmetic needed by the coefficient transforms: a field with integer
/// literals. Implemented by the float types and by exact rationals.
pub trait Field: Clone + Num + Neg<Output = Self> + FromPrimitive {}

impl<F: Clone + Num + Neg<Output = F> + FromPrimitive> Field for F {}

fn int<F: Field>(k: i64) -> F {
    F::from_i64(k).expect("integer literal")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PolyFamily {
    Chebyshev,
    Jacobi,
    /// Produced by [`lemma_transform`] from an arbitrary base recurrence.
    Custom,
}

/// Coefficients of a residual/preconditioner recurrence of degree `m`.
///
/// Every vector has length `m + 1` and is indexed by `n`. Entries that the
/// recurrence does not use (`b_prime[0]`, `c_prime[0]`) are zero.
/// `c_prime[1]` is the coefficient of the `r_2` step of the residual
/// recurrence (`c_1 γ_0 γ_1`); the `s` recurrence starts its three-term part
/// at `n = 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceCoeffs<T> {
    pub family: PolyFamily,
    pub degree: usize,
    pub a_prime: Vec<T>,
    pub b_prime: Vec<T>,
    pub c_prime: Vec<T>,
    /// `γ_n = q_n(0) / q_{n+1}(0)` for `n = 0..=m`.
    pub gamma: Vec<T>,
    /// Lower end of the Chebyshev design interval `[ε, 1]`.
    pub epsilon: Option<T>,
    /// Chebyshev stripe half-width the design was derived from.
    pub delta: Option<T>,
}

impl<T: Clone> RecurrenceCoeffs<T> {
    pub fn a0_prime(&self) -> T {
        self.a_prime[0].clone()
    }

    /// `None` for degree 0.
    pub fn a1_prime(&self) -> Option<T> {
        self.a_prime.get(1).cloned()
    }

    pub fn b1_prime(&self) -> Option<T> {
        self.b_prime.get(1).cloned()
    }
}

/// Base recurrence `q_{n+1} = (a_n x + b_n) q_n + c_n q_{n-1}` with
/// `q_0 = 1`, `q_1 = a_0 x + b_0`. `c[0]` is unused.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseRecurrence<F> {
    pub a: Vec<F>,
    pub b: Vec<F>,
    pub c: Vec<F>,
}

impl<F: Field> BaseRecurrence<F> {
    /// Jacobi polynomials on `[0, 1]` for the weight `(1-x)^α x^β`,
    /// monic normalisation (`a_n = 1`), indices `0..=m`.
    pub fn jacobi(alpha: F, beta: F, m: usize) -> Self {
        let half = F::one() / int(2);
        let mut a = Vec::with_capacity(m + 1);
        let mut b = Vec::with_capacity(m + 1);
        let mut c = Vec::with_capacity(m + 1);
        let ab = alpha.clone() + beta.clone();
        let diff_sq = beta.clone() * beta.clone() - alpha.clone() * alpha.clone();
        for n in 0..=m {
            let nf: F = int(n as i64);
            let two_n_ab = int::<F>(2) * nf.clone() + ab.clone();
            a.push(F::one());
            let ratio = if diff_sq.is_zero() {
                F::zero()
            } else {
                diff_sq.clone() / (two_n_ab.clone() * (two_n_ab.clone() + int(2)))
            };
            b.push(-(half.clone() * (F::one() + ratio)));
            if n == 0 {
                c.push(F::zero());
            } else {
                let num =
                    nf.clone() * (nf.clone() + alpha.clone()) * (nf.clone() + beta.clone()) * (nf.clone() + ab.clone());
                let den =
                    (two_n_ab.clone() - F::one()) * (two_n_ab.clone() + F::one()) * two_n_ab.clone() * two_n_ab.clone();
                c.push(-(num / den));
            }
        }
        BaseRecurrence { a, b, c }
    }

    /// The kernel polynomials `p^{0,1}` behind the Jacobi preconditioner.
    pub fn jacobi_kernel(m: usize) -> Self {
        Self::jacobi(F::zero(), F::one(), m)
    }

    /// Chebyshev polynomials mapped to `[ε, 1]`: `T_1 = a x + b`,
    /// `T_{n+1} = 2(a x + b) T_n - T_{n-1}`.
    pub fn chebyshev(epsilon: F, m: usize) -> Self {
        let one_m = F::one() - epsilon.clone();
        let a0 = int::<F>(2) / one_m.clone();
        let b0 = -((F::one() + epsilon) / one_m);
        let mut a = vec![a0.clone()];
        let mut b = vec![b0.clone()];
        let mut c = vec![F::zero()];
        for _ in 1..=m {
            a.push(int::<F>(2) * a0.clone());
            b.push(int::<F>(2) * b0.clone());
            c.push(-F::one());
        }
        BaseRecurrence { a, b, c }
    }

    /// Highest index `n` for which `a_n, b_n, c_n` are available.
    pub fn max_index(&self) -> usize {
        self.a.len().min(self.b.len()).min(self.c.len()).saturating_sub(1)
    }

    /// `q_k(x)` by running the base recurrence directly.
    pub fn eval(&self, x: F, k: usize) -> F {
        let mut prev = F::one();
        if k == 0 {
            return prev;
        }
        let mut cur = self.a[0].clone() * x.clone() + self.b[0].clone();
        for n in 1..k {
            let next = (self.a[n].clone() * x.clone() + self.b[n].clone()) * cur.clone() + self.c[n].clone() * prev;
            prev = cur;
            cur = next;
        }
        cur
    }
}

/// Primed coefficients of degree `m` from an arbitrary base recurrence.
pub fn lemma_transform<F: Field>(base: &BaseRecurrence<F>, m: usize) -> Result<RecurrenceCoeffs<F>> {
    if base.max_index() < m {
        return Err(Error::InvalidArgument(format!(
            "base recurrence covers n <= {}, degree {m} requested",
            base.max_index()
        )));
    }
    let (a, b, c) = (&base.a, &base.b, &base.c);
    if b[0].is_zero() {
        return Err(Error::DegenerateRecurrence { n: 0 });
    }
    let mut a_prime = vec![-(a[0].clone() / b[0].clone())];
    let mut b_prime = vec![F::zero()];
    let mut c_prime = vec![F::zero()];
    let mut gamma = vec![F::one() / b[0].clone()];
    if m >= 1 {
        let den = b[0].clone() * b[1].clone() + c[1].clone();
        if den.is_zero() {
            return Err(Error::DegenerateRecurrence { n: 1 });
        }
        a_prime.push(-(a[0].clone() * a[1].clone()) / den.clone());
        b_prime.push(-(a[0].clone() * b[1].clone() + a[1].clone() * b[0].clone()) / den.clone());
        let g1 = b[0].clone() / den;
        c_prime.push(c[1].clone() * gamma[0].clone() * g1.clone());
        gamma.push(g1);
    }
    for n in 2..=m {
        let den = b[n].clone() + c[n].clone() * gamma[n - 1].clone();
        if den.is_zero() {
            return Err(Error::DegenerateRecurrence { n });
        }
        let g = F::one() / den;
        a_prime.push(a[n].clone() * g.clone());
        b_prime.push(b[n].clone() * g.clone());
        c_prime.push(c[n].clone() * gamma[n - 1].clone() * g.clone());
        gamma.push(g);
    }
    Ok(RecurrenceCoeffs {
        family: PolyFamily::Custom,
        degree: m,
        a_prime,
        b_prime,
        c_prime,
        gamma,
        epsilon: None,
        delta: None,
    })
}

/// Closed-form Jacobi (least-squares) coefficients of degree `m`.
pub fn closed_jacobi_coeffs<F: Field>(m: usize) -> RecurrenceCoeffs<F> {
    let gamma_at = |n: usize| -> F {
        let n = n as i64;
        int::<F>(-4) + int::<F>(2 * (3 * n + 5)) / int::<F>((n + 2) * (n + 2))
    };
    let gamma: Vec<F> = (0..=m).map(gamma_at).collect();
    let mut a_prime = vec![int::<F>(3) / int(2)];
    let mut b_prime = vec![F::zero()];
    let mut c_prime = vec![F::zero()];
    if m >= 1 {
        a_prime.push(int::<F>(-10) / int(3));
        b_prime.push(int(4));
        c_prime.push(int::<F>(-5) / int(27));
    }
    for n in 2..=m {
        let k = n as i64;
        let delta = int::<F>(2 * (3 * k * k + 6 * k + 2)) / int::<F>((2 * k + 1) * (k + 2) * (k + 2));
        a_prime.push(gamma[n].clone());
        b_prime.push(int::<F>(2) - delta.clone());
        c_prime.push(delta - F::one());
    }
    RecurrenceCoeffs {
        family: PolyFamily::Jacobi,
        degree: m,
        a_prime,
        b_prime,
        c_prime,
        gamma,
        epsilon: None,
        delta: None,
    }
}

/// `ε` such that the degree-`m` Chebyshev residual `T_{m+1}(λ)/T_{m+1}(0)`
/// is bounded by `δ` on `[ε, 1]`.
pub fn cheb_epsilon_from_delta<T: Scalar>(delta: T, m: usize) -> Result<T> {
    if !(delta > T::zero() && delta < T::one()) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    // |c| = exp(L / (m+1)) with L = ln((1 + sqrt(1-δ²))/δ); expm1 keeps |c|-1
    // accurate when m is large.
    let l = ((T::one() + (T::one() - delta * delta).sqrt()) / delta).ln();
    let t = (l / T::from_usize_lossy(m + 1)).exp_m1();
    let ratio = t / (t + T::lit(2.0));
    Ok(ratio * ratio)
}

/// Closed-form Chebyshev coefficients for the interval `[ε, 1]`.
pub fn closed_cheb_coeffs<T: Scalar>(epsilon: T, m: usize) -> Result<RecurrenceCoeffs<T>> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let one = T::one();
    let two = T::lit(2.0);
    let se = epsilon.sqrt();
    let c = (se - one) / (se + one);
    let c2 = c * c;
    // γ_n = (c^n + c^-n)/(c^{n+1} + c^-(n+1)) = c (c^{2n} + 1)/(c^{2n+2} + 1); |c| < 1.
    let mut gamma = Vec::with_capacity(m + 1);
    let mut p = one;
    for _ in 0..=m {
        gamma.push(c * (p + one) / (p * c2 + one));
        p = p * c2;
    }
    let q = epsilon * epsilon + T::lit(6.0) * epsilon + one;
    let mut a_prime = vec![two / (one + epsilon)];
    let mut b_prime = vec![T::zero()];
    let mut c_prime = vec![T::zero()];
    if m >= 1 {
        a_prime.push(T::lit(-8.0) / q);
        b_prime.push(T::lit(8.0) * (one + epsilon) / q);
        c_prime.push(-(gamma[0] * gamma[1]));
    }
    let one_m = one - epsilon;
    for n in 2..=m {
        a_prime.push(T::lit(4.0) * gamma[n] / one_m);
        b_prime.push(-(two * gamma[n] * (one + epsilon) / one_m));
        c_prime.push(-(gamma[n] * gamma[n - 1]));
    }
    Ok(RecurrenceCoeffs {
        family: PolyFamily::Chebyshev,
        degree: m,
        a_prime,
        b_prime,
        c_prime,
        gamma,
        epsilon: Some(epsilon),
        delta: None,
    })
}

/// Chebyshev coefficients designed from the stripe width `δ`.
pub fn cheb_coeffs_from_delta<T: Scalar>(delta: T, m: usize) -> Result<RecurrenceCoeffs<T>> {
    let eps = cheb_epsilon_from_delta(delta, m)?;
    let mut coeffs = closed_cheb_coeffs(eps, m)?;
    coeffs.delta = Some(delta);
    Ok(coeffs)
}

/// `r_{m+1}(λ) = 1 - λ s_m(λ)` through the residual recurrence.
pub fn eval_residual_poly<T: Scalar>(coeffs: &RecurrenceCoeffs<T>, lambda: T) -> T {
    let a = &coeffs.a_prime;
    let r0 = T::one();
    let r1 = T::one() - a[0] * lambda;
    if coeffs.degree == 0 {
        return r1;
    }
    // The r_2 step in terms of the s-coefficients a'_0, a'_1, b'_1.
    let alpha = a[1] / a[0];
    let beta = (alpha + coeffs.b_prime[1]) / a[0];
    let kappa = T::one() - beta;
    let (mut prev, mut cur) = (r1, (alpha * lambda + beta) * r1 + kappa * r0);
    for n in 2..=coeffs.degree {
        let next = (a[n] * lambda + coeffs.b_prime[n]) * cur + coeffs.c_prime[n] * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `s_m(λ)` through the preconditioner recurrence (the scalar version of
/// the matrix recurrence in `polyprecond`).
pub fn eval_preconditioner_poly<T: Scalar>(coeffs: &RecurrenceCoeffs<T>, lambda: T) -> T {
    let a = &coeffs.a_prime;
    let s0 = a[0];
    if coeffs.degree == 0 {
        return s0;
    }
    let (mut prev, mut cur) = (s0, a[1] * lambda + coeffs.b_prime[1]);
    for n in 2..=coeffs.degree {
        let next = (a[n] * lambda + coeffs.b_prime[n]) * cur + coeffs.c_prime[n] * prev - a[n];
        prev = cur;
        cur = next;
    }
    cur
}

/// Both roots of `z² - (a'λ + b') z - c'`, larger magnitude first.
pub fn stability_roots<T: Scalar>(a_p: T, b_p: T, c_p: T, lambda: T) -> (Complex<T>, Complex<T>) {
    let two = T::lit(2.0);
    let p = a_p * lambda + b_p;
    let disc = p * p + T::lit(4.0) * c_p;
    if disc < T::zero() {
        let re = p / two;
        let im = (-disc).sqrt() / two;
        return (Complex::new(re, im), Complex::new(re, -im));
    }
    let sign = if p < T::zero() { -T::one() } else { T::one() };
    let z1 = (p + sign * disc.sqrt()) / two;
    let z2 = if z1 == T::zero() { T::zero() } else { -c_p / z1 };
    (Complex::new(z1, T::zero()), Complex::new(z2, T::zero()))
}

/// Largest root modulus of the step-`n` characteristic polynomial.
pub fn max_root_modulus<T: Scalar>(coeffs: &RecurrenceCoeffs<T>, n: usize, lambda: T) -> T {
    let (z1, z2) = stability_roots(coeffs.a_prime[n], coeffs.b_prime[n], coeffs.c_prime[n], lambda);
    z1.norm().max(z2.norm())
}
