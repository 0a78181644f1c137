//! Application of `s_m(M)` to vectors by the three-term matrix recurrence,
//! and the polynomial approximation `P⁻¹ ≈ (1 - i)/2 · s_m(M)`.

use num_complex::Complex;
use twofloat::TwoFloat;

use crate::error::{check_dim, Result};
use crate::linalg::{ComplexVector, SparseSymMatrix};
use crate::orthopoly::{closed_cheb_coeffs, closed_jacobi_coeffs, PolyFamily, RecurrenceCoeffs};
use crate::scalar::Scalar;

/// `v^(m) = s_m(M) v`.
///
/// Runs `v^(0) = a'_0 v`, `v^(1) = a'_1 M v + b'_1 v` and
/// `v^(n) = a'_n (M v^(n-1) - v) + b'_n v^(n-1) + c'_n v^(n-2)`, holding only
/// two iterates and one product buffer. The real and imaginary parts go
/// through the same row sweep. Uses `m` products with `M`.
pub fn apply_sm<T: Scalar>(
    m: &SparseSymMatrix<T>,
    coeffs: &RecurrenceCoeffs<T>,
    v: &ComplexVector<T>,
) -> Result<ComplexVector<T>> {
    check_dim(m.n(), v.len())?;
    let n = v.len();
    let a = &coeffs.a_prime;
    let mut cur = v.scale(Complex::new(a[0], T::zero()));
    if coeffs.degree == 0 {
        return Ok(cur);
    }
    let mut prod = ComplexVector::zeros(n);
    m.mul_pair_into(&v.re, &v.im, &mut prod.re, &mut prod.im);
    let mut prev = cur;
    cur = ComplexVector::zeros(n);
    let (a1, b1) = (a[1], coeffs.b_prime[1]);
    for k in 0..n {
        cur.re[k] = a1 * prod.re[k] + b1 * v.re[k];
        cur.im[k] = a1 * prod.im[k] + b1 * v.im[k];
    }
    for step in 2..=coeffs.degree {
        let (an, bn, cn) = (a[step], coeffs.b_prime[step], coeffs.c_prime[step]);
        m.mul_pair_into(&cur.re, &cur.im, &mut prod.re, &mut prod.im);
        for k in 0..n {
            prev.re[k] = an * (prod.re[k] - v.re[k]) + bn * cur.re[k] + cn * prev.re[k];
            prev.im[k] = an * (prod.im[k] - v.im[k]) + bn * cur.im[k] + cn * prev.im[k];
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(cur)
}

/// `(1 - i)/2 · s_m(M) r`, the polynomial stand-in for `((1+i) M)⁻¹ r`.
/// `M` must already be scaled so that its spectrum lies in `(0, 1]`.
pub fn apply_polynomial_p_inverse<T: Scalar>(
    m_scaled: &SparseSymMatrix<T>,
    coeffs: &RecurrenceCoeffs<T>,
    r: &ComplexVector<T>,
) -> Result<ComplexVector<T>> {
    let y = apply_sm(m_scaled, coeffs, r)?;
    let half = T::lit(0.5);
    Ok(y.scale(Complex::new(half, -half)))
}

/// Precision used for the reference side of [`error_growth_probe`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferencePrecision {
    F64,
    /// About 106 significant bits.
    DoubleDouble,
}

/// Max-norm distance between `s_m(M) v` evaluated in `T` and in a higher
/// reference precision. Coefficients for the reference run are regenerated
/// in that precision from the family's closed form.
pub fn error_growth_probe<T: Scalar>(
    m: &SparseSymMatrix<T>,
    coeffs: &RecurrenceCoeffs<T>,
    v: &ComplexVector<T>,
    reference: ReferencePrecision,
) -> Result<f64> {
    let working = apply_sm(m, coeffs, v)?;
    let reference: ComplexVector<f64> = match reference {
        ReferencePrecision::F64 => reference_run::<T, f64>(m, coeffs, v)?,
        ReferencePrecision::DoubleDouble => reference_run::<T, TwoFloat>(m, coeffs, v)?.cast(),
    };
    let diff = working.cast::<f64>().sub(&reference)?;
    Ok(diff.re.iter().chain(&diff.im).fold(0.0, |acc: f64, d| acc.max(d.abs())))
}

fn reference_run<T: Scalar, U: Scalar>(
    m: &SparseSymMatrix<T>,
    coeffs: &RecurrenceCoeffs<T>,
    v: &ComplexVector<T>,
) -> Result<ComplexVector<U>> {
    let hi_coeffs = match coeffs.family {
        PolyFamily::Jacobi => closed_jacobi_coeffs::<U>(coeffs.degree),
        PolyFamily::Chebyshev if coeffs.epsilon.is_some() => {
            let eps = U::lit(coeffs.epsilon.unwrap().to_f64_lossy());
            closed_cheb_coeffs::<U>(eps, coeffs.degree)?
        }
        _ => cast_coeffs(coeffs),
    };
    apply_sm(&m.cast::<U>(), &hi_coeffs, &v.cast::<U>())
}

fn cast_coeffs<T: Scalar, U: Scalar>(c: &RecurrenceCoeffs<T>) -> RecurrenceCoeffs<U> {
    let cv = |v: &Vec<T>| v.iter().map(|&x| U::lit(x.to_f64_lossy())).collect();
    RecurrenceCoeffs {
        family: c.family,
        degree: c.degree,
        a_prime: cv(&c.a_prime),
        b_prime: cv(&c.b_prime),
        c_prime: cv(&c.c_prime),
        gamma: cv(&c.gamma),
        epsilon: c.epsilon.map(|e| U::lit(e.to_f64_lossy())),
        delta: c.delta.map(|d| U::lit(d.to_f64_lossy())),
    }
}
