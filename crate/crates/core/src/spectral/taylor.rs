//! Taylor coefficients of the spectral weight around the shifted spectrum.
//!
//! With `g_s(x) = x k(s,x)^2 = s^2 x^3 e^{-2sx}` expanded at `x = 1`, the
//! single-scale representation of a normalized Laplacian becomes a matrix
//! polynomial in `L - I`, whose spectrum lies in `[-1, 1]`. The coefficients
//! `c_n = g_s^{(n)}(1) / n!` follow from an exact polynomial-times-exponential
//! recurrence; numerically differentiating to order 30 would be hopeless.

use crate::error::{Error, Result};
use crate::scalar::{count, cst, Scalar};
use crate::spectral::Kernel;
use serde::{Deserialize, Serialize};

/// Coefficients `c_0 .. c_K` of the degree-`K` expansion at one scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorCoefficients<F> {
    pub scale: F,
    pub order: usize,
    pub coeffs: Vec<F>,
}

/// Evaluates a polynomial (coefficients by ascending power) at `x = 1`.
fn poly_at_one<F: Scalar>(coeffs: &[F]) -> F {
    coeffs.iter().copied().sum()
}

/// `d/dx` of a coefficient vector.
fn poly_derivative<F: Scalar>(coeffs: &[F]) -> Vec<F> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| count::<F>(i) * *c)
        .collect()
}

/// Runs the recurrence `q_{n+1} = (q_n' - 2 s q_n) / (n + 1)` starting from
/// `q_0`, yielding `q_n(1) e^{-2s}` for `n = 0 ..= order`. Writing the n-th
/// derivative of `p(x) e^{-2sx}` as `p_n(x) e^{-2sx}` gives `p_{n+1} =
/// p_n' - 2 s p_n`; dividing by `n!` as we go keeps the terms bounded.
fn exponential_taylor<F: Scalar>(q0: Vec<F>, s: F, order: usize) -> Vec<F> {
    let damp = (-(s + s)).exp();
    let two_s = s + s;
    let mut q = q0;
    let mut coeffs = Vec::with_capacity(order + 1);
    for n in 0..=order {
        coeffs.push(poly_at_one(&q) * damp);
        if n == order {
            break;
        }
        let deriv = poly_derivative(&q);
        let inv = count::<F>(n + 1).recip();
        let mut next = vec![F::zero(); q.len()];
        for (i, d) in deriv.iter().enumerate() {
            next[i] = *d;
        }
        for (i, c) in q.iter().enumerate() {
            next[i] = (next[i] - two_s * *c) * inv;
        }
        q = next;
    }
    coeffs
}

/// Coefficients of `g_s` expanded at `x = 1`: `c_n = g_s^{(n)}(1) / n!`.
pub fn taylor_coefficients<F: Scalar>(
    kernel: Kernel,
    s: F,
    order: usize,
) -> Result<TaylorCoefficients<F>> {
    if !(s > F::zero()) {
        return Err(Error::invalid(format!("taylor scale {s} must be positive")));
    }
    let coeffs = match kernel {
        // g_s(x) = s^2 x^3 e^{-2sx}
        Kernel::SxExp => exponential_taylor(vec![F::zero(), F::zero(), F::zero(), s * s], s, order),
    };
    Ok(TaylorCoefficients {
        scale: s,
        order,
        coeffs,
    })
}

/// Coefficients of `d g_s / d s` expanded at `x = 1`, i.e. `d c_n / d s`.
///
/// Differentiating term-by-term keeps the truncated series and its scale
/// gradient exactly consistent, which the backward pass relies on when the
/// fast transform is in use.
pub fn taylor_scale_derivative<F: Scalar>(
    kernel: Kernel,
    s: F,
    order: usize,
) -> Result<TaylorCoefficients<F>> {
    if !(s > F::zero()) {
        return Err(Error::invalid(format!("taylor scale {s} must be positive")));
    }
    let coeffs = match kernel {
        // d g_s / d s = (2 s x^3 - 2 s^2 x^4) e^{-2sx}
        Kernel::SxExp => exponential_taylor(
            vec![
                F::zero(),
                F::zero(),
                F::zero(),
                s + s,
                -(cst::<F>(2.0) * s * s),
            ],
            s,
            order,
        ),
    };
    Ok(TaylorCoefficients {
        scale: s,
        order,
        coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: f64, x: f64) -> f64 {
        s * s * x * x * x * (-2.0 * s * x).exp()
    }

    #[test]
    fn zeroth_coefficient_is_g_at_one() {
        for s in [0.3, 1.0, 2.5] {
            let tc = taylor_coefficients::<f64>(Kernel::SxExp, s, 0).unwrap();
            let expected = s * s * (-2.0 * s).exp();
            assert!((tc.coeffs[0] - expected).abs() <= 1e-15 * expected.abs());
        }
    }

    #[test]
    fn first_two_coefficients_at_unit_scale() {
        // c_0 = e^{-2}; p_1(x) = 3x^2 - 2x^3 so c_1 = (3 - 2) e^{-2} = e^{-2}.
        let tc = taylor_coefficients::<f64>(Kernel::SxExp, 1.0, 1).unwrap();
        let e2 = (-2.0f64).exp();
        assert!((tc.coeffs[0] - e2).abs() < 1e-16);
        assert!((tc.coeffs[1] - e2).abs() < 1e-15);
    }

    #[test]
    fn partial_sums_reproduce_g_on_the_shifted_interval() {
        // The series evaluated at 1 + t must match g(s, 1 + t) for |t| <= 1.
        for s in [0.4, 1.0, 2.0] {
            let tc = taylor_coefficients::<f64>(Kernel::SxExp, s, 45).unwrap();
            for t in [-1.0, -0.5, 0.0, 0.3, 0.9, 1.0] {
                let mut acc = 0.0;
                let mut power = 1.0;
                for c in &tc.coeffs {
                    acc += c * power;
                    power *= t;
                }
                let expected = g(s, 1.0 + t);
                assert!(
                    (acc - expected).abs() <= 1e-10 * expected.abs().max(1e-3),
                    "s={s} t={t}: series {acc} vs g {expected}"
                );
            }
        }
    }

    #[test]
    fn scale_derivative_matches_difference_quotient_of_coefficients() {
        let s = 0.8;
        let h = 1e-6;
        let base = taylor_scale_derivative::<f64>(Kernel::SxExp, s, 12).unwrap();
        let plus = taylor_coefficients::<f64>(Kernel::SxExp, s + h, 12).unwrap();
        let minus = taylor_coefficients::<f64>(Kernel::SxExp, s - h, 12).unwrap();
        for n in 0..=12 {
            let fd = (plus.coeffs[n] - minus.coeffs[n]) / (2.0 * h);
            let scale = base.coeffs[n].abs().max(fd.abs()).max(1e-9);
            assert!(
                (base.coeffs[n] - fd).abs() / scale <= 1e-4,
                "n={n}: analytic {} vs fd {fd}",
                base.coeffs[n]
            );
        }
    }

    #[test]
    fn nonpositive_scale_rejected() {
        assert!(taylor_coefficients::<f64>(Kernel::SxExp, 0.0, 3).is_err());
        assert!(taylor_scale_derivative::<f64>(Kernel::SxExp, -1.0, 3).is_err());
    }
}
