//! Parametric band-pass kernels and the admissibility check.

use crate::error::{Error, Result};
use crate::scalar::{cst, Scalar};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Kernel family evaluated at a scaled spectral argument.
///
/// The default (and currently only) family is `k_s(x) = s x e^{-s x}`: zero
/// at the origin, a single maximum of `1/e` at `x = 1/s`, and exponential
/// decay, so each scale selects one band of the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Kernel {
    #[default]
    #[serde(rename = "sx-exp")]
    SxExp,
}

impl Kernel {
    /// `k(s, x)`.
    #[inline]
    pub fn eval<F: Scalar>(self, s: F, x: F) -> F {
        debug_assert!(s > F::zero(), "kernel scale must be positive");
        match self {
            Kernel::SxExp => s * x * (-s * x).exp(),
        }
    }

    /// Spectral weight of the single-scale representation: `x * k(s, x)^2`.
    #[inline]
    pub fn spectral_weight<F: Scalar>(self, s: F, x: F) -> F {
        match self {
            Kernel::SxExp => {
                let sx = s * x;
                s * s * x * x * x * (-(sx + sx)).exp()
            }
        }
    }

    /// `d/ds [x * k(s, x)^2] = 2 s x^3 e^{-2 s x} (1 - s x)`.
    #[inline]
    pub fn spectral_weight_dscale<F: Scalar>(self, s: F, x: F) -> F {
        match self {
            Kernel::SxExp => {
                let sx = s * x;
                cst::<F>(2.0) * s * x * x * x * (-(sx + sx)).exp() * (F::one() - sx)
            }
        }
    }

    /// The kernel at unit scale, as used in the admissibility integral.
    #[inline]
    pub fn unit_scale<F: Scalar>(self, x: F) -> F {
        self.eval(F::one(), x)
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::SxExp => write!(f, "sx-exp"),
        }
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sx-exp" | "sx*exp(-sx)" | "default" => Ok(Kernel::SxExp),
            other => Err(Error::invalid(format!("unknown kernel family '{other}'"))),
        }
    }
}

/// Checked kernel evaluation: rejects a nonpositive scale.
pub fn kernel_eval<F: Scalar>(kernel: Kernel, s: F, x: F) -> Result<F> {
    if !(s > F::zero()) {
        return Err(Error::invalid(format!("kernel scale {s} must be positive")));
    }
    if x < F::zero() {
        return Err(Error::invalid(format!(
            "kernel argument {x} must be nonnegative"
        )));
    }
    Ok(kernel.eval(s, x))
}

/// Partial sums above this value flag the integral as divergent.
pub const ADMISSIBILITY_CAP: f64 = 1e6;

/// Numerically evaluates `C_k = \int_0^inf k(x)^2 / x dx` for an arbitrary
/// kernel function.
///
/// Substituting `x = e^u` turns the integral into `\int k(e^u)^2 du`, which
/// the trapezoidal rule resolves to near machine precision for kernels that
/// vanish at the origin. Divergence is detected by widening the lower
/// integration window: a kernel with `k(0) != 0` keeps accumulating mass as
/// the window grows.
pub fn admissibility_integral<F: Scalar>(k: impl Fn(F) -> F, cap: F) -> Result<F> {
    let h = cst::<F>(0.05);
    let upper = cst::<F>(12.0);
    let integrate = |lo: F| -> F {
        let steps = ((upper - lo) / h).to_usize().unwrap_or(0);
        let mut sum = F::zero();
        let half = cst::<F>(0.5);
        let mut prev = {
            let v = k(lo.exp());
            v * v
        };
        for i in 1..=steps {
            let u = lo + h * cst::<F>(i as f64);
            let v = k(u.exp());
            let cur = v * v;
            sum += half * h * (prev + cur);
            prev = cur;
        }
        sum
    };

    let narrow = integrate(cst::<F>(-20.0));
    let wide = integrate(cst::<F>(-40.0));
    let drift = (wide - narrow).abs();
    let tol = cst::<F>(1e-10) * F::one().max(wide.abs());
    if !wide.is_finite() || wide > cap || drift > tol {
        return Err(Error::numerical(format!(
            "admissibility integral diverges (window drift {drift}, value {wide})"
        )));
    }
    Ok(wide)
}

/// `C_k` for a kernel family, computed by quadrature at unit scale.
///
/// The integral is invariant under `u = s x`, so unit scale represents every
/// scale. For the default family the closed form is `\int x e^{-2x} dx = 1/4`.
pub fn admissibility_constant<F: Scalar>(kernel: Kernel) -> Result<F> {
    admissibility_integral(|x| kernel.unit_scale(x), cst::<F>(ADMISSIBILITY_CAP))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_pass_at_origin() {
        assert_eq!(Kernel::SxExp.eval(1.0, 0.0), 0.0);
    }

    #[test]
    fn maximum_at_one_over_s() {
        // k(1, 1) = e^{-1}, and k(2, 0.5) = 2 * 0.5 * e^{-1} = e^{-1} too.
        let e_inv = (-1.0f64).exp();
        assert!((Kernel::SxExp.eval(1.0, 1.0) - e_inv).abs() < 1e-15);
        assert!((Kernel::SxExp.eval(2.0, 0.5) - e_inv).abs() < 1e-15);
    }

    #[test]
    fn decays_at_infinity() {
        assert!(Kernel::SxExp.eval(1.0, 500.0) < 1e-200);
    }

    #[test]
    fn checked_eval_rejects_bad_scale() {
        assert!(kernel_eval::<f64>(Kernel::SxExp, 0.0, 1.0).is_err());
        assert!(kernel_eval::<f64>(Kernel::SxExp, -1.0, 1.0).is_err());
        assert!(kernel_eval::<f64>(Kernel::SxExp, 1.0, -0.1).is_err());
    }

    #[test]
    fn admissibility_matches_closed_form() {
        // Closed form: \int_0^inf x e^{-2x} dx = 1/4.
        let ck: f64 = admissibility_constant(Kernel::SxExp).unwrap();
        assert!((ck - 0.25).abs() <= 1e-9, "C_k = {ck}");
    }

    #[test]
    fn admissibility_is_scale_invariant() {
        for s in [0.5f64, 2.0, 7.0] {
            let ck = admissibility_integral(|x| Kernel::SxExp.eval(s, x), 1e6).unwrap();
            assert!((ck - 0.25).abs() <= 1e-8, "s = {s}: C_k = {ck}");
        }
    }

    #[test]
    fn nonvanishing_kernel_flagged_divergent() {
        // k(0) = 1 makes k(x)^2 / x non-integrable at the origin.
        let err = admissibility_integral(|x: f64| (-x).exp(), 1e6);
        assert!(err.is_err());
    }

    #[test]
    fn kernel_parses_from_config_strings() {
        assert_eq!("sx-exp".parse::<Kernel>().unwrap(), Kernel::SxExp);
        assert!("mexican-hat".parse::<Kernel>().is_err());
    }
}
