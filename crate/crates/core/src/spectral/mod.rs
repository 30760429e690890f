//! Band-pass kernels and the multi-resolution matrix transform.
//!
//! A Laplacian `L = U Lambda U^T` is re-weighted in its own eigenbasis: the
//! basis at scale `s` is `Psi_s = U k(s Lambda) U^T`, the coefficient matrix
//! is `U k(s Lambda) Lambda U^T`, and projecting coefficients onto the basis
//! gives the single-scale representation `L_s = U k(s Lambda)^2 Lambda U^T`.
//! Integrating `L_s / s` over all scales recovers `L` up to the kernel's
//! admissibility constant, which is what makes the family a proper transform
//! rather than an arbitrary filter bank.

mod kernel;
mod taylor;
mod transform;

pub use kernel::{admissibility_constant, admissibility_integral, kernel_eval, Kernel};
pub use taylor::{taylor_coefficients, taylor_scale_derivative, TaylorCoefficients};
pub use transform::{
    dls_dscale, dls_dscale_approx, multiresolution_map, reconstruct, reconstruction_grid,
    transform_approx, transform_exact, wavelet_basis, MultiResolutionMap, WaveletBasis,
};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Strictly positive spectral scales, in user-specified order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSet<F> {
    scales: Vec<F>,
}

impl<F: Scalar> ScaleSet<F> {
    pub fn new(scales: Vec<F>) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::invalid("scale set must contain at least one scale"));
        }
        for (i, s) in scales.iter().enumerate() {
            if !(*s > F::zero()) || !s.is_finite() {
                return Err(Error::invalid(format!(
                    "scale {i} = {s} must be finite and positive"
                )));
            }
        }
        Ok(ScaleSet { scales })
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn values(&self) -> &[F] {
        &self.scales
    }

    pub fn values_mut(&mut self) -> &mut [F] {
        &mut self.scales
    }

    pub fn iter(&self) -> impl Iterator<Item = &F> {
        self.scales.iter()
    }
}
