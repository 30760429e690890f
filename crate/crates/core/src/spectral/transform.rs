//! The multi-resolution transform, its inverse, and the fast approximation.

use crate::eigen::EigenSystem;
use crate::error::{Error, Result};
use crate::graph::GraphLaplacian;
use crate::matrix::DenseMatrix;
use crate::scalar::{cst, Scalar};
use crate::spectral::kernel::{admissibility_constant, Kernel};
use crate::spectral::taylor::{taylor_coefficients, taylor_scale_derivative, TaylorCoefficients};
use crate::spectral::ScaleSet;
use serde::{Deserialize, Serialize};

/// Basis matrix `Psi_s = U k(s Lambda) U^T` at one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletBasis<F> {
    pub scale: F,
    pub matrix: DenseMatrix<F>,
}

/// The `|s| x N x N` feature tensor: one single-scale representation per
/// scale, in scale-set order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiResolutionMap<F> {
    n: usize,
    slices: Vec<DenseMatrix<F>>,
}

impl<F: Scalar> MultiResolutionMap<F> {
    pub fn from_slices(slices: Vec<DenseMatrix<F>>) -> Self {
        assert!(!slices.is_empty());
        let n = slices[0].rows();
        assert!(slices.iter().all(|s| s.rows() == n && s.cols() == n));
        MultiResolutionMap { n, slices }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scale_count(&self) -> usize {
        self.slices.len()
    }

    pub fn slice(&self, s: usize) -> &DenseMatrix<F> {
        &self.slices[s]
    }

    pub fn slices(&self) -> &[DenseMatrix<F>] {
        &self.slices
    }

    /// Flattens scale-major, then row-major within each slice; this fixed
    /// order is the contract between the feature map and the first layer.
    pub fn flatten(&self) -> Vec<F> {
        let mut out = Vec::with_capacity(self.slices.len() * self.n * self.n);
        for slice in &self.slices {
            out.extend_from_slice(slice.data());
        }
        out
    }
}

/// Builds `sum_l w_l u_l u_l^T` over the upper triangle and mirrors it, so
/// the result is bitwise symmetric and invariant to eigenvector sign flips.
fn spectral_conjugate<F: Scalar>(eig: &EigenSystem<F>, weights: &[F]) -> DenseMatrix<F> {
    let n = eig.n();
    let u = eig.eigenvectors();
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = F::zero();
            for (l, w) in weights.iter().enumerate() {
                if *w == F::zero() {
                    continue;
                }
                acc += *w * (u[(i, l)] * u[(j, l)]);
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc;
        }
    }
    out
}

/// `Psi_s = U k(s Lambda) U^T`.
pub fn wavelet_basis<F: Scalar>(eig: &EigenSystem<F>, kernel: Kernel, s: F) -> WaveletBasis<F> {
    let weights: Vec<F> = eig
        .eigenvalues()
        .iter()
        .map(|lam| kernel.eval(s, *lam))
        .collect();
    WaveletBasis {
        scale: s,
        matrix: spectral_conjugate(eig, &weights),
    }
}

/// Single-scale representation `L_s = U k(s Lambda)^2 Lambda U^T`.
pub fn transform_exact<F: Scalar>(eig: &EigenSystem<F>, kernel: Kernel, s: F) -> DenseMatrix<F> {
    let weights: Vec<F> = eig
        .eigenvalues()
        .iter()
        .map(|lam| kernel.spectral_weight(s, *lam))
        .collect();
    spectral_conjugate(eig, &weights)
}

/// `d L_s / d s`, the analytic scale derivative of [`transform_exact`].
pub fn dls_dscale<F: Scalar>(eig: &EigenSystem<F>, kernel: Kernel, s: F) -> DenseMatrix<F> {
    let weights: Vec<F> = eig
        .eigenvalues()
        .iter()
        .map(|lam| kernel.spectral_weight_dscale(s, *lam))
        .collect();
    spectral_conjugate(eig, &weights)
}

/// Stacks [`transform_exact`] over every scale, in scale-set order.
pub fn multiresolution_map<F: Scalar>(
    eig: &EigenSystem<F>,
    kernel: Kernel,
    scales: &ScaleSet<F>,
) -> MultiResolutionMap<F> {
    let slices = scales
        .iter()
        .map(|s| transform_exact(eig, kernel, *s))
        .collect();
    MultiResolutionMap::from_slices(slices)
}

/// Default log-spaced quadrature grid spanning `[1e-3 / lambda_max,
/// 1e3 / lambda_min_pos]`, which covers the kernel's response band for every
/// eigenvalue in the spectrum.
pub fn reconstruction_grid<F: Scalar>(eig: &EigenSystem<F>, points: usize) -> Vec<F> {
    let lam_max = eig.max_eigenvalue();
    let threshold = cst::<F>(1e-12) * F::one().max(lam_max);
    let lam_min_pos = match eig.min_positive_eigenvalue(threshold) {
        Some(l) => l,
        // Null spectrum: any grid reconstructs the zero matrix.
        None => return vec![F::one()],
    };
    let lo = cst::<F>(1e-3) / lam_max;
    let hi = cst::<F>(1e3) / lam_min_pos;
    let points = points.max(2);
    let log_lo = lo.ln();
    let step = (hi.ln() - log_lo) / cst::<F>((points - 1) as f64);
    (0..points)
        .map(|i| (log_lo + step * cst::<F>(i as f64)).exp())
        .collect()
}

/// Inverse transform: `(1 / C_k) \int L_s ds / s`, evaluated by the
/// trapezoidal rule in `log s` over the supplied grid. Refining the grid
/// drives the result to the original Laplacian.
pub fn reconstruct<F: Scalar>(
    eig: &EigenSystem<F>,
    kernel: Kernel,
    grid: &[F],
) -> Result<DenseMatrix<F>> {
    if grid.is_empty() {
        return Err(Error::invalid("reconstruction grid must be nonempty"));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::invalid(
                "reconstruction grid must be strictly increasing",
            ));
        }
    }
    if !(grid[0] > F::zero()) {
        return Err(Error::invalid("reconstruction grid must be positive"));
    }
    let ck = admissibility_constant::<F>(kernel)?;
    let n = eig.n();
    let half = cst::<F>(0.5);
    let mut acc = DenseMatrix::zeros(n, n);
    let mut prev_slice = transform_exact(eig, kernel, grid[0]);
    let mut prev_t = grid[0].ln();
    for s in &grid[1..] {
        let slice = transform_exact(eig, kernel, *s);
        let t = s.ln();
        let w = half * (t - prev_t);
        acc.axpy(w, &prev_slice);
        acc.axpy(w, &slice);
        prev_slice = slice;
        prev_t = t;
    }
    Ok(acc.scale(ck.recip()))
}

/// Fast path: `L_s ~= sum_{n=0}^{K} c_n (L - I)^n` by Horner evaluation,
/// requiring no eigendecomposition.
///
/// Valid only when the spectrum is contained in `[0, 2]` (the normalized
/// Laplacian); the Gershgorin bound guards unnormalized inputs, whose larger
/// spectrum would make the series diverge.
pub fn transform_approx<F: Scalar>(
    laplacian: &GraphLaplacian<F>,
    kernel: Kernel,
    s: F,
    order: usize,
) -> Result<DenseMatrix<F>> {
    check_spectrum_bound(laplacian)?;
    let coeffs = taylor_coefficients(kernel, s, order)?;
    Ok(horner(laplacian, &coeffs))
}

/// `d L_s / d s` along the fast path: the same matrix polynomial with the
/// scale-differentiated coefficients, i.e. the exact derivative of the
/// truncated series.
pub fn dls_dscale_approx<F: Scalar>(
    laplacian: &GraphLaplacian<F>,
    kernel: Kernel,
    s: F,
    order: usize,
) -> Result<DenseMatrix<F>> {
    check_spectrum_bound(laplacian)?;
    let coeffs = taylor_scale_derivative(kernel, s, order)?;
    Ok(horner(laplacian, &coeffs))
}

fn check_spectrum_bound<F: Scalar>(laplacian: &GraphLaplacian<F>) -> Result<()> {
    if laplacian.normalized() {
        return Ok(());
    }
    let bound = laplacian.spectral_upper_bound();
    if bound > cst::<F>(2.0) + cst::<F>(1e-9) {
        return Err(Error::invalid(format!(
            "fast transform requires a spectrum within [0, 2]; \
             Gershgorin bound {bound} suggests an unnormalized Laplacian"
        )));
    }
    Ok(())
}

fn horner<F: Scalar>(laplacian: &GraphLaplacian<F>, tc: &TaylorCoefficients<F>) -> DenseMatrix<F> {
    let n = laplacian.n();
    let shifted = {
        let mut m = laplacian.matrix().clone();
        for i in 0..n {
            m[(i, i)] = m[(i, i)] - F::one();
        }
        m
    };
    let k = tc.order;
    let mut acc = DenseMatrix::zeros(n, n);
    for i in 0..n {
        acc[(i, i)] = tc.coeffs[k];
    }
    for idx in (0..k).rev() {
        acc = shifted.matmul(&acc);
        for i in 0..n {
            acc[(i, i)] = acc[(i, i)] + tc.coeffs[idx];
        }
    }
    acc.symmetrized()
}
