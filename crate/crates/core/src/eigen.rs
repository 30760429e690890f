//! Symmetric eigendecomposition via cyclic Jacobi rotations.
//!
//! Self-contained and unconditionally stable for symmetric input; graphs in
//! this crate stay below a few hundred nodes, where Jacobi is fast enough and
//! avoids any external numerical dependency.

use crate::error::{Error, Result};
use crate::graph::GraphLaplacian;
use crate::matrix::DenseMatrix;
use crate::scalar::{count, cst, Scalar};
use serde::{Deserialize, Serialize};

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a graph Laplacian: ascending eigenvalues and the
/// matching orthonormal eigenvector columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem<F> {
    eigenvalues: Vec<F>,
    eigenvectors: DenseMatrix<F>,
}

impl<F: Scalar> EigenSystem<F> {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[F] {
        &self.eigenvalues
    }

    /// Column `l` of the returned matrix is the eigenvector of eigenvalue `l`.
    pub fn eigenvectors(&self) -> &DenseMatrix<F> {
        &self.eigenvectors
    }

    pub fn max_eigenvalue(&self) -> F {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    /// Smallest eigenvalue above `threshold`, if any.
    pub fn min_positive_eigenvalue(&self, threshold: F) -> Option<F> {
        self.eigenvalues.iter().copied().find(|l| *l > threshold)
    }

    /// Test-support constructor; callers are responsible for orthonormality.
    pub fn from_parts(eigenvalues: Vec<F>, eigenvectors: DenseMatrix<F>) -> Self {
        assert_eq!(eigenvalues.len(), eigenvectors.rows());
        assert!(eigenvectors.is_square());
        EigenSystem {
            eigenvalues,
            eigenvectors,
        }
    }
}

/// Eigenvalues (ascending) and eigenvector columns of a symmetric matrix.
///
/// Convergence: off-diagonal Frobenius norm at or below
/// `max(1e-12, eps) * ||A||_F` within 100 sweeps.
pub fn symmetric_eigen<F: Scalar>(m: &DenseMatrix<F>) -> Result<(Vec<F>, DenseMatrix<F>)> {
    if !m.is_square() {
        return Err(Error::invalid("eigendecomposition requires a square matrix"));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut v = DenseMatrix::identity(n);

    let norm = a.fro_norm();
    let tol = norm * cst::<F>(1e-12).max(F::epsilon());
    // Skipping rotations below tol/n guarantees the off-diagonal norm is
    // already below tol once a sweep applies none.
    let element_tol = tol / count::<F>(n.max(1));

    let mut converged = off_diagonal_norm(&a) <= tol;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= element_tol {
                    continue;
                }
                rotated = true;
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (cst::<F>(2.0) * apq);
                let t = if theta.abs() > cst::<F>(1e10) {
                    // Avoid overflow in theta^2; the limit of the exact formula.
                    (cst::<F>(2.0) * theta).recip()
                } else {
                    let sign = if theta < F::zero() {
                        -F::one()
                    } else {
                        F::one()
                    };
                    sign / (theta.abs() + (theta * theta + F::one()).sqrt())
                };
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                let tau = s / (F::one() + c);

                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = F::zero();
                a[(q, p)] = F::zero();
                for j in 0..n {
                    if j == p || j == q {
                        continue;
                    }
                    let ajp = a[(j, p)];
                    let ajq = a[(j, q)];
                    let new_p = ajp - s * (ajq + tau * ajp);
                    let new_q = ajq + s * (ajp - tau * ajq);
                    a[(j, p)] = new_p;
                    a[(p, j)] = new_p;
                    a[(j, q)] = new_q;
                    a[(q, j)] = new_q;
                }
                for j in 0..n {
                    let vjp = v[(j, p)];
                    let vjq = v[(j, q)];
                    v[(j, p)] = vjp - s * (vjq + tau * vjp);
                    v[(j, q)] = vjq + s * (vjp - tau * vjq);
                }
            }
        }
        sweeps += 1;
        converged = !rotated || off_diagonal_norm(&a) <= tol;
    }
    if !converged {
        return Err(Error::numerical(format!(
            "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps (n = {n})"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<F> = (0..n).map(|i| a[(i, i)]).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));
    let eigenvalues: Vec<F> = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = DenseMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((eigenvalues, eigenvectors))
}

fn off_diagonal_norm<F: Scalar>(a: &DenseMatrix<F>) -> F {
    let n = a.rows();
    let mut sum = F::zero();
    for p in 0..n {
        for q in (p + 1)..n {
            sum += a[(p, q)] * a[(p, q)] + a[(q, p)] * a[(q, p)];
        }
    }
    sum.sqrt()
}

/// Decomposes a Laplacian; eigenvalues sorted ascending, with roundoff
/// negatives in `[-1e-8, 0)` clamped to zero so kernels see `lambda >= 0`.
pub fn eigendecompose<F: Scalar>(l: &GraphLaplacian<F>) -> Result<EigenSystem<F>> {
    let (mut eigenvalues, eigenvectors) = symmetric_eigen(l.matrix())?;
    let clamp_floor = -cst::<F>(1e-8);
    for lam in eigenvalues.iter_mut() {
        if *lam < F::zero() && *lam >= clamp_floor {
            *lam = F::zero();
        }
    }
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}
