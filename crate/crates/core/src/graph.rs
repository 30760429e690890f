//! Graph representation and Laplacian construction.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::{cst, Scalar};
use serde::{Deserialize, Serialize};

/// Symmetric nonnegative edge-weight matrix with zero diagonal.
///
/// Symmetry is exact (bitwise): ingestion symmetrizes before construction,
/// so downstream code never has to reconcile `a_ij` with `a_ji`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyMatrix<F> {
    n: usize,
    weights: DenseMatrix<F>,
}

impl<F: Scalar> AdjacencyMatrix<F> {
    pub fn try_new(weights: DenseMatrix<F>) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::invalid(format!(
                "adjacency matrix must be square, got {}x{}",
                weights.rows(),
                weights.cols()
            )));
        }
        let n = weights.rows();
        for i in 0..n {
            if weights[(i, i)] != F::zero() {
                return Err(Error::invalid(format!(
                    "adjacency diagonal must be zero, entry ({i},{i}) is {}",
                    weights[(i, i)]
                )));
            }
            for j in 0..n {
                let w = weights[(i, j)];
                if w < F::zero() || !w.is_finite() {
                    return Err(Error::invalid(format!(
                        "edge weight ({i},{j}) = {w} must be finite and nonnegative"
                    )));
                }
                if weights[(j, i)] != w {
                    return Err(Error::invalid(format!(
                        "adjacency not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(AdjacencyMatrix { n, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &DenseMatrix<F> {
        &self.weights
    }

    /// Row sums of the weight matrix (the degree vector).
    pub fn degrees(&self) -> Vec<F> {
        (0..self.n)
            .map(|i| self.weights.row(i).iter().copied().sum())
            .collect()
    }

    /// Path graph on two nodes with the given edge weight; used in examples.
    pub fn two_node_path(weight: F) -> Self {
        let mut m = DenseMatrix::zeros(2, 2);
        m[(0, 1)] = weight;
        m[(1, 0)] = weight;
        AdjacencyMatrix { n: 2, weights: m }
    }
}

/// Graph Laplacian, either `L = D - A` or `I - D^{-1/2} A D^{-1/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphLaplacian<F> {
    n: usize,
    matrix: DenseMatrix<F>,
    normalized: bool,
    degrees: Vec<F>,
}

impl<F: Scalar> GraphLaplacian<F> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DenseMatrix<F> {
        &self.matrix
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn degrees(&self) -> &[F] {
        &self.degrees
    }

    /// Gershgorin upper bound on the largest eigenvalue.
    pub fn spectral_upper_bound(&self) -> F {
        (0..self.n)
            .map(|i| {
                let row = self.matrix.row(i);
                let off: F = (0..self.n)
                    .filter(|j| *j != i)
                    .map(|j| row[j].abs())
                    .sum();
                self.matrix[(i, i)] + off
            })
            .fold(F::zero(), |a, b| a.max(b))
    }
}

/// Builds the Laplacian of a valid adjacency matrix.
///
/// Unnormalized: `L = D - A`. Normalized: `I - D^{-1/2} A D^{-1/2}`, where a
/// degree-zero (isolated) node contributes an identity row/column so the
/// spectrum stays inside `[0, 2]`.
pub fn build_laplacian<F: Scalar>(a: &AdjacencyMatrix<F>, normalized: bool) -> GraphLaplacian<F> {
    let n = a.n();
    let degrees = a.degrees();
    let w = a.weights();
    let mut m = DenseMatrix::zeros(n, n);
    if normalized {
        let inv_sqrt: Vec<F> = degrees
            .iter()
            .map(|d| {
                if *d > F::zero() {
                    F::one() / d.sqrt()
                } else {
                    F::zero()
                }
            })
            .collect();
        for i in 0..n {
            m[(i, i)] = F::one();
            for j in (i + 1)..n {
                // Product of the two scale factors first keeps the result
                // bitwise symmetric.
                let v = -(w[(i, j)] * (inv_sqrt[i] * inv_sqrt[j]));
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
    } else {
        for i in 0..n {
            m[(i, i)] = degrees[i];
            for j in (i + 1)..n {
                let v = -w[(i, j)];
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
    }
    GraphLaplacian {
        n,
        matrix: m,
        normalized,
        degrees,
    }
}

/// Random weighted graph; edge present with probability `edge_prob`, weight
/// uniform in `[0, 1)`. Used by tests and the acceptance suite.
pub fn random_graph<F: Scalar>(
    n: usize,
    edge_prob: f64,
    rng: &mut impl rand::Rng,
) -> AdjacencyMatrix<F> {
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < edge_prob {
                let w = cst::<F>(rng.gen::<f64>());
                m[(i, j)] = w;
                m[(j, i)] = w;
            }
        }
    }
    AdjacencyMatrix::try_new(m).expect("random graph construction is valid")
}
