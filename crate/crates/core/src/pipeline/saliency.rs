//! Edge saliency: mapping trained first-layer weights back to graph edges.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::model::ModelParams;
use crate::scalar::{count, Scalar};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Averaged first-layer weight magnitude per edge position, symmetrized, with
/// the per-scale mass recorded before the cross-scale average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaliencyMatrix<F> {
    pub n: usize,
    pub matrix: DenseMatrix<F>,
    pub scale_profile: Vec<F>,
}

impl<F: Scalar> SaliencyMatrix<F> {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            for (j, v) in self.matrix.row(i).iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{v}").expect("string write");
            }
            out.push('\n');
        }
        out
    }
}

/// For each scale slice and position `(p, q)`, averages `|w|` over the first
/// hidden layer's units, then averages across scales and symmetrizes.
/// Magnitudes are used because signed weights of opposing sign would cancel
/// even when the edge matters.
pub fn edge_saliency<F: Scalar>(params: &ModelParams<F>) -> SaliencyMatrix<F> {
    let n = params.geometry.n_nodes;
    let scales = params.geometry.scale_count;
    let w1 = params.first_layer();
    let units = w1.rows();
    let slice_len = n * n;

    let inv_units = count::<F>(units).recip();
    let mut per_scale: Vec<DenseMatrix<F>> = Vec::with_capacity(scales);
    let mut scale_profile = Vec::with_capacity(scales);
    for s in 0..scales {
        let mut mean_mag = DenseMatrix::zeros(n, n);
        for t in 0..units {
            let row = w1.row(t);
            let slice = &row[s * slice_len..(s + 1) * slice_len];
            for (pq, w) in slice.iter().enumerate() {
                let (p, q) = (pq / n, pq % n);
                mean_mag[(p, q)] += w.abs();
            }
        }
        for v in mean_mag.data_mut() {
            *v *= inv_units;
        }
        scale_profile.push(mean_mag.data().iter().copied().sum());
        per_scale.push(mean_mag);
    }

    let mut combined = DenseMatrix::zeros(n, n);
    for m in &per_scale {
        combined = combined.add(m);
    }
    let inv_scales = count::<F>(scales).recip();
    for v in combined.data_mut() {
        *v *= inv_scales;
    }
    SaliencyMatrix {
        n,
        matrix: combined.symmetrized(),
        scale_profile,
    }
}

/// Top `k` upper-triangle positions by saliency, descending, ties broken by
/// `(row, col)` lexicographic order.
pub fn top_k_edges<F: Scalar>(
    saliency: &SaliencyMatrix<F>,
    k: usize,
) -> Result<Vec<(usize, usize, F)>> {
    let n = saliency.n;
    let max = n * (n - 1) / 2;
    if k > max {
        return Err(Error::invalid(format!(
            "asked for {k} edges but an {n}-node graph has only {max} pairs"
        )));
    }
    let mut edges: Vec<(usize, usize, F)> = Vec::with_capacity(max);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j, saliency.matrix[(i, j)]));
        }
    }
    edges.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .expect("finite saliency")
            .then_with(|| (a.0, a.1).cmp(&(b.0, b.1)))
    });
    edges.truncate(k);
    Ok(edges)
}
