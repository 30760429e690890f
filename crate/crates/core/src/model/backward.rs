//! Analytic gradients of the regularized objective.
//!
//! Gradients are exact for the objective as computed, including probability
//! clipping and inverted dropout, so central finite differences of the total
//! loss reproduce them to the accuracy of the difference quotient. The scale
//! gradient chains the upstream feature gradient through the analytic
//! `d L_s / d s` of whichever transform path built the features.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::model::loss::{clip, PROB_CLIP};
use crate::model::{ForwardTrace, LossKind, ModelParams, SpectralInput, TrainConfig};
use crate::scalar::{count, cst, Scalar};
use crate::spectral::Kernel;

/// Gradient of the batch objective with respect to every parameter group.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<F> {
    pub weights: Vec<DenseMatrix<F>>,
    pub biases: Option<Vec<Vec<F>>>,
    pub scales: Vec<F>,
}

/// `sign` with the subgradient convention `sign(0) = 0`.
#[inline]
fn l1_sign<F: Scalar>(w: F) -> F {
    if w > F::zero() {
        F::one()
    } else if w < F::zero() {
        -F::one()
    } else {
        F::zero()
    }
}

pub fn backward<F: Scalar>(
    inputs: &[&SpectralInput<F>],
    traces: &[ForwardTrace<F>],
    targets: &[Vec<F>],
    params: &ModelParams<F>,
    kernel: Kernel,
    cfg: &TrainConfig<F>,
) -> Result<Gradients<F>> {
    if traces.is_empty() || traces.len() != targets.len() || traces.len() != inputs.len() {
        return Err(Error::invalid(
            "backward requires matching, nonempty inputs, traces and targets",
        ));
    }
    params.check_consistent()?;
    let hidden_layers = params.geometry.hidden_widths.len();
    let classes = params.geometry.n_classes;
    for trace in traces {
        if trace.pre_activations.len() != hidden_layers + 1
            || trace.probabilities.len() != classes
            || trace.flattened.len() != params.geometry.input_width()
        {
            return Err(Error::invalid("trace does not match the model geometry"));
        }
    }

    let batch = count::<F>(traces.len());
    let mut grad_weights: Vec<DenseMatrix<F>> = params
        .weights
        .iter()
        .map(|w| DenseMatrix::zeros(w.rows(), w.cols()))
        .collect();
    let mut grad_biases: Option<Vec<Vec<F>>> = params
        .biases
        .as_ref()
        .map(|bs| bs.iter().map(|b| vec![F::zero(); b.len()]).collect());
    let mut grad_scales = vec![F::zero(); params.scales.len()];

    let lo = cst::<F>(PROB_CLIP);
    let hi = F::one() - lo;
    let n = params.geometry.n_nodes;
    let slice_len = n * n;

    for ((input, trace), y) in inputs.iter().zip(traces.iter()).zip(targets.iter()) {
        // d(loss)/d(o) with the clip indicator: outside the clip band the
        // computed loss is constant in o.
        let o = &trace.probabilities;
        let g_o: Vec<F> = o
            .iter()
            .zip(y.iter())
            .map(|(ol, yl)| {
                if *ol <= lo || *ol >= hi {
                    return F::zero();
                }
                let p = clip(*ol);
                match cfg.loss {
                    LossKind::PerClassBinary => {
                        -(*yl / p - (F::one() - *yl) / (F::one() - p))
                    }
                    LossKind::Categorical => -(*yl / p),
                }
            })
            .collect();
        // Softmax Jacobian: dz_m = o_m (g_m - sum_l g_l o_l).
        let dot: F = g_o.iter().zip(o.iter()).map(|(g, o)| *g * *o).sum();
        let mut delta: Vec<F> = o
            .iter()
            .zip(g_o.iter())
            .map(|(ol, gl)| *ol * (*gl - dot))
            .collect();

        // Output layer, then hidden layers in reverse.
        for layer in (0..=hidden_layers).rev() {
            let below: &[F] = if layer == 0 {
                &trace.flattened
            } else {
                &trace.activations[layer - 1]
            };
            let gw = &mut grad_weights[layer];
            for (t, d) in delta.iter().enumerate() {
                if *d == F::zero() {
                    continue;
                }
                for (j, x) in below.iter().enumerate() {
                    gw[(t, j)] += *d * *x;
                }
            }
            if layer < hidden_layers {
                if let Some(gb) = grad_biases.as_mut() {
                    for (g, d) in gb[layer].iter_mut().zip(delta.iter()) {
                        *g += *d;
                    }
                }
            }
            let upstream = params.weights[layer].tr_matvec(&delta);
            if layer == 0 {
                // Gradient w.r.t. the flattened features; chain into scales.
                for (j, s) in params.scales.iter().enumerate() {
                    let d_slice = input.slice_dscale(kernel, *s)?;
                    let offset = j * slice_len;
                    let mut acc = F::zero();
                    for (pq, dv) in d_slice.data().iter().enumerate() {
                        acc += upstream[offset + pq] * *dv;
                    }
                    grad_scales[j] += acc;
                }
            } else {
                let h = layer - 1;
                let z = &trace.pre_activations[h];
                delta = upstream
                    .iter()
                    .zip(z.iter())
                    .enumerate()
                    .map(|(i, (u, zi))| {
                        let act = if *zi >= F::zero() {
                            F::one()
                        } else {
                            cfg.leaky_slope
                        };
                        let drop = trace
                            .dropout_masks
                            .as_ref()
                            .map_or(F::one(), |m| m[h][i]);
                        *u * act * drop
                    })
                    .collect();
            }
        }
    }

    let inv_batch = batch.recip();
    for gw in grad_weights.iter_mut() {
        for g in gw.data_mut() {
            *g *= inv_batch;
        }
    }
    if let Some(gb) = grad_biases.as_mut() {
        for layer in gb.iter_mut() {
            for g in layer.iter_mut() {
                *g *= inv_batch;
            }
        }
    }
    for g in grad_scales.iter_mut() {
        *g *= inv_batch;
    }

    // Penalty terms: theta1/(2N) sign(W1) on the first layer and
    // theta2/N * s on each scale.
    let half = cst::<F>(0.5);
    let l1_coeff = cfg.theta1 * half * inv_batch;
    let w1 = params.first_layer().clone();
    for (g, w) in grad_weights[0].data_mut().iter_mut().zip(w1.iter()) {
        *g += l1_coeff * l1_sign(*w);
    }
    for (g, s) in grad_scales.iter_mut().zip(params.scales.iter()) {
        *g += cfg.theta2 * inv_batch * *s;
    }

    Ok(Gradients {
        weights: grad_weights,
        biases: grad_biases,
        scales: grad_scales,
    })
}
