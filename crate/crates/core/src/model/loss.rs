//! Regularized training objective.

use crate::error::{Error, Result};
use crate::model::{ForwardTrace, LossKind, ModelParams, TrainConfig};
use crate::scalar::{count, cst, Scalar};

/// Probabilities are clipped into `[PROB_CLIP, 1 - PROB_CLIP]` before logs.
pub const PROB_CLIP: f64 = 1e-12;

/// Decomposed objective value for one batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport<F> {
    pub data_loss: F,
    pub l1_penalty: F,
    pub l2_scale_penalty: F,
    pub total: F,
}

pub fn one_hot<F: Scalar>(label: usize, classes: usize) -> Vec<F> {
    let mut y = vec![F::zero(); classes];
    y[label] = F::one();
    y
}

fn validate_one_hot<F: Scalar>(y: &[F], classes: usize) -> Result<()> {
    if y.len() != classes {
        return Err(Error::invalid(format!(
            "target has {} entries, expected {classes}",
            y.len()
        )));
    }
    let mut ones = 0;
    for v in y {
        if *v == F::one() {
            ones += 1;
        } else if *v != F::zero() {
            return Err(Error::invalid("target is not one-hot"));
        }
    }
    if ones != 1 {
        return Err(Error::invalid("target is not one-hot"));
    }
    Ok(())
}

#[inline]
pub(crate) fn clip<F: Scalar>(p: F) -> F {
    let lo = cst::<F>(PROB_CLIP);
    p.max(lo).min(F::one() - lo)
}

/// Batch objective: the classification error averaged over the batch, plus
/// `theta1 / (2 N) * |W_1|_1` and `theta2 / (2 N) * sum(s^2)`.
///
/// The default data term sums a binary cross-entropy per class over the
/// softmax outputs: `-(1/N) sum_i sum_l [y ln o + (1 - y) ln(1 - o)]`.
pub fn loss<F: Scalar>(
    traces: &[ForwardTrace<F>],
    targets: &[Vec<F>],
    params: &ModelParams<F>,
    cfg: &TrainConfig<F>,
) -> Result<LossReport<F>> {
    if traces.is_empty() || traces.len() != targets.len() {
        return Err(Error::invalid(
            "loss requires matching, nonempty traces and targets",
        ));
    }
    let classes = params.geometry.n_classes;
    let batch = count::<F>(traces.len());

    let mut data_loss = F::zero();
    for (trace, y) in traces.iter().zip(targets.iter()) {
        validate_one_hot(y, classes)?;
        for (o, yl) in trace.probabilities.iter().zip(y.iter()) {
            let p = clip(*o);
            data_loss -= match cfg.loss {
                LossKind::PerClassBinary => {
                    *yl * p.ln() + (F::one() - *yl) * (F::one() - p).ln()
                }
                LossKind::Categorical => *yl * p.ln(),
            };
        }
    }
    data_loss /= batch;

    let half = cst::<F>(0.5);
    let l1_penalty =
        cfg.theta1 * half / batch * params.first_layer().iter().map(|w| w.abs()).sum::<F>();
    let l2_scale_penalty =
        cfg.theta2 * half / batch * params.scales.iter().map(|s| *s * *s).sum::<F>();
    let total = data_loss + l1_penalty + l2_scale_penalty;
    if !total.is_finite() {
        return Err(Error::numerical("loss is not finite"));
    }
    Ok(LossReport {
        data_loss,
        l1_penalty,
        l2_scale_penalty,
        total,
    })
}
