//! Parameter updates: plain gradient descent and adaptive moments.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::model::{Gradients, ModelParams, OptimizerKind, TrainConfig};
use crate::scalar::{cst, Scalar};

/// Scales are projected into `[SCALE_FLOOR, SCALE_CEIL]` after every step;
/// the L2 penalty discourages divergence but cannot prevent sign flips under
/// adaptive updates, and the kernel requires strictly positive scales.
pub const SCALE_FLOOR: f64 = 1e-3;
pub const SCALE_CEIL: f64 = 10.0;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// First and second moment estimates, one slot per parameter.
#[derive(Debug, Clone)]
pub struct OptimizerState<F> {
    step: u64,
    m_weights: Vec<DenseMatrix<F>>,
    v_weights: Vec<DenseMatrix<F>>,
    m_biases: Option<Vec<Vec<F>>>,
    v_biases: Option<Vec<Vec<F>>>,
    m_scales: Vec<F>,
    v_scales: Vec<F>,
}

impl<F: Scalar> OptimizerState<F> {
    pub fn new(params: &ModelParams<F>) -> Self {
        let zeros_like: Vec<DenseMatrix<F>> = params
            .weights
            .iter()
            .map(|w| DenseMatrix::zeros(w.rows(), w.cols()))
            .collect();
        let bias_zeros = params
            .biases
            .as_ref()
            .map(|bs| bs.iter().map(|b| vec![F::zero(); b.len()]).collect::<Vec<_>>());
        OptimizerState {
            step: 0,
            m_weights: zeros_like.clone(),
            v_weights: zeros_like,
            m_biases: bias_zeros.clone(),
            v_biases: bias_zeros,
            m_scales: vec![F::zero(); params.scales.len()],
            v_scales: vec![F::zero(); params.scales.len()],
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

fn check_finite<F: Scalar>(grads: &Gradients<F>) -> Result<()> {
    let finite_slice = |s: &[F]| s.iter().all(|v| v.is_finite());
    if !grads.weights.iter().all(|w| finite_slice(w.data()))
        || !grads.scales.iter().all(|v| v.is_finite())
        || !grads
            .biases
            .as_ref()
            .map_or(true, |bs| bs.iter().all(|b| finite_slice(b)))
    {
        return Err(Error::numerical("non-finite gradient"));
    }
    Ok(())
}

#[inline]
fn adam_update<F: Scalar>(p: &mut F, g: F, m: &mut F, v: &mut F, lr: F, t: u64) {
    let beta1 = cst::<F>(BETA1);
    let beta2 = cst::<F>(BETA2);
    let eps = cst::<F>(ADAM_EPS);
    *m = beta1 * *m + (F::one() - beta1) * g;
    *v = beta2 * *v + (F::one() - beta2) * g * g;
    let m_hat = *m / (F::one() - cst::<F>(BETA1.powi(t as i32)));
    let v_hat = *v / (F::one() - cst::<F>(BETA2.powi(t as i32)));
    *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
}

/// Applies one update with `lr_weights` on weights/biases and `lr_scales` on
/// scales, then projects scales back into the admissible box.
pub fn optimizer_step<F: Scalar>(
    params: &mut ModelParams<F>,
    grads: &Gradients<F>,
    cfg: &TrainConfig<F>,
    state: &mut OptimizerState<F>,
) -> Result<()> {
    check_finite(grads)?;
    if grads.weights.len() != params.weights.len() || grads.scales.len() != params.scales.len() {
        return Err(Error::invalid("gradient shapes do not match parameters"));
    }

    match cfg.optimizer {
        OptimizerKind::GradientDescent => {
            for (w, g) in params.weights.iter_mut().zip(grads.weights.iter()) {
                w.axpy(-cfg.lr_weights, g);
            }
            if let (Some(bs), Some(gs)) = (params.biases.as_mut(), grads.biases.as_ref()) {
                for (b, g) in bs.iter_mut().zip(gs.iter()) {
                    for (bi, gi) in b.iter_mut().zip(g.iter()) {
                        *bi = *bi - cfg.lr_weights * *gi;
                    }
                }
            }
            for (s, g) in params.scales.values_mut().iter_mut().zip(grads.scales.iter()) {
                *s = *s - cfg.lr_scales * *g;
            }
        }
        OptimizerKind::Adam => {
            state.step += 1;
            let t = state.step;
            for (layer, g) in grads.weights.iter().enumerate() {
                let w = &mut params.weights[layer];
                let m = &mut state.m_weights[layer];
                let v = &mut state.v_weights[layer];
                for idx in 0..g.data().len() {
                    let mut p = w.data()[idx];
                    let mut mi = m.data()[idx];
                    let mut vi = v.data()[idx];
                    adam_update(&mut p, g.data()[idx], &mut mi, &mut vi, cfg.lr_weights, t);
                    w.data_mut()[idx] = p;
                    m.data_mut()[idx] = mi;
                    v.data_mut()[idx] = vi;
                }
            }
            if let (Some(bs), Some(gs)) = (params.biases.as_mut(), grads.biases.as_ref()) {
                let ms = state.m_biases.as_mut().expect("bias moments");
                let vs = state.v_biases.as_mut().expect("bias moments");
                for (((b, g), m), v) in bs.iter_mut().zip(gs).zip(ms.iter_mut()).zip(vs.iter_mut())
                {
                    for idx in 0..b.len() {
                        adam_update(
                            &mut b[idx],
                            g[idx],
                            &mut m[idx],
                            &mut v[idx],
                            cfg.lr_weights,
                            t,
                        );
                    }
                }
            }
            for (idx, g) in grads.scales.iter().enumerate() {
                adam_update(
                    &mut params.scales.values_mut()[idx],
                    *g,
                    &mut state.m_scales[idx],
                    &mut state.v_scales[idx],
                    cfg.lr_scales,
                    t,
                );
            }
        }
    }

    let floor = cst::<F>(SCALE_FLOOR);
    let ceil = cst::<F>(SCALE_CEIL);
    for s in params.scales.values_mut() {
        *s = (*s).max(floor).min(ceil);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_params, ModelGeometry, OptimizerKind};
    use crate::rng::RngStreams;

    fn tiny_params(seed: u64) -> ModelParams<f64> {
        let g = ModelGeometry {
            n_nodes: 2,
            scale_count: 1,
            hidden_widths: vec![2],
            n_classes: 2,
            biases: false,
        };
        init_params(&g, 2.5, &mut RngStreams::new(seed).stream("init")).unwrap()
    }

    fn zero_grads(params: &ModelParams<f64>) -> Gradients<f64> {
        Gradients {
            weights: params
                .weights
                .iter()
                .map(|w| DenseMatrix::zeros(w.rows(), w.cols()))
                .collect(),
            biases: None,
            scales: vec![0.0; params.scales.len()],
        }
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        for optimizer in [OptimizerKind::GradientDescent, OptimizerKind::Adam] {
            let mut params = tiny_params(1);
            let before = params.clone();
            let grads = zero_grads(&params);
            let cfg = TrainConfig {
                optimizer,
                ..TrainConfig::default()
            };
            let mut state = OptimizerState::new(&params);
            for _ in 0..3 {
                optimizer_step(&mut params, &grads, &cfg, &mut state).unwrap();
            }
            for (a, b) in params.weights.iter().zip(before.weights.iter()) {
                assert!(a.sub(b).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn plain_descent_update_rule() {
        let mut params = tiny_params(2);
        let before = params.weights[0][(0, 0)];
        let mut grads = zero_grads(&params);
        grads.weights[0][(0, 0)] = 2.0;
        let cfg = TrainConfig {
            optimizer: OptimizerKind::GradientDescent,
            lr_weights: 0.1,
            ..TrainConfig::default()
        };
        let mut state = OptimizerState::new(&params);
        optimizer_step(&mut params, &grads, &cfg, &mut state).unwrap();
        assert!((params.weights[0][(0, 0)] - (before - 0.2)).abs() <= 1e-15);
    }

    #[test]
    fn adam_first_step_has_learning_rate_magnitude() {
        // Bias correction makes m_hat = g and v_hat = g^2, so the first step
        // is lr * g / (|g| + eps) ~= lr * sign(g).
        let mut params = tiny_params(3);
        let before = params.weights[0][(0, 0)];
        let mut grads = zero_grads(&params);
        grads.weights[0][(0, 0)] = -0.37;
        let cfg = TrainConfig {
            optimizer: OptimizerKind::Adam,
            lr_weights: 0.01,
            ..TrainConfig::default()
        };
        let mut state = OptimizerState::new(&params);
        optimizer_step(&mut params, &grads, &cfg, &mut state).unwrap();
        let step = params.weights[0][(0, 0)] - before;
        assert!((step - 0.01).abs() <= 1e-6, "step {step}");
    }

    #[test]
    fn scales_stay_inside_projection_box() {
        let mut params = tiny_params(4);
        let mut grads = zero_grads(&params);
        grads.scales[0] = 1.0;
        let cfg = TrainConfig {
            optimizer: OptimizerKind::Adam,
            lr_scales: 0.5,
            ..TrainConfig::default()
        };
        let mut state = OptimizerState::new(&params);
        for _ in 0..200 {
            grads.scales[0] = -grads.scales[0];
            optimizer_step(&mut params, &grads, &cfg, &mut state).unwrap();
            let s = params.scales.values()[0];
            assert!((SCALE_FLOOR..=SCALE_CEIL).contains(&s), "scale {s} escaped");
        }
    }

    #[test]
    fn non_finite_gradient_rejected() {
        let mut params = tiny_params(5);
        let mut grads = zero_grads(&params);
        grads.weights[0][(0, 0)] = f64::NAN;
        let cfg = TrainConfig::default();
        let mut state = OptimizerState::new(&params);
        assert!(optimizer_step(&mut params, &grads, &cfg, &mut state).is_err());
    }
}
