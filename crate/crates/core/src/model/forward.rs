//! Feedforward pass.

use crate::error::{Error, Result};
use crate::model::{ModelParams, SpectralInput, TrainConfig};
use crate::scalar::Scalar;
use crate::spectral::{Kernel, MultiResolutionMap};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Everything the backward pass needs from one forward evaluation.
#[derive(Debug, Clone)]
pub struct ForwardTrace<F> {
    pub feature_map: MultiResolutionMap<F>,
    pub flattened: Vec<F>,
    /// Pre-activation vectors, hidden layers first, output layer last.
    pub pre_activations: Vec<Vec<F>>,
    /// Post-activation (and post-dropout) hidden outputs.
    pub activations: Vec<Vec<F>>,
    /// Dropout multipliers per hidden layer; `None` in eval mode.
    pub dropout_masks: Option<Vec<Vec<F>>>,
    pub probabilities: Vec<F>,
}

#[inline]
fn leaky_relu<F: Scalar>(z: F, slope: F) -> F {
    if z >= F::zero() {
        z
    } else {
        slope * z
    }
}

fn check_finite<F: Scalar>(values: &[F], stage: &str) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical(format!(
            "non-finite activation in {stage}; scales or weights may have diverged"
        )));
    }
    Ok(())
}

/// Runs the network on one graph's spectral input.
///
/// The feature map is built at the current scales, flattened scale-major then
/// row-major, passed through leaky-ReLU hidden layers (with inverted dropout
/// in train mode), and normalized by a max-subtracted softmax.
pub fn forward<F: Scalar>(
    input: &SpectralInput<F>,
    params: &ModelParams<F>,
    kernel: Kernel,
    cfg: &TrainConfig<F>,
    mode: Mode,
    mut rng: Option<&mut ChaCha20Rng>,
) -> Result<ForwardTrace<F>> {
    if input.n() != params.geometry.n_nodes {
        return Err(Error::invalid(format!(
            "graph has {} nodes but the model expects {}",
            input.n(),
            params.geometry.n_nodes
        )));
    }
    if mode == Mode::Train && rng.is_none() {
        return Err(Error::invalid("train-mode forward requires an RNG"));
    }

    let feature_map = input.feature_map(kernel, &params.scales)?;
    let flattened = feature_map.flatten();
    check_finite(&flattened, "feature map")?;

    let hidden_layers = params.geometry.hidden_widths.len();
    let mut pre_activations = Vec::with_capacity(hidden_layers + 1);
    let mut activations = Vec::with_capacity(hidden_layers);
    let mut masks: Option<Vec<Vec<F>>> = (mode == Mode::Train).then(Vec::new);

    let keep_scale = F::one() / (F::one() - cfg.dropout_rate);
    let mut current = flattened.clone();
    for h in 0..hidden_layers {
        let mut z = params.weights[h].matvec(&current);
        if let Some(biases) = &params.biases {
            for (zi, bi) in z.iter_mut().zip(biases[h].iter()) {
                *zi += *bi;
            }
        }
        check_finite(&z, &format!("hidden layer {h}"))?;
        let mut a: Vec<F> = z.iter().map(|v| leaky_relu(*v, cfg.leaky_slope)).collect();
        if let Some(masks) = masks.as_mut() {
            let rng = rng.as_mut().expect("rng checked above");
            let mask: Vec<F> = a
                .iter()
                .map(|_| {
                    let u: F = crate::scalar::cst(rng.gen::<f64>());
                    if u < cfg.dropout_rate {
                        F::zero()
                    } else {
                        keep_scale
                    }
                })
                .collect();
            for (ai, mi) in a.iter_mut().zip(mask.iter()) {
                *ai *= *mi;
            }
            masks.push(mask);
        }
        pre_activations.push(z);
        activations.push(a.clone());
        current = a;
    }

    let z_out = params.weights[hidden_layers].matvec(&current);
    check_finite(&z_out, "output layer")?;
    let max = z_out.iter().copied().fold(F::neg_infinity(), F::max);
    let exps: Vec<F> = z_out.iter().map(|z| (*z - max).exp()).collect();
    let total: F = exps.iter().copied().sum();
    let probabilities: Vec<F> = exps.iter().map(|e| *e / total).collect();
    pre_activations.push(z_out);

    Ok(ForwardTrace {
        feature_map,
        flattened,
        pre_activations,
        activations,
        dropout_masks: masks,
        probabilities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::eigendecompose;
    use crate::graph::{build_laplacian, AdjacencyMatrix};
    use crate::matrix::DenseMatrix;
    use crate::model::{init_params, ModelGeometry};
    use crate::rng::RngStreams;
    use crate::spectral::ScaleSet;

    fn path2_input() -> SpectralInput<f64> {
        let a = AdjacencyMatrix::two_node_path(1.0);
        SpectralInput::Exact(eigendecompose(&build_laplacian(&a, false)).unwrap())
    }

    fn geometry() -> ModelGeometry {
        ModelGeometry {
            n_nodes: 2,
            scale_count: 1,
            hidden_widths: vec![3],
            n_classes: 2,
            biases: false,
        }
    }

    #[test]
    fn zero_weights_give_uniform_probabilities() {
        let g = geometry();
        let params = ModelParams {
            geometry: g.clone(),
            scales: ScaleSet::new(vec![0.5]).unwrap(),
            weights: g
                .layer_dims()
                .iter()
                .map(|(o, i)| DenseMatrix::zeros(*o, *i))
                .collect(),
            biases: None,
        };
        let cfg = TrainConfig::default();
        let trace = forward(&path2_input(), &params, Kernel::SxExp, &cfg, Mode::Eval, None).unwrap();
        assert!((trace.probabilities[0] - 0.5).abs() < 1e-15);
        assert!((trace.probabilities[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eval_mode_is_deterministic() {
        let g = geometry();
        let params =
            init_params::<f64>(&g, 2.5, &mut RngStreams::new(3).stream("init")).unwrap();
        let cfg = TrainConfig::default();
        let a = forward(&path2_input(), &params, Kernel::SxExp, &cfg, Mode::Eval, None).unwrap();
        let b = forward(&path2_input(), &params, Kernel::SxExp, &cfg, Mode::Eval, None).unwrap();
        assert_eq!(a.probabilities, b.probabilities);
        assert!(a.dropout_masks.is_none());
    }

    #[test]
    fn probabilities_normalize() {
        let g = geometry();
        let params =
            init_params::<f64>(&g, 2.5, &mut RngStreams::new(7).stream("init")).unwrap();
        let cfg = TrainConfig::default();
        let t = forward(&path2_input(), &params, Kernel::SxExp, &cfg, Mode::Eval, None).unwrap();
        let sum: f64 = t.probabilities.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-9);
        assert!(t.probabilities.iter().all(|p| *p > 0.0 && *p < 1.0));
    }

    #[test]
    fn hand_set_weights_reproduce_independent_computation() {
        // Independent arithmetic: 2-node path at s = 0.5 flattens to
        // v * [1, -1, -1, 1] with v = 2 exp(-2) * 0.5.
        let g = ModelGeometry {
            n_nodes: 2,
            scale_count: 1,
            hidden_widths: vec![1],
            n_classes: 2,
            biases: false,
        };
        let w1 = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0, -4.0]]).unwrap();
        let w2 = DenseMatrix::from_rows(&[vec![0.5], vec![-0.25]]).unwrap();
        let params = ModelParams {
            geometry: g,
            scales: ScaleSet::new(vec![0.5]).unwrap(),
            weights: vec![w1, w2],
            biases: None,
        };
        let cfg = TrainConfig::default();
        let t = forward(&path2_input(), &params, Kernel::SxExp, &cfg, Mode::Eval, None).unwrap();

        // Independent recomputation with scalar arithmetic only.
        let v = 2.0 * (-2.0f64).exp() * 0.5;
        let m = [v, -v, -v, v];
        let z1 = 1.0 * m[0] + 2.0 * m[1] + 3.0 * m[2] + (-4.0) * m[3];
        let a1 = if z1 >= 0.0 { z1 } else { 0.01 * z1 };
        let (q0, q1) = (0.5 * a1, -0.25 * a1);
        let mx = q0.max(q1);
        let (e0, e1) = ((q0 - mx).exp(), (q1 - mx).exp());
        let o0 = e0 / (e0 + e1);
        let o1 = e1 / (e0 + e1);
        assert!((t.probabilities[0] - o0).abs() <= 1e-12);
        assert!((t.probabilities[1] - o1).abs() <= 1e-12);
    }

    #[test]
    fn wrong_graph_size_rejected() {
        let g = ModelGeometry {
            n_nodes: 3,
            ..geometry()
        };
        let params =
            init_params::<f64>(&g, 2.5, &mut RngStreams::new(1).stream("init")).unwrap();
        let cfg = TrainConfig::default();
        assert!(forward(&path2_input(), &params, Kernel::SxExp, &cfg, Mode::Eval, None).is_err());
    }
}
