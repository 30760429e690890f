//! Model geometry and parameter initialization.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::{cst, Scalar};
use crate::spectral::ScaleSet;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Smallest admissible scale at initialization; keeps every scale strictly
/// positive so the kernel stays well-defined.
pub const SCALE_INIT_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelGeometry {
    pub n_nodes: usize,
    pub scale_count: usize,
    pub hidden_widths: Vec<usize>,
    pub n_classes: usize,
    pub biases: bool,
}

impl ModelGeometry {
    /// Width of the flattened feature vector feeding the first layer.
    pub fn input_width(&self) -> usize {
        self.scale_count * self.n_nodes * self.n_nodes
    }

    /// `(out, in)` dimensions of every weight matrix, output layer last.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_widths.len() + 1);
        let mut fan_in = self.input_width();
        for w in &self.hidden_widths {
            dims.push((*w, fan_in));
            fan_in = *w;
        }
        dims.push((self.n_classes, fan_in));
        dims
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes == 0 {
            return Err(Error::invalid("node count must be positive"));
        }
        if self.scale_count == 0 {
            return Err(Error::invalid("at least one scale is required"));
        }
        if self.hidden_widths.is_empty() {
            return Err(Error::invalid("at least one hidden layer is required"));
        }
        if self.hidden_widths.iter().any(|w| *w == 0) {
            return Err(Error::invalid("hidden layer widths must be positive"));
        }
        if self.n_classes < 2 {
            return Err(Error::invalid("classification requires at least two classes"));
        }
        Ok(())
    }
}

/// Learnable parameters: the scale vector plus the FC weight stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<F> {
    pub geometry: ModelGeometry,
    pub scales: ScaleSet<F>,
    /// One `(out, in)` matrix per layer, output layer last.
    pub weights: Vec<DenseMatrix<F>>,
    /// Hidden-layer biases when enabled; `None` by default.
    pub biases: Option<Vec<Vec<F>>>,
}

impl<F: Scalar> ModelParams<F> {
    pub fn first_layer(&self) -> &DenseMatrix<F> {
        &self.weights[0]
    }

    pub fn layer_count(&self) -> usize {
        self.weights.len()
    }

    /// Checks that the parameter shapes match the declared geometry.
    pub fn check_consistent(&self) -> Result<()> {
        let dims = self.geometry.layer_dims();
        if self.weights.len() != dims.len() {
            return Err(Error::invalid(format!(
                "expected {} weight matrices, found {}",
                dims.len(),
                self.weights.len()
            )));
        }
        for (idx, ((out, input), w)) in dims.iter().zip(self.weights.iter()).enumerate() {
            if w.rows() != *out || w.cols() != *input {
                return Err(Error::invalid(format!(
                    "layer {idx}: expected {}x{}, found {}x{}",
                    out,
                    input,
                    w.rows(),
                    w.cols()
                )));
            }
        }
        if self.scales.len() != self.geometry.scale_count {
            return Err(Error::invalid("scale count does not match geometry"));
        }
        if self.geometry.biases != self.biases.is_some() {
            return Err(Error::invalid("bias presence does not match geometry"));
        }
        if let Some(biases) = &self.biases {
            if biases.len() != self.geometry.hidden_widths.len() {
                return Err(Error::invalid("one bias vector per hidden layer required"));
            }
            for (b, w) in biases.iter().zip(self.geometry.hidden_widths.iter()) {
                if b.len() != *w {
                    return Err(Error::invalid("bias length does not match layer width"));
                }
            }
        }
        Ok(())
    }

    /// First non-finite parameter group, for diagnostics.
    pub fn first_non_finite_group(&self) -> Option<String> {
        if self.scales.iter().any(|s| !s.is_finite()) {
            return Some("scales".to_string());
        }
        for (i, w) in self.weights.iter().enumerate() {
            if w.iter().any(|v| !v.is_finite()) {
                return Some(format!("fc_weights[{i}]"));
            }
        }
        if let Some(biases) = &self.biases {
            for (i, b) in biases.iter().enumerate() {
                if b.iter().any(|v| !v.is_finite()) {
                    return Some(format!("fc_biases[{i}]"));
                }
            }
        }
        None
    }
}

/// Xavier-uniform weights (each entry uniform within plus/minus
/// `sqrt(6 / (fan_in + fan_out))`), zero biases, and scales drawn uniformly
/// from `(SCALE_INIT_FLOOR, init_scale_max]`. Deterministic given the RNG.
pub fn init_params<F: Scalar>(
    geometry: &ModelGeometry,
    init_scale_max: F,
    rng: &mut ChaCha20Rng,
) -> Result<ModelParams<F>> {
    geometry.validate()?;
    let floor = cst::<F>(SCALE_INIT_FLOOR);
    if !(init_scale_max > floor) {
        return Err(Error::invalid(format!(
            "scale init maximum must exceed {SCALE_INIT_FLOOR}"
        )));
    }

    let mut weights = Vec::new();
    for (out, input) in geometry.layer_dims() {
        let bound = cst::<F>((6.0 / (input + out) as f64).sqrt());
        let two = cst::<F>(2.0);
        let m = DenseMatrix::from_fn(out, input, |_, _| {
            let u: f64 = rng.gen();
            (cst::<F>(u) * two - F::one()) * bound
        });
        weights.push(m);
    }

    let biases = geometry
        .biases
        .then(|| geometry.hidden_widths.iter().map(|w| vec![F::zero(); *w]).collect());

    let span = init_scale_max - floor;
    let scales = ScaleSet::new(
        (0..geometry.scale_count)
            .map(|_| {
                let u: f64 = rng.gen();
                floor + span * (F::one() - cst::<F>(u))
            })
            .collect(),
    )?;

    Ok(ModelParams {
        geometry: geometry.clone(),
        scales,
        weights,
        biases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStreams;

    fn small_geometry() -> ModelGeometry {
        ModelGeometry {
            n_nodes: 6,
            scale_count: 2,
            hidden_widths: vec![8, 4],
            n_classes: 2,
            biases: false,
        }
    }

    #[test]
    fn init_is_deterministic_given_seed() {
        let g = small_geometry();
        let a = init_params::<f64>(&g, 2.5, &mut RngStreams::new(5).stream("init")).unwrap();
        let b = init_params::<f64>(&g, 2.5, &mut RngStreams::new(5).stream("init")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn layer_dims_match_flattened_input() {
        // N = 116, five scales: first layer maps 5 * 116^2 = 67280 inputs.
        let g = ModelGeometry {
            n_nodes: 116,
            scale_count: 5,
            hidden_widths: vec![2000, 128, 32],
            n_classes: 3,
            biases: false,
        };
        assert_eq!(g.input_width(), 67_280);
        assert_eq!(
            g.layer_dims(),
            vec![(2000, 67_280), (128, 2000), (32, 128), (3, 32)]
        );
    }

    #[test]
    fn xavier_variance_matches_uniform_moment() {
        // Uniform on [-a, a] has variance a^2 / 3 = 2 / (fan_in + fan_out).
        let g = ModelGeometry {
            n_nodes: 10,
            scale_count: 2,
            hidden_widths: vec![600],
            n_classes: 2,
            biases: false,
        };
        let p = init_params::<f64>(&g, 2.5, &mut RngStreams::new(11).stream("init")).unwrap();
        let w = p.first_layer();
        let count = (w.rows() * w.cols()) as f64;
        assert!(count >= 1e5);
        let mean: f64 = w.iter().sum::<f64>() / count;
        let var: f64 = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
        let expected = 2.0 / (g.input_width() + 600) as f64;
        assert!(
            (var - expected).abs() <= 0.1 * expected,
            "variance {var} vs expected {expected}"
        );
    }

    #[test]
    fn scales_strictly_positive_and_bounded() {
        let g = small_geometry();
        for seed in 0..20 {
            let p =
                init_params::<f64>(&g, 2.5, &mut RngStreams::new(seed).stream("init")).unwrap();
            for s in p.scales.iter() {
                assert!(*s > SCALE_INIT_FLOOR && *s <= 2.5);
            }
        }
    }

    #[test]
    fn zero_width_layer_rejected() {
        let mut g = small_geometry();
        g.hidden_widths = vec![8, 0];
        assert!(init_params::<f64>(&g, 2.5, &mut RngStreams::new(0).stream("init")).is_err());
    }
}
