//! The classifier: multi-resolution features flattened into a fully
//! connected stack, trained by backpropagation through both the layer
//! weights and the spectral scale parameters.

mod backward;
mod forward;
mod loss;
mod optimizer;
mod params;

pub use backward::{backward, Gradients};
pub use forward::{forward, ForwardTrace, Mode};
pub use loss::{loss, one_hot, LossReport, PROB_CLIP};
pub use optimizer::{optimizer_step, OptimizerState, SCALE_CEIL, SCALE_FLOOR};
pub use params::{init_params, ModelGeometry, ModelParams};

use crate::eigen::EigenSystem;
use crate::error::{Error, Result};
use crate::graph::GraphLaplacian;
use crate::matrix::DenseMatrix;
use crate::scalar::{cst, Scalar};
use crate::spectral::{
    dls_dscale, dls_dscale_approx, multiresolution_map, transform_approx, Kernel,
    MultiResolutionMap, ScaleSet,
};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// How single-scale representations are computed during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformMode {
    /// Through the eigendecomposition; works for either Laplacian variant.
    Exact,
    /// Taylor-series matrix polynomial; requires the normalized Laplacian.
    Approx,
}

impl std::fmt::Display for TransformMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransformMode::Exact => write!(f, "exact"),
            TransformMode::Approx => write!(f, "approx"),
        }
    }
}

impl FromStr for TransformMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(TransformMode::Exact),
            "approx" => Ok(TransformMode::Approx),
            other => Err(Error::invalid(format!(
                "transform mode must be 'exact' or 'approx', got '{other}'"
            ))),
        }
    }
}

/// Spectral front-end settings shared by training and evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub normalized: bool,
    pub mode: TransformMode,
    pub taylor_order: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            normalized: true,
            mode: TransformMode::Exact,
            taylor_order: 30,
        }
    }
}

/// Per-graph spectral input, computed once per sample and reused across
/// epochs. The exact path stores the eigendecomposition; the fast path stores
/// the normalized Laplacian and the expansion order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum SpectralInput<F> {
    Exact(EigenSystem<F>),
    Approx {
        laplacian: GraphLaplacian<F>,
        order: usize,
    },
}

impl<F: Scalar> SpectralInput<F> {
    pub fn n(&self) -> usize {
        match self {
            SpectralInput::Exact(eig) => eig.n(),
            SpectralInput::Approx { laplacian, .. } => laplacian.n(),
        }
    }

    pub fn feature_map(&self, kernel: Kernel, scales: &ScaleSet<F>) -> Result<MultiResolutionMap<F>> {
        match self {
            SpectralInput::Exact(eig) => Ok(multiresolution_map(eig, kernel, scales)),
            SpectralInput::Approx { laplacian, order } => {
                let slices = scales
                    .iter()
                    .map(|s| transform_approx(laplacian, kernel, *s, *order))
                    .collect::<Result<Vec<_>>>()?;
                Ok(MultiResolutionMap::from_slices(slices))
            }
        }
    }

    /// `d L_s / d s` at one scale, along whichever path built the features.
    pub fn slice_dscale(&self, kernel: Kernel, s: F) -> Result<DenseMatrix<F>> {
        match self {
            SpectralInput::Exact(eig) => Ok(dls_dscale(eig, kernel, s)),
            SpectralInput::Approx { laplacian, order } => {
                dls_dscale_approx(laplacian, kernel, s, *order)
            }
        }
    }
}

/// Which classification loss drives training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossKind {
    /// Sum of per-class binary cross-entropies on the softmax outputs.
    PerClassBinary,
    /// Standard categorical cross-entropy.
    Categorical,
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LossKind::PerClassBinary => write!(f, "per-class-binary"),
            LossKind::Categorical => write!(f, "categorical"),
        }
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "per-class-binary" => Ok(LossKind::PerClassBinary),
            "categorical" => Ok(LossKind::Categorical),
            other => Err(Error::invalid(format!(
                "loss must be 'per-class-binary' or 'categorical', got '{other}'"
            ))),
        }
    }
}

/// Weight-update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimizerKind {
    GradientDescent,
    Adam,
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OptimizerKind::GradientDescent => write!(f, "sgd"),
            OptimizerKind::Adam => write!(f, "adam"),
        }
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sgd" | "gradient-descent" => Ok(OptimizerKind::GradientDescent),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(Error::invalid(format!(
                "optimizer must be 'adam' or 'sgd', got '{other}'"
            ))),
        }
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig<F> {
    /// L1 coefficient on the first layer.
    pub theta1: F,
    /// L2 coefficient on the scales.
    pub theta2: F,
    pub lr_weights: F,
    pub lr_scales: F,
    pub dropout_rate: F,
    pub leaky_slope: F,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub loss: LossKind,
    pub seed: u64,
}

impl<F: Scalar> Default for TrainConfig<F> {
    fn default() -> Self {
        TrainConfig {
            theta1: cst(1e-4),
            theta2: cst(1e-3),
            lr_weights: cst(0.01),
            lr_scales: cst(0.05),
            dropout_rate: cst(0.2),
            leaky_slope: cst(0.01),
            epochs: 100,
            batch_size: 30,
            optimizer: OptimizerKind::Adam,
            loss: LossKind::PerClassBinary,
            seed: 42,
        }
    }
}

impl<F: Scalar> TrainConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if self.theta1 < F::zero() || self.theta2 < F::zero() {
            return Err(Error::invalid("regularization coefficients must be nonnegative"));
        }
        if self.lr_weights < F::zero() || self.lr_scales < F::zero() {
            return Err(Error::invalid("learning rates must be nonnegative"));
        }
        if !(self.dropout_rate >= F::zero() && self.dropout_rate < F::one()) {
            return Err(Error::invalid("dropout rate must lie in [0, 1)"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        Ok(())
    }
}
