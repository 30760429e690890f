//! Multi-resolution spectral analysis of weighted graphs.
//!
//! Each graph in a population is represented by its Laplacian, re-expressed at
//! several spectral scales through a band-pass kernel acting in the Laplacian's
//! own eigenbasis, and the resulting multi-scale feature tensor is classified
//! by a fully connected network. Backpropagation updates both the layer
//! weights and the continuous scale parameters, and the trained first-layer
//! weights map back to individual edges as a saliency score.
//!
//! Module layout:
//! - [`matrix`]: dense row-major matrices generic over the scalar type
//! - [`graph`]: adjacency matrices and Laplacian construction
//! - [`eigen`]: self-contained Jacobi eigensolver for symmetric matrices
//! - [`spectral`]: band-pass kernels, the multi-resolution transform, its
//!   inverse (reconstruction), and the Taylor-series fast path
//! - [`model`]: the classifier - parameters, forward/backward, optimizers
//! - [`data`]: dataset ingestion, fold splitting, balanced sampling, and
//!   synthetic population generation
//! - [`pipeline`]: training, cross-validated evaluation, edge saliency
//!
//! All numeric code is generic over [`scalar::Scalar`] (implemented for `f32`
//! and `f64`); the `*64` aliases at the crate root pick the double-precision
//! instantiation used by the CLI.

pub mod data;
pub mod eigen;
pub mod error;
pub mod graph;
pub mod matrix;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod scalar;
pub mod spectral;

pub use error::Error;
pub use scalar::Scalar;

pub type Matrix64 = matrix::DenseMatrix<f64>;
pub type Adjacency64 = graph::AdjacencyMatrix<f64>;
pub type Laplacian64 = graph::GraphLaplacian<f64>;
pub type EigenSystem64 = eigen::EigenSystem<f64>;
pub type ScaleSet64 = spectral::ScaleSet<f64>;
pub type ModelParams64 = model::ModelParams<f64>;
pub type TrainConfig64 = model::TrainConfig<f64>;
pub type Dataset64 = data::Dataset<f64>;

pub type Matrix32 = matrix::DenseMatrix<f32>;
pub type Adjacency32 = graph::AdjacencyMatrix<f32>;
pub type Laplacian32 = graph::GraphLaplacian<f32>;
pub type EigenSystem32 = eigen::EigenSystem<f32>;
