//! End-to-end training, cross-validated evaluation, and saliency extraction.

mod metrics;
mod saliency;
mod snapshot;
mod train;

pub use metrics::{confusion_matrix, evaluate, metrics_from_confusion, MetricsReport};
pub use saliency::{edge_saliency, top_k_edges, SaliencyMatrix};
pub use snapshot::{load_snapshot, save_snapshot, snapshot_json, snapshot_from_json, ModelSnapshot};
pub use train::{precompute_inputs, train, EpochRecord, TrainHistory, TrainOutput};

use crate::data::{stratified_kfold, Dataset};
use crate::error::{Error, Result};
use crate::model::{ModelGeometry, ModelParams, SpectralConfig, TrainConfig};
use crate::rng::RngStreams;
use crate::scalar::Scalar;
use crate::spectral::Kernel;

/// Per-fold result of a cross-validation run.
#[derive(Debug, Clone)]
pub struct FoldResult<F> {
    pub fold: usize,
    pub metrics: MetricsReport,
    pub history: TrainHistory<F>,
    pub params: ModelParams<F>,
}

/// Unweighted mean and population standard deviation over folds.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CvSummary {
    pub folds: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_weighted_precision: f64,
    pub std_weighted_precision: f64,
    pub mean_weighted_recall: f64,
    pub std_weighted_recall: f64,
    pub majority_baseline: f64,
}

#[derive(Debug, Clone)]
pub struct CvOutcome<F> {
    pub folds: Vec<FoldResult<F>>,
    pub summary: CvSummary,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Stratified k-fold cross-validation: trains on `k - 1` folds, evaluates on
/// the held-out fold, and summarizes the per-fold metrics.
///
/// Per-graph spectral inputs are computed once and shared across folds. Each
/// fold draws from its own named RNG streams, so fold results are identical
/// whether folds run serially or in parallel.
pub fn cross_validate<F: Scalar>(
    dataset: &Dataset<F>,
    geometry: &ModelGeometry,
    kernel: Kernel,
    spectral: &SpectralConfig,
    cfg: &TrainConfig<F>,
    k: usize,
    init_scale_max: F,
    workers: usize,
) -> Result<CvOutcome<F>> {
    let plan = stratified_kfold(dataset, k, cfg.seed)?;
    let inputs = precompute_inputs(dataset, spectral, workers)?;
    let labels = dataset.labels();
    let streams = RngStreams::new(cfg.seed);

    let run_fold = |fold: usize| -> Result<FoldResult<F>> {
        let (train_idx, eval_idx) = plan.split(fold);
        for i in &eval_idx {
            debug_assert!(!train_idx.contains(i), "fold leakage at sample {i}");
        }
        let fold_streams = streams.scoped(&format!("fold{fold}"));
        let output = train(
            &inputs,
            &labels,
            &train_idx,
            geometry,
            kernel,
            cfg,
            init_scale_max,
            &fold_streams,
        )?;
        let metrics = evaluate(&output.params, kernel, cfg, &inputs, &labels, &eval_idx)?;
        Ok(FoldResult {
            fold,
            metrics,
            history: output.history,
            params: output.params,
        })
    };

    let folds: Vec<FoldResult<F>> = if workers > 1 {
        use rayon::prelude::*;
        (0..k)
            .into_par_iter()
            .map(run_fold)
            .collect::<Result<Vec<_>>>()?
    } else {
        (0..k).map(run_fold).collect::<Result<Vec<_>>>()?
    };

    let acc: Vec<f64> = folds.iter().map(|f| f.metrics.accuracy).collect();
    let wp: Vec<f64> = folds.iter().map(|f| f.metrics.weighted_precision).collect();
    let wr: Vec<f64> = folds.iter().map(|f| f.metrics.weighted_recall).collect();
    let (mean_accuracy, std_accuracy) = mean_std(&acc);
    let (mean_weighted_precision, std_weighted_precision) = mean_std(&wp);
    let (mean_weighted_recall, std_weighted_recall) = mean_std(&wr);
    Ok(CvOutcome {
        folds,
        summary: CvSummary {
            folds: k,
            mean_accuracy,
            std_accuracy,
            mean_weighted_precision,
            std_weighted_precision,
            mean_weighted_recall,
            std_weighted_recall,
            majority_baseline: dataset.majority_baseline(),
        },
    })
}

/// Builds the model geometry for a dataset from configured widths and scales.
pub fn geometry_for<F: Scalar>(
    dataset: &Dataset<F>,
    scale_count: usize,
    hidden_widths: Vec<usize>,
    biases: bool,
) -> Result<ModelGeometry> {
    if dataset.n_classes() < 2 {
        return Err(Error::invalid(
            "dataset must contain at least two classes to classify",
        ));
    }
    let geometry = ModelGeometry {
        n_nodes: dataset.n_nodes(),
        scale_count,
        hidden_widths,
        n_classes: dataset.n_classes(),
        biases,
    };
    geometry.validate()?;
    Ok(geometry)
}
