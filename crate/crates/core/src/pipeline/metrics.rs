//! Classification metrics for imbalanced populations.

use crate::error::{Error, Result};
use crate::model::{forward, Mode, ModelParams, SpectralInput, TrainConfig};
use crate::scalar::Scalar;
use crate::spectral::Kernel;
use serde::{Deserialize, Serialize};

/// Accuracy plus support-weighted precision/recall and the full confusion
/// matrix (`confusion[true][predicted]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    /// `(precision, recall, support)` per class.
    pub per_class: Vec<(f64, f64, usize)>,
    pub confusion: Vec<Vec<usize>>,
}

impl MetricsReport {
    pub fn csv_header() -> String {
        "fold,accuracy,weighted_precision,weighted_recall".to_string()
    }

    pub fn csv_row(&self, fold: &str) -> String {
        format!(
            "{fold},{},{},{}",
            self.accuracy, self.weighted_precision, self.weighted_recall
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }
}

pub fn confusion_matrix(
    true_labels: &[usize],
    predicted: &[usize],
    classes: usize,
) -> Result<Vec<Vec<usize>>> {
    if true_labels.len() != predicted.len() || true_labels.is_empty() {
        return Err(Error::invalid(
            "confusion matrix requires matching, nonempty label lists",
        ));
    }
    let mut confusion = vec![vec![0usize; classes]; classes];
    for (t, p) in true_labels.iter().zip(predicted.iter()) {
        if *t >= classes || *p >= classes {
            return Err(Error::invalid("label outside the class range"));
        }
        confusion[*t][*p] += 1;
    }
    Ok(confusion)
}

/// Metrics from a confusion matrix: per-class precision `TP / column sum` and
/// recall `TP / row sum` (zero when the denominator is zero), weighted by the
/// class support. Weighted recall always equals accuracy by construction.
pub fn metrics_from_confusion(confusion: &[Vec<usize>]) -> MetricsReport {
    let classes = confusion.len();
    let total: usize = confusion.iter().map(|r| r.iter().sum::<usize>()).sum();
    let trace: usize = (0..classes).map(|c| confusion[c][c]).sum();
    let accuracy = trace as f64 / total as f64;

    let mut per_class = Vec::with_capacity(classes);
    let mut weighted_precision = 0.0;
    let mut weighted_recall = 0.0;
    for c in 0..classes {
        let support: usize = confusion[c].iter().sum();
        let predicted: usize = (0..classes).map(|t| confusion[t][c]).sum();
        let tp = confusion[c][c];
        let precision = if predicted > 0 {
            tp as f64 / predicted as f64
        } else {
            0.0
        };
        let recall = if support > 0 {
            tp as f64 / support as f64
        } else {
            0.0
        };
        let weight = support as f64 / total as f64;
        weighted_precision += weight * precision;
        weighted_recall += weight * recall;
        per_class.push((precision, recall, support));
    }

    MetricsReport {
        accuracy,
        weighted_precision,
        weighted_recall,
        per_class,
        confusion: confusion.to_vec(),
    }
}

/// Eval-mode predictions over a subset; argmax ties break toward the lowest
/// class index so results are reproducible.
pub fn evaluate<F: Scalar>(
    params: &ModelParams<F>,
    kernel: Kernel,
    cfg: &TrainConfig<F>,
    inputs: &[SpectralInput<F>],
    labels: &[usize],
    subset: &[usize],
) -> Result<MetricsReport> {
    if subset.is_empty() {
        return Err(Error::invalid("evaluation subset must be nonempty"));
    }
    let mut true_labels = Vec::with_capacity(subset.len());
    let mut predicted = Vec::with_capacity(subset.len());
    for &i in subset {
        let trace = forward(&inputs[i], params, kernel, cfg, Mode::Eval, None)?;
        let mut best = 0usize;
        for (c, p) in trace.probabilities.iter().enumerate() {
            if *p > trace.probabilities[best] {
                best = c;
            }
        }
        predicted.push(best);
        true_labels.push(labels[i]);
    }
    let confusion = confusion_matrix(&true_labels, &predicted, params.geometry.n_classes)?;
    Ok(metrics_from_confusion(&confusion))
}
