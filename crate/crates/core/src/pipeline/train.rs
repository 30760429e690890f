//! The training loop.

use crate::data::{BalancedSampler, Dataset};
use crate::eigen::eigendecompose;
use crate::error::{Error, Result};
use crate::graph::build_laplacian;
use crate::model::{
    backward, forward, init_params, loss, one_hot, optimizer_step, ForwardTrace, Mode,
    ModelGeometry, ModelParams, OptimizerState, SpectralConfig, SpectralInput, TrainConfig,
    TransformMode,
};
use crate::rng::RngStreams;
use crate::scalar::Scalar;
use crate::spectral::Kernel;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// One line of training history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord<F> {
    pub total_loss: F,
    pub data_loss: F,
    pub scales: Vec<F>,
}

/// Per-epoch loss means and scale snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory<F> {
    pub records: Vec<EpochRecord<F>>,
}

impl<F> Default for TrainHistory<F> {
    fn default() -> Self {
        TrainHistory {
            records: Vec::new(),
        }
    }
}

impl<F: Scalar> TrainHistory<F> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// CSV with one row per epoch: `epoch,total_loss,data_loss,s_1..s_k`.
    pub fn to_csv(&self) -> String {
        let scale_count = self.records.first().map_or(0, |r| r.scales.len());
        let mut out = String::from("epoch,total_loss,data_loss");
        for i in 1..=scale_count {
            write!(out, ",s_{i}").expect("string write");
        }
        out.push('\n');
        for (epoch, r) in self.records.iter().enumerate() {
            write!(out, "{epoch},{},{}", r.total_loss, r.data_loss).expect("string write");
            for s in &r.scales {
                write!(out, ",{s}").expect("string write");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput<F> {
    pub params: ModelParams<F>,
    pub history: TrainHistory<F>,
}

/// Computes every sample's spectral input up front: the eigendecomposition
/// for the exact path, the normalized Laplacian for the fast path. With
/// `workers > 1` samples are processed in parallel; results are collected in
/// index order, so the outcome is identical either way.
pub fn precompute_inputs<F: Scalar>(
    dataset: &Dataset<F>,
    spectral: &SpectralConfig,
    workers: usize,
) -> Result<Vec<SpectralInput<F>>> {
    if spectral.mode == TransformMode::Approx && !spectral.normalized {
        return Err(Error::invalid(
            "the fast transform requires the normalized Laplacian",
        ));
    }
    let build = |sample: &crate::data::GraphSample<F>| -> Result<SpectralInput<F>> {
        let laplacian = build_laplacian(&sample.adjacency, spectral.normalized);
        match spectral.mode {
            TransformMode::Exact => Ok(SpectralInput::Exact(eigendecompose(&laplacian)?)),
            TransformMode::Approx => Ok(SpectralInput::Approx {
                laplacian,
                order: spectral.taylor_order,
            }),
        }
    };
    if workers > 1 {
        use rayon::prelude::*;
        dataset.samples().par_iter().map(build).collect()
    } else {
        dataset.samples().iter().map(build).collect()
    }
}

/// Trains on a subset of precomputed inputs.
///
/// Each epoch draws `ceil(subset / batch_size)` class-balanced batches, runs
/// forward/loss/backward/update, and records the epoch's mean losses plus the
/// current scale vector. RNG streams: `init` for parameters, `sampling` for
/// batches, `dropout` for masks.
#[allow(clippy::too_many_arguments)]
pub fn train<F: Scalar>(
    inputs: &[SpectralInput<F>],
    labels: &[usize],
    subset: &[usize],
    geometry: &ModelGeometry,
    kernel: Kernel,
    cfg: &TrainConfig<F>,
    init_scale_max: F,
    streams: &RngStreams,
) -> Result<TrainOutput<F>> {
    if subset.is_empty() {
        return Err(Error::invalid("training subset must be nonempty"));
    }
    cfg.validate()?;
    let mut params = init_params(geometry, init_scale_max, &mut streams.stream("init"))?;
    let mut history = TrainHistory::default();
    if cfg.epochs == 0 {
        return Ok(TrainOutput { params, history });
    }

    let mut sampler = BalancedSampler::new(labels, subset, cfg.batch_size)?;
    let mut sampling_rng = streams.stream("sampling");
    let mut dropout_rng = streams.stream("dropout");
    let mut state = OptimizerState::new(&params);
    let batches_per_epoch = subset.len().div_ceil(cfg.batch_size);

    for _epoch in 0..cfg.epochs {
        let mut epoch_total = F::zero();
        let mut epoch_data = F::zero();
        for _ in 0..batches_per_epoch {
            let batch = sampler.next_batch(&mut sampling_rng);
            let mut traces: Vec<ForwardTrace<F>> = Vec::with_capacity(batch.len());
            let mut targets: Vec<Vec<F>> = Vec::with_capacity(batch.len());
            let mut batch_inputs: Vec<&SpectralInput<F>> = Vec::with_capacity(batch.len());
            for &i in &batch {
                let trace = forward(
                    &inputs[i],
                    &params,
                    kernel,
                    cfg,
                    Mode::Train,
                    Some(&mut dropout_rng),
                )?;
                traces.push(trace);
                targets.push(one_hot(labels[i], geometry.n_classes));
                batch_inputs.push(&inputs[i]);
            }
            let report = loss(&traces, &targets, &params, cfg).map_err(|e| match e {
                Error::Numerical(_) => diverged(&params),
                other => other,
            })?;
            if !report.total.is_finite() {
                return Err(diverged(&params));
            }
            let grads = backward(&batch_inputs, &traces, &targets, &params, kernel, cfg)?;
            optimizer_step(&mut params, &grads, cfg, &mut state)?;
            epoch_total += report.total;
            epoch_data += report.data_loss;
        }
        let denom = crate::scalar::count::<F>(batches_per_epoch);
        history.records.push(EpochRecord {
            total_loss: epoch_total / denom,
            data_loss: epoch_data / denom,
            scales: params.scales.values().to_vec(),
        });
    }

    Ok(TrainOutput { params, history })
}

fn diverged<F: Scalar>(params: &ModelParams<F>) -> Error {
    let group = params
        .first_non_finite_group()
        .unwrap_or_else(|| "output probabilities".to_string());
    Error::numerical(format!(
        "training loss is not finite; first affected parameter group: {group}"
    ))
}
