//! Cross-module training runs on synthetic populations.

use lapwave::data::{generate_synthetic, separable_pair_templates, Dataset, SyntheticSpec};
use lapwave::model::{SpectralConfig, TrainConfig};
use lapwave::pipeline::{cross_validate, edge_saliency, geometry_for, precompute_inputs, train};
use lapwave::rng::RngStreams;
use lapwave::spectral::Kernel;

fn separable_dataset(count_each: usize, seed: u64) -> Dataset<f64> {
    let (t0, t1) = separable_pair_templates::<f64>(20, 5.0).unwrap();
    generate_synthetic(&SyntheticSpec {
        n: 20,
        templates: vec![t0, t1],
        sigma: 0.05,
        counts: vec![count_each, count_each],
        seed,
    })
    .unwrap()
}

#[test]
fn cross_validation_learns_separable_population() {
    let dataset = separable_dataset(30, 51);
    let geometry = geometry_for(&dataset, 3, vec![32, 16], false).unwrap();
    let cfg = TrainConfig {
        epochs: 50,
        batch_size: 12,
        ..TrainConfig::default()
    };
    let outcome = cross_validate(
        &dataset,
        &geometry,
        Kernel::SxExp,
        &SpectralConfig::default(),
        &cfg,
        3,
        2.5,
        1,
    )
    .unwrap();
    assert_eq!(outcome.folds.len(), 3);
    assert!(
        outcome.summary.mean_accuracy >= 0.9,
        "mean accuracy {}",
        outcome.summary.mean_accuracy
    );
    assert!((outcome.summary.majority_baseline - 0.5).abs() <= 1e-12);
    for fold in &outcome.folds {
        assert_eq!(fold.history.len(), cfg.epochs);
        for record in &fold.history.records {
            assert!(record.total_loss.is_finite());
            for s in &record.scales {
                assert!((1e-3..=10.0).contains(s));
            }
        }
    }
}

#[test]
fn cross_validation_is_deterministic() {
    let dataset = separable_dataset(9, 52);
    let geometry = geometry_for(&dataset, 2, vec![8], false).unwrap();
    let cfg = TrainConfig {
        epochs: 4,
        batch_size: 6,
        ..TrainConfig::default()
    };
    let run = || {
        cross_validate(
            &dataset,
            &geometry,
            Kernel::SxExp,
            &SpectralConfig::default(),
            &cfg,
            3,
            2.5,
            1,
        )
        .unwrap()
    };
    let a = run();
    let b = run();
    for (fa, fb) in a.folds.iter().zip(b.folds.iter()) {
        assert_eq!(fa.metrics, fb.metrics);
        assert_eq!(fa.history, fb.history);
        assert_eq!(fa.params, fb.params);
    }
}

#[test]
fn parallel_folds_match_serial_folds() {
    let dataset = separable_dataset(9, 53);
    let geometry = geometry_for(&dataset, 2, vec![8], false).unwrap();
    let cfg = TrainConfig {
        epochs: 3,
        batch_size: 6,
        ..TrainConfig::default()
    };
    let run = |workers| {
        cross_validate(
            &dataset,
            &geometry,
            Kernel::SxExp,
            &SpectralConfig::default(),
            &cfg,
            3,
            2.5,
            workers,
        )
        .unwrap()
    };
    let serial = run(1);
    let parallel = run(4);
    for (fa, fb) in serial.folds.iter().zip(parallel.folds.iter()) {
        assert_eq!(fa.metrics, fb.metrics);
        assert_eq!(fa.history, fb.history);
    }
}

#[test]
fn stronger_l1_shrinks_more_first_layer_weights() {
    // Averaged over seeds, raising theta1 two orders of magnitude must
    // increase the fraction of first-layer weights near zero.
    let near_zero_fraction = |theta1: f64, seed: u64| -> f64 {
        let dataset = separable_dataset(20, 54);
        let geometry = geometry_for(&dataset, 2, vec![16], false).unwrap();
        let cfg = TrainConfig {
            epochs: 30,
            batch_size: 10,
            theta1,
            seed,
            ..TrainConfig::default()
        };
        let inputs = precompute_inputs(&dataset, &SpectralConfig::default(), 1).unwrap();
        let subset: Vec<usize> = (0..dataset.len()).collect();
        let out = train(
            &inputs,
            &dataset.labels(),
            &subset,
            &geometry,
            Kernel::SxExp,
            &cfg,
            2.5,
            &RngStreams::new(seed),
        )
        .unwrap();
        let w1 = out.params.first_layer();
        let total = (w1.rows() * w1.cols()) as f64;
        w1.iter().filter(|w| w.abs() < 1e-4).count() as f64 / total
    };
    let seeds = [0u64, 1];
    let weak: f64 = seeds.iter().map(|s| near_zero_fraction(1e-4, *s)).sum::<f64>()
        / seeds.len() as f64;
    let strong: f64 = seeds.iter().map(|s| near_zero_fraction(1e-2, *s)).sum::<f64>()
        / seeds.len() as f64;
    assert!(
        strong > weak,
        "near-zero fraction did not grow: {weak} -> {strong}"
    );
}

#[test]
fn saliency_from_trained_model_is_well_formed() {
    let dataset = separable_dataset(9, 55);
    let geometry = geometry_for(&dataset, 2, vec![8], false).unwrap();
    let cfg = TrainConfig {
        epochs: 5,
        batch_size: 6,
        ..TrainConfig::default()
    };
    let inputs = precompute_inputs(&dataset, &SpectralConfig::default(), 1).unwrap();
    let subset: Vec<usize> = (0..dataset.len()).collect();
    let out = train(
        &inputs,
        &dataset.labels(),
        &subset,
        &geometry,
        Kernel::SxExp,
        &cfg,
        2.5,
        &RngStreams::new(cfg.seed),
    )
    .unwrap();
    let saliency = edge_saliency(&out.params);
    assert_eq!(saliency.n, 20);
    assert!(saliency.matrix.is_symmetric());
    assert!(saliency.matrix.iter().all(|v| *v >= 0.0));
    assert_eq!(saliency.scale_profile.len(), 2);
}
