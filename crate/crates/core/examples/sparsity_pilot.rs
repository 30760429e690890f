use lapwave::data::{generate_synthetic, separable_pair_templates, SyntheticSpec};
use lapwave::model::{ModelGeometry, SpectralConfig, TrainConfig};
use lapwave::pipeline::{precompute_inputs, train};
use lapwave::rng::RngStreams;
use lapwave::spectral::Kernel;

fn main() {
    let (t0, t1) = separable_pair_templates::<f64>(20, 5.0).unwrap();
    let dataset = generate_synthetic(&SyntheticSpec {
        n: 20, templates: vec![t0, t1], sigma: 0.05, counts: vec![60, 60], seed: 2007,
    }).unwrap();
    let geometry = ModelGeometry {
        n_nodes: 20, scale_count: 5, hidden_widths: vec![64, 32], n_classes: 2, biases: false,
    };
    let spectral = SpectralConfig::default();
    let inputs = precompute_inputs(&dataset, &spectral, 1).unwrap();
    let subset: Vec<usize> = (0..dataset.len()).collect();
    let labels = dataset.labels();
    for theta1 in [1e-4, 1e-2] {
        for epochs in [40usize] {
            for seed in 0..5u64 {
                let cfg = TrainConfig { theta1, epochs, seed, ..TrainConfig::default() };
                let out = train(&inputs, &labels, &subset, &geometry, Kernel::SxExp, &cfg, 2.5, &RngStreams::new(seed)).unwrap();
                let w1 = out.params.first_layer();
                let total = (w1.rows() * w1.cols()) as f64;
                let frac = w1.iter().filter(|w| w.abs() < 1e-4).count() as f64 / total;
                let mean_abs: f64 = w1.iter().map(|w| w.abs()).sum::<f64>() / total;
                println!("theta1={theta1:.0e} epochs={epochs} seed={seed}: frac_small={frac:.5} mean|w|={mean_abs:.6}");
            }
        }
    }
}
