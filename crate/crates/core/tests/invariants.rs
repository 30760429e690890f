//! Property tests over randomly generated graphs and models.

use lapwave::eigen::eigendecompose;
use lapwave::graph::{build_laplacian, AdjacencyMatrix};
use lapwave::matrix::DenseMatrix;
use lapwave::model::{forward, init_params, Mode, ModelGeometry, SpectralInput, TrainConfig};
use lapwave::rng::RngStreams;
use lapwave::spectral::{transform_exact, Kernel};
use proptest::prelude::*;

/// Strategy: a symmetric nonnegative zero-diagonal weight matrix.
fn adjacency(max_n: usize) -> impl Strategy<Value = AdjacencyMatrix<f64>> {
    (2..=max_n)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                proptest::collection::vec(0.0f64..1.0, pairs),
                proptest::collection::vec(any::<bool>(), pairs),
            )
        })
        .prop_map(|(n, weights, present)| {
            let mut m = DenseMatrix::zeros(n, n);
            let mut idx = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    if present[idx] {
                        m[(i, j)] = weights[idx];
                        m[(j, i)] = weights[idx];
                    }
                    idx += 1;
                }
            }
            AdjacencyMatrix::try_new(m).expect("generated adjacency is valid")
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_rows_sum_to_zero(a in adjacency(12)) {
        let l = build_laplacian(&a, false);
        let scale = a.degrees().iter().fold(1.0f64, |acc, d| acc.max(*d));
        for i in 0..a.n() {
            let row_sum: f64 = l.matrix().row(i).iter().sum();
            prop_assert!(row_sum.abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn laplacian_is_positive_semidefinite(a in adjacency(10)) {
        let l = build_laplacian(&a, false);
        let eig = eigendecompose(&l).unwrap();
        let floor = -1e-8 * l.matrix().inf_norm().max(1.0);
        prop_assert!(eig.eigenvalues()[0] >= floor);
    }

    #[test]
    fn normalized_spectrum_in_zero_two(a in adjacency(10)) {
        let l = build_laplacian(&a, true);
        let eig = eigendecompose(&l).unwrap();
        prop_assert!(eig.eigenvalues()[0] >= -1e-8);
        prop_assert!(eig.max_eigenvalue() <= 2.0 + 1e-8);
    }

    #[test]
    fn transform_slices_stay_symmetric(a in adjacency(8), s in 0.05f64..3.0) {
        let eig = eigendecompose(&build_laplacian(&a, false)).unwrap();
        let ls = transform_exact(&eig, Kernel::SxExp, s);
        prop_assert!(ls.is_symmetric());
    }

    #[test]
    fn softmax_outputs_normalize(a in adjacency(6), seed in 0u64..500) {
        let input = SpectralInput::Exact(
            eigendecompose(&build_laplacian(&a, false)).unwrap(),
        );
        let geometry = ModelGeometry {
            n_nodes: a.n(),
            scale_count: 2,
            hidden_widths: vec![5],
            n_classes: 3,
            biases: false,
        };
        let params =
            init_params::<f64>(&geometry, 2.5, &mut RngStreams::new(seed).stream("init")).unwrap();
        let cfg = TrainConfig::default();
        let trace = forward(&input, &params, Kernel::SxExp, &cfg, Mode::Eval, None).unwrap();
        let total: f64 = trace.probabilities.iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        prop_assert!(trace.probabilities.iter().all(|p| *p > 0.0 && *p < 1.0));
    }
}
