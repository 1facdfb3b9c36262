use centroid_encoder::analysis::{knn_predict, pca_fit, variance_curve};
use centroid_encoder::dataset::{build_targets, compute_centroids, stratified_split, Dataset, Standardizer};
use centroid_encoder::network::{
    decode_model, encode_model, forward, init_params, Activation, NetworkSpec, SavedModel,
};
use centroid_encoder::{Matrix, SeededRng};
use proptest::prelude::*;

fn naive_matmul(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_fn(a.rows(), b.cols(), |i, j| (0..a.cols()).map(|k| a.row(i)[k] * b.row(k)[j]).sum())
}

fn matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = SeededRng::new(seed);
    Matrix::new(rows, cols, rng.uniform(-1.0, 1.0, rows * cols)).unwrap()
}

fn labelled(n: usize, d: usize, m: usize, seed: u64) -> Dataset {
    let mut rng = SeededRng::new(seed);
    let labels: Vec<usize> = (0..n).map(|i| if i < m { i } else { rng.below(m) }).collect();
    Dataset::new(Matrix::new(n, d, rng.uniform(-2.0, 2.0, n * d)).unwrap(), labels).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 48,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn matmul_agrees_with_triple_loop(m in 1usize..40, k in 1usize..300, n in 1usize..40, seed: u64) {
        let (a, b) = (matrix(m, k, seed), matrix(k, n, seed ^ 1));
        let got = a.matmul(&b).unwrap();
        prop_assert!(got.max_abs_diff(&naive_matmul(&a, &b)).unwrap() < 1e-12 * k as f64);
    }

    #[test]
    fn matmul_is_associative(m in 1usize..12, k in 1usize..12, l in 1usize..12, n in 1usize..12, seed: u64) {
        let (a, b, c) = (matrix(m, k, seed), matrix(k, l, seed ^ 2), matrix(l, n, seed ^ 3));
        let left = a.matmul(&b).unwrap().matmul(&c).unwrap();
        let right = a.matmul(&b.matmul(&c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-12);
    }

    #[test]
    fn matmul_leaves_inputs_untouched(m in 1usize..20, k in 1usize..20, seed: u64) {
        let a = matrix(m, k, seed);
        let copy = a.clone();
        let first = a.t_matmul(&a).unwrap();
        prop_assert_eq!(&a, &copy);
        prop_assert_eq!(first, a.t_matmul(&a).unwrap());
    }

    #[test]
    fn transposed_products(m in 1usize..20, k in 1usize..20, n in 1usize..20, seed: u64) {
        let a = matrix(k, m, seed);
        let b = matrix(k, n, seed ^ 5);
        let c = matrix(m, n, seed ^ 6);
        prop_assert!(a.t_matmul(&b).unwrap().max_abs_diff(&naive_matmul(&a.transpose(), &b)).unwrap() < 1e-12);
        prop_assert!(b.matmul_t(&c).unwrap().max_abs_diff(&naive_matmul(&b, &c.transpose())).unwrap() < 1e-12);
    }

    /// Axis permutations, reflections and integer shifts preserve every
    /// squared distance exactly, so predictions must not move.
    #[test]
    fn knn_is_invariant_under_exact_rigid_motions(n in 5usize..60, q in 1usize..30, k in 1usize..5, seed: u64) {
        let mut rng = SeededRng::new(seed);
        let grid = |rng: &mut SeededRng, rows: usize| Matrix::from_fn(rows, 3, |_, _| (rng.below(7) as f64) - 3.0);
        let train = grid(&mut rng, n);
        let queries = grid(&mut rng, q);
        let labels: Vec<usize> = (0..n).map(|_| rng.below(3)).collect();
        let k = k.min(n);
        let shift = [rng.below(5) as f64, -(rng.below(5) as f64), 2.0];
        let moved = |x: &Matrix| Matrix::from_fn(x.rows(), 3, |i, j| {
            let r = x.row(i);
            [-r[2], r[0], r[1]][j] + shift[j]
        });
        let before = knn_predict(&train, &labels, &queries, k).unwrap();
        let after = knn_predict(&moved(&train), &labels, &moved(&queries), k).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn variance_curve_ignores_rotation_and_shift(n in 3usize..40, d in 1usize..6, seed: u64) {
        let x = matrix(n, d, seed);
        let rotation = centroid_encoder::analysis::orthonormal_basis(&matrix(d, d, seed ^ 9));
        prop_assume!(rotation.is_ok());
        let mut y = x.matmul(&rotation.unwrap()).unwrap();
        y.add_row_vector(&vec![3.5; d]);
        let a = pca_fit(&x).unwrap();
        let b = pca_fit(&y).unwrap();
        prop_assume!(a.eigenvalues.iter().sum::<f64>() > 1e-6);
        let ca = variance_curve(&a, d).unwrap();
        let cb = variance_curve(&b, d).unwrap();
        for (u, v) in ca.iter().zip(&cb) {
            prop_assert!((u - v).abs() < 1e-9, "{ca:?} vs {cb:?}");
        }
    }

    #[test]
    fn stratified_split_partitions_each_class(n in 6usize..120, m in 1usize..4, frac in 0.1f64..0.9, seed: u64) {
        let ds = labelled(n, 2, m, seed);
        prop_assume!(ds.class_counts().iter().all(|&c| c >= 2));
        let split = stratified_split(&ds, frac, &mut SeededRng::new(seed)).unwrap();
        let mut all: Vec<usize> = split.train.iter().chain(&split.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        for (j, &count) in ds.class_counts().iter().enumerate() {
            let held = split.test.iter().filter(|&&i| ds.labels()[i] == j).count();
            let expected = ((count as f64 * frac).round() as usize).clamp(1, count - 1);
            prop_assert_eq!(held, expected);
        }
    }

    #[test]
    fn centroid_targets_are_class_means(n in 3usize..50, d in 1usize..5, m in 1usize..4, seed: u64) {
        let ds = labelled(n, d, m, seed);
        let cs = compute_centroids(&ds).unwrap();
        let targets = build_targets(&ds, &cs).unwrap();
        for j in 0..m {
            let members: Vec<usize> = (0..n).filter(|&i| ds.labels()[i] == j).collect();
            for f in 0..d {
                let mean = members.iter().map(|&i| ds.x().row(i)[f]).sum::<f64>() / members.len() as f64;
                prop_assert!((cs.centroid(j)[f] - mean).abs() < 1e-12);
            }
        }
        for i in 0..n {
            prop_assert_eq!(targets.row(i), cs.centroid(ds.labels()[i]));
        }
    }

    #[test]
    fn standardized_training_columns(n in 2usize..60, d in 1usize..5, seed: u64) {
        let x = matrix(n, d, seed);
        let rows: Vec<usize> = (0..n).collect();
        let st = Standardizer::fit(&x, &rows).unwrap();
        let z = st.apply(&x).unwrap();
        for f in 0..d {
            let col = z.column(f);
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            prop_assert!(mean.abs() < 1e-10);
            prop_assert!((var - 1.0).abs() < 1e-9 || st.std[f] == 0.0);
        }
    }

    /// Forward pass against an explicit per-sample, per-unit loop.
    #[test]
    fn forward_matches_scalar_loops(widths in proptest::collection::vec(1usize..9, 1..4), n in 1usize..6, relu: bool, seed: u64) {
        let input = widths[0];
        let mut w = vec![input];
        w.extend_from_slice(&widths[1..]);
        w.push(2);
        w.extend(widths[1..].iter().rev());
        w.push(input);
        let act = if relu { Activation::Relu } else { Activation::Tanh };
        let bottleneck = widths.len();
        let acts: Vec<Activation> = (0..w.len() - 1)
            .map(|l| if l + 1 == bottleneck || l + 2 == w.len() { Activation::Identity } else { act })
            .collect();
        let spec = NetworkSpec::new(w, acts.clone(), bottleneck).unwrap();
        let mut rng = SeededRng::new(seed);
        let mut params = init_params(&spec, &mut rng);
        for layer in &mut params.layers {
            layer.bias = rng.uniform(-0.3, 0.3, layer.bias.len());
        }
        let x = matrix(n, input, seed ^ 7);
        let got = forward(&params, &spec, &x).unwrap();
        for i in 0..n {
            let mut a: Vec<f64> = x.row(i).to_vec();
            for (l, layer) in params.layers.iter().enumerate() {
                a = (0..layer.bias.len())
                    .map(|o| {
                        let z = layer.bias[o] + (0..a.len()).map(|p| a[p] * layer.weights.row(p)[o]).sum::<f64>();
                        match acts[l] {
                            Activation::Identity => z,
                            Activation::Tanh => z.tanh(),
                            Activation::Relu => z.max(0.0),
                        }
                    })
                    .collect();
            }
            for (u, v) in a.iter().zip(got.output().row(i)) {
                prop_assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn forward_is_row_equivariant(n in 2usize..20, seed: u64) {
        let spec = NetworkSpec::bottleneck(5, &[7, 4], 2, Activation::Tanh).unwrap();
        let params = init_params(&spec, &mut SeededRng::new(seed));
        let x = matrix(n, 5, seed);
        let perm = SeededRng::new(seed ^ 11).permutation(n);
        let whole = forward(&params, &spec, &x).unwrap();
        let permuted = forward(&params, &spec, &x.select_rows(&perm)).unwrap();
        prop_assert_eq!(permuted.output(), &whole.output().select_rows(&perm));
        let single = forward(&params, &spec, &x.select_rows(&[n - 1])).unwrap();
        prop_assert_eq!(single.output().row(0), whole.output().row(n - 1));
    }

    #[test]
    fn model_container_round_trips(hidden in proptest::collection::vec(1usize..12, 0..3), m in 1usize..4, seed: u64, with_norm: bool) {
        let spec = NetworkSpec::bottleneck(6, &hidden, m, Activation::Relu).unwrap();
        let params = init_params(&spec, &mut SeededRng::new(seed));
        let standardizer = with_norm.then(|| Standardizer { mean: vec![0.5; 6], std: vec![2.0, 0.0, 1.0, 1.0, 3.0, 0.25] });
        let model = SavedModel { spec, params, standardizer };
        let bytes = encode_model(&model).unwrap();
        prop_assert_eq!(decode_model(&bytes, std::path::Path::new("mem")).unwrap(), model);
        prop_assert!(decode_model(&bytes[..bytes.len() - 1], std::path::Path::new("mem")).is_err());
    }
}

#[test]
fn doubling_samples_doubles_updates() {
    let cfg = centroid_encoder::training::TrainConfig {
        batch_size: 64,
        ..Default::default()
    };
    for n in [64, 100, 1000, 4097] {
        let (one, two) = (cfg.updates_per_epoch(n), cfg.updates_per_epoch(2 * n));
        assert!(two <= 2 * one && two >= 2 * one - 1, "{n}: {one} vs {two}");
    }
}
