use super::*;
use ndarray::Array2;

fn reference_config() -> NetworkConfig {
    NetworkConfig::default()
}

#[test]
fn ledger_reproduces_reference_geometry_exactly() {
    let ledger = parameter_ledger(&reference_config());
    let rows: Vec<(&str, Vec<usize>, usize)> = ledger
        .entries
        .iter()
        .map(|e| (e.name.as_str(), e.output_shape.clone(), e.total_params()))
        .collect();
    let expected: Vec<(&str, Vec<usize>, usize)> = vec![
        ("conv1d", vec![298, 100], 400),
        ("batch_normalization", vec![298, 100], 400),
        ("max_pooling1d", vec![149, 100], 0),
        ("bidirectional_lstm", vec![149, 256], 234_496),
        ("batch_normalization_1", vec![149, 256], 1_024),
        ("flatten", vec![38_144], 0),
        ("dense", vec![256], 9_765_120),
        ("dropout", vec![256], 0),
        ("dense_1", vec![128], 32_896),
        ("dropout_1", vec![128], 0),
        ("dense_2", vec![2], 258),
    ];
    assert_eq!(rows, expected);
    assert_eq!(ledger.total_params, 10_034_594);
    assert_eq!(ledger.trainable_params, 10_033_882);
    assert_eq!(ledger.non_trainable_params, 712);
}

#[test]
fn ledger_matches_allocated_arrays_for_various_input_lens() {
    for input_len in [8, 10, 33, 64] {
        let config = NetworkConfig {
            input_len,
            conv_filters: 12,
            lstm_units_per_direction: 7,
            dense1_units: 20,
            dense2_units: 10,
            ..Default::default()
        };
        let network = build_network(&config).unwrap();
        let ledger = network.ledger();
        let introspected = network.introspect_params();
        assert_eq!(ledger.entries.len(), introspected.len());
        for (entry, (name, trainable, non_trainable)) in
            ledger.entries.iter().zip(&introspected)
        {
            assert_eq!(&entry.name, name);
            assert_eq!(
                entry.trainable_params, *trainable,
                "trainable mismatch in {name} at D={input_len}"
            );
            assert_eq!(
                entry.non_trainable_params, *non_trainable,
                "non-trainable mismatch in {name} at D={input_len}"
            );
        }
    }
}

#[test]
fn shape_chain_examples() {
    // D=10: conv 8, pool 4, flatten 4*256=1024, dense params 1024*256+256
    let config = NetworkConfig {
        input_len: 10,
        ..Default::default()
    };
    assert_eq!(config.conv_out_len(), 8);
    assert_eq!(config.pooled_len(), 4);
    assert_eq!(config.flatten_dim(), 1024);
    let ledger = parameter_ledger(&config);
    let dense = ledger.entries.iter().find(|e| e.name == "dense").unwrap();
    assert_eq!(dense.trainable_params, 1024 * 256 + 256);

    // final layer is 128*2+2 regardless of input length
    let dense2 = ledger.entries.iter().find(|e| e.name == "dense_2").unwrap();
    assert_eq!(dense2.trainable_params, 258);
}

#[test]
fn minimum_input_len_collapses_sequence() {
    let config = NetworkConfig {
        input_len: 3,
        ..Default::default()
    };
    let err = build_network(&config).unwrap_err();
    assert!(matches!(err, Error::SequenceCollapsed { input_len: 3 }), "{err}");
}

#[test]
fn config_invariants_are_enforced() {
    let ok = NetworkConfig::default();
    assert!(ok.validate().is_ok());
    let mut bad = ok.clone();
    bad.l2_dense2 = bad.l2_dense1;
    assert!(bad.validate().is_err(), "l2 ordering");
    let mut bad = ok.clone();
    bad.dropout_rate = 1.0;
    assert!(bad.validate().is_err(), "dropout range");
    let mut bad = ok.clone();
    bad.n_classes = 3;
    assert!(bad.validate().is_err(), "binary only");
    let mut bad = ok;
    bad.input_len = 2;
    assert!(bad.validate().is_err(), "input shorter than kernel");
}

fn tiny_config() -> NetworkConfig {
    NetworkConfig {
        input_len: 12,
        conv_filters: 6,
        conv_kernel: 3,
        pool_size: 2,
        lstm_units_per_direction: 5,
        dense1_units: 16,
        dense2_units: 8,
        dropout_rate: 0.0,
        l2_dense1: 1e-3,
        l2_dense2: 5e-3,
        n_classes: 2,
        seed: 7,
    }
}

fn probe_batch(b: usize, d: usize, seed: u64) -> Array2<f32> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((b, d), |_| rng.random_range(-1.0f32..1.0))
}

#[test]
fn infer_outputs_are_probability_rows() {
    let network = build_network(&tiny_config()).unwrap();
    let batch = probe_batch(5, 12, 1);
    let p = network.infer(&batch).unwrap();
    assert_eq!(p.shape(), &[5, 2]);
    for row in p.rows() {
        let sum: f32 = row.sum();
        assert!((sum - 1.0).abs() < 1e-6, "row sums to {sum}");
        assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn empty_batch_gives_empty_output() {
    let network = build_network(&tiny_config()).unwrap();
    let batch = Array2::zeros((0, 12));
    let p = network.infer(&batch).unwrap();
    assert_eq!(p.shape(), &[0, 2]);
}

#[test]
fn width_mismatch_is_rejected() {
    let network = build_network(&tiny_config()).unwrap();
    let batch = Array2::zeros((2, 9));
    assert!(matches!(
        network.infer(&batch).unwrap_err(),
        Error::BatchWidthMismatch { expected: 12, got: 9 }
    ));
}

#[test]
fn inference_is_deterministic() {
    let network = build_network(&tiny_config()).unwrap();
    let batch = probe_batch(4, 12, 2);
    assert_eq!(network.infer(&batch).unwrap(), network.infer(&batch).unwrap());
}

#[test]
fn training_forward_with_dropout_is_stochastic() {
    use rand::SeedableRng;
    let mut config = tiny_config();
    config.dropout_rate = 0.3;
    let mut network = build_network(&config).unwrap();
    let batch = probe_batch(4, 12, 3);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let first = network.forward_train(&batch, &mut rng).unwrap();
    let mut any_diff = false;
    for _ in 0..10 {
        let next = network.forward_train(&batch, &mut rng).unwrap();
        if next
            .iter()
            .zip(first.iter())
            .any(|(a, b)| (a - b).abs() > 1e-7)
        {
            any_diff = true;
            break;
        }
    }
    assert!(any_diff, "dropout left 10 training forwards identical");
}

#[test]
fn build_is_seed_deterministic() {
    let a = build_network(&tiny_config()).unwrap();
    let b = build_network(&tiny_config()).unwrap();
    for ((n1, s1, v1), (n2, s2, v2)) in a.state_tensors().into_iter().zip(b.state_tensors()) {
        assert_eq!(n1, n2);
        assert_eq!(s1, s2);
        assert_eq!(v1, v2, "tensor {n1} differs between identical builds");
    }
}

#[test]
fn snapshot_restore_roundtrip() {
    let mut network = build_network(&tiny_config()).unwrap();
    let batch = probe_batch(3, 12, 4);
    let before = network.infer(&batch).unwrap();
    let snapshot = network.snapshot();
    // clobber the weights
    network.visit_params(|_, w, _| w.iter_mut().for_each(|v| *v += 0.5));
    assert_ne!(network.infer(&batch).unwrap(), before);
    network.restore(&snapshot);
    assert_eq!(network.infer(&batch).unwrap(), before);
}

/// Cross-entropy loss of the training-mode forward pass, plus L2 penalty;
/// the scalar the finite-difference oracle differentiates.
fn train_loss(network: &mut Network, batch: &Array2<f32>, targets: &[usize]) -> f64 {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let logits = network.forward_train(batch, &mut rng).unwrap();
    let p = softmax_rows(&logits);
    let b = batch.nrows();
    let mut loss = 0.0f64;
    for (r, &t) in targets.iter().enumerate() {
        loss -= (p[[r, t]] as f64).max(1e-12).ln();
    }
    loss / b as f64 + network.l2_penalty() as f64
}

#[test]
fn analytic_gradients_match_finite_differences() {
    use rand::SeedableRng;
    let mut network = build_network(&tiny_config()).unwrap();
    let batch = probe_batch(4, 12, 5);
    let targets = [0usize, 1, 1, 0];

    // analytic gradients
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let logits = network.forward_train(&batch, &mut rng).unwrap();
    let p = softmax_rows(&logits);
    let b = batch.nrows() as f32;
    let mut dlogits = p.clone();
    for (r, &t) in targets.iter().enumerate() {
        dlogits[[r, t]] -= 1.0;
    }
    dlogits /= b;
    network.backward(&dlogits);

    // collect (tensor index, grads) via the visitor
    let mut grads: Vec<Vec<f32>> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    network.visit_params(|_, w, g| {
        grads.push(g.to_vec());
        sizes.push(w.len());
    });

    // Probe a few coordinates per tensor with central differences. ReLU
    // kinks make a small fraction of probes cross a non-differentiable
    // point, so require 95% tight agreement and sane magnitudes everywhere.
    let mut checked = 0usize;
    let mut loose = 0usize;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for tensor_idx in 0..sizes.len() {
        let len = sizes[tensor_idx];
        let n_probe = len.min(6);
        for probe in 0..n_probe {
            let elem = if len <= 6 {
                probe
            } else {
                use rand::Rng;
                rng.random_range(0..len)
            };
            let delta = 1e-3f32;
            let bump = |amount: f32, net: &mut Network| {
                let mut idx = 0;
                net.visit_params(|_, w, _| {
                    if idx == tensor_idx {
                        w[elem] += amount;
                    }
                    idx += 1;
                });
            };
            bump(delta, &mut network);
            let plus = train_loss(&mut network, &batch, &targets);
            bump(-2.0 * delta, &mut network);
            let minus = train_loss(&mut network, &batch, &targets);
            bump(delta, &mut network);
            let fd = (plus - minus) / (2.0 * delta as f64);
            let analytic = grads[tensor_idx][elem] as f64;
            let err = (fd - analytic).abs();
            let tight = 2e-2 * analytic.abs().max(fd.abs()) + 2e-3;
            let sane = 0.25 * analytic.abs().max(fd.abs()) + 5e-3;
            assert!(
                err < sane,
                "tensor {tensor_idx} elem {elem}: fd {fd:.6} vs analytic {analytic:.6}"
            );
            if err >= tight {
                loose += 1;
            }
            checked += 1;
        }
    }
    assert!(checked > 40, "probed only {checked} coordinates");
    assert!(
        loose * 20 <= checked,
        "{loose}/{checked} probes outside the tight tolerance"
    );
}
