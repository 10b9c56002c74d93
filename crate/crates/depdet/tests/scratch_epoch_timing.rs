use depdet::network::{build_network, NetworkConfig};
use depdet::train::{train, TrainTensors, TrainingConfig};
use ndarray::Array2;
use rand::{Rng, SeedableRng};

#[test]
fn scratch_epoch_timing() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let n = 4102;
    let d = 300;
    let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-0.5f32..0.5));
    let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let xv = Array2::from_shape_fn((548, d), |_| rng.random_range(-0.5f32..0.5));
    let yv: Vec<usize> = (0..548).map(|i| i % 2).collect();
    let network = build_network(&NetworkConfig { input_len: d, seed: 3, ..Default::default() }).unwrap();
    let data = TrainTensors { train_x: x, train_y: y, val_x: xv, val_y: yv };
    let config = TrainingConfig { epochs: 1, batch_size: 16, seed: 3, ..Default::default() };
    let t0 = std::time::Instant::now();
    let (_, h) = train(network, &data, &config).unwrap();
    eprintln!("one epoch on {}x{}: {:?} (train_loss {:.4})", n, d, t0.elapsed(), h.records[0].train_loss);
}
