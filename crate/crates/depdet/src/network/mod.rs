//! The CNN-BiLSTM classifier.
//!
//! Layer stack (input: one document vector of length D, treated as a
//! length-D sequence with one channel):
//!
//! Conv1D(filters, kernel, ReLU, valid) -> BatchNorm -> MaxPool1D ->
//! Bidirectional LSTM (sequence-returning, concatenated) -> BatchNorm ->
//! Flatten -> Dense(+ReLU, l2) -> Dropout -> Dense(+ReLU, higher l2) ->
//! Dropout -> Dense(n_classes, softmax).
//!
//! Every layer's parameter count has a closed form, exposed as a ledger
//! that can be audited without the training stack and is checked against
//! the actually allocated arrays.

mod layers;

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use layers::softmax_rows;
use layers::{BatchNorm, BiLstm, Conv1dRelu, Dense, Dropout, MaxPool1d};

/// Hyperparameters of the classifier. `input_len` is the document-vector
/// dimension D; the defaults instantiate the reference geometry (D = 300).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct NetworkConfig {
    pub input_len: usize,
    pub conv_filters: usize,
    pub conv_kernel: usize,
    pub pool_size: usize,
    pub lstm_units_per_direction: usize,
    pub dense1_units: usize,
    pub dense2_units: usize,
    pub dropout_rate: f32,
    pub l2_dense1: f32,
    pub l2_dense2: f32,
    pub n_classes: usize,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            input_len: 300,
            conv_filters: 100,
            conv_kernel: 3,
            pool_size: 2,
            lstm_units_per_direction: 128,
            dense1_units: 256,
            dense2_units: 128,
            dropout_rate: 0.30,
            l2_dense1: 1e-3,
            l2_dense2: 5e-3,
            n_classes: 2,
            seed: 42,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidNetworkConfig(msg.into()));
        if self.conv_kernel == 0 || self.conv_filters == 0 || self.pool_size == 0 {
            return bad("conv/pool sizes must be positive");
        }
        if self.lstm_units_per_direction == 0 || self.dense1_units == 0 || self.dense2_units == 0 {
            return bad("unit counts must be positive");
        }
        if self.input_len < self.conv_kernel {
            return bad("input_len must be >= conv_kernel");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout_rate must be in [0, 1)");
        }
        if self.l2_dense2 <= self.l2_dense1 {
            return bad("l2_dense2 must exceed l2_dense1");
        }
        if self.n_classes != 2 {
            return bad("n_classes must be 2");
        }
        if self.pooled_len() == 0 {
            return Err(Error::SequenceCollapsed {
                input_len: self.input_len,
            });
        }
        Ok(())
    }

    pub fn conv_out_len(&self) -> usize {
        self.input_len - self.conv_kernel + 1
    }

    pub fn pooled_len(&self) -> usize {
        self.conv_out_len() / self.pool_size
    }

    pub fn flatten_dim(&self) -> usize {
        self.pooled_len() * 2 * self.lstm_units_per_direction
    }
}

/// One row of the parameter ledger.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerLedgerEntry {
    pub name: String,
    pub output_shape: Vec<usize>,
    pub trainable_params: usize,
    pub non_trainable_params: usize,
}

impl LayerLedgerEntry {
    pub fn total_params(&self) -> usize {
        self.trainable_params + self.non_trainable_params
    }
}

/// Full closed-form ledger with totals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterLedger {
    pub entries: Vec<LayerLedgerEntry>,
    pub total_params: usize,
    pub trainable_params: usize,
    pub non_trainable_params: usize,
}

/// Closed-form parameter ledger for a config, independent of any allocated
/// network.
pub fn parameter_ledger(config: &NetworkConfig) -> ParameterLedger {
    let f = config.conv_filters;
    let h = config.lstm_units_per_direction;
    let t1 = config.conv_out_len();
    let t2 = config.pooled_len();
    let flat = config.flatten_dim();
    let conv_params = config.conv_kernel * 1 * f + f;
    // per direction: 4 * (h*(h + in) + h), inputs are the conv filters
    let lstm_params = 2 * 4 * (h * (h + f) + h);
    let entry = |name: &str, shape: Vec<usize>, trainable: usize, non_trainable: usize| {
        LayerLedgerEntry {
            name: name.to_string(),
            output_shape: shape,
            trainable_params: trainable,
            non_trainable_params: non_trainable,
        }
    };
    let entries = vec![
        entry("conv1d", vec![t1, f], conv_params, 0),
        entry("batch_normalization", vec![t1, f], 2 * f, 2 * f),
        entry("max_pooling1d", vec![t2, f], 0, 0),
        entry("bidirectional_lstm", vec![t2, 2 * h], lstm_params, 0),
        entry("batch_normalization_1", vec![t2, 2 * h], 2 * 2 * h, 2 * 2 * h),
        entry("flatten", vec![flat], 0, 0),
        entry(
            "dense",
            vec![config.dense1_units],
            flat * config.dense1_units + config.dense1_units,
            0,
        ),
        entry("dropout", vec![config.dense1_units], 0, 0),
        entry(
            "dense_1",
            vec![config.dense2_units],
            config.dense1_units * config.dense2_units + config.dense2_units,
            0,
        ),
        entry("dropout_1", vec![config.dense2_units], 0, 0),
        entry(
            "dense_2",
            vec![config.n_classes],
            config.dense2_units * config.n_classes + config.n_classes,
            0,
        ),
    ];
    let trainable = entries.iter().map(|e| e.trainable_params).sum();
    let non_trainable = entries.iter().map(|e| e.non_trainable_params).sum();
    ParameterLedger {
        entries,
        total_params: trainable + non_trainable,
        trainable_params: trainable,
        non_trainable_params: non_trainable,
    }
}

/// Instantiated classifier. A network is confined to one training context
/// at a time; inference ([`Network::infer`]) is `&self` and safe to share.
#[derive(Debug)]
pub struct Network {
    config: NetworkConfig,
    conv: Conv1dRelu,
    bn1: BatchNorm,
    pool: MaxPool1d,
    bilstm: BiLstm,
    bn2: BatchNorm,
    dense1: Dense,
    drop1: Dropout,
    dense2: Dense,
    drop2: Dropout,
    dense_out: Dense,
}

/// Build and initialize the network (uniform fan-scaled weights, zero
/// biases except the LSTM forget gate, identity BatchNorm).
pub fn build_network(config: &NetworkConfig) -> Result<Network> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let f = config.conv_filters;
    let h = config.lstm_units_per_direction;
    Ok(Network {
        conv: Conv1dRelu::new(config.conv_kernel, 1, f, &mut rng),
        bn1: BatchNorm::new(f),
        pool: MaxPool1d::new(config.pool_size),
        bilstm: BiLstm::new(f, h, &mut rng),
        bn2: BatchNorm::new(2 * h),
        dense1: Dense::new(
            config.flatten_dim(),
            config.dense1_units,
            true,
            config.l2_dense1,
            &mut rng,
        ),
        drop1: Dropout::new(config.dropout_rate),
        dense2: Dense::new(
            config.dense1_units,
            config.dense2_units,
            true,
            config.l2_dense2,
            &mut rng,
        ),
        drop2: Dropout::new(config.dropout_rate),
        dense_out: Dense::new(config.dense2_units, config.n_classes, false, 0.0, &mut rng),
        config: config.clone(),
    })
}

impl Network {
    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn ledger(&self) -> ParameterLedger {
        parameter_ledger(&self.config)
    }

    /// Per-layer (trainable, non_trainable) counts measured from the
    /// actually allocated arrays, in ledger row order.
    pub fn introspect_params(&self) -> Vec<(String, usize, usize)> {
        let bn = |b: &BatchNorm| {
            (
                b.gamma.len() + b.beta.len(),
                b.moving_mean.len() + b.moving_var.len(),
            )
        };
        let dense = |d: &Dense| (d.w.len() + d.b.len(), 0);
        let lstm = &self.bilstm;
        let lstm_count = |d: &layers::LstmDirection| d.w.len() + d.u.len() + d.b.len();
        vec![
            (
                "conv1d".into(),
                self.conv.w.len() + self.conv.b.len(),
                0,
            ),
            ("batch_normalization".into(), bn(&self.bn1).0, bn(&self.bn1).1),
            ("max_pooling1d".into(), 0, 0),
            (
                "bidirectional_lstm".into(),
                lstm_count(&lstm.fwd) + lstm_count(&lstm.bwd),
                0,
            ),
            ("batch_normalization_1".into(), bn(&self.bn2).0, bn(&self.bn2).1),
            ("flatten".into(), 0, 0),
            ("dense".into(), dense(&self.dense1).0, 0),
            ("dropout".into(), 0, 0),
            ("dense_1".into(), dense(&self.dense2).0, 0),
            ("dropout_1".into(), 0, 0),
            ("dense_2".into(), dense(&self.dense_out).0, 0),
        ]
    }

    fn check_width(&self, batch: &Array2<f32>) -> Result<()> {
        if batch.ncols() != self.config.input_len {
            return Err(Error::BatchWidthMismatch {
                expected: self.config.input_len,
                got: batch.ncols(),
            });
        }
        Ok(())
    }

    /// Inference-mode forward: batch (B, D) -> class probabilities (B, 2).
    /// Deterministic, no dropout, BatchNorm uses moving statistics.
    pub fn infer(&self, batch: &Array2<f32>) -> Result<Array2<f32>> {
        Ok(softmax_rows(&self.infer_logits(batch)?))
    }

    pub(crate) fn infer_logits(&self, batch: &Array2<f32>) -> Result<Array2<f32>> {
        self.check_width(batch)?;
        let b = batch.nrows();
        if b == 0 {
            return Ok(Array2::zeros((0, self.config.n_classes)));
        }
        let t1 = self.config.conv_out_len();
        let t2 = self.config.pooled_len();
        let x = self.conv.forward_infer(batch);
        let x = self.bn1.forward_infer(&x);
        let x = self.pool.forward_infer(&x, b, t1);
        let x = self.bilstm.forward_infer(&x, b, t2);
        let x = self.bn2.forward_infer(&x);
        let x = flatten(&x, b, self.config.flatten_dim());
        let x = self.dense1.forward_infer(&x);
        let x = self.dense2.forward_infer(&x);
        Ok(self.dense_out.forward_infer(&x))
    }

    /// Training-mode forward producing logits; caches are stored for the
    /// following [`Network::backward`].
    pub fn forward_train(&mut self, batch: &Array2<f32>, rng: &mut ChaCha8Rng) -> Result<Array2<f32>> {
        self.check_width(batch)?;
        let b = batch.nrows();
        if b == 0 {
            return Ok(Array2::zeros((0, self.config.n_classes)));
        }
        let t1 = self.config.conv_out_len();
        let t2 = self.config.pooled_len();
        let x = self.conv.forward_train(batch);
        let x = self.bn1.forward_train(&x);
        let x = self.pool.forward_train(&x, b, t1);
        let x = self.bilstm.forward_train(&x, b, t2);
        let x = self.bn2.forward_train(&x);
        let x = flatten(&x, b, self.config.flatten_dim());
        let x = self.dense1.forward_train(&x);
        let x = self.drop1.forward_train(&x, rng);
        let x = self.dense2.forward_train(&x);
        let x = self.drop2.forward_train(&x, rng);
        Ok(self.dense_out.forward_train(&x))
    }

    /// Backpropagate from dL/dlogits, filling every layer's gradient
    /// buffers.
    pub fn backward(&mut self, dlogits: &Array2<f32>) {
        let b = dlogits.nrows();
        let t2 = self.config.pooled_len();
        let d = self.dense_out.backward(dlogits);
        let d = self.drop2.backward(&d);
        let d = self.dense2.backward(&d);
        let d = self.drop1.backward(&d);
        let d = self.dense1.backward(&d);
        let d = unflatten(&d, b, t2, 2 * self.config.lstm_units_per_direction);
        let d = self.bn2.backward(&d);
        let d = self.bilstm.backward(&d, b, t2);
        let d = self.pool.backward(&d);
        let d = self.bn1.backward(&d);
        self.conv.backward(&d);
    }

    /// Sum of L2 kernel penalties (part of the training/validation loss).
    pub fn l2_penalty(&self) -> f32 {
        self.dense1.l2_penalty() + self.dense2.l2_penalty()
    }

    /// Visit every trainable tensor as (name, params, grads), in a stable
    /// order.
    pub fn visit_params(&mut self, mut f: impl FnMut(&str, &mut [f32], &[f32])) {
        f(
            "conv.w",
            self.conv.w.as_slice_mut().unwrap(),
            self.conv.dw.as_slice().unwrap(),
        );
        f(
            "conv.b",
            self.conv.b.as_slice_mut().unwrap(),
            self.conv.db.as_slice().unwrap(),
        );
        f(
            "bn1.gamma",
            self.bn1.gamma.as_slice_mut().unwrap(),
            self.bn1.dgamma.as_slice().unwrap(),
        );
        f(
            "bn1.beta",
            self.bn1.beta.as_slice_mut().unwrap(),
            self.bn1.dbeta.as_slice().unwrap(),
        );
        for (tag, dir) in [("fwd", &mut self.bilstm.fwd), ("bwd", &mut self.bilstm.bwd)] {
            f(
                &format!("lstm.{tag}.w"),
                dir.w.as_slice_mut().unwrap(),
                dir.dw.as_slice().unwrap(),
            );
            f(
                &format!("lstm.{tag}.u"),
                dir.u.as_slice_mut().unwrap(),
                dir.du.as_slice().unwrap(),
            );
            f(
                &format!("lstm.{tag}.b"),
                dir.b.as_slice_mut().unwrap(),
                dir.db.as_slice().unwrap(),
            );
        }
        f(
            "bn2.gamma",
            self.bn2.gamma.as_slice_mut().unwrap(),
            self.bn2.dgamma.as_slice().unwrap(),
        );
        f(
            "bn2.beta",
            self.bn2.beta.as_slice_mut().unwrap(),
            self.bn2.dbeta.as_slice().unwrap(),
        );
        for (tag, dense) in [
            ("dense1", &mut self.dense1),
            ("dense2", &mut self.dense2),
            ("dense_out", &mut self.dense_out),
        ] {
            f(
                &format!("{tag}.w"),
                dense.w.as_slice_mut().unwrap(),
                dense.dw.as_slice().unwrap(),
            );
            f(
                &format!("{tag}.b"),
                dense.b.as_slice_mut().unwrap(),
                dense.db.as_slice().unwrap(),
            );
        }
    }

    /// Every state tensor (trainable weights plus BatchNorm moving
    /// statistics) as (name, shape, values), for persistence.
    pub fn state_tensors(&self) -> Vec<(String, Vec<usize>, Vec<f32>)> {
        let mut out = Vec::new();
        let p2 = |out: &mut Vec<(String, Vec<usize>, Vec<f32>)>, name: &str, a: &Array2<f32>| {
            out.push((name.into(), a.shape().to_vec(), a.iter().cloned().collect()));
        };
        let p1 = |out: &mut Vec<(String, Vec<usize>, Vec<f32>)>, name: &str, a: &ndarray::Array1<f32>| {
            out.push((name.into(), vec![a.len()], a.to_vec()));
        };
        p2(&mut out, "conv.w", &self.conv.w);
        p1(&mut out, "conv.b", &self.conv.b);
        for (tag, bn) in [("bn1", &self.bn1), ("bn2", &self.bn2)] {
            p1(&mut out, &format!("{tag}.gamma"), &bn.gamma);
            p1(&mut out, &format!("{tag}.beta"), &bn.beta);
            p1(&mut out, &format!("{tag}.moving_mean"), &bn.moving_mean);
            p1(&mut out, &format!("{tag}.moving_var"), &bn.moving_var);
        }
        for (tag, dir) in [("fwd", &self.bilstm.fwd), ("bwd", &self.bilstm.bwd)] {
            p2(&mut out, &format!("lstm.{tag}.w"), &dir.w);
            p2(&mut out, &format!("lstm.{tag}.u"), &dir.u);
            p1(&mut out, &format!("lstm.{tag}.b"), &dir.b);
        }
        for (tag, dense) in [
            ("dense1", &self.dense1),
            ("dense2", &self.dense2),
            ("dense_out", &self.dense_out),
        ] {
            p2(&mut out, &format!("{tag}.w"), &dense.w);
            p1(&mut out, &format!("{tag}.b"), &dense.b);
        }
        out
    }

    /// Load state tensors by name (shape-checked); inverse of
    /// [`Network::state_tensors`].
    pub fn load_state_tensors(
        &mut self,
        tensors: &mut BTreeMap<String, (Vec<usize>, Vec<f32>)>,
    ) -> Result<()> {
        let expected = self.state_tensors();
        for (name, shape, _) in &expected {
            let values = crate::tensor_io::take_tensor(tensors, name, shape)?;
            self.assign_tensor(name, &values);
        }
        Ok(())
    }

    fn assign_tensor(&mut self, name: &str, values: &[f32]) {
        let assign2 = |a: &mut Array2<f32>, v: &[f32]| {
            a.as_slice_mut().unwrap().copy_from_slice(v);
        };
        let assign1 = |a: &mut ndarray::Array1<f32>, v: &[f32]| {
            a.as_slice_mut().unwrap().copy_from_slice(v);
        };
        match name {
            "conv.w" => assign2(&mut self.conv.w, values),
            "conv.b" => assign1(&mut self.conv.b, values),
            "bn1.gamma" => assign1(&mut self.bn1.gamma, values),
            "bn1.beta" => assign1(&mut self.bn1.beta, values),
            "bn1.moving_mean" => assign1(&mut self.bn1.moving_mean, values),
            "bn1.moving_var" => assign1(&mut self.bn1.moving_var, values),
            "bn2.gamma" => assign1(&mut self.bn2.gamma, values),
            "bn2.beta" => assign1(&mut self.bn2.beta, values),
            "bn2.moving_mean" => assign1(&mut self.bn2.moving_mean, values),
            "bn2.moving_var" => assign1(&mut self.bn2.moving_var, values),
            "lstm.fwd.w" => assign2(&mut self.bilstm.fwd.w, values),
            "lstm.fwd.u" => assign2(&mut self.bilstm.fwd.u, values),
            "lstm.fwd.b" => assign1(&mut self.bilstm.fwd.b, values),
            "lstm.bwd.w" => assign2(&mut self.bilstm.bwd.w, values),
            "lstm.bwd.u" => assign2(&mut self.bilstm.bwd.u, values),
            "lstm.bwd.b" => assign1(&mut self.bilstm.bwd.b, values),
            "dense1.w" => assign2(&mut self.dense1.w, values),
            "dense1.b" => assign1(&mut self.dense1.b, values),
            "dense2.w" => assign2(&mut self.dense2.w, values),
            "dense2.b" => assign1(&mut self.dense2.b, values),
            "dense_out.w" => assign2(&mut self.dense_out.w, values),
            "dense_out.b" => assign1(&mut self.dense_out.b, values),
            other => unreachable!("unknown tensor {other}"),
        }
    }

    /// Copy of every state tensor, for best-weights restoration.
    pub fn snapshot(&self) -> Vec<Vec<f32>> {
        self.state_tensors().into_iter().map(|(_, _, v)| v).collect()
    }

    pub fn restore(&mut self, snapshot: &[Vec<f32>]) {
        let names: Vec<String> = self
            .state_tensors()
            .into_iter()
            .map(|(name, _, _)| name)
            .collect();
        assert_eq!(names.len(), snapshot.len(), "snapshot layout mismatch");
        for (name, values) in names.iter().zip(snapshot) {
            self.assign_tensor(name, values);
        }
    }
}

fn flatten(x: &Array2<f32>, batch: usize, flat_dim: usize) -> Array2<f32> {
    // (batch*t, c) row-major -> (batch, t*c); pure reshape
    x.clone()
        .into_shape_with_order((batch, flat_dim))
        .expect("flatten shape")
}

fn unflatten(x: &Array2<f32>, batch: usize, t: usize, c: usize) -> Array2<f32> {
    x.clone()
        .into_shape_with_order((batch * t, c))
        .expect("unflatten shape")
}

#[cfg(test)]
mod tests;
