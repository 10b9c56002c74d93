//! Layer implementations: forward, backward and parameter storage.
//!
//! Activations flow as 2-D f32 arrays. Sequence layers use flattened
//! (batch*time, channels) layout; the BiLSTM internally transposes to
//! time-major so each timestep is a contiguous row block. Every layer owns
//! its parameters and gradient buffers; `backward` must follow a
//! `forward_train` on the same layer (caches are single-use per batch).

use ndarray::{s, Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

/// Uniform init with Glorot fan scaling.
fn glorot_uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, fan_in: usize, fan_out: usize) -> Array2<f32> {
    let limit = (6.0 / (fan_in + fan_out) as f32).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-limit..limit))
}

// ---------------------------------------------------------------------------
// Conv1D (valid padding, stride 1) fused with ReLU
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct Conv1dRelu {
    /// (kernel * in_channels, filters), im2col layout.
    pub w: Array2<f32>,
    pub b: Array1<f32>,
    pub dw: Array2<f32>,
    pub db: Array1<f32>,
    pub kernel: usize,
    cache_x_col: Option<Array2<f32>>,
    cache_mask: Option<Array2<f32>>,
}

impl Conv1dRelu {
    pub fn new(kernel: usize, in_channels: usize, filters: usize, rng: &mut ChaCha8Rng) -> Self {
        let rows = kernel * in_channels;
        // conv fan counts include the receptive field
        let w = glorot_uniform(rng, rows, filters, in_channels * kernel, filters * kernel);
        Conv1dRelu {
            w,
            b: Array1::zeros(filters),
            dw: Array2::zeros((rows, filters)),
            db: Array1::zeros(filters),
            kernel,
            cache_x_col: None,
            cache_mask: None,
        }
    }

    fn im2col(&self, x: &Array2<f32>, t_out: usize) -> Array2<f32> {
        let batch = x.nrows();
        let k = self.kernel;
        let mut col = Array2::zeros((batch * t_out, k));
        for b in 0..batch {
            let row = x.row(b);
            for t in 0..t_out {
                for kk in 0..k {
                    col[[b * t_out + t, kk]] = row[t + kk];
                }
            }
        }
        col
    }

    /// x: (batch, input_len) single-channel sequence. Output:
    /// (batch*t_out, filters) with t_out = input_len - kernel + 1.
    pub fn forward_train(&mut self, x: &Array2<f32>) -> Array2<f32> {
        let t_out = x.ncols() - self.kernel + 1;
        let x_col = self.im2col(x, t_out);
        let mut y = x_col.dot(&self.w);
        y += &self.b;
        let mask = y.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
        y *= &mask;
        self.cache_x_col = Some(x_col);
        self.cache_mask = Some(mask);
        y
    }

    pub fn forward_infer(&self, x: &Array2<f32>) -> Array2<f32> {
        let t_out = x.ncols() - self.kernel + 1;
        let mut y = self.im2col(x, t_out).dot(&self.w);
        y += &self.b;
        y.mapv_inplace(|v| v.max(0.0));
        y
    }

    /// Accumulates dw/db. Input gradients are not produced: this is the
    /// first parametric layer of the stack.
    pub fn backward(&mut self, dy: &Array2<f32>) {
        let x_col = self.cache_x_col.take().expect("forward_train before backward");
        let mask = self.cache_mask.take().expect("forward_train before backward");
        let dy_m = dy * &mask;
        self.dw = x_col.t().dot(&dy_m);
        self.db = dy_m.sum_axis(Axis(0));
    }
}

// ---------------------------------------------------------------------------
// BatchNorm over channels (normalizes across all rows = batch*time)
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct BatchNorm {
    pub gamma: Array1<f32>,
    pub beta: Array1<f32>,
    pub moving_mean: Array1<f32>,
    pub moving_var: Array1<f32>,
    pub dgamma: Array1<f32>,
    pub dbeta: Array1<f32>,
    pub eps: f32,
    pub momentum: f32,
    cache_x_hat: Option<Array2<f32>>,
    cache_inv_std: Option<Array1<f32>>,
}

impl BatchNorm {
    pub fn new(channels: usize) -> Self {
        BatchNorm {
            gamma: Array1::ones(channels),
            beta: Array1::zeros(channels),
            moving_mean: Array1::zeros(channels),
            moving_var: Array1::ones(channels),
            dgamma: Array1::zeros(channels),
            dbeta: Array1::zeros(channels),
            eps: 1e-3,
            momentum: 0.99,
            cache_x_hat: None,
            cache_inv_std: None,
        }
    }

    pub fn channels(&self) -> usize {
        self.gamma.len()
    }

    /// Training mode: normalize by batch statistics, update moving stats.
    pub fn forward_train(&mut self, x: &Array2<f32>) -> Array2<f32> {
        let n = x.nrows() as f32;
        let mean = x.mean_axis(Axis(0)).expect("non-empty batch");
        let mut var = Array1::zeros(self.channels());
        for row in x.rows() {
            for (j, v) in row.iter().enumerate() {
                let d = v - mean[j];
                var[j] += d * d;
            }
        }
        var /= n;
        let inv_std = var.mapv(|v| 1.0 / (v + self.eps).sqrt());

        let mut x_hat = x.clone();
        for mut row in x_hat.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - mean[j]) * inv_std[j];
            }
        }
        let mut y = x_hat.clone();
        for mut row in y.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = *v * self.gamma[j] + self.beta[j];
            }
        }

        let m = self.momentum;
        self.moving_mean = &self.moving_mean * m + &(&mean * (1.0 - m));
        self.moving_var = &self.moving_var * m + &(&var * (1.0 - m));
        self.cache_x_hat = Some(x_hat);
        self.cache_inv_std = Some(inv_std);
        y
    }

    /// Inference mode: normalize by moving statistics. Pure.
    pub fn forward_infer(&self, x: &Array2<f32>) -> Array2<f32> {
        let inv_std = self.moving_var.mapv(|v| 1.0 / (v + self.eps).sqrt());
        let mut y = x.clone();
        for mut row in y.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.moving_mean[j]) * inv_std[j] * self.gamma[j] + self.beta[j];
            }
        }
        y
    }

    pub fn backward(&mut self, dy: &Array2<f32>) -> Array2<f32> {
        let x_hat = self.cache_x_hat.take().expect("forward_train before backward");
        let inv_std = self.cache_inv_std.take().expect("forward_train before backward");
        let n = dy.nrows() as f32;
        self.dbeta = dy.sum_axis(Axis(0));
        self.dgamma = (dy * &x_hat).sum_axis(Axis(0));

        // dx = gamma*inv_std * (dy - dbeta/n - x_hat*dgamma/n)
        let mut dx = Array2::zeros(dy.raw_dim());
        for r in 0..dy.nrows() {
            for j in 0..dy.ncols() {
                dx[[r, j]] = self.gamma[j]
                    * inv_std[j]
                    * (dy[[r, j]] - self.dbeta[j] / n - x_hat[[r, j]] * self.dgamma[j] / n);
            }
        }
        dx
    }
}

// ---------------------------------------------------------------------------
// MaxPool1D (valid, stride = pool size)
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct MaxPool1d {
    pub pool: usize,
    cache_argmax: Option<Vec<u32>>,
    cache_in_rows: usize,
}

impl MaxPool1d {
    pub fn new(pool: usize) -> Self {
        MaxPool1d {
            pool,
            cache_argmax: None,
            cache_in_rows: 0,
        }
    }

    pub fn out_len(&self, t_in: usize) -> usize {
        t_in / self.pool
    }

    fn pool_core(
        &self,
        x: &Array2<f32>,
        batch: usize,
        t_in: usize,
        mut argmax: Option<&mut Vec<u32>>,
    ) -> Array2<f32> {
        let t_out = self.out_len(t_in);
        let c = x.ncols();
        let mut y = Array2::zeros((batch * t_out, c));
        for b in 0..batch {
            for t in 0..t_out {
                let out_row = b * t_out + t;
                for j in 0..c {
                    let mut best = f32::NEG_INFINITY;
                    let mut best_row = 0usize;
                    for p in 0..self.pool {
                        let in_row = b * t_in + t * self.pool + p;
                        let v = x[[in_row, j]];
                        if v > best {
                            best = v;
                            best_row = in_row;
                        }
                    }
                    y[[out_row, j]] = best;
                    if let Some(argmax) = argmax.as_deref_mut() {
                        argmax[out_row * c + j] = best_row as u32;
                    }
                }
            }
        }
        y
    }

    /// x: (batch*t_in, channels) -> (batch*t_out, channels).
    pub fn forward_train(&mut self, x: &Array2<f32>, batch: usize, t_in: usize) -> Array2<f32> {
        let t_out = self.out_len(t_in);
        let mut argmax = vec![0u32; batch * t_out * x.ncols()];
        let y = self.pool_core(x, batch, t_in, Some(&mut argmax));
        self.cache_argmax = Some(argmax);
        self.cache_in_rows = batch * t_in;
        y
    }

    pub fn forward_infer(&self, x: &Array2<f32>, batch: usize, t_in: usize) -> Array2<f32> {
        self.pool_core(x, batch, t_in, None)
    }

    pub fn backward(&mut self, dy: &Array2<f32>) -> Array2<f32> {
        let argmax = self.cache_argmax.take().expect("forward_train before backward");
        let c = dy.ncols();
        let mut dx = Array2::zeros((self.cache_in_rows, c));
        for r in 0..dy.nrows() {
            for j in 0..c {
                dx[[argmax[r * c + j] as usize, j]] += dy[[r, j]];
            }
        }
        dx
    }
}

// ---------------------------------------------------------------------------
// Bidirectional LSTM, sequence-returning, concatenated outputs
// ---------------------------------------------------------------------------

/// One direction of the LSTM. Gate layout along the 4h axis: [i f g o].
#[derive(Debug)]
pub struct LstmDirection {
    /// (in_channels, 4h)
    pub w: Array2<f32>,
    /// (h, 4h)
    pub u: Array2<f32>,
    pub b: Array1<f32>,
    pub dw: Array2<f32>,
    pub du: Array2<f32>,
    pub db: Array1<f32>,
    pub units: usize,
    pub reverse: bool,
    // caches, time-major (t_steps*batch, _)
    cache_gates: Option<Array2<f32>>,
    cache_c: Option<Array2<f32>>,
    cache_tanh_c: Option<Array2<f32>>,
    cache_h: Option<Array2<f32>>,
    cache_x: Option<Array2<f32>>,
}

impl LstmDirection {
    pub fn new(in_channels: usize, units: usize, reverse: bool, rng: &mut ChaCha8Rng) -> Self {
        let w = glorot_uniform(rng, in_channels, 4 * units, in_channels, 4 * units);
        let u = glorot_uniform(rng, units, 4 * units, units, 4 * units);
        let mut b = Array1::zeros(4 * units);
        // forget-gate bias starts at 1
        b.slice_mut(s![units..2 * units]).fill(1.0);
        LstmDirection {
            w,
            u,
            b,
            dw: Array2::zeros((in_channels, 4 * units)),
            du: Array2::zeros((units, 4 * units)),
            db: Array1::zeros(4 * units),
            units,
            reverse,
            cache_gates: None,
            cache_c: None,
            cache_tanh_c: None,
            cache_h: None,
            cache_x: None,
        }
    }

    /// Order in which true timesteps are visited.
    fn step_order(&self, t_steps: usize) -> Vec<usize> {
        if self.reverse {
            (0..t_steps).rev().collect()
        } else {
            (0..t_steps).collect()
        }
    }

    /// Recurrent sweep. x_time: (t_steps*batch, in_channels) time-major.
    /// Returns (h_all, gates, c_all, tanh_c_all), all time-major and indexed
    /// by true timestep.
    #[allow(clippy::type_complexity)]
    fn forward_core(
        &self,
        x_time: &Array2<f32>,
        batch: usize,
        t_steps: usize,
    ) -> (Array2<f32>, Array2<f32>, Array2<f32>, Array2<f32>) {
        let h = self.units;
        let xp = x_time.dot(&self.w); // (t*b, 4h)
        let mut gates = Array2::zeros((t_steps * batch, 4 * h));
        let mut c_all = Array2::zeros((t_steps * batch, h));
        let mut tanh_c_all = Array2::zeros((t_steps * batch, h));
        let mut h_all = Array2::zeros((t_steps * batch, h));

        let mut h_prev = Array2::zeros((batch, h));
        let mut c_prev = Array2::zeros((batch, h));
        for &t in &self.step_order(t_steps) {
            let rows = t * batch..(t + 1) * batch;
            let mut z = h_prev.dot(&self.u);
            z += &xp.slice(s![rows.clone(), ..]);
            z += &self.b;
            // activate gates in place: [i f g o]
            for r in 0..batch {
                for j in 0..h {
                    let i = sigmoid(z[[r, j]]);
                    let f = sigmoid(z[[r, h + j]]);
                    let g = z[[r, 2 * h + j]].tanh();
                    let o = sigmoid(z[[r, 3 * h + j]]);
                    let c: f32 = f * c_prev[[r, j]] + i * g;
                    let tc = c.tanh();
                    z[[r, j]] = i;
                    z[[r, h + j]] = f;
                    z[[r, 2 * h + j]] = g;
                    z[[r, 3 * h + j]] = o;
                    c_prev[[r, j]] = c;
                    h_prev[[r, j]] = o * tc;
                    tanh_c_all[[t * batch + r, j]] = tc;
                }
            }
            gates.slice_mut(s![rows.clone(), ..]).assign(&z);
            c_all.slice_mut(s![rows.clone(), ..]).assign(&c_prev);
            h_all.slice_mut(s![rows, ..]).assign(&h_prev);
        }
        (h_all, gates, c_all, tanh_c_all)
    }

    pub fn forward_train(&mut self, x_time: &Array2<f32>, batch: usize, t_steps: usize) -> Array2<f32> {
        let (h_all, gates, c_all, tanh_c_all) = self.forward_core(x_time, batch, t_steps);
        self.cache_gates = Some(gates);
        self.cache_c = Some(c_all);
        self.cache_tanh_c = Some(tanh_c_all);
        self.cache_h = Some(h_all.clone());
        self.cache_x = Some(x_time.clone());
        h_all
    }

    pub fn forward_infer(&self, x_time: &Array2<f32>, batch: usize, t_steps: usize) -> Array2<f32> {
        self.forward_core(x_time, batch, t_steps).0
    }

    /// dh_time: (t_steps*batch, h) gradient w.r.t. this direction's outputs,
    /// time-major by true timestep. Returns dx time-major.
    pub fn backward(&mut self, dh_time: &Array2<f32>, batch: usize, t_steps: usize) -> Array2<f32> {
        let h = self.units;
        let gates = self.cache_gates.take().expect("forward before backward");
        let c_all = self.cache_c.take().expect("forward before backward");
        let tanh_c_all = self.cache_tanh_c.take().expect("forward before backward");
        let h_all = self.cache_h.take().expect("forward before backward");
        let x_time = self.cache_x.take().expect("forward before backward");

        let order = self.step_order(t_steps);
        let mut dz_all = Array2::zeros((t_steps * batch, 4 * h));
        let mut dh_carry = Array2::<f32>::zeros((batch, h));
        let mut dc_carry = Array2::<f32>::zeros((batch, h));

        // visit in reverse processing order
        for (k, &t) in order.iter().enumerate().rev() {
            let base = t * batch;
            let prev_t = if k > 0 { Some(order[k - 1]) } else { None };
            let mut dz = Array2::<f32>::zeros((batch, 4 * h));
            for r in 0..batch {
                for j in 0..h {
                    let i = gates[[base + r, j]];
                    let f = gates[[base + r, h + j]];
                    let g = gates[[base + r, 2 * h + j]];
                    let o = gates[[base + r, 3 * h + j]];
                    let tc = tanh_c_all[[base + r, j]];
                    let c_prev = match prev_t {
                        Some(pt) => c_all[[pt * batch + r, j]],
                        None => 0.0,
                    };
                    let dh = dh_time[[base + r, j]] + dh_carry[[r, j]];
                    let do_ = dh * tc;
                    let dc = dc_carry[[r, j]] + dh * o * (1.0 - tc * tc);
                    let di = dc * g;
                    let df = dc * c_prev;
                    let dg = dc * i;
                    dc_carry[[r, j]] = dc * f;
                    dz[[r, j]] = di * i * (1.0 - i);
                    dz[[r, h + j]] = df * f * (1.0 - f);
                    dz[[r, 2 * h + j]] = dg * (1.0 - g * g);
                    dz[[r, 3 * h + j]] = do_ * o * (1.0 - o);
                }
            }
            dh_carry = dz.dot(&self.u.t());
            dz_all.slice_mut(s![base..base + batch, ..]).assign(&dz);
        }

        // parameter grads; h_prev sequence is h_all shifted one processing step
        let mut h_prev_all = Array2::zeros((t_steps * batch, h));
        for (k, &t) in order.iter().enumerate() {
            if k > 0 {
                let pt = order[k - 1];
                let src = h_all.slice(s![pt * batch..(pt + 1) * batch, ..]).to_owned();
                h_prev_all
                    .slice_mut(s![t * batch..(t + 1) * batch, ..])
                    .assign(&src);
            }
        }
        self.dw = x_time.t().dot(&dz_all);
        self.du = h_prev_all.t().dot(&dz_all);
        self.db = dz_all.sum_axis(Axis(0));
        dz_all.dot(&self.w.t())
    }
}

/// Concatenating bidirectional wrapper: output columns [forward, backward].
#[derive(Debug)]
pub struct BiLstm {
    pub fwd: LstmDirection,
    pub bwd: LstmDirection,
}

impl BiLstm {
    pub fn new(in_channels: usize, units: usize, rng: &mut ChaCha8Rng) -> Self {
        BiLstm {
            fwd: LstmDirection::new(in_channels, units, false, rng),
            bwd: LstmDirection::new(in_channels, units, true, rng),
        }
    }

    pub fn units(&self) -> usize {
        self.fwd.units
    }

    fn concat_directions(
        h_f: &Array2<f32>,
        h_b: &Array2<f32>,
        batch: usize,
        t_steps: usize,
        h: usize,
    ) -> Array2<f32> {
        let mut y = Array2::zeros((batch * t_steps, 2 * h));
        for t in 0..t_steps {
            for r in 0..batch {
                let src = t * batch + r;
                let dst = r * t_steps + t;
                y.slice_mut(s![dst, 0..h]).assign(&h_f.row(src));
                y.slice_mut(s![dst, h..2 * h]).assign(&h_b.row(src));
            }
        }
        y
    }

    /// x: (batch*t, c) batch-major -> (batch*t, 2h) batch-major.
    pub fn forward_train(&mut self, x: &Array2<f32>, batch: usize, t_steps: usize) -> Array2<f32> {
        let x_time = batch_to_time(x, batch, t_steps);
        let h_f = self.fwd.forward_train(&x_time, batch, t_steps);
        let h_b = self.bwd.forward_train(&x_time, batch, t_steps);
        Self::concat_directions(&h_f, &h_b, batch, t_steps, self.units())
    }

    pub fn forward_infer(&self, x: &Array2<f32>, batch: usize, t_steps: usize) -> Array2<f32> {
        let x_time = batch_to_time(x, batch, t_steps);
        let h_f = self.fwd.forward_infer(&x_time, batch, t_steps);
        let h_b = self.bwd.forward_infer(&x_time, batch, t_steps);
        Self::concat_directions(&h_f, &h_b, batch, t_steps, self.units())
    }

    /// dy: (batch*t, 2h) batch-major -> dx (batch*t, c) batch-major.
    pub fn backward(&mut self, dy: &Array2<f32>, batch: usize, t_steps: usize) -> Array2<f32> {
        let h = self.units();
        let mut dh_f = Array2::zeros((t_steps * batch, h));
        let mut dh_b = Array2::zeros((t_steps * batch, h));
        for t in 0..t_steps {
            for r in 0..batch {
                let src = r * t_steps + t;
                let dst = t * batch + r;
                dh_f.row_mut(dst).assign(&dy.slice(s![src, 0..h]));
                dh_b.row_mut(dst).assign(&dy.slice(s![src, h..2 * h]));
            }
        }
        let dx_f = self.fwd.backward(&dh_f, batch, t_steps);
        let dx_b = self.bwd.backward(&dh_b, batch, t_steps);
        let dx_time = dx_f + dx_b;
        time_to_batch(&dx_time, batch, t_steps)
    }
}

fn batch_to_time(x: &Array2<f32>, batch: usize, t_steps: usize) -> Array2<f32> {
    let c = x.ncols();
    let mut out = Array2::zeros((t_steps * batch, c));
    for b in 0..batch {
        for t in 0..t_steps {
            out.row_mut(t * batch + b).assign(&x.row(b * t_steps + t));
        }
    }
    out
}

fn time_to_batch(x: &Array2<f32>, batch: usize, t_steps: usize) -> Array2<f32> {
    let c = x.ncols();
    let mut out = Array2::zeros((batch * t_steps, c));
    for b in 0..batch {
        for t in 0..t_steps {
            out.row_mut(b * t_steps + t).assign(&x.row(t * batch + b));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Dense (optionally ReLU) with L2 kernel regularization
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct Dense {
    pub w: Array2<f32>,
    pub b: Array1<f32>,
    pub dw: Array2<f32>,
    pub db: Array1<f32>,
    pub relu: bool,
    /// L2 penalty coefficient on the kernel (loss += l2 * sum(w^2)).
    pub l2: f32,
    cache_x: Option<Array2<f32>>,
    cache_mask: Option<Array2<f32>>,
}

impl Dense {
    pub fn new(inputs: usize, outputs: usize, relu: bool, l2: f32, rng: &mut ChaCha8Rng) -> Self {
        Dense {
            w: glorot_uniform(rng, inputs, outputs, inputs, outputs),
            b: Array1::zeros(outputs),
            dw: Array2::zeros((inputs, outputs)),
            db: Array1::zeros(outputs),
            relu,
            l2,
            cache_x: None,
            cache_mask: None,
        }
    }

    pub fn forward_train(&mut self, x: &Array2<f32>) -> Array2<f32> {
        let mut y = x.dot(&self.w);
        y += &self.b;
        let mask = if self.relu {
            let m = y.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
            y *= &m;
            Some(m)
        } else {
            None
        };
        self.cache_x = Some(x.clone());
        self.cache_mask = mask;
        y
    }

    pub fn forward_infer(&self, x: &Array2<f32>) -> Array2<f32> {
        let mut y = x.dot(&self.w);
        y += &self.b;
        if self.relu {
            y.mapv_inplace(|v| v.max(0.0));
        }
        y
    }

    pub fn backward(&mut self, dy: &Array2<f32>) -> Array2<f32> {
        let x = self.cache_x.take().expect("forward_train before backward");
        let dy_m = match self.cache_mask.take() {
            Some(mask) => dy * &mask,
            None => dy.clone(),
        };
        self.dw = x.t().dot(&dy_m);
        if self.l2 > 0.0 {
            self.dw.scaled_add(2.0 * self.l2, &self.w);
        }
        self.db = dy_m.sum_axis(Axis(0));
        dy_m.dot(&self.w.t())
    }

    pub fn l2_penalty(&self) -> f32 {
        if self.l2 == 0.0 {
            return 0.0;
        }
        self.l2 * self.w.iter().map(|v| v * v).sum::<f32>()
    }
}

// ---------------------------------------------------------------------------
// Dropout (inverted scaling)
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct Dropout {
    pub rate: f32,
    cache_mask: Option<Array2<f32>>,
}

impl Dropout {
    pub fn new(rate: f32) -> Self {
        Dropout {
            rate,
            cache_mask: None,
        }
    }

    pub fn forward_train(&mut self, x: &Array2<f32>, rng: &mut ChaCha8Rng) -> Array2<f32> {
        if self.rate == 0.0 {
            self.cache_mask = None;
            return x.clone();
        }
        let keep = 1.0 - self.rate;
        let mask = Array2::from_shape_fn(x.raw_dim(), |_| {
            if rng.random_range(0.0f32..1.0) < self.rate {
                0.0
            } else {
                1.0 / keep
            }
        });
        let y = x * &mask;
        self.cache_mask = Some(mask);
        y
    }

    pub fn backward(&mut self, dy: &Array2<f32>) -> Array2<f32> {
        match self.cache_mask.take() {
            Some(mask) => dy * &mask,
            None => dy.clone(),
        }
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(logits: &Array2<f32>) -> Array2<f32> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}
