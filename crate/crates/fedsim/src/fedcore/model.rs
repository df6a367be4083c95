//! Small dense/convolutional classifiers in plain `f64`, with hand-written
//! backpropagation.
//!
//! Training here is a means to compare selection strategies, not a speed
//! contest: everything is scalar `f64` arithmetic in fixed loop order, so a
//! given parameter vector and batch produce bit-identical losses and
//! gradients on every machine.

use super::TrainError;
use crate::dataio::Dataset;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// First conv layer output channels.
const CONV1_CH: usize = 8;
/// Second conv layer output channels.
const CONV2_CH: usize = 16;
/// Conv kernel side (valid padding, stride 1).
const KERNEL: usize = 5;
/// Max-pool window and stride.
const POOL: usize = 2;
/// Hidden width of the convolutional net's first dense layer.
const CNN_FC: usize = 64;

/// Classifier architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArch {
    /// Softmax regression: one dense layer.
    Linear,
    /// One ReLU hidden layer of the given width.
    Mlp { hidden: usize },
    /// Two 5x5 valid convolutions (8 then 16 channels), each ReLU, a 2x2
    /// max-pool, then two dense layers (64 hidden, ReLU). Requires square
    /// single-channel input of side >= 10.
    Cnn,
}

/// An architecture bound to concrete input/output dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelShape {
    arch: ModelArch,
    input_dim: usize,
    classes: usize,
    /// Input side length; only meaningful for `Cnn`.
    side: usize,
}

impl ModelShape {
    pub fn new(arch: ModelArch, input_dim: usize, classes: usize) -> Result<Self, TrainError> {
        if input_dim == 0 {
            return Err(TrainError::BadShape("input_dim must be >= 1".into()));
        }
        if classes < 2 {
            return Err(TrainError::BadShape(format!(
                "need at least 2 classes, got {classes}"
            )));
        }
        let mut side = 0;
        match arch {
            ModelArch::Linear => {}
            ModelArch::Mlp { hidden } => {
                if hidden == 0 {
                    return Err(TrainError::BadShape("mlp hidden width must be >= 1".into()));
                }
            }
            ModelArch::Cnn => {
                side = (input_dim as f64).sqrt().round() as usize;
                if side * side != input_dim {
                    return Err(TrainError::BadShape(format!(
                        "cnn needs square input, got {input_dim} features"
                    )));
                }
                if side < 2 * (KERNEL - 1) + POOL {
                    return Err(TrainError::BadShape(format!(
                        "cnn needs input side >= {}, got {side}",
                        2 * (KERNEL - 1) + POOL
                    )));
                }
            }
        }
        Ok(Self {
            arch,
            input_dim,
            classes,
            side,
        })
    }

    pub fn arch(&self) -> ModelArch {
        self.arch
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Side length after the first convolution.
    fn conv1_side(&self) -> usize {
        self.side - (KERNEL - 1)
    }

    /// Side length after the second convolution.
    fn conv2_side(&self) -> usize {
        self.conv1_side() - (KERNEL - 1)
    }

    /// Side length after pooling.
    fn pooled_side(&self) -> usize {
        self.conv2_side() / POOL
    }

    /// Flattened feature count entering the convolutional net's dense part.
    fn flat_dim(&self) -> usize {
        self.pooled_side() * self.pooled_side() * CONV2_CH
    }

    /// Total number of parameters.
    pub fn param_count(&self) -> usize {
        let (f, k) = (self.input_dim, self.classes);
        match self.arch {
            ModelArch::Linear => k * f + k,
            ModelArch::Mlp { hidden } => hidden * f + hidden + k * hidden + k,
            ModelArch::Cnn => {
                let conv = CONV1_CH * KERNEL * KERNEL
                    + CONV1_CH
                    + CONV2_CH * CONV1_CH * KERNEL * KERNEL
                    + CONV2_CH;
                let dense = CNN_FC * self.flat_dim() + CNN_FC + k * CNN_FC + k;
                conv + dense
            }
        }
    }

    /// Per-layer `(weight_len, bias_len, fan_in)` in storage order.
    fn layers(&self) -> Vec<(usize, usize, usize)> {
        let (f, k) = (self.input_dim, self.classes);
        match self.arch {
            ModelArch::Linear => vec![(k * f, k, f)],
            ModelArch::Mlp { hidden } => {
                vec![(hidden * f, hidden, f), (k * hidden, k, hidden)]
            }
            ModelArch::Cnn => vec![
                (CONV1_CH * KERNEL * KERNEL, CONV1_CH, KERNEL * KERNEL),
                (
                    CONV2_CH * CONV1_CH * KERNEL * KERNEL,
                    CONV2_CH,
                    CONV1_CH * KERNEL * KERNEL,
                ),
                (CNN_FC * self.flat_dim(), CNN_FC, self.flat_dim()),
                (k * CNN_FC, k, CNN_FC),
            ],
        }
    }

    /// Flat offset of each layer's weight and bias block.
    fn offsets(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut at = 0;
        for (w, b, _) in self.layers() {
            out.push((at, at + w));
            at += w + b;
        }
        out
    }
}

/// A parameter vector tied to its shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    shape: ModelShape,
    values: Vec<f64>,
}

impl ModelParams {
    pub fn shape(&self) -> &ModelShape {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// Draw initial parameters: each layer's weights uniform in
/// `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, all biases zero. Values are drawn
/// layer by layer in storage order, so equal `(shape, rng)` give equal bits.
pub fn init_params(shape: ModelShape, rng: &mut ChaCha8Rng) -> ModelParams {
    let mut values = Vec::with_capacity(shape.param_count());
    for (w_len, b_len, fan_in) in shape.layers() {
        let bound = 1.0 / (fan_in as f64).sqrt();
        for _ in 0..w_len {
            values.push(rng.random_range(-bound..bound));
        }
        values.extend(std::iter::repeat_n(0.0, b_len));
    }
    ModelParams { shape, values }
}

/// Class scores for one sample. `x` must have `shape.input_dim()` entries.
pub fn forward(params: &ModelParams, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), params.shape.input_dim());
    match params.shape.arch {
        ModelArch::Linear => {
            let off = params.shape.offsets();
            dense(params, off[0], x, params.shape.classes())
        }
        ModelArch::Mlp { hidden } => {
            let off = params.shape.offsets();
            let mut h = dense(params, off[0], x, hidden);
            for v in &mut h {
                *v = v.max(0.0);
            }
            dense(params, off[1], &h, params.shape.classes())
        }
        ModelArch::Cnn => cnn_forward(params, x).logits,
    }
}

/// Predicted class: argmax of the scores, lowest index on ties.
pub fn predict(params: &ModelParams, x: &[f64]) -> usize {
    let logits = forward(params, x);
    let mut best = 0;
    for (c, &l) in logits.iter().enumerate() {
        if l > logits[best] {
            best = c;
        }
    }
    best
}

/// Mean cross-entropy loss over `batch` (sample indices into `data`) and its
/// gradient with respect to every parameter.
///
/// The batch is processed in the given order with straightforward summation,
/// making the result a pure function of `(params, data, batch)`.
pub fn loss_and_grad(params: &ModelParams, data: &Dataset, batch: &[usize]) -> (f64, Vec<f64>) {
    debug_assert!(!batch.is_empty());
    let mut grad = vec![0.0f64; params.values.len()];
    let mut loss = 0.0f64;
    for &i in batch {
        loss += backprop_sample(params, data.feature(i), data.label(i), &mut grad);
    }
    let inv = 1.0 / batch.len() as f64;
    loss *= inv;
    for g in &mut grad {
        *g *= inv;
    }
    (loss, grad)
}

/// Dense layer `y = W x + b` with `W` stored row-major at `offsets.0` and
/// `b` at `offsets.1`.
fn dense(params: &ModelParams, offsets: (usize, usize), x: &[f64], out_dim: usize) -> Vec<f64> {
    let (w_at, b_at) = offsets;
    let v = &params.values;
    (0..out_dim)
        .map(|o| {
            let row = w_at + o * x.len();
            let mut acc = v[b_at + o];
            for (f, &xf) in x.iter().enumerate() {
                acc += v[row + f] * xf;
            }
            acc
        })
        .collect()
}

/// Softmax cross-entropy on `logits` for true class `y`: returns the loss
/// and overwrites `logits` with d(loss)/d(logits).
fn softmax_xent_backward(logits: &mut [f64], y: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for l in logits.iter_mut() {
        *l = (*l - max).exp();
        z += *l;
    }
    let loss = -(logits[y] / z).ln();
    for (c, l) in logits.iter_mut().enumerate() {
        *l = *l / z - if c == y { 1.0 } else { 0.0 };
    }
    loss
}

/// Forward + backward for one sample; gradient contributions are added into
/// `grad`. Returns the sample's loss.
fn backprop_sample(params: &ModelParams, x: &[f64], y: usize, grad: &mut [f64]) -> f64 {
    match params.shape.arch {
        ModelArch::Linear => {
            let off = params.shape.offsets();
            let mut logits = dense(params, off[0], x, params.shape.classes());
            let loss = softmax_xent_backward(&mut logits, y);
            dense_backward(&params.values, off[0], x, &logits, grad, None);
            loss
        }
        ModelArch::Mlp { hidden } => {
            let off = params.shape.offsets();
            let pre = dense(params, off[0], x, hidden);
            let h: Vec<f64> = pre.iter().map(|&v| v.max(0.0)).collect();
            let mut logits = dense(params, off[1], &h, params.shape.classes());
            let loss = softmax_xent_backward(&mut logits, y);

            let mut dh = vec![0.0f64; hidden];
            dense_backward(&params.values, off[1], &h, &logits, grad, Some(&mut dh));
            for (j, d) in dh.iter_mut().enumerate() {
                if pre[j] <= 0.0 {
                    *d = 0.0;
                }
            }
            dense_backward(&params.values, off[0], x, &dh, grad, None);
            loss
        }
        ModelArch::Cnn => cnn_backward(params, x, y, grad),
    }
}

/// Accumulate gradients of a dense layer: `d_out` is d(loss)/d(output).
/// Writes `W^T d_out` into `d_in` when requested.
fn dense_backward(
    values: &[f64],
    offsets: (usize, usize),
    x: &[f64],
    d_out: &[f64],
    grad: &mut [f64],
    d_in: Option<&mut [f64]>,
) {
    let (w_at, b_at) = offsets;
    for (o, &d) in d_out.iter().enumerate() {
        let row = w_at + o * x.len();
        for (f, &xf) in x.iter().enumerate() {
            grad[row + f] += d * xf;
        }
        grad[b_at + o] += d;
    }
    if let Some(d_in) = d_in {
        for d in d_in.iter_mut() {
            *d = 0.0;
        }
        for (o, &d) in d_out.iter().enumerate() {
            let row = w_at + o * x.len();
            for (f, di) in d_in.iter_mut().enumerate() {
                *di += d * values[row + f];
            }
        }
    }
}

/// Intermediate activations of the convolutional net. The conv2 map itself
/// is not retained: the pooled maxima plus argmax indices are enough to
/// route gradients back through pool and ReLU.
struct CnnTrace {
    conv1: Vec<f64>,
    pool: Vec<f64>,
    pool_arg: Vec<usize>,
    fc1_pre: Vec<f64>,
    fc1: Vec<f64>,
    logits: Vec<f64>,
}

fn cnn_forward(params: &ModelParams, x: &[f64]) -> CnnTrace {
    let s = params.shape;
    let (s0, s1, s2, sp) = (s.side, s.conv1_side(), s.conv2_side(), s.pooled_side());
    let off = s.offsets();
    let v = &params.values;

    // conv1 + ReLU: 1 -> CONV1_CH channels.
    let mut conv1 = vec![0.0f64; CONV1_CH * s1 * s1];
    for o in 0..CONV1_CH {
        let w0 = off[0].0 + o * KERNEL * KERNEL;
        let b = v[off[0].1 + o];
        for y in 0..s1 {
            for xx in 0..s1 {
                let mut acc = b;
                for ky in 0..KERNEL {
                    for kx in 0..KERNEL {
                        acc += v[w0 + ky * KERNEL + kx] * x[(y + ky) * s0 + (xx + kx)];
                    }
                }
                conv1[(o * s1 + y) * s1 + xx] = acc.max(0.0);
            }
        }
    }

    // conv2 + ReLU: CONV1_CH -> CONV2_CH channels.
    let mut conv2 = vec![0.0f64; CONV2_CH * s2 * s2];
    for p in 0..CONV2_CH {
        let b = v[off[1].1 + p];
        for y in 0..s2 {
            for xx in 0..s2 {
                let mut acc = b;
                for o in 0..CONV1_CH {
                    let w0 = off[1].0 + (p * CONV1_CH + o) * KERNEL * KERNEL;
                    for ky in 0..KERNEL {
                        for kx in 0..KERNEL {
                            acc += v[w0 + ky * KERNEL + kx]
                                * conv1[(o * s1 + y + ky) * s1 + (xx + kx)];
                        }
                    }
                }
                conv2[(p * s2 + y) * s2 + xx] = acc.max(0.0);
            }
        }
    }

    // 2x2 max-pool, remembering the winning cell (first max in scan order).
    let mut pool = vec![0.0f64; CONV2_CH * sp * sp];
    let mut pool_arg = vec![0usize; CONV2_CH * sp * sp];
    for p in 0..CONV2_CH {
        for py in 0..sp {
            for px in 0..sp {
                let mut best_at = (p * s2 + py * POOL) * s2 + px * POOL;
                let mut best = conv2[best_at];
                for dy in 0..POOL {
                    for dx in 0..POOL {
                        let at = (p * s2 + py * POOL + dy) * s2 + (px * POOL + dx);
                        if conv2[at] > best {
                            best = conv2[at];
                            best_at = at;
                        }
                    }
                }
                pool[(p * sp + py) * sp + px] = best;
                pool_arg[(p * sp + py) * sp + px] = best_at;
            }
        }
    }

    // Dense head.
    let fc1_pre = dense(params, off[2], &pool, CNN_FC);
    let fc1: Vec<f64> = fc1_pre.iter().map(|&h| h.max(0.0)).collect();
    let logits = dense(params, off[3], &fc1, s.classes());

    CnnTrace {
        conv1,
        pool,
        pool_arg,
        fc1_pre,
        fc1,
        logits,
    }
}

fn cnn_backward(params: &ModelParams, x: &[f64], y: usize, grad: &mut [f64]) -> f64 {
    let s = params.shape;
    let (s0, s1, s2) = (s.side, s.conv1_side(), s.conv2_side());
    let off = s.offsets();
    let v = &params.values;

    let mut trace = cnn_forward(params, x);
    let loss = softmax_xent_backward(&mut trace.logits, y);
    let d_logits = trace.logits;

    // fc2: logits = W4 fc1 + b4.
    let mut d_fc1 = vec![0.0f64; CNN_FC];
    for (o, &d) in d_logits.iter().enumerate() {
        let row = off[3].0 + o * CNN_FC;
        for j in 0..CNN_FC {
            grad[row + j] += d * trace.fc1[j];
            d_fc1[j] += d * v[row + j];
        }
        grad[off[3].1 + o] += d;
    }
    for (j, d) in d_fc1.iter_mut().enumerate() {
        if trace.fc1_pre[j] <= 0.0 {
            *d = 0.0;
        }
    }

    // fc1: fc1_pre = W3 pool + b3.
    let flat = s.flat_dim();
    let mut d_pool = vec![0.0f64; flat];
    for (o, &d) in d_fc1.iter().enumerate() {
        let row = off[2].0 + o * flat;
        for i in 0..flat {
            grad[row + i] += d * trace.pool[i];
            d_pool[i] += d * v[row + i];
        }
        grad[off[2].1 + o] += d;
    }

    // Un-pool: route each pooled gradient to its argmax cell; then ReLU mask
    // (conv2 stores post-ReLU values, zero exactly where pre-activation was
    // clamped — a zero pooled max also implies a zero pre-activation region
    // or exact zero output whose gradient we drop, matching max(0, .)).
    let mut d_conv2 = vec![0.0f64; CONV2_CH * s2 * s2];
    for (pi, &src) in trace.pool_arg.iter().enumerate() {
        if trace.pool[pi] > 0.0 {
            d_conv2[src] += d_pool[pi];
        }
    }

    // conv2 weights and input gradient.
    let mut d_conv1 = vec![0.0f64; CONV1_CH * s1 * s1];
    for p in 0..CONV2_CH {
        for yy in 0..s2 {
            for xx in 0..s2 {
                let d = d_conv2[(p * s2 + yy) * s2 + xx];
                if d == 0.0 {
                    continue;
                }
                grad[off[1].1 + p] += d;
                for o in 0..CONV1_CH {
                    let w0 = off[1].0 + (p * CONV1_CH + o) * KERNEL * KERNEL;
                    for ky in 0..KERNEL {
                        for kx in 0..KERNEL {
                            let at = (o * s1 + yy + ky) * s1 + (xx + kx);
                            grad[w0 + ky * KERNEL + kx] += d * trace.conv1[at];
                            d_conv1[at] += d * v[w0 + ky * KERNEL + kx];
                        }
                    }
                }
            }
        }
    }

    // ReLU mask on conv1 (post-activation zeros block gradient).
    for (i, &a) in trace.conv1.iter().enumerate() {
        if a <= 0.0 {
            d_conv1[i] = 0.0;
        }
    }

    // conv1 weights.
    for o in 0..CONV1_CH {
        let w0 = off[0].0 + o * KERNEL * KERNEL;
        for yy in 0..s1 {
            for xx in 0..s1 {
                let d = d_conv1[(o * s1 + yy) * s1 + xx];
                if d == 0.0 {
                    continue;
                }
                grad[off[0].1 + o] += d;
                for ky in 0..KERNEL {
                    for kx in 0..KERNEL {
                        grad[w0 + ky * KERNEL + kx] += d * x[(yy + ky) * s0 + (xx + kx)];
                    }
                }
            }
        }
    }

    loss
}
