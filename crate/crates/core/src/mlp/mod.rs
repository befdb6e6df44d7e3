//! Multilayer perceptron classifier: softmax output, cross-entropy loss with
//! L2 weight penalty, backpropagation and mini-batch Adam.

mod backprop;
mod io;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{axpy, dot, Matrix, RandomStream};

pub use backprop::{loss_and_grad, Gradients};
pub use train::{cv_accuracy, train, CvScore, TrainHistory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "relu" => Some(Activation::Relu),
            "tanh" => Some(Activation::Tanh),
            _ => None,
        }
    }

    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation output `a`.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

/// Training hyperparameters. `Default` is the baseline ("default parameters") profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden_sizes: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub l2_penalty: f64,
    /// `None` means `min(32, n)`.
    pub batch_size: Option<usize>,
    pub max_epochs: usize,
    pub early_stop_tol: f64,
    pub early_stop_patience: usize,
    /// Standardize inputs with statistics of the training set; stored in the model.
    pub standardize_inputs: bool,
    pub seed: u64,
}

pub const DEFAULT_BATCH: usize = 32;

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_sizes: vec![100],
            activation: Activation::Relu,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            l2_penalty: 1e-4,
            batch_size: None,
            max_epochs: 200,
            early_stop_tol: 1e-4,
            early_stop_patience: 10,
            standardize_inputs: true,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadConfig(m));
        if self.hidden_sizes.iter().any(|&h| h == 0) {
            return bad("hidden layer sizes must be at least 1".into());
        }
        for (name, v) in [
            ("learning_rate", self.learning_rate),
            ("adam_eps", self.adam_eps),
            ("l2_penalty", self.l2_penalty),
            ("early_stop_tol", self.early_stop_tol),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be a finite value >= 0, got {v}"));
            }
        }
        for (name, v) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&v) {
                return bad(format!("{name} must lie in [0,1), got {v}"));
            }
        }
        if self.batch_size == Some(0) || self.max_epochs == 0 || self.early_stop_patience == 0 {
            return bad("batch_size, max_epochs and early_stop_patience must be at least 1".into());
        }
        Ok(())
    }

    pub fn effective_batch(&self, n: usize) -> usize {
        self.batch_size.unwrap_or(DEFAULT_BATCH).min(n).max(1)
    }
}

/// One dense layer; `weights` is fan_in × fan_out.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel {
    layers: Vec<Layer>,
    config: MlpConfig,
    input_dim: usize,
    class_count: usize,
    input_shift: Vec<f64>,
    input_scale: Vec<f64>,
}

/// Glorot-uniform weights from `RandomStream(cfg.seed, 0)`, zero biases,
/// identity input scaling.
pub fn init(input_dim: usize, class_count: usize, cfg: &MlpConfig) -> Result<MlpModel> {
    if input_dim == 0 || class_count == 0 {
        return Err(Error::BadShape(format!(
            "input_dim ({input_dim}) and class_count ({class_count}) must be at least 1"
        )));
    }
    cfg.validate()?;
    let mut rng = RandomStream::new(cfg.seed, 0);
    let layers = layer_sizes(input_dim, &cfg.hidden_sizes, class_count)
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let data = (0..fan_in * fan_out)
                .map(|_| rng.uniform(-bound, bound))
                .collect();
            Layer {
                weights: Matrix::from_raw(fan_in, fan_out, data),
                bias: vec![0.0; fan_out],
            }
        })
        .collect();
    Ok(MlpModel {
        layers,
        config: cfg.clone(),
        input_dim,
        class_count,
        input_shift: vec![0.0; input_dim],
        input_scale: vec![1.0; input_dim],
    })
}

fn layer_sizes(input_dim: usize, hidden: &[usize], class_count: usize) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(hidden.len() + 2);
    sizes.push(input_dim);
    sizes.extend_from_slice(hidden);
    sizes.push(class_count);
    sizes
}

impl MlpModel {
    /// Assembles a model from explicit parameters, checking that shapes chain.
    pub fn from_parts(
        layers: Vec<Layer>,
        config: MlpConfig,
        input_shift: Vec<f64>,
        input_scale: Vec<f64>,
    ) -> Result<Self> {
        let first = layers.first().ok_or_else(|| Error::BadShape("no layers".into()))?;
        let input_dim = first.weights.rows();
        let class_count = layers.last().unwrap().weights.cols();
        let mut fan_in = input_dim;
        for (l, layer) in layers.iter().enumerate() {
            if layer.weights.rows() != fan_in || layer.bias.len() != layer.weights.cols() {
                return Err(Error::BadShape(format!("layer {l} does not chain")));
            }
            fan_in = layer.weights.cols();
        }
        let expected: Vec<usize> = layers[..layers.len() - 1]
            .iter()
            .map(|l| l.weights.cols())
            .collect();
        if expected != config.hidden_sizes {
            return Err(Error::BadShape(format!(
                "layer widths {expected:?} disagree with hidden_sizes {:?}",
                config.hidden_sizes
            )));
        }
        if input_shift.len() != input_dim
            || input_scale.len() != input_dim
            || input_scale.iter().any(|&s| s <= 0.0)
        {
            return Err(Error::BadShape("input scaling does not match input_dim".into()));
        }
        let all_finite = layers.iter().all(|l| {
            l.weights.as_slice().iter().chain(&l.bias).all(|v| v.is_finite())
        });
        if !all_finite {
            return Err(Error::NonFinite("model parameters".into()));
        }
        Ok(MlpModel {
            layers,
            config,
            input_dim,
            class_count,
            input_shift,
            input_scale,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn input_shift(&self) -> &[f64] {
        &self.input_shift
    }

    pub fn input_scale(&self) -> &[f64] {
        &self.input_scale
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.bias.len())
            .sum()
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.input_dim {
            return Err(Error::BadShape(format!(
                "model expects {} features, got {}",
                self.input_dim,
                x.cols()
            )));
        }
        Ok(())
    }

    fn scale_input(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..out.rows() {
            for ((v, m), s) in out
                .row_mut(i)
                .iter_mut()
                .zip(&self.input_shift)
                .zip(&self.input_scale)
            {
                *v = (*v - m) / s;
            }
        }
        out
    }
}

/// Layers narrower than this are evaluated through their transposed weights.
pub(crate) const NARROW_LAYER: usize = 16;

/// `inputs · W + b` for every row.
pub(crate) fn affine(inputs: &Matrix, layer: &Layer) -> Matrix {
    let fan_out = layer.weights.cols();
    let mut out = Matrix::zeros(inputs.rows(), fan_out);
    if fan_out < NARROW_LAYER {
        let wt = layer.weights.transpose();
        for i in 0..inputs.rows() {
            let x = inputs.row(i);
            for (c, o) in out.row_mut(i).iter_mut().enumerate() {
                *o = layer.bias[c] + dot(x, wt.row(c));
            }
        }
        return out;
    }
    for i in 0..inputs.rows() {
        let out_row = out.row_mut(i);
        out_row.copy_from_slice(&layer.bias);
        for (k, &a) in inputs.row(i).iter().enumerate() {
            if a != 0.0 {
                axpy(a, layer.weights.row(k), out_row);
            }
        }
    }
    out
}

/// Row-wise softmax with max subtraction, in place.
pub(crate) fn softmax_rows(logits: &mut Matrix) {
    for i in 0..logits.rows() {
        let row = logits.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

/// Hidden activations and class probabilities for already-scaled inputs.
pub(crate) fn forward_scaled(layers: &[Layer], activation: Activation, x: &Matrix) -> Vec<Matrix> {
    let mut outputs: Vec<Matrix> = Vec::with_capacity(layers.len());
    for (l, layer) in layers.iter().enumerate() {
        let input = if l == 0 { x } else { &outputs[l - 1] };
        let mut z = affine(input, layer);
        if l + 1 == layers.len() {
            softmax_rows(&mut z);
        } else {
            z.as_mut_slice()
                .iter_mut()
                .for_each(|v| *v = activation.apply(*v));
        }
        outputs.push(z);
    }
    outputs
}

/// Class probabilities, one softmax row per sample.
pub fn forward(model: &MlpModel, x: &Matrix) -> Result<Matrix> {
    model.check_input(x)?;
    let xs = model.scale_input(x);
    Ok(forward_scaled(&model.layers, model.config.activation, &xs)
        .pop()
        .unwrap())
}

/// Index of the row maximum; ties resolve to the lowest index.
pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = j;
        }
    }
    best
}

pub fn predict(model: &MlpModel, x: &Matrix) -> Result<Vec<usize>> {
    let probs = forward(model, x)?;
    Ok((0..probs.rows()).map(|i| argmax(probs.row(i))).collect())
}

pub fn accuracy(model: &MlpModel, x: &Matrix, y: &[usize]) -> Result<f64> {
    if x.rows() != y.len() {
        return Err(Error::BadShape(format!(
            "{} rows but {} labels",
            x.rows(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::BadShape("accuracy of an empty set".into()));
    }
    let hits = predict(model, x)?
        .iter()
        .zip(y)
        .filter(|(p, t)| p == t)
        .count();
    Ok(hits as f64 / y.len() as f64)
}
