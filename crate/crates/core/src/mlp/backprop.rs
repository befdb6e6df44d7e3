use crate::error::{Error, Result};
use crate::mlp::{argmax, forward_scaled, Activation, Layer, MlpModel, NARROW_LAYER};
use crate::numerics::{axpy, dot, Matrix};

/// Parameter gradients, shaped exactly like the model's layers.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

pub(crate) struct BatchResult {
    pub loss: f64,
    pub grads: Gradients,
    pub correct: usize,
}

/// Mean cross-entropy plus `l2/(2n)·Σ‖W‖²` and its exact gradient.
///
/// Inputs pass through the model's stored input scaling first; gradients are
/// with respect to the layer parameters only.
pub fn loss_and_grad(model: &MlpModel, x: &Matrix, y: &[usize]) -> Result<(f64, Gradients)> {
    model.check_input(x)?;
    if x.rows() != y.len() || y.is_empty() {
        return Err(Error::BadShape(format!(
            "{} rows but {} labels",
            x.rows(),
            y.len()
        )));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= model.class_count) {
        return Err(Error::BadShape(format!(
            "label {bad} outside 0..{}",
            model.class_count
        )));
    }
    let xs = model.scale_input(x);
    let r = backprop(
        &model.layers,
        model.config.activation,
        model.config.l2_penalty,
        &xs,
        y,
    );
    Ok((r.loss, r.grads))
}

pub(crate) fn backprop(
    layers: &[Layer],
    activation: Activation,
    l2: f64,
    x: &Matrix,
    y: &[usize],
) -> BatchResult {
    let n = x.rows();
    let inv_n = 1.0 / n as f64;
    let outputs = forward_scaled(layers, activation, x);
    let probs = outputs.last().unwrap();

    let mut loss = 0.0;
    let mut correct = 0;
    // output delta: (P - onehot) / n
    let mut delta = probs.clone();
    for (i, &label) in y.iter().enumerate() {
        let row = delta.row_mut(i);
        if argmax(row) == label {
            correct += 1;
        }
        loss -= row[label].max(f64::MIN_POSITIVE).ln();
        row[label] -= 1.0;
        row.iter_mut().for_each(|v| *v *= inv_n);
    }
    loss *= inv_n;
    let penalty: f64 = layers
        .iter()
        .map(|l| l.weights.as_slice().iter().map(|w| w * w).sum::<f64>())
        .sum();
    loss += 0.5 * l2 * inv_n * penalty;

    let mut grads: Vec<Layer> = Vec::with_capacity(layers.len());
    for l in (0..layers.len()).rev() {
        let layer = &layers[l];
        let input = if l == 0 { x } else { &outputs[l - 1] };
        let (fan_in, fan_out) = layer.weights.shape();

        let mut gb = vec![0.0; fan_out];
        for i in 0..n {
            axpy(1.0, delta.row(i), &mut gb);
        }
        let wt = (fan_out < NARROW_LAYER).then(|| layer.weights.transpose());

        let mut gw = match &wt {
            // accumulate Wᵀ-shaped so the inner loops run over fan_in
            Some(_) => {
                let mut gwt = Matrix::zeros(fan_out, fan_in);
                for i in 0..n {
                    let a = input.row(i);
                    for (c, &d) in delta.row(i).iter().enumerate() {
                        if d != 0.0 {
                            axpy(d, a, gwt.row_mut(c));
                        }
                    }
                }
                gwt.transpose()
            }
            None => {
                let mut gw = Matrix::zeros(fan_in, fan_out);
                for i in 0..n {
                    let d = delta.row(i);
                    for (k, &a) in input.row(i).iter().enumerate() {
                        if a != 0.0 {
                            axpy(a, d, gw.row_mut(k));
                        }
                    }
                }
                gw
            }
        };
        let decay = l2 * inv_n;
        for (g, w) in gw.as_mut_slice().iter_mut().zip(layer.weights.as_slice()) {
            *g += decay * w;
        }

        if l > 0 {
            let mut prev = Matrix::zeros(n, fan_in);
            for i in 0..n {
                let d = delta.row(i);
                let a_row = input.row(i);
                let p_row = prev.row_mut(i);
                match &wt {
                    Some(wt) => {
                        for (c, &dc) in d.iter().enumerate() {
                            axpy(dc, wt.row(c), p_row);
                        }
                        for (p, &a) in p_row.iter_mut().zip(a_row) {
                            *p *= activation.derivative_from_output(a);
                        }
                    }
                    None => {
                        for k in 0..fan_in {
                            let deriv = activation.derivative_from_output(a_row[k]);
                            if deriv != 0.0 {
                                p_row[k] = deriv * dot(d, layer.weights.row(k));
                            }
                        }
                    }
                }
            }
            delta = prev;
        }
        grads.push(Layer {
            weights: gw,
            bias: gb,
        });
    }
    grads.reverse();
    BatchResult {
        loss,
        grads: Gradients { layers: grads },
        correct,
    }
}
