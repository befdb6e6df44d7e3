use std::path::Path;

use crate::error::{Error, Result};
use crate::mlp::{Activation, Layer, MlpConfig, MlpModel};
use crate::numerics::Matrix;
use crate::textio::{push_line, Lines};

const MAGIC: &str = "mlp-model";

impl MlpModel {
    /// Portable text form:
    ///
    /// ```text
    /// mlp-model 1
    /// shape <input_dim> <hidden...> <class_count>
    /// activation relu
    /// config <learning_rate> <beta1> <beta2> <eps> <l2> <batch|0> <max_epochs> <tol> <patience> <standardize 0|1> <seed>
    /// input_shift ...
    /// input_scale ...
    /// weights <rows> <cols>     followed by one `row` line per weight row
    /// bias ...
    /// ```
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        push_line(&mut out, MAGIC, &[1]);
        let mut shape = vec![self.input_dim];
        shape.extend(&c.hidden_sizes);
        shape.push(self.class_count);
        push_line(&mut out, "shape", &shape);
        push_line(&mut out, "activation", &[c.activation.name()]);
        let config = [
            c.learning_rate.to_string(),
            c.adam_beta1.to_string(),
            c.adam_beta2.to_string(),
            c.adam_eps.to_string(),
            c.l2_penalty.to_string(),
            c.batch_size.unwrap_or(0).to_string(),
            c.max_epochs.to_string(),
            c.early_stop_tol.to_string(),
            c.early_stop_patience.to_string(),
            u8::from(c.standardize_inputs).to_string(),
            c.seed.to_string(),
        ];
        push_line(&mut out, "config", &config);
        push_line(&mut out, "input_shift", &self.input_shift);
        push_line(&mut out, "input_scale", &self.input_scale);
        for layer in &self.layers {
            push_line(&mut out, "weights", &[layer.weights.rows(), layer.weights.cols()]);
            for r in 0..layer.weights.rows() {
                push_line(&mut out, "row", layer.weights.row(r));
            }
            push_line(&mut out, "bias", &layer.bias);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<MlpModel> {
        let mut lines = Lines::new(text, MAGIC);
        let (line, version) = lines.expect(MAGIC)?;
        if version != ["1"] {
            return Err(lines.error(line, "unsupported version"));
        }
        let shape = lines.expect_usizes("shape")?;
        if shape.len() < 2 {
            return Err(lines.error(2, "shape needs input and output sizes"));
        }
        let (line, act) = lines.expect("activation")?;
        let activation = act
            .first()
            .and_then(|a| Activation::parse(a))
            .ok_or_else(|| lines.error(line, "unknown activation"))?;
        let (line, cfg) = lines.expect("config")?;
        if cfg.len() != 11 {
            return Err(lines.error(line, "config needs 11 fields"));
        }
        let real = |i: usize| -> Result<f64> {
            cfg[i].parse().map_err(|_| Error::Parse {
                line,
                column: MAGIC.into(),
                message: format!("bad config value `{}`", cfg[i]),
            })
        };
        let count = |i: usize| -> Result<u64> {
            cfg[i].parse().map_err(|_| Error::Parse {
                line,
                column: MAGIC.into(),
                message: format!("bad config value `{}`", cfg[i]),
            })
        };
        let batch = count(5)? as usize;
        let config = MlpConfig {
            hidden_sizes: shape[1..shape.len() - 1].to_vec(),
            activation,
            learning_rate: real(0)?,
            adam_beta1: real(1)?,
            adam_beta2: real(2)?,
            adam_eps: real(3)?,
            l2_penalty: real(4)?,
            batch_size: (batch > 0).then_some(batch),
            max_epochs: count(6)? as usize,
            early_stop_tol: real(7)?,
            early_stop_patience: count(8)? as usize,
            standardize_inputs: count(9)? != 0,
            seed: count(10)?,
        };
        let input_dim = shape[0];
        let input_shift = lines.expect_values("input_shift", input_dim)?;
        let input_scale = lines.expect_values("input_scale", input_dim)?;
        let mut layers = Vec::new();
        for w in shape.windows(2) {
            let dims = lines.expect_usizes("weights")?;
            if dims != w {
                return Err(lines.error(0, format!("layer shape {dims:?} != {w:?}")));
            }
            let mut data = Vec::with_capacity(w[0] * w[1]);
            for _ in 0..w[0] {
                data.extend(lines.expect_values("row", w[1])?);
            }
            let bias = lines.expect_values("bias", w[1])?;
            layers.push(Layer {
                weights: Matrix::from_vec(w[0], w[1], data)?,
                bias,
            });
        }
        MlpModel::from_parts(layers, config, input_shift, input_scale)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<MlpModel> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        MlpModel::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::init;

    #[test]
    fn text_round_trip_is_exact() {
        let cfg = MlpConfig {
            hidden_sizes: vec![7, 5],
            activation: Activation::Tanh,
            batch_size: Some(16),
            ..MlpConfig::default().with_seed(99)
        };
        let mut m = init(3, 4, &cfg).unwrap();
        m.input_shift = vec![0.1, -2.5, 1e-7];
        m.input_scale = vec![1.0, 3.25, 0.5];
        let back = MlpModel::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn truncated_text_is_a_parse_error() {
        let m = init(2, 2, &MlpConfig::default()).unwrap();
        let text = m.to_text();
        let cut = &text[..text.len() / 2];
        assert!(matches!(MlpModel::from_text(cut), Err(Error::Parse { .. })));
    }
}
