use serde::Serialize;

use crate::dataset::{Dataset, FoldAssignment};
use crate::error::{Error, Result};
use crate::mlp::backprop::backprop;
use crate::mlp::{accuracy, init, MlpConfig, MlpModel};
use crate::numerics::{column_means, column_stds, derive_seed, Matrix, RandomStream, DEGENERATE_STD};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainHistory {
    /// Mean mini-batch objective per epoch.
    pub loss: Vec<f64>,
    /// Fraction of samples classified correctly by the mini-batch forward passes of each epoch.
    pub accuracy: Vec<f64>,
    pub stopped_epoch: usize,
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    fn new(model: &MlpModel) -> Self {
        let sizes: Vec<usize> = model
            .layers()
            .iter()
            .flat_map(|l| [l.weights.as_slice().len(), l.bias.len()])
            .collect();
        Adam {
            m: sizes.iter().map(|&s| vec![0.0; s]).collect(),
            v: sizes.iter().map(|&s| vec![0.0; s]).collect(),
            t: 0,
        }
    }

    fn step(&mut self, model: &mut MlpModel, grads: &crate::mlp::Gradients, cfg: &MlpConfig) {
        self.t += 1;
        let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
        let lr = cfg.learning_rate * (1.0 - b2.powi(self.t)).sqrt() / (1.0 - b1.powi(self.t));
        let eps = cfg.adam_eps;
        let mut slot = 0;
        for (layer, g) in model.layers_mut().iter_mut().zip(&grads.layers) {
            for (params, grad) in [
                (layer.weights.as_mut_slice(), g.weights.as_slice()),
                (layer.bias.as_mut_slice(), g.bias.as_slice()),
            ] {
                let m = &mut self.m[slot];
                let v = &mut self.v[slot];
                for i in 0..params.len() {
                    m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
                    v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
                    params[i] -= lr * m[i] / (v[i].sqrt() + eps);
                }
                slot += 1;
            }
        }
    }
}

/// Mini-batch Adam training.
///
/// Epoch `e` (1-based) shuffles with `RandomStream(cfg.seed, e)`. Training
/// stops after `max_epochs`, or once the epoch loss has failed to improve on
/// the best loss so far by at least `early_stop_tol` for
/// `early_stop_patience` consecutive epochs.
pub fn train(
    x: &Matrix,
    y: &[usize],
    class_count: usize,
    cfg: &MlpConfig,
) -> Result<(MlpModel, TrainHistory)> {
    cfg.validate()?;
    let n = x.rows();
    if n != y.len() {
        return Err(Error::BadShape(format!("{n} rows but {} labels", y.len())));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= class_count) {
        return Err(Error::BadShape(format!("label {bad} outside 0..{class_count}")));
    }
    let mut present = vec![false; class_count];
    y.iter().for_each(|&c| present[c] = true);
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::SingleClass);
    }

    let mut model = init(x.cols(), class_count, cfg)?;
    if cfg.standardize_inputs && n >= 2 {
        let means = column_means(x);
        let stds = column_stds(x, &means)
            .into_iter()
            .map(|s| if s < DEGENERATE_STD { 1.0 } else { s })
            .collect();
        model.input_shift = means;
        model.input_scale = stds;
    }
    let xs = model.scale_input(x);

    let batch = cfg.effective_batch(n);
    let mut adam = Adam::new(&model);
    let mut history = TrainHistory {
        loss: Vec::new(),
        accuracy: Vec::new(),
        stopped_epoch: 0,
    };
    let mut best_loss = f64::INFINITY;
    let mut stale = 0;
    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 1..=cfg.max_epochs {
        order.sort_unstable();
        RandomStream::new(cfg.seed, epoch as u64).shuffle(&mut order);
        let mut epoch_loss = 0.0;
        let mut correct = 0;
        for chunk in order.chunks(batch) {
            let xb = xs.select_rows(chunk);
            let yb: Vec<usize> = chunk.iter().map(|&i| y[i]).collect();
            let r = backprop(
                model.layers(),
                cfg.activation,
                cfg.l2_penalty,
                &xb,
                &yb,
            );
            epoch_loss += r.loss * chunk.len() as f64;
            correct += r.correct;
            adam.step(&mut model, &r.grads, cfg);
        }
        epoch_loss /= n as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::NonFinite(format!("training loss at epoch {epoch}")));
        }
        history.loss.push(epoch_loss);
        history.accuracy.push(correct as f64 / n as f64);
        history.stopped_epoch = epoch;

        if epoch_loss > best_loss - cfg.early_stop_tol {
            stale += 1;
        } else {
            stale = 0;
        }
        best_loss = best_loss.min(epoch_loss);
        if stale >= cfg.early_stop_patience {
            break;
        }
    }
    Ok((model, history))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CvScore {
    pub mean: f64,
    pub folds: Vec<f64>,
}

/// Trains on all folds but one and scores the held-out fold, for every fold.
///
/// The model for fold `f` is seeded with `derive_seed(cfg.seed, f)`.
pub fn cv_accuracy(ds: &Dataset, folds: &FoldAssignment, cfg: &MlpConfig) -> Result<CvScore> {
    if folds.n_samples() != ds.n_samples() {
        return Err(Error::BadShape(format!(
            "fold assignment covers {} samples, dataset has {}",
            folds.n_samples(),
            ds.n_samples()
        )));
    }
    let mut scores = Vec::with_capacity(folds.k);
    for f in 0..folds.k {
        let train_idx = folds.train_indices(f);
        let test_idx = folds.test_indices(f);
        if test_idx.is_empty() {
            return Err(Error::BadShape(format!("fold {f} is empty")));
        }
        let fold_cfg = cfg.clone().with_seed(derive_seed(cfg.seed, f as u64));
        let ytr: Vec<usize> = train_idx.iter().map(|&i| ds.y()[i]).collect();
        let (model, _) = train(&ds.x().select_rows(&train_idx), &ytr, ds.n_classes(), &fold_cfg)?;
        let yte: Vec<usize> = test_idx.iter().map(|&i| ds.y()[i]).collect();
        scores.push(accuracy(&model, &ds.x().select_rows(&test_idx), &yte)?);
    }
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok(CvScore {
        mean,
        folds: scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::stratified_kfold;

    fn blobs(n_per: usize, sep: f64, seed: u64) -> (Matrix, Vec<usize>) {
        let mut rng = RandomStream::new(seed, 0);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..2 * n_per {
            let c = i % 2;
            let offset = if c == 0 { -sep / 2.0 } else { sep / 2.0 };
            rows.push(vec![rng.normal() + offset, rng.normal() + offset]);
            y.push(c);
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn single_class_rejected() {
        let x = Matrix::zeros(4, 2);
        assert!(matches!(
            train(&x, &[1, 1, 1, 1], 2, &MlpConfig::default()),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn history_lengths_match() {
        let (x, y) = blobs(20, 4.0, 1);
        let mut cfg = MlpConfig::default();
        cfg.max_epochs = 7;
        let (_, h) = train(&x, &y, 2, &cfg).unwrap();
        assert_eq!(h.stopped_epoch, 7);
        assert_eq!(h.loss.len(), 7);
        assert_eq!(h.accuracy.len(), 7);
    }

    #[test]
    fn flat_loss_triggers_early_stop() {
        // zero learning rate keeps the loss constant, so patience runs out
        let (x, y) = blobs(20, 4.0, 1);
        let mut cfg = MlpConfig::default();
        cfg.learning_rate = 0.0;
        let (_, h) = train(&x, &y, 2, &cfg).unwrap();
        assert_eq!(h.stopped_epoch, cfg.early_stop_patience + 1);
        assert!(h.stopped_epoch < cfg.max_epochs);
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let (x, y) = blobs(30, 2.0, 5);
        let cfg = MlpConfig {
            max_epochs: 20,
            ..MlpConfig::default().with_seed(8)
        };
        let (a, ha) = train(&x, &y, 2, &cfg).unwrap();
        let (b, hb) = train(&x, &y, 2, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ha, hb);
    }

    #[test]
    fn cv_rejects_mismatched_folds() {
        let ds = crate::dataset::toy_dataset(&[5, 5]);
        let other = crate::dataset::toy_dataset(&[6, 6]);
        let folds = stratified_kfold(&other, 2, 0).unwrap();
        assert!(cv_accuracy(&ds, &folds, &MlpConfig::default()).is_err());
    }
}
