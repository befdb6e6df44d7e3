use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::dataset::{stratified_kfold, Dataset, FoldAssignment};
use crate::error::{Error, Result};
use crate::gafs::{FeatureMask, GaConfig};
use crate::mlp::{cv_accuracy, CvScore, MlpConfig};
use crate::numerics::derive_seed;

/// MLP seed used when scoring `mask`: independent of evaluation order.
pub fn mask_seed(seed: u64, mask: &FeatureMask) -> u64 {
    derive_seed(seed, mask.digest())
}

/// Cross-validated accuracy of an MLP trained on the masked columns.
pub fn masked_cv(
    ds: &Dataset,
    mask: &FeatureMask,
    folds: &FoldAssignment,
    mlp_cfg: &MlpConfig,
    seed: u64,
) -> Result<CvScore> {
    if mask.len() != ds.n_features() {
        return Err(Error::BadShape(format!(
            "mask covers {} features, dataset has {}",
            mask.len(),
            ds.n_features()
        )));
    }
    if mask.popcount() == 0 {
        return Err(Error::BadConfig("feature mask selects no features".into()));
    }
    let sub = ds.select_features(&mask.indices())?;
    cv_accuracy(&sub, folds, &mlp_cfg.clone().with_seed(mask_seed(seed, mask)))
}

/// Uncached fitness: mean stratified `fitness_cv_folds`-fold CV accuracy.
pub fn fitness(mask: &FeatureMask, ds: &Dataset, cfg: &GaConfig) -> Result<f64> {
    let folds = stratified_kfold(ds, cfg.fitness_cv_folds, cfg.seed)?;
    Ok(masked_cv(ds, mask, &folds, &cfg.mlp_cfg, cfg.seed)?.mean)
}

/// Caching fitness oracle shared by one GA run.
pub struct FitnessEvaluator<'a> {
    ds: &'a Dataset,
    folds: FoldAssignment,
    mlp_cfg: MlpConfig,
    seed: u64,
    cache: Mutex<HashMap<FeatureMask, f64>>,
    evaluations: AtomicUsize,
}

impl<'a> FitnessEvaluator<'a> {
    pub fn new(ds: &'a Dataset, cfg: &GaConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(FitnessEvaluator {
            ds,
            folds: stratified_kfold(ds, cfg.fitness_cv_folds, cfg.seed)?,
            mlp_cfg: cfg.mlp_cfg.clone(),
            seed: cfg.seed,
            cache: Mutex::new(HashMap::new()),
            evaluations: AtomicUsize::new(0),
        })
    }

    pub fn dataset(&self) -> &Dataset {
        self.ds
    }

    pub fn folds(&self) -> &FoldAssignment {
        &self.folds
    }

    /// Number of distinct masks actually trained on so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::SeqCst)
    }

    pub fn cached(&self, mask: &FeatureMask) -> Option<f64> {
        self.cache.lock().unwrap().get(mask).copied()
    }

    pub fn evaluate(&self, mask: &FeatureMask) -> Result<f64> {
        if let Some(v) = self.cached(mask) {
            return Ok(v);
        }
        let v = masked_cv(self.ds, mask, &self.folds, &self.mlp_cfg, self.seed)?.mean;
        let mut cache = self.cache.lock().unwrap();
        if cache.insert(mask.clone(), v).is_none() {
            self.evaluations.fetch_add(1, Ordering::SeqCst);
        }
        Ok(v)
    }

    /// Scores a whole population, training each new distinct mask once and in parallel.
    pub fn evaluate_population(&self, population: &[FeatureMask]) -> Result<Vec<f64>> {
        let mut pending: Vec<&FeatureMask> = Vec::new();
        {
            let cache = self.cache.lock().unwrap();
            for m in population {
                if !cache.contains_key(m) && !pending.contains(&m) {
                    pending.push(m);
                }
            }
        }
        pending
            .par_iter()
            .map(|m| self.evaluate(m).map(|_| ()))
            .collect::<Result<Vec<()>>>()?;
        let cache = self.cache.lock().unwrap();
        Ok(population.iter().map(|m| cache[m]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::toy_dataset;
    use crate::numerics::Matrix;

    fn small_cfg() -> GaConfig {
        let mut cfg = GaConfig {
            seed: 11,
            ..GaConfig::default()
        };
        cfg.mlp_cfg.hidden_sizes = vec![4];
        cfg.mlp_cfg.max_epochs = 20;
        cfg
    }

    #[test]
    fn cache_counts_each_mask_once() {
        let ds = toy_dataset(&[12, 12]);
        let cfg = small_cfg();
        let ev = FitnessEvaluator::new(&ds, &cfg).unwrap();
        let m = FeatureMask::full(ds.n_features());
        let a = ev.evaluate(&m).unwrap();
        let b = ev.evaluate(&m).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(ev.evaluations(), 1);
        let scores = ev.evaluate_population(&[m.clone(), m.clone()]).unwrap();
        assert_eq!(scores, vec![a, a]);
        assert_eq!(ev.evaluations(), 1);
        assert_eq!(fitness(&m, &ds, &cfg).unwrap().to_bits(), a.to_bits());
    }

    #[test]
    fn constant_feature_scores_near_chance() {
        let n = 200;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![1.0, (i % 2) as f64]).collect();
        let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let ds = Dataset::new(
            "const",
            Matrix::from_rows(&rows).unwrap(),
            y,
            vec!["c".into(), "signal".into()],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let mut cfg = small_cfg();
        cfg.mlp_cfg.max_epochs = 200;
        let only_const = FeatureMask::parse("10").unwrap();
        let f = fitness(&only_const, &ds, &cfg).unwrap();
        assert!((f - 0.5).abs() <= 0.05, "{f}");
        let only_signal = FeatureMask::parse("01").unwrap();
        assert!(fitness(&only_signal, &ds, &cfg).unwrap() > 0.95);
    }

    #[test]
    fn mismatched_mask_rejected() {
        let ds = toy_dataset(&[6, 6]);
        let m = FeatureMask::full(ds.n_features() + 1);
        assert!(matches!(fitness(&m, &ds, &small_cfg()), Err(Error::BadShape(_))));
    }
}
