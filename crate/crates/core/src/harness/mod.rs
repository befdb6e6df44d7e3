//! Experiment runner: the default, GA and PCA configurations on one dataset,
//! with a JSON report, a text table and the GA convergence trace.

mod config;
mod report;

use std::time::Instant;

use crate::dataset::{filter_min_class_count, stratified_kfold, Dataset, FoldAssignment};
use crate::error::{Error, Result};
use crate::gafs::{evolve_with, mask_seed, masked_cv, FeatureMask, FitnessEvaluator, GenerationLog};
use crate::mlp::{accuracy, cv_accuracy, train, CvScore, MlpConfig};
use crate::numerics::derive_seed;
use crate::pca::{self, PcaMode, PcaModel};

pub use config::{ArmKind, DatasetSpec, ExperimentConfig, PcaFitScope};
pub use report::{
    emit_convergence, ArmDetail, ArmReport, DatasetSummary, DefaultDetail, ExperimentReport, GaDetail,
    PcaDetail, Versions, REPORT_SCHEMA_VERSION,
};

const PCA_SEED_TAG: u64 = 0x9CA;

/// Loads the configured dataset and applies the class-size filter.
pub fn prepare_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let ds = cfg.dataset.load(&cfg.label_column, cfg.seed)?;
    if cfg.min_class_count > 1 {
        filter_min_class_count(&ds, cfg.min_class_count)
    } else {
        Ok(ds)
    }
}

/// Runs every configured arm in order and, if `out_dir` is set, writes the outputs there.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let ds = prepare_dataset(cfg)?;
    let folds = stratified_kfold(&ds, cfg.cv_folds, cfg.seed)?;
    let mut arms = Vec::with_capacity(cfg.arms.len());
    let mut convergence = None;
    for &arm in &cfg.arms {
        let start = Instant::now();
        let mut result = match arm {
            ArmKind::Default => run_default(&ds, &folds, cfg),
            ArmKind::Ga => run_ga(&ds, &folds, cfg).map(|(r, log)| {
                convergence = Some(log);
                r
            }),
            ArmKind::Pca => run_pca(&ds, &folds, cfg),
        }
        .map_err(|e| e.in_arm(arm.name()))?;
        result.wall_seconds = start.elapsed().as_secs_f64();
        arms.push(result);
    }
    let report = ExperimentReport {
        dataset: DatasetSummary {
            name: ds.name().to_string(),
            spec: cfg.dataset.to_string(),
            n_samples: ds.n_samples(),
            n_features: ds.n_features(),
            n_classes: ds.n_classes(),
            class_counts: ds.class_counts(),
        },
        seed: cfg.seed,
        arms,
        config: config_echo(cfg),
        versions: Versions::default(),
        convergence,
    };
    if let Some(dir) = &cfg.out_dir {
        report.write_to(dir)?;
    }
    Ok(report)
}

/// The configuration as run: the GA entry shows the effective GA settings,
/// whose MLP settings are the shared `mlp` entry.
fn config_echo(cfg: &ExperimentConfig) -> serde_json::Value {
    let mut echo = serde_json::to_value(cfg).expect("config serializes");
    let mut ga = serde_json::to_value(cfg.ga_config()).expect("ga config serializes");
    if let Some(fields) = ga.as_object_mut() {
        fields.remove("mlp_cfg");
    }
    echo["ga"] = ga;
    echo
}

/// Training-set accuracy of a model fitted on every row.
fn train_accuracy(ds: &Dataset, mlp: &MlpConfig) -> Result<f64> {
    let (model, _) = train(ds.x(), ds.y(), ds.n_classes(), mlp)?;
    accuracy(&model, ds.x(), ds.y())
}

fn masked_arm(
    name: &str,
    ds: &Dataset,
    mask: &FeatureMask,
    folds: &FoldAssignment,
    cfg: &ExperimentConfig,
    detail: ArmDetail,
) -> Result<ArmReport> {
    let cv = masked_cv(ds, mask, folds, &cfg.mlp, cfg.seed)?;
    let sub = ds.select_features(&mask.indices())?;
    let train_acc = train_accuracy(&sub, &cfg.mlp.clone().with_seed(mask_seed(cfg.seed, mask)))?;
    Ok(arm_report(name, train_acc, cv, mask.popcount(), detail))
}

fn arm_report(name: &str, train_accuracy: f64, cv: CvScore, n_features: usize, detail: ArmDetail) -> ArmReport {
    ArmReport {
        name: name.to_string(),
        train_accuracy,
        cv_accuracy_mean: cv.mean,
        cv_accuracy_folds: cv.folds,
        n_features,
        detail,
        wall_seconds: 0.0,
    }
}

fn run_default(ds: &Dataset, folds: &FoldAssignment, cfg: &ExperimentConfig) -> Result<ArmReport> {
    let full = FeatureMask::full(ds.n_features());
    masked_arm("default", ds, &full, folds, cfg, ArmDetail::Default(DefaultDetail {}))
}

fn run_ga(
    ds: &Dataset,
    folds: &FoldAssignment,
    cfg: &ExperimentConfig,
) -> Result<(ArmReport, Vec<GenerationLog>)> {
    let ga = cfg.ga_config();
    let evaluator = FitnessEvaluator::new(ds, &ga)?;
    let result = evolve_with(&evaluator, &ga)?;
    let names = ds.feature_names();
    let detail = ArmDetail::Ga(GaDetail {
        best_mask: result.best.to_string(),
        popcount: result.best.popcount(),
        selected_features: result.best.indices().iter().map(|&i| names[i].clone()).collect(),
        best_fitness: result.best_fitness,
        fitness_cv_folds: ga.fitness_cv_folds,
        generations: ga.generations,
        evaluations: result.evaluations,
    });
    let report = masked_arm("ga", ds, &result.best, folds, cfg, detail)?;
    Ok((report, result.log))
}

fn pca_dataset(ds: &Dataset, model: &PcaModel, rows: Option<&[usize]>) -> Result<Dataset> {
    let names = (1..=model.k).map(|i| format!("pc{i}")).collect();
    match rows {
        None => ds.with_features(model.transform(ds.x())?, names),
        Some(idx) => {
            let sub = ds.x().select_rows(idx);
            let y = idx.iter().map(|&i| ds.y()[i]).collect();
            Dataset::new(
                ds.name(),
                model.transform(&sub)?,
                y,
                names,
                ds.class_names().to_vec(),
            )
        }
    }
}

fn run_pca(ds: &Dataset, folds: &FoldAssignment, cfg: &ExperimentConfig) -> Result<ArmReport> {
    let model = pca::fit(ds.x(), cfg.pca_mode, cfg.scale_inputs)?;
    let mlp = cfg.mlp.clone().with_seed(derive_seed(cfg.seed, PCA_SEED_TAG));
    let projected = pca_dataset(ds, &model, None)?;
    let train_acc = train_accuracy(&projected, &mlp)?;
    let cv = match cfg.pca_fit_scope {
        PcaFitScope::FullDataset => cv_accuracy(&projected, folds, &mlp)?,
        PcaFitScope::PerFold => per_fold_pca_cv(ds, folds, cfg, &mlp)?,
    };
    let mode = match cfg.pca_mode {
        PcaMode::Variance(t) => format!("variance({t})"),
        PcaMode::FixedK(k) => format!("fixed_k({k})"),
    };
    let detail = ArmDetail::Pca(PcaDetail {
        mode,
        k: model.k,
        cumulative_variance_ratio: model.cumulative_ratio(),
        explained_variance_ratio: model.explained_ratio(),
        scaled: cfg.scale_inputs,
        pca_fit_scope: match cfg.pca_fit_scope {
            PcaFitScope::FullDataset => "full_dataset".into(),
            PcaFitScope::PerFold => "per_fold".into(),
        },
    });
    Ok(arm_report("pca", train_acc, cv, model.k, detail))
}

/// CV where PCA is refitted on each training fold only.
fn per_fold_pca_cv(
    ds: &Dataset,
    folds: &FoldAssignment,
    cfg: &ExperimentConfig,
    mlp: &MlpConfig,
) -> Result<CvScore> {
    let mut scores = Vec::with_capacity(folds.k);
    for f in 0..folds.k {
        let train_idx = folds.train_indices(f);
        let test_idx = folds.test_indices(f);
        if test_idx.is_empty() {
            return Err(Error::BadShape(format!("fold {f} is empty")));
        }
        let model = pca::fit(&ds.x().select_rows(&train_idx), cfg.pca_mode, cfg.scale_inputs)?;
        let tr = pca_dataset(ds, &model, Some(&train_idx))?;
        let te = pca_dataset(ds, &model, Some(&test_idx))?;
        let fold_cfg = mlp.clone().with_seed(derive_seed(mlp.seed, f as u64));
        let (net, _) = train(tr.x(), tr.y(), ds.n_classes(), &fold_cfg)?;
        scores.push(accuracy(&net, te.x(), te.y())?);
    }
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok(CvScore {
        mean,
        folds: scores,
    })
}
