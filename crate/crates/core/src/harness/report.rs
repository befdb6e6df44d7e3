use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gafs::{write_convergence_csv, GenerationLog};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub spec: String,
    pub n_samples: usize,
    pub n_features: usize,
    pub n_classes: usize,
    pub class_counts: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaDetail {
    pub best_mask: String,
    pub popcount: usize,
    pub selected_features: Vec<String>,
    pub best_fitness: f64,
    pub fitness_cv_folds: usize,
    pub generations: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaDetail {
    pub mode: String,
    pub k: usize,
    pub cumulative_variance_ratio: f64,
    pub explained_variance_ratio: Vec<f64>,
    pub scaled: bool,
    pub pca_fit_scope: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefaultDetail {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArmDetail {
    Ga(GaDetail),
    Pca(PcaDetail),
    Default(DefaultDetail),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmReport {
    pub name: String,
    pub train_accuracy: f64,
    pub cv_accuracy_mean: f64,
    pub cv_accuracy_folds: Vec<f64>,
    pub n_features: usize,
    pub detail: ArmDetail,
    /// Kept out of report.json so the report stays byte-reproducible.
    #[serde(skip)]
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub featopt: String,
    pub report_schema: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Versions {
            featopt: env!("CARGO_PKG_VERSION").to_string(),
            report_schema: REPORT_SCHEMA_VERSION,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: DatasetSummary,
    pub seed: u64,
    pub arms: Vec<ArmReport>,
    pub config: serde_json::Value,
    pub versions: Versions,
    #[serde(skip)]
    pub convergence: Option<Vec<GenerationLog>>,
}

impl ExperimentReport {
    pub fn arm(&self, name: &str) -> Option<&ArmReport> {
        self.arms.iter().find(|a| a.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn timing_json(&self) -> String {
        let arms: serde_json::Map<String, serde_json::Value> = self
            .arms
            .iter()
            .map(|a| (a.name.clone(), serde_json::json!(a.wall_seconds)))
            .collect();
        let mut s = serde_json::to_string_pretty(&serde_json::json!({ "wall_seconds": arms }))
            .expect("timing serializes");
        s.push('\n');
        s
    }

    /// Plain-text results table.
    pub fn to_table(&self) -> String {
        let d = &self.dataset;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "dataset {} ({} samples, {} features, {} classes), seed {}",
            d.name, d.n_samples, d.n_features, d.n_classes, self.seed
        );
        let _ = writeln!(
            out,
            "{:<10} {:>10} {:>10} {:>9} {:>10}  detail",
            "arm", "train_acc", "cv_mean", "cv_sd", "features"
        );
        for a in &self.arms {
            let n = a.cv_accuracy_folds.len() as f64;
            let sd = if n > 1.0 {
                let m = a.cv_accuracy_mean;
                (a.cv_accuracy_folds.iter().map(|f| (f - m) * (f - m)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            let detail = match &a.detail {
                ArmDetail::Ga(g) => format!(
                    "mask {} fitness {:.4} ({} evaluations)",
                    g.best_mask, g.best_fitness, g.evaluations
                ),
                ArmDetail::Pca(p) => format!(
                    "{} k={} cumulative variance {:.4}",
                    p.mode, p.k, p.cumulative_variance_ratio
                ),
                ArmDetail::Default(_) => String::new(),
            };
            let _ = writeln!(
                out,
                "{:<10} {:>10.4} {:>10.4} {:>9.4} {:>10}  {}",
                a.name, a.train_accuracy, a.cv_accuracy_mean, sd, a.n_features, detail
            );
        }
        out
    }

    /// Writes report.json, report.txt, timing.json and, when the GA ran, convergence.csv.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, text: String| {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
        };
        write("report.json", self.to_json())?;
        write("report.txt", self.to_table())?;
        write("timing.json", self.timing_json())?;
        if let Some(log) = &self.convergence {
            emit_convergence(log, &dir.join("convergence.csv"))?;
        }
        Ok(())
    }
}

/// Writes the GA convergence trace as CSV.
pub fn emit_convergence(log: &[GenerationLog], path: &Path) -> Result<()> {
    if log.is_empty() {
        return Err(Error::BadConfig("convergence log is empty".into()));
    }
    write_convergence_csv(path, log)
}
