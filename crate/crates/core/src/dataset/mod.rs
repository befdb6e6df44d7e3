//! Tabular classification datasets: loading, cleaning, class filtering,
//! stratified folds and a synthetic high-dimensional generator.

mod csv;
mod folds;
mod synthetic;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub use csv::{load_builtin, load_csv, parse_csv, save_csv, to_csv_string, LoadOptions, MissingPolicy};
pub use folds::{stratified_kfold, FoldAssignment};
pub use synthetic::{generate_synthetic, INFORMATIVE_PREFIX};

/// Immutable feature matrix with dense integer labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    name: String,
    x: Matrix,
    y: Vec<usize>,
    feature_names: Vec<String>,
    class_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        x: Matrix,
        y: Vec<usize>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::BadShape(format!(
                "{} rows but {} labels",
                x.rows(),
                y.len()
            )));
        }
        if feature_names.len() != x.cols() {
            return Err(Error::BadShape(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                x.cols()
            )));
        }
        if x.rows() == 0 || class_names.is_empty() {
            return Err(Error::EmptyAfterCleaning);
        }
        let mut seen = vec![false; class_names.len()];
        for &label in &y {
            match seen.get_mut(label) {
                Some(s) => *s = true,
                None => {
                    return Err(Error::BadShape(format!(
                        "label {label} outside 0..{}",
                        class_names.len()
                    )))
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::BadShape(format!(
                "class `{}` has no samples",
                class_names[missing]
            )));
        }
        Ok(Dataset {
            name: name.into(),
            x,
            y,
            feature_names,
            class_names,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_samples(&self) -> usize {
        self.x.rows()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &label in &self.y {
            counts[label] += 1;
        }
        counts
    }

    /// Dataset restricted to the given feature columns, in the given order.
    pub fn select_features(&self, cols: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_features()) {
            return Err(Error::BadShape(format!(
                "feature index {bad} out of range for {} features",
                self.n_features()
            )));
        }
        if cols.is_empty() {
            return Err(Error::BadShape("no features selected".into()));
        }
        Ok(Dataset {
            name: self.name.clone(),
            x: self.x.select_columns(cols),
            y: self.y.clone(),
            feature_names: cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
            class_names: self.class_names.clone(),
        })
    }

    /// Same samples and labels with a replacement feature matrix.
    pub fn with_features(&self, x: Matrix, feature_names: Vec<String>) -> Result<Dataset> {
        Dataset::new(
            self.name.clone(),
            x,
            self.y.clone(),
            feature_names,
            self.class_names.clone(),
        )
    }
}

/// Drops classes with fewer than `min_n` samples and re-densifies the
/// remaining labels, preserving their original order.
pub fn filter_min_class_count(ds: &Dataset, min_n: usize) -> Result<Dataset> {
    if min_n == 0 {
        return Err(Error::BadConfig("min_class_count must be at least 1".into()));
    }
    let counts = ds.class_counts();
    let mut remap = vec![None; counts.len()];
    let mut class_names = Vec::new();
    for (c, &count) in counts.iter().enumerate() {
        if count >= min_n {
            remap[c] = Some(class_names.len());
            class_names.push(ds.class_names[c].clone());
        }
    }
    if class_names.is_empty() {
        return Err(Error::EmptyAfterCleaning);
    }
    let keep: Vec<usize> = (0..ds.n_samples())
        .filter(|&i| remap[ds.y[i]].is_some())
        .collect();
    let y = keep.iter().map(|&i| remap[ds.y[i]].unwrap()).collect();
    Dataset::new(
        ds.name.clone(),
        ds.x.select_rows(&keep),
        y,
        ds.feature_names.clone(),
        class_names,
    )
}

#[cfg(test)]
pub(crate) fn toy_dataset(counts: &[usize]) -> Dataset {
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (c, &k) in counts.iter().enumerate() {
        for i in 0..k {
            rows.push(vec![c as f64, i as f64]);
            y.push(c);
        }
    }
    let names = (0..counts.len()).map(|c| format!("c{c}")).collect();
    Dataset::new(
        "toy",
        Matrix::from_rows(&rows).unwrap(),
        y,
        vec!["a".into(), "b".into()],
        names,
    )
    .unwrap()
}
