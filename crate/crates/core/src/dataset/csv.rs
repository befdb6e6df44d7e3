use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

const MISSING: &str = "?";

const IRIS_CSV: &str = include_str!("../../data/iris.csv");
const HEART_CSV: &str = include_str!("../../data/heart.csv");
const HEART_CATEGORICAL: [&str; 8] = ["sex", "cp", "fbs", "restecg", "exang", "slope", "ca", "thal"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    DropRow,
    #[default]
    Impute,
}

#[derive(Clone, Debug)]
pub struct LoadOptions {
    pub label_column: String,
    pub missing: MissingPolicy,
    /// Columns imputed by mode instead of median.
    pub categorical: Vec<String>,
}

impl LoadOptions {
    pub fn new(label_column: impl Into<String>) -> Self {
        LoadOptions {
            label_column: label_column.into(),
            missing: MissingPolicy::default(),
            categorical: Vec::new(),
        }
    }

    pub fn missing(mut self, policy: MissingPolicy) -> Self {
        self.missing = policy;
        self
    }

    pub fn categorical<S: AsRef<str>>(mut self, cols: &[S]) -> Self {
        self.categorical = cols.iter().map(|c| c.as_ref().to_string()).collect();
        self
    }
}

pub fn load_csv(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    parse_csv(&text, &name, opts)
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(',')
        .map(|f| f.trim().trim_matches('"'))
        .collect()
}

/// Parses CSV text with a header row. Labels are numbered by first appearance.
pub fn parse_csv(text: &str, name: &str, opts: &LoadOptions) -> Result<Dataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header_line) = lines.next().ok_or(Error::EmptyAfterCleaning)?;
    let header: Vec<String> = split_fields(header_line.trim_start_matches('\u{feff}'))
        .into_iter()
        .map(str::to_string)
        .collect();
    let label_idx = header
        .iter()
        .position(|h| *h == opts.label_column)
        .ok_or_else(|| Error::UnknownLabelColumn(opts.label_column.clone()))?;
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != label_idx)
        .map(|(_, h)| h.clone())
        .collect();
    let d = feature_names.len();

    // cells: None marks the missing token
    let mut cells: Vec<Vec<Option<f64>>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for (line_no, line) in lines {
        let fields = split_fields(line);
        if fields.len() != header.len() {
            return Err(Error::Parse {
                line: line_no + 1,
                column: String::new(),
                message: format!("expected {} fields, found {}", header.len(), fields.len()),
            });
        }
        let mut row = Vec::with_capacity(d);
        for (j, field) in fields.iter().enumerate() {
            if j == label_idx {
                if field.is_empty() || *field == MISSING {
                    return Err(Error::Parse {
                        line: line_no + 1,
                        column: header[j].clone(),
                        message: "missing class label".into(),
                    });
                }
                labels.push(field.to_string());
            } else if *field == MISSING {
                row.push(None);
            } else {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    line: line_no + 1,
                    column: header[j].clone(),
                    message: format!("`{field}` is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: line_no + 1,
                        column: header[j].clone(),
                        message: format!("`{field}` is not finite"),
                    });
                }
                row.push(Some(v));
            }
        }
        cells.push(row);
    }

    match opts.missing {
        MissingPolicy::DropRow => {
            let keep: Vec<bool> = cells.iter().map(|r| r.iter().all(Option::is_some)).collect();
            let mut k = keep.iter();
            cells.retain(|_| *k.next().unwrap());
            let mut k = keep.iter();
            labels.retain(|_| *k.next().unwrap());
        }
        MissingPolicy::Impute => {
            for (j, fname) in feature_names.iter().enumerate() {
                if cells.iter().all(|r| r[j].is_some()) {
                    continue;
                }
                let observed: Vec<f64> = cells.iter().filter_map(|r| r[j]).collect();
                if observed.is_empty() {
                    return Err(Error::Parse {
                        line: 0,
                        column: fname.clone(),
                        message: "column has no observed values to impute from".into(),
                    });
                }
                let fill = if opts.categorical.iter().any(|c| c == fname) {
                    mode(&observed)
                } else {
                    median(&observed)
                };
                for r in cells.iter_mut() {
                    r[j].get_or_insert(fill);
                }
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::EmptyAfterCleaning);
    }

    let mut class_names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let y = labels
        .into_iter()
        .map(|l| {
            *index.entry(l.clone()).or_insert_with(|| {
                class_names.push(l);
                class_names.len() - 1
            })
        })
        .collect();
    let n = cells.len();
    let data = cells.into_iter().flatten().map(Option::unwrap).collect();
    Dataset::new(name, Matrix::from_vec(n, d, data)?, y, feature_names, class_names)
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Most frequent value; ties go to the smallest.
fn mode(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let (mut best, mut best_run) = (v[0], 0);
    let mut i = 0;
    while i < v.len() {
        let j = v[i..].iter().take_while(|&&x| x == v[i]).count();
        if j > best_run {
            best = v[i];
            best_run = j;
        }
        i += j;
    }
    best
}

/// Loads one of the bundled datasets (`iris` or `heart`).
pub fn load_builtin(name: &str) -> Result<Dataset> {
    match name {
        "iris" => parse_csv(IRIS_CSV, "iris", &LoadOptions::new("species")),
        "heart" => load_heart(MissingPolicy::Impute),
        other => Err(Error::UnknownDataset(other.to_string())),
    }
}

/// Heart disease data with the diagnosis collapsed to absence (code 0) or presence (codes 1-4).
pub(crate) fn load_heart(missing: MissingPolicy) -> Result<Dataset> {
    let opts = LoadOptions::new("num")
        .missing(missing)
        .categorical(&HEART_CATEGORICAL);
    let raw = parse_csv(HEART_CSV, "heart", &opts)?;
    binarize_heart(raw)
}

pub(crate) fn binarize_heart(raw: Dataset) -> Result<Dataset> {
    let presence: Vec<bool> = raw
        .class_names()
        .iter()
        .map(|c| c.parse::<f64>().map_or(true, |v| v != 0.0))
        .collect();
    let y = raw.y().iter().map(|&c| usize::from(presence[c])).collect();
    Dataset::new(
        raw.name(),
        raw.x().clone(),
        y,
        raw.feature_names().to_vec(),
        vec!["absence".into(), "presence".into()],
    )
}

/// CSV rendering with a trailing `label` column holding class names.
pub fn to_csv_string(ds: &Dataset) -> String {
    let mut out = String::new();
    for name in ds.feature_names() {
        out.push_str(name);
        out.push(',');
    }
    out.push_str("label\n");
    for i in 0..ds.n_samples() {
        for v in ds.x().row(i) {
            // Display for f64 is the shortest string that parses back to the same bits
            write!(out, "{v},").unwrap();
        }
        out.push_str(&ds.class_names()[ds.y()[i]]);
        out.push('\n');
    }
    out
}

pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_csv_string(ds)).map_err(|e| Error::io(path, e))
}
