use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Columns whose sample deviation falls below this are only centered.
pub const DEGENERATE_STD: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Standardized {
    pub data: Matrix,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

pub fn column_means(x: &Matrix) -> Vec<f64> {
    let mut means = vec![0.0; x.cols()];
    for i in 0..x.rows() {
        for (m, v) in means.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    let n = x.rows().max(1) as f64;
    means.iter_mut().for_each(|m| *m /= n);
    means
}

/// Per-column sample standard deviation (n - 1 divisor) around `means`.
pub fn column_stds(x: &Matrix, means: &[f64]) -> Vec<f64> {
    let mut ss = vec![0.0; x.cols()];
    for i in 0..x.rows() {
        for ((s, v), m) in ss.iter_mut().zip(x.row(i)).zip(means) {
            *s += (v - m) * (v - m);
        }
    }
    let denom = (x.rows().saturating_sub(1)).max(1) as f64;
    ss.iter().map(|s| (s / denom).sqrt()).collect()
}

/// Applies `(x - shift) / scale` column-wise.
pub fn apply_affine(x: &Matrix, shift: &[f64], scale: &[f64]) -> Matrix {
    let mut out = x.clone();
    for i in 0..out.rows() {
        for ((v, m), s) in out.row_mut(i).iter_mut().zip(shift).zip(scale) {
            *v = (*v - m) / s;
        }
    }
    out
}

/// Centers every column and divides by its sample standard deviation.
///
/// Degenerate columns (std below [`DEGENERATE_STD`]) are centered and
/// report a std of 1.
pub fn standardize(x: &Matrix) -> Result<Standardized> {
    if x.rows() < 2 {
        return Err(Error::TooFewRows { rows: x.rows() });
    }
    let means = column_means(x);
    let stds: Vec<f64> = column_stds(x, &means)
        .into_iter()
        .map(|s| if s < DEGENERATE_STD { 1.0 } else { s })
        .collect();
    let data = apply_affine(x, &means, &stds);
    Ok(Standardized { data, means, stds })
}

/// Sample covariance `XᵀX / (n - 1)` of already-centered data.
pub fn covariance(centered: &Matrix) -> Result<Matrix> {
    let n = centered.rows();
    if n < 2 {
        return Err(Error::TooFewRows { rows: n });
    }
    let mut c = centered.gram_columns();
    let denom = (n - 1) as f64;
    c.as_mut_slice().iter_mut().for_each(|v| *v /= denom);
    Ok(c)
}

/// Column-centered copy of `x` together with the removed means.
pub fn center(x: &Matrix) -> (Matrix, Vec<f64>) {
    let means = column_means(x);
    let ones = vec![1.0; x.cols()];
    (apply_affine(x, &means, &ones), means)
}
