//! Principal component analysis through eigendecomposition of the sample
//! covariance matrix.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    apply_affine, column_means, column_stds, covariance, sym_eigen, Matrix, DEGENERATE_STD,
};
use crate::textio::{push_line, Lines};

/// Eigenvalues below this fraction of the total variance count as zero.
pub const ZERO_RANK_RATIO: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaMode {
    FixedK(usize),
    /// Smallest prefix of components explaining at least this fraction of variance.
    Variance(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// All ones when inputs were only centered.
    pub scale: Vec<f64>,
    /// d × k, orthonormal columns.
    pub components: Matrix,
    pub explained_variance: Vec<f64>,
    pub total_variance: f64,
    pub k: usize,
}

/// Smallest `k` whose leading eigenvalues carry at least `threshold` of the total.
pub fn components_for_variance(eigenvalues: &[f64], threshold: f64) -> Result<usize> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::BadThreshold(threshold));
    }
    if eigenvalues.iter().any(|&l| l < 0.0 || !l.is_finite())
        || eigenvalues.windows(2).any(|w| w[0] < w[1])
    {
        return Err(Error::BadShape(
            "eigenvalues must be finite, nonnegative and descending".into(),
        ));
    }
    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 {
        return Err(Error::BadShape("eigenvalues sum to zero".into()));
    }
    // summing in the same order as `total` makes the full prefix ratio exactly 1
    let mut cumulative = 0.0;
    for (i, &l) in eigenvalues.iter().enumerate() {
        cumulative += l;
        if cumulative / total >= threshold {
            return Ok(i + 1);
        }
    }
    Ok(eigenvalues.len())
}

/// Fits PCA on the rows of `x`.
///
/// Inputs are centered (and divided by their sample deviation when
/// `scale_inputs`). When there are more features than samples the
/// eigenproblem is solved on the n × n Gram matrix and mapped back. Each
/// component is signed so that its largest-magnitude entry is positive.
pub fn fit(x: &Matrix, mode: PcaMode, scale_inputs: bool) -> Result<PcaModel> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(Error::TooFewRows { rows: n });
    }
    if d == 0 {
        return Err(Error::BadShape("no features".into()));
    }
    let max_k = (n - 1).min(d);
    if let PcaMode::FixedK(k) = mode {
        if k == 0 {
            return Err(Error::BadConfig("PCA needs at least one component".into()));
        }
        if k > max_k {
            return Err(Error::KTooLarge { k, max: max_k });
        }
    }
    if let PcaMode::Variance(t) = mode {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::BadThreshold(t));
        }
    }

    let mean = column_means(x);
    let scale: Vec<f64> = if scale_inputs {
        column_stds(x, &mean)
            .into_iter()
            .map(|s| if s < DEGENERATE_STD { 1.0 } else { s })
            .collect()
    } else {
        vec![1.0; d]
    };
    let xc = apply_affine(x, &mean, &scale);
    let total_variance = column_stds(&xc, &vec![0.0; d])
        .iter()
        .map(|s| s * s)
        .sum::<f64>();

    let (mut eigenvalues, vectors) = if d <= n {
        let eig = sym_eigen(&covariance(&xc)?)?;
        (eig.eigenvalues, eig.eigenvectors)
    } else {
        gram_eigen(&xc)?
    };
    for l in eigenvalues.iter_mut() {
        if *l < ZERO_RANK_RATIO * total_variance {
            *l = 0.0;
        }
    }
    let rank = eigenvalues.iter().filter(|&&l| l > 0.0).count();
    if rank == 0 {
        return Err(Error::BadShape("data has no variance to decompose".into()));
    }

    let k = match mode {
        PcaMode::FixedK(k) => {
            if k > vectors.cols() {
                return Err(Error::KTooLarge {
                    k,
                    max: vectors.cols(),
                });
            }
            k
        }
        PcaMode::Variance(t) => components_for_variance(&eigenvalues, t)?,
    };

    let mut components = Matrix::zeros(d, k);
    for c in 0..k {
        let col = vectors.column(c);
        let mut pivot = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (r, v) in col.iter().enumerate() {
            components[(r, c)] = sign * v;
        }
    }
    Ok(PcaModel {
        mean,
        scale,
        components,
        explained_variance: eigenvalues[..k].to_vec(),
        total_variance,
        k,
    })
}

/// Eigenpairs of `XcᵀXc/(n-1)` through the n × n Gram matrix; only
/// components with positive eigenvalues are returned.
fn gram_eigen(xc: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let (n, d) = xc.shape();
    let denom = (n - 1) as f64;
    let mut gram = xc.gram_rows();
    gram.as_mut_slice().iter_mut().for_each(|v| *v /= denom);
    let eig = sym_eigen(&gram)?;
    let trace = gram.trace();
    let keep: Vec<usize> = (0..n)
        .filter(|&i| eig.eigenvalues[i] > ZERO_RANK_RATIO * trace)
        .collect();
    let mut vectors = Matrix::zeros(d, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let u = eig.eigenvectors.column(i);
        let norm = (denom * eig.eigenvalues[i]).sqrt();
        for r in 0..n {
            if u[r] == 0.0 {
                continue;
            }
            let w = u[r] / norm;
            for (j, &x) in xc.row(r).iter().enumerate() {
                vectors[(j, c)] += w * x;
            }
        }
    }
    let values = keep.iter().map(|&i| eig.eigenvalues[i]).collect();
    Ok((values, vectors))
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn explained_ratio(&self) -> Vec<f64> {
        self.explained_variance
            .iter()
            .map(|l| l / self.total_variance)
            .collect()
    }

    pub fn cumulative_ratio(&self) -> f64 {
        self.explained_variance.iter().sum::<f64>() / self.total_variance
    }

    /// `((X - mean) / scale) · components`
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.input_dim() {
            return Err(Error::BadShape(format!(
                "PCA was fit on {} features, got {}",
                self.input_dim(),
                x.cols()
            )));
        }
        apply_affine(x, &self.mean, &self.scale).matmul(&self.components)
    }

    /// `(Z · componentsᵀ) · scale + mean`
    pub fn inverse_transform(&self, z: &Matrix) -> Result<Matrix> {
        if z.cols() != self.k {
            return Err(Error::BadShape(format!(
                "expected {} component scores, got {}",
                self.k,
                z.cols()
            )));
        }
        let mut xr = z.matmul(&self.components.transpose())?;
        for i in 0..xr.rows() {
            for ((v, m), s) in xr.row_mut(i).iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = *v * s + m;
            }
        }
        Ok(xr)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        push_line(&mut out, "pca-model", &[1]);
        push_line(&mut out, "shape", &[self.input_dim(), self.k]);
        push_line(&mut out, "total_variance", &[self.total_variance]);
        push_line(&mut out, "mean", &self.mean);
        push_line(&mut out, "scale", &self.scale);
        push_line(&mut out, "explained", &self.explained_variance);
        for c in 0..self.k {
            push_line(&mut out, "component", &self.components.column(c));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PcaModel> {
        let mut lines = Lines::new(text, "pca-model");
        let (line, version) = lines.expect("pca-model")?;
        if version != ["1"] {
            return Err(lines.error(line, "unsupported version"));
        }
        let shape = lines.expect_usizes("shape")?;
        let &[d, k] = shape.as_slice() else {
            return Err(lines.error(2, "shape needs d and k"));
        };
        let total_variance = lines.expect_values("total_variance", 1)?[0];
        let mean = lines.expect_values("mean", d)?;
        let scale = lines.expect_values("scale", d)?;
        let explained_variance = lines.expect_values("explained", k)?;
        let mut components = Matrix::zeros(d, k);
        for c in 0..k {
            for (r, v) in lines.expect_values("component", d)?.into_iter().enumerate() {
                components[(r, c)] = v;
            }
        }
        Ok(PcaModel {
            mean,
            scale,
            components,
            explained_variance,
            total_variance,
            k,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PcaModel> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PcaModel::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::load_builtin;

    #[test]
    fn variance_threshold_arithmetic() {
        assert_eq!(components_for_variance(&[4.0, 3.0, 2.0, 1.0], 0.6).unwrap(), 2);
        assert_eq!(components_for_variance(&[4.0, 3.0, 2.0, 1.0], 0.4).unwrap(), 1);
        assert_eq!(components_for_variance(&[0.3, 0.2, 0.1, 0.0, 0.0], 1.0).unwrap(), 3);
        assert!(matches!(
            components_for_variance(&[1.0], 1.5),
            Err(Error::BadThreshold(_))
        ));
        assert!(matches!(
            components_for_variance(&[1.0], 0.0),
            Err(Error::BadThreshold(_))
        ));
    }

    #[test]
    fn line_data_is_rank_one() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 2.0 * i as f64 + 1.0]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let m = fit(&x, PcaMode::FixedK(2), false).unwrap();
        assert!(m.explained_variance[1].abs() < 1e-10);
        let one = fit(&x, PcaMode::Variance(1.0), false).unwrap();
        assert_eq!(one.k, 1);
        assert!((one.cumulative_ratio() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_k_bounds() {
        let x = load_builtin("iris").unwrap().x().clone();
        assert!(matches!(
            fit(&x, PcaMode::FixedK(5), false),
            Err(Error::KTooLarge { k: 5, max: 4 })
        ));
        let small = x.select_rows(&[0, 60, 120]);
        assert!(matches!(
            fit(&small, PcaMode::FixedK(3), false),
            Err(Error::KTooLarge { k: 3, max: 2 })
        ));
    }

    #[test]
    fn mean_row_maps_to_zero() {
        let x = load_builtin("iris").unwrap().x().clone();
        let m = fit(&x, PcaMode::FixedK(2), true).unwrap();
        let mean_row = Matrix::from_vec(1, 4, m.mean.clone()).unwrap();
        let z = m.transform(&mean_row).unwrap();
        assert!(z.as_slice().iter().all(|v| v.abs() < 1e-10));
        let back = m.inverse_transform(&Matrix::zeros(1, 2)).unwrap();
        assert_eq!(back.as_slice(), m.mean.as_slice());
    }

    #[test]
    fn sign_convention_and_repeatability() {
        let x = load_builtin("iris").unwrap().x().clone();
        let a = fit(&x, PcaMode::FixedK(4), false).unwrap();
        let b = fit(&x, PcaMode::FixedK(4), false).unwrap();
        assert_eq!(a, b);
        for c in 0..4 {
            let col = a.components.column(c);
            let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = col.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(max >= -min);
        }
    }

    #[test]
    fn wide_data_uses_gram_path() {
        // 6 samples, 10 features: rank at most 5
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|i| (0..10).map(|j| ((i * 7 + j * 3) % 11) as f64 + 0.1 * (i * j) as f64).collect())
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let m = fit(&x, PcaMode::Variance(1.0), false).unwrap();
        assert!(m.k <= 5);
        let ctc = m.components.transpose().matmul(&m.components).unwrap();
        for i in 0..m.k {
            for j in 0..m.k {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((ctc[(i, j)] - e).abs() < 1e-8);
            }
        }
        let back = m.inverse_transform(&m.transform(&x).unwrap()).unwrap();
        for (a, b) in back.as_slice().iter().zip(x.as_slice()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn text_round_trip() {
        let x = load_builtin("iris").unwrap().x().clone();
        let m = fit(&x, PcaMode::Variance(0.95), true).unwrap();
        assert_eq!(PcaModel::from_text(&m.to_text()).unwrap(), m);
    }
}
