use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, RandomStream};

pub const INFORMATIVE_PREFIX: &str = "inf_";

/// Binary dataset with `informative` signal columns followed by pure noise.
///
/// Labels alternate 0,1,0,1,... Every column starts as standard normal
/// noise; the first `informative` columns are then shifted by
/// `±class_sep / (2·√informative)` according to the label, so the two class
/// means sit exactly `class_sep` apart in Euclidean distance.
pub fn generate_synthetic(
    n: usize,
    d: usize,
    informative: usize,
    class_sep: f64,
    seed: u64,
) -> Result<Dataset> {
    if n < 4 || d == 0 || informative == 0 || informative > d || !class_sep.is_finite() {
        return Err(Error::BadShape(format!(
            "synthetic dataset needs n >= 4 and 1 <= informative <= d (n={n}, d={d}, informative={informative}, class_sep={class_sep})"
        )));
    }
    let shift = class_sep / (2.0 * (informative as f64).sqrt());
    let mut rng = RandomStream::new(seed, 0);
    let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let mut data = Vec::with_capacity(n * d);
    for &label in &y {
        let sign = if label == 1 { 1.0 } else { -1.0 };
        for j in 0..d {
            let z = rng.normal();
            data.push(if j < informative { z + sign * shift } else { z });
        }
    }
    let feature_names = (0..d)
        .map(|j| {
            if j < informative {
                format!("{INFORMATIVE_PREFIX}{j}")
            } else {
                format!("noise_{j}")
            }
        })
        .collect();
    Dataset::new(
        "synthetic",
        Matrix::from_vec(n, d, data)?,
        y,
        feature_names,
        vec!["class_0".into(), "class_1".into()],
    )
}
