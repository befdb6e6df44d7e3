use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::RandomStream;

/// Assignment of every sample to one of `k` evaluation folds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_of: Vec<usize>,
    pub seed: u64,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] != fold)
            .collect()
    }

    pub fn n_samples(&self) -> usize {
        self.fold_of.len()
    }
}

/// Stratified k-fold split.
///
/// Each class's indices are shuffled with `RandomStream(seed, class)` and
/// dealt round-robin over the folds. The dealing position carries over from
/// one class to the next, so fold sizes stay balanced as well.
pub fn stratified_kfold(ds: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::BadConfig(format!("need at least 2 folds, got {k}")));
    }
    let counts = ds.class_counts();
    if let Some(c) = counts.iter().position(|&n| n < k) {
        return Err(Error::ClassTooSmall {
            class: ds.class_names()[c].clone(),
            count: counts[c],
            k,
        });
    }
    let mut fold_of = vec![0; ds.n_samples()];
    let mut next = 0usize;
    for class in 0..ds.n_classes() {
        let mut members: Vec<usize> = (0..ds.n_samples())
            .filter(|&i| ds.y()[i] == class)
            .collect();
        RandomStream::new(seed, class as u64).shuffle(&mut members);
        for i in members {
            fold_of[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldAssignment { k, fold_of, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::toy_dataset;

    #[test]
    fn perfectly_divisible() {
        let ds = toy_dataset(&[3, 3, 3]);
        let f = stratified_kfold(&ds, 3, 1).unwrap();
        for fold in 0..3 {
            let mut classes: Vec<usize> = f.test_indices(fold).iter().map(|&i| ds.y()[i]).collect();
            classes.sort();
            assert_eq!(classes, vec![0, 1, 2]);
        }
    }

    #[test]
    fn small_class_is_named() {
        let ds = toy_dataset(&[10, 2]);
        match stratified_kfold(&ds, 3, 0) {
            Err(Error::ClassTooSmall { class, count, k }) => {
                assert_eq!((class.as_str(), count, k), ("c1", 2, 3));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn train_and_test_are_complementary() {
        let ds = toy_dataset(&[7, 5]);
        let f = stratified_kfold(&ds, 2, 9).unwrap();
        let mut all = f.test_indices(0);
        all.extend(f.train_indices(0));
        all.sort();
        assert_eq!(all, (0..12).collect::<Vec<_>>());
    }
}
