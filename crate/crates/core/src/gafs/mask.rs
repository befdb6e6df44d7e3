use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{mix64, RandomStream};

/// Binary chromosome over feature indices; bit `i` set means feature `i` is used.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FeatureMask {
    bits: Vec<bool>,
}

impl FeatureMask {
    /// Builds a mask, rejecting the empty selection.
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if !bits.iter().any(|&b| b) {
            return Err(Error::BadConfig("feature mask selects no features".into()));
        }
        Ok(FeatureMask { bits })
    }

    pub fn full(d: usize) -> Self {
        FeatureMask {
            bits: vec![true; d],
        }
    }

    pub fn from_indices(d: usize, indices: &[usize]) -> Result<Self> {
        let mut bits = vec![false; d];
        for &i in indices {
            *bits.get_mut(i).ok_or_else(|| {
                Error::BadShape(format!("feature index {i} out of range for {d} features"))
            })? = true;
        }
        FeatureMask::new(bits)
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::BadConfig(format!("invalid mask character `{other}`"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        FeatureMask::new(bits)
    }

    /// Mask built from raw bits, fixing an empty selection by setting one random bit.
    pub(crate) fn repaired(mut bits: Vec<bool>, rng: &mut RandomStream) -> Self {
        if !bits.is_empty() && !bits.iter().any(|&b| b) {
            let i = rng.below(bits.len());
            bits[i] = true;
        }
        FeatureMask { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.bits.len()).filter(|&i| self.bits[i]).collect()
    }

    /// 64-bit digest of the length and bit pattern.
    pub fn digest(&self) -> u64 {
        let mut h = mix64(self.bits.len() as u64);
        for chunk in self.bits.chunks(64) {
            let word = chunk
                .iter()
                .enumerate()
                .fold(0u64, |w, (i, &b)| w | (u64::from(b) << i));
            h = mix64(h ^ word);
        }
        h
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FeatureMask({self})")
    }
}

/// Preference order between scored masks: higher fitness, then fewer
/// features, then the lexicographically lower bit pattern.
/// `Ordering::Less` means `a` is preferred.
pub fn preference(a: (&FeatureMask, f64), b: (&FeatureMask, f64)) -> Ordering {
    b.1.total_cmp(&a.1)
        .then_with(|| a.0.popcount().cmp(&b.0.popcount()))
        .then_with(|| a.0.bits.cmp(&b.0.bits))
}
