//! Feature-engineering experiments for multilayer perceptron classifiers:
//! genetic-algorithm wrapper feature selection, PCA reduction and a
//! reproducible experiment harness.

pub mod dataset;
pub mod error;
pub mod gafs;
pub mod harness;
pub mod mlp;
pub mod numerics;
pub mod pca;
mod textio;

pub use error::{Error, ErrorKind, Result};
