//! Dense linear algebra, a symmetric eigensolver, column statistics and a
//! reproducible random stream.

mod eigen;
mod matrix;
mod random;
mod stats;

pub use eigen::{sym_eigen, EigenResult, MAX_SWEEPS};
pub use matrix::{axpy, dot, Matrix};
pub use random::{derive_seed, mix64, RandomStream};
pub use stats::{
    apply_affine, center, column_means, column_stds, covariance, standardize, Standardized,
    DEGENERATE_STD,
};
