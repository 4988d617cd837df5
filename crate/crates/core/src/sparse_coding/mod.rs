//! Orthogonal matching pursuit, K-SVD dictionary learning and per-atom
//! reconstruction-error features.

mod dictionary;
mod kernels;
mod ksvd;
mod omp;

pub use dictionary::{Dictionary, DICTIONARY_VERSION, UNIT_NORM_TOL};
pub use ksvd::{ksvd_fit, ksvd_train, KsvdConfig, KsvdOutcome, DEFAULT_KSVD_ITERATIONS};
pub use omp::{
    error_features, error_features_from_code, omp_encode, squared_distance, ErrorFeature, OmpCoder, SparseCode,
    RESIDUAL_TOL,
};
