use thiserror::Error;

use crate::mtx::MtxError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric: max |A_ij - A_ji| = {asymmetry:e} exceeds {allowed:e}")]
    NotSymmetric { asymmetry: f64, allowed: f64 },

    #[error("basis is not orthonormal: ||V^T V - I||_F = {defect:e} exceeds {allowed:e}")]
    NotOrthonormal { defect: f64, allowed: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error(transparent)]
    MatrixMarket(#[from] MtxError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
