//! Approximate projection of symmetric matrices onto the positive
//! semidefinite cone, with a-posteriori Frobenius-norm error certificates
//! that depend only on eigenpair residuals and never on spectral gaps.
//!
//! The usual entry point is [`project_auto`] or one of the side-specific
//! variants; each returns an [`ApproxProjection`] carrying a
//! [`ProjectionCertificate`].
//!
//! ```
//! use nalgebra::DMatrix;
//! use psdcert::{project_approx_positive, CertOptions, LanczosConfig, SymmetricOperator};
//!
//! let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.5]);
//! let op = SymmetricOperator::dense(a).unwrap();
//! let proj = project_approx_positive(&op, &LanczosConfig::new(2), &CertOptions::default()).unwrap();
//! assert!(proj.certificate().bound_value < 1e-12);
//! ```

pub mod bounds;
pub mod certificate;
pub mod config;
pub mod deflation;
pub mod eigen;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod lanczos;
pub mod linalg;
pub mod mtx;
pub mod operator;
pub mod projector;
pub mod ritz;

pub use bounds::{
    corollary1_bound, corollary2_bound, drop_ritz_pairs, naive_gap_bound, negative_side_bound, sandwich_gap,
    subspace_error_bound, theorem1_bound, BoundComparison, NegativeVariant,
};
pub use certificate::{BoundFormula, CertificateRecord, ProjectionCertificate, SideSelection};
pub use config::Tolerances;
pub use deflation::{estimate_deflated_lambda_max, estimate_dplus_frob, DPlusEstimate, DPlusTag};
pub use eigen::ExactEigendecomposition;
pub use error::{Error, Result};
pub use generators::{matrix_from_spectrum, Segment, SpectrumSpec};
pub use lanczos::{lanczos_largest, IterationTrace, LanczosConfig, TraceRecord};
pub use linalg::{frobenius_norm, orthonormal_complement, spectral_norm};
pub use mtx::{read_matrix_market, write_matrix_market, MtxError};
pub use operator::SymmetricOperator;
pub use projector::{
    project_approx_negative, project_approx_positive, project_auto, project_exact, ApproxProjection, CertOptions,
    DPlusMode,
};
pub use ritz::{rayleigh_ritz, split_by_sign, RitzBlock, Side};
