//! Numerical tolerances shared by every module.

/// Every tolerance used by the crate lives here. Relative tolerances are
/// scaled by a norm estimate of the operator at the point of use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative symmetry tolerance for dense input:
    /// `max |A_ij - A_ji| <= sym_tol * max(1, max |A_ij|)`.
    pub sym_tol: f64,
    /// Absolute bound on `||V^T V - I||_F` for orthonormal bases.
    pub orth_tol: f64,
    /// Relative tolerance used when recomputing cached residuals.
    pub recompute_tol: f64,
    /// Relative tolerance on negative eigenvalues of a nominally PSD result.
    pub psd_tol: f64,
    /// Lanczos breakdown threshold relative to `||A||_2`.
    pub breakdown_tol: f64,
    /// Dimension below which exact dense paths are used.
    pub dense_threshold: usize,
    /// Slack, relative to `||A||_F`, absorbed by bound-validity checks.
    pub validity_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sym_tol: 1e-12,
            orth_tol: 1e-10,
            recompute_tol: 1e-10,
            psd_tol: 1e-12,
            breakdown_tol: 1e-14,
            dense_threshold: 600,
            validity_slack: 1e-8,
        }
    }
}
