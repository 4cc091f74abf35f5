//! Exact and approximate projections onto the PSD cone.

use nalgebra::DMatrix;

use crate::certificate::{ProjectionCertificate, SideSelection};
use crate::config::Tolerances;
use crate::deflation::{
    dplus_exact, estimate_deflated_lambda_max, estimate_dplus_frob, estimate_dplus_iterative, DPlusEstimate,
    DPlusTag,
};
use crate::eigen::ExactEigendecomposition;
use crate::error::{Error, Result};
use crate::lanczos::{lanczos_largest, LanczosConfig};
use crate::operator::SymmetricOperator;
use crate::ritz::{split_by_sign, RitzBlock, Side};

/// `P_+(A)` from a full eigendecomposition.
pub fn project_exact(op: &SymmetricOperator, tol: &Tolerances) -> Result<(DMatrix<f64>, ExactEigendecomposition)> {
    let exact = ExactEigendecomposition::of_operator(op, tol.dense_threshold)?;
    Ok((exact.positive_part(), exact))
}

/// How `||D_+||_F` is obtained for a certificate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DPlusMode {
    /// Dense complement eigendecomposition; needs `n <= dense_threshold`
    /// or a dense operator.
    Oracle,
    /// Deflated Lanczos, even for small dense operators.
    Iterative,
    /// Zero if the deflated `lambda_max` estimate is nonpositive, otherwise
    /// falls back to the iterative estimate.
    Assume,
    /// Oracle below the dense threshold, iterative above.
    #[default]
    Auto,
}

impl std::str::FromStr for DPlusMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(DPlusMode::Oracle),
            "iterative" => Ok(DPlusMode::Iterative),
            "assume" => Ok(DPlusMode::Assume),
            "auto" => Ok(DPlusMode::Auto),
            _ => Err(Error::InvalidArgument(format!("unknown D+ mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertOptions {
    pub dplus: DPlusMode,
    /// Settings for the inner deflated solves.
    pub inner: LanczosConfig,
    pub tolerances: Tolerances,
}

impl Default for CertOptions {
    fn default() -> Self {
        Self { dplus: DPlusMode::Auto, inner: LanczosConfig::new(4).with_tol(1e-12), tolerances: Tolerances::default() }
    }
}

impl CertOptions {
    pub fn with_dplus(mut self, mode: DPlusMode) -> Self {
        self.dplus = mode;
        self
    }
}

/// An approximate projection in factored form: `V L V^T` on the positive
/// side, `A - V L V^T` on the negative side.
#[derive(Clone, Debug)]
pub struct ApproxProjection {
    ritz: RitzBlock,
    base: SymmetricOperator,
    certificate: ProjectionCertificate,
}

impl ApproxProjection {
    /// The Ritz block in terms of `A` (nonpositive values on the negative side).
    pub fn ritz(&self) -> &RitzBlock {
        &self.ritz
    }

    pub fn base(&self) -> &SymmetricOperator {
        &self.base
    }

    pub fn certificate(&self) -> &ProjectionCertificate {
        &self.certificate
    }

    pub fn side(&self) -> Side {
        self.certificate.side
    }

    /// Dense evaluation; `n x n` memory.
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self.side() {
            Side::Positive => self.ritz.assemble(),
            Side::Negative => self.base.to_dense() - self.ritz.assemble(),
        }
    }
}

/// `D_+` quantities for a positive block of `op` per `mode`.
pub fn estimate_dplus(op: &SymmetricOperator, rb: &RitzBlock, opts: &CertOptions) -> Result<DPlusEstimate> {
    let tol = &opts.tolerances;
    match opts.dplus {
        DPlusMode::Oracle => {
            if op.is_dense() || op.dim() <= tol.dense_threshold {
                Ok(match op.as_dense() {
                    Some(a) => dplus_exact(a, rb.basis()),
                    None => dplus_exact(&op.to_dense(), rb.basis()),
                })
            } else {
                Err(Error::Unsupported(format!(
                    "oracle D+ for an implicit operator with n = {} > {}",
                    op.dim(),
                    tol.dense_threshold
                )))
            }
        }
        DPlusMode::Iterative => estimate_dplus_iterative(op, rb, &opts.inner, tol),
        DPlusMode::Auto => estimate_dplus_frob(op, rb, &opts.inner, tol),
        DPlusMode::Assume => {
            let lm = estimate_deflated_lambda_max(op, rb, &opts.inner, tol)?;
            if lm.value <= 0.0 {
                Ok(DPlusEstimate { frob: 0.0, lambda_max: lm.value, tag: DPlusTag::AssumedZero, conservative: lm.converged })
            } else {
                estimate_dplus_iterative(op, rb, &opts.inner, tol)
            }
        }
    }
}

fn certify_positive(op: &SymmetricOperator, rb: &RitzBlock, opts: &CertOptions) -> Result<ProjectionCertificate> {
    let dplus = estimate_dplus(op, rb, opts)?;
    ProjectionCertificate::for_positive_block(op, rb, dplus)
}

/// `V_+ L_+ V_+^T` from the positive part of the `cfg.num_wanted` largest
/// Ritz pairs.
pub fn project_approx_positive(
    op: &SymmetricOperator,
    cfg: &LanczosConfig,
    opts: &CertOptions,
) -> Result<ApproxProjection> {
    let (block, _) = lanczos_largest(op, &clamp_wanted(cfg, op.dim()), &opts.tolerances)?;
    let rb = split_by_sign(&recompute_residuals(op, &block, &opts.tolerances)?, Side::Positive);
    let certificate = certify_positive(op, &rb, opts)?;
    Ok(ApproxProjection { ritz: rb, base: op.clone(), certificate })
}

/// `A - V_- L_- V_-^T` from the nonpositive part of the `cfg.num_wanted`
/// smallest Ritz pairs, computed as the largest pairs of `-A`.
pub fn project_approx_negative(
    op: &SymmetricOperator,
    cfg: &LanczosConfig,
    opts: &CertOptions,
) -> Result<ApproxProjection> {
    let neg = op.negated();
    let (block, _) = lanczos_largest(&neg, &clamp_wanted(cfg, op.dim()), &opts.tolerances)?;
    let rb = split_by_sign(&recompute_residuals(op, &block.negated(), &opts.tolerances)?, Side::Negative);
    let certificate = certify_positive(&neg, &rb.negated(), opts)?.into_negative();
    Ok(ApproxProjection { ritz: rb, base: op.clone(), certificate })
}

/// Number of Ritz values probed at each end of the spectrum by [`project_auto`].
pub const AUTO_PROBE_SIZE: usize = 10;

/// Picks the side expected to need fewer eigenpairs and delegates.
///
/// The positive side is chosen when the probes see no more positive than
/// negative eigenvalues; ties go to the positive side when `trace(A) <= 0`.
pub fn project_auto(op: &SymmetricOperator, cfg: &LanczosConfig, opts: &CertOptions) -> Result<ApproxProjection> {
    let selection = select_side(op, cfg.seed, &opts.tolerances)?;
    let mut proj = match selection.chosen {
        Side::Positive => project_approx_positive(op, cfg, opts)?,
        Side::Negative => project_approx_negative(op, cfg, opts)?,
    };
    proj.certificate.side_selection = Some(selection);
    Ok(proj)
}

/// The probing step of [`project_auto`].
pub fn select_side(op: &SymmetricOperator, seed: u64, tol: &Tolerances) -> Result<SideSelection> {
    let s = AUTO_PROBE_SIZE.min(op.dim());
    let probe = LanczosConfig::new(s).with_tol(1e-8).with_max_restarts(50).with_seed(seed);
    let (top, _) = lanczos_largest(op, &probe, tol)?;
    let (bottom, _) = lanczos_largest(&op.negated(), &probe, tol)?;
    let positive_probes = top.values().iter().filter(|&&v| v > 0.0).count();
    let negative_probes = bottom.values().iter().filter(|&&v| v > 0.0).count();
    let trace_estimate = op.trace_estimate(30, seed);
    let chosen = if positive_probes < negative_probes {
        Side::Positive
    } else if positive_probes > negative_probes {
        Side::Negative
    } else if trace_estimate <= 0.0 {
        Side::Positive
    } else {
        Side::Negative
    };
    Ok(SideSelection { probe_size: s, positive_probes, negative_probes, trace_estimate, chosen })
}

/// Rebuilds solver output with residuals `A V - V L` computed from scratch,
/// so certificates never rest on the solver's running quantities.
fn recompute_residuals(op: &SymmetricOperator, block: &RitzBlock, tol: &Tolerances) -> Result<RitzBlock> {
    if block.is_empty() {
        return Ok(block.clone());
    }
    Ok(RitzBlock::new(op, block.basis().clone(), block.values().clone(), None, tol)?.with_converged(block.converged()))
}

fn clamp_wanted(cfg: &LanczosConfig, n: usize) -> LanczosConfig {
    let mut c = cfg.clone();
    c.num_wanted = c.num_wanted.min(n);
    c
}
