//! Estimates of the positive part of `A` restricted to the complement of a
//! Ritz basis: `lambda_max(V_perp^T A V_perp)` and `||D_+||_F` with
//! `D_+ = P_+(V_perp^T A V_perp)`.
//!
//! `V_perp` is never formed on the iterative path; Lanczos runs on the
//! complement by orthogonalizing every iterate against `V`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::eigen::symmetric_eigenvalues;
use crate::error::Result;
use crate::lanczos::{lanczos_constrained, LanczosConfig};
use crate::linalg::complement_blocks;
use crate::operator::SymmetricOperator;
use crate::ritz::RitzBlock;

/// How a `||D_+||_F` value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DPlusTag {
    ExactOracle,
    IterativeEstimate,
    AssumedZero,
}

impl DPlusTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DPlusTag::ExactOracle => "ExactOracle",
            DPlusTag::IterativeEstimate => "IterativeEstimate",
            DPlusTag::AssumedZero => "AssumedZero",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DPlusEstimate {
    pub frob: f64,
    /// Estimate of `lambda_max(V_perp^T A V_perp)`; `-inf` if the complement is empty.
    pub lambda_max: f64,
    pub tag: DPlusTag,
    /// False when an inner solve failed to converge; the value is then an
    /// estimate rather than a certified upper bound.
    pub conservative: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeflatedLambdaMax {
    /// `theta_max + ||r(theta_max)||_2`, or `-inf` for an empty complement.
    pub value: f64,
    pub converged: bool,
}

fn complement_dim(rb: &RitzBlock) -> usize {
    rb.dim() - rb.len()
}

/// Upper estimate of `lambda_max(V_perp^T A V_perp)` from Lanczos on the
/// deflated operator, inflated by the residual of the top Ritz pair.
pub fn estimate_deflated_lambda_max(
    op: &SymmetricOperator,
    rb: &RitzBlock,
    inner: &LanczosConfig,
    tol: &Tolerances,
) -> Result<DeflatedLambdaMax> {
    let avail = complement_dim(rb);
    if avail == 0 {
        return Ok(DeflatedLambdaMax { value: f64::NEG_INFINITY, converged: true });
    }
    let mut cfg = inner.clone();
    cfg.num_wanted = cfg.num_wanted.clamp(1, avail);
    cfg.max_basis_size = cfg.max_basis_size.max(cfg.num_wanted);
    let (block, _) = lanczos_constrained(op, &cfg, Some(rb.basis()), tol)?;
    let mut best = f64::NEG_INFINITY;
    for i in 0..block.len() {
        let x = block.basis().column(i);
        if (rb.basis().tr_mul(&x)).norm() > tol.orth_tol {
            continue;
        }
        best = best.max(block.values()[i] + block.residual_norms()[i]);
    }
    Ok(DeflatedLambdaMax { value: best, converged: block.converged() })
}

/// Exact `D_+` quantities from the dense complement block.
pub fn dplus_exact(a: &DMatrix<f64>, basis: &DMatrix<f64>) -> DPlusEstimate {
    if basis.ncols() == a.nrows() {
        return DPlusEstimate { frob: 0.0, lambda_max: f64::NEG_INFINITY, tag: DPlusTag::ExactOracle, conservative: true };
    }
    let (_, block) = complement_blocks(a, basis);
    let mu = symmetric_eigenvalues(&block);
    let frob = mu.iter().map(|&m| m.max(0.0).powi(2)).sum::<f64>().sqrt();
    DPlusEstimate { frob, lambda_max: mu[0], tag: DPlusTag::ExactOracle, conservative: true }
}

/// `||D_+||_F`: exact for dense operators below the dense threshold,
/// otherwise by deflated Lanczos, short-circuiting to zero when the
/// deflated spectrum is estimated nonpositive.
pub fn estimate_dplus_frob(
    op: &SymmetricOperator,
    rb: &RitzBlock,
    inner: &LanczosConfig,
    tol: &Tolerances,
) -> Result<DPlusEstimate> {
    if let Some(a) = op.as_dense() {
        if op.dim() < tol.dense_threshold {
            return Ok(dplus_exact(a, rb.basis()));
        }
    }
    estimate_dplus_iterative(op, rb, inner, tol)
}

/// Iterative path of [`estimate_dplus_frob`], regardless of density.
pub fn estimate_dplus_iterative(
    op: &SymmetricOperator,
    rb: &RitzBlock,
    inner: &LanczosConfig,
    tol: &Tolerances,
) -> Result<DPlusEstimate> {
    let avail = complement_dim(rb);
    let lm = estimate_deflated_lambda_max(op, rb, inner, tol)?;
    if lm.value <= 0.0 {
        return Ok(DPlusEstimate {
            frob: 0.0,
            lambda_max: lm.value,
            tag: DPlusTag::AssumedZero,
            conservative: lm.converged,
        });
    }
    // grow the number of extracted pairs until a nonpositive one shows up
    let mut wanted = inner.num_wanted.max(4).min(avail);
    loop {
        let mut cfg = inner.clone();
        cfg.num_wanted = wanted;
        cfg.max_basis_size = cfg.max_basis_size.max(2 * wanted).min(avail.max(wanted));
        let (block, _) = lanczos_constrained(op, &cfg, Some(rb.basis()), tol)?;
        let last = block.values()[block.len() - 1];
        if last <= 0.0 || wanted == avail {
            let mut sum = 0.0;
            let mut top = f64::NEG_INFINITY;
            for i in 0..block.len() {
                let bound = block.values()[i] + block.residual_norms()[i];
                top = top.max(bound);
                sum += bound.max(0.0).powi(2);
            }
            return Ok(DPlusEstimate {
                frob: sum.sqrt(),
                lambda_max: lm.value.max(top),
                tag: DPlusTag::IterativeEstimate,
                conservative: block.converged() && lm.converged,
            });
        }
        wanted = (2 * wanted).min(avail);
    }
}
