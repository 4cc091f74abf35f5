//! Closed-form Frobenius-norm error bounds for approximate projections onto
//! the PSD cone, the Ritz-pair dropping rule, the subspace-error bound, and
//! the gap-dependent baseline they are compared against.
//!
//! Notation: `R = A V - V L` is the residual of the computed pairs,
//! `cross = ||V_perp^T A V||_F` and `D_+ = P_+(V_perp^T A V_perp)`.
//! All bounds are exact-arithmetic statements about the norms passed in.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eigen::ExactEigendecomposition;
use crate::error::{Error, Result};
use crate::ritz::RitzBlock;

fn check_nonnegative(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be nonnegative, got {x}")))
    }
}

/// `sqrt(||R||_F^2 + cross^2 + ||D_+||_F^2)`; valid for any orthonormal `V`
/// and PSD diagonal `L`.
pub fn theorem1_bound(residual_frob: f64, cross_term_frob: f64, dplus_frob: f64) -> Result<f64> {
    check_nonnegative("residual_frob", residual_frob)?;
    check_nonnegative("cross_term_frob", cross_term_frob)?;
    check_nonnegative("dplus_frob", dplus_frob)?;
    Ok((residual_frob.powi(2) + cross_term_frob.powi(2) + dplus_frob.powi(2)).sqrt())
}

/// `sqrt(2 ||R||_F^2 + ||D_+||_F^2)`; requires `L = V^T A V`.
pub fn corollary1_bound(residual_frob: f64, dplus_frob: f64) -> Result<f64> {
    check_nonnegative("residual_frob", residual_frob)?;
    check_nonnegative("dplus_frob", dplus_frob)?;
    Ok((2.0 * residual_frob.powi(2) + dplus_frob.powi(2)).sqrt())
}

/// `sqrt(2) ||R||_F`; additionally requires `V_perp^T A V_perp <= 0`.
pub fn corollary2_bound(residual_frob: f64) -> Result<f64> {
    check_nonnegative("residual_frob", residual_frob)?;
    Ok(std::f64::consts::SQRT_2 * residual_frob)
}

/// Bounds for `A - V_- L_- V_-^T` built from nonpositive pairs; the
/// positive-side formulas applied to `-A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NegativeVariant {
    /// Any orthonormal `V_-`, NSD `L_-`.
    Theorem1,
    /// `L_- = V_-^T A V_-`.
    Corollary1,
    /// Also `V_-perp^T A V_-perp >= 0`.
    Corollary2,
}

pub fn negative_side_bound(
    residual_frob: f64,
    cross_term_frob: f64,
    dminus_frob: f64,
    variant: NegativeVariant,
) -> Result<f64> {
    match variant {
        NegativeVariant::Theorem1 => theorem1_bound(residual_frob, cross_term_frob, dminus_frob),
        NegativeVariant::Corollary1 => {
            check_nonnegative("cross_term_frob", cross_term_frob)?;
            corollary1_bound(residual_frob, dminus_frob)
        }
        NegativeVariant::Corollary2 => {
            check_nonnegative("cross_term_frob", cross_term_frob)?;
            check_nonnegative("dminus_frob", dminus_frob)?;
            corollary2_bound(residual_frob)
        }
    }
}

/// Bound on `||A (V_+ V_+^T - V V^T)||_F`:
/// `sqrt(2 ||R||^2 + 2 ||R|| ||D_+|| + ||D_+||^2)`; requires Rayleigh-Ritz values.
pub fn subspace_error_bound(residual_frob: f64, dplus_frob: f64) -> Result<f64> {
    check_nonnegative("residual_frob", residual_frob)?;
    check_nonnegative("dplus_frob", dplus_frob)?;
    let r = residual_frob;
    let d = dplus_frob;
    Ok((2.0 * r * r + 2.0 * r * d + d * d).sqrt())
}

/// Whether the projection error and the subspace error are at most
/// `||R||_F` apart, up to `1e-8 * scale`.
pub fn sandwich_gap(proj_error_frob: f64, subspace_error_frob: f64, residual_frob: f64, scale: f64) -> bool {
    (proj_error_frob - subspace_error_frob).abs() <= residual_frob + 1e-8 * scale
}

/// The classical gap-dependent estimate `2 ||R||_F ||A||_2 / gap`, where
/// `gap = min_ij |L_ii - (Lambda_-)_jj|` against the exact nonpositive
/// eigenvalues. Comparison baseline only.
///
/// Returns `(bound, gap)`; with no nonpositive eigenvalues the gap is
/// `+inf` and the bound `0`.
pub fn naive_gap_bound(rb: &RitzBlock, exact: &ExactEigendecomposition) -> (f64, f64) {
    let nonpos = exact.nonpositive_values();
    let mut gap = f64::INFINITY;
    for &l in rb.values().iter() {
        for &m in nonpos.iter() {
            gap = gap.min((l - m).abs());
        }
    }
    if gap.is_infinite() {
        return (0.0, gap);
    }
    let norm2 = exact.values().iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    (2.0 * rb.residual_frob() * norm2 / gap, gap)
}

/// Splits off the positive Ritz pairs whose residual is too large to help:
/// pair `i` is dropped when `(sqrt(2) - 1) ||r_i||_2 > max(l_i, lambda_max)`,
/// where `lambda_max` is the largest eigenvalue of `V_perp^T A V_perp`.
/// Dropping such pairs never increases the Corollary-1 bound.
///
/// Returns the kept block (order preserved) and the dropped column indices.
pub fn drop_ritz_pairs(rb: &RitzBlock, dplus_lambda_max: f64) -> (RitzBlock, Vec<usize>) {
    let factor = std::f64::consts::SQRT_2 - 1.0;
    let mut kept = Vec::with_capacity(rb.len());
    let mut dropped = Vec::new();
    for i in 0..rb.len() {
        let threshold = rb.values()[i].max(dplus_lambda_max);
        if factor * rb.residual_norms()[i] > threshold {
            dropped.push(i);
        } else {
            kept.push(i);
        }
    }
    let block = rb.select(&kept, rb.side()).expect("a sub-block keeps the side invariant");
    (block, dropped)
}

/// One instance's certified bound next to the exact error and the baseline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundComparison {
    pub exact_error: f64,
    pub cert_bound: f64,
    pub naive_gap_bound: f64,
    pub gap: f64,
    /// `exact_error^2 / ||R||_F^2`.
    pub ratio_sharpness: f64,
}

impl BoundComparison {
    /// `exact_error = ||V L V^T - P_+(A)||_F` from the exact decomposition.
    pub fn evaluate(rb: &RitzBlock, exact: &ExactEigendecomposition, cert_bound: f64) -> Self {
        let exact_error = exact_projection_error(&rb.assemble(), exact);
        let (naive, gap) = naive_gap_bound(rb, exact);
        let r = rb.residual_frob();
        Self {
            exact_error,
            cert_bound,
            naive_gap_bound: naive,
            gap,
            ratio_sharpness: if r > 0.0 { exact_error.powi(2) / r.powi(2) } else { 0.0 },
        }
    }
}

/// `||X - P_+(A)||_F`.
pub fn exact_projection_error(approx: &DMatrix<f64>, exact: &ExactEigendecomposition) -> f64 {
    (approx - exact.positive_part()).norm()
}
