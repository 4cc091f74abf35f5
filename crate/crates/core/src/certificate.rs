//! Certificates: the norms measured on a computed Ritz block, the formula
//! chosen from the hypotheses that hold, and the resulting bound on
//! `||X - P_+(A)||_F` for the approximate projection `X`.

use serde::{Deserialize, Serialize};

use crate::bounds::{corollary1_bound, corollary2_bound, theorem1_bound};
use crate::deflation::{DPlusEstimate, DPlusTag};
use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::operator::SymmetricOperator;
use crate::ritz::{RitzBlock, Side};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundFormula {
    /// `sqrt(||R||^2 + cross^2 + ||D_+||^2)`.
    Theorem1,
    /// `sqrt(2 ||R||^2 + ||D_+||^2)`.
    Corollary1,
    /// `sqrt(2) ||R||`.
    Corollary2,
    Thm1Negative,
    Cor1Negative,
    Cor2Negative,
}

impl BoundFormula {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundFormula::Theorem1 => "Theorem1",
            BoundFormula::Corollary1 => "Corollary1",
            BoundFormula::Corollary2 => "Corollary2",
            BoundFormula::Thm1Negative => "Thm1Negative",
            BoundFormula::Cor1Negative => "Cor1Negative",
            BoundFormula::Cor2Negative => "Cor2Negative",
        }
    }

    pub fn side(self) -> Side {
        match self {
            BoundFormula::Theorem1 | BoundFormula::Corollary1 | BoundFormula::Corollary2 => Side::Positive,
            _ => Side::Negative,
        }
    }

    /// The negative-side counterpart (identity on negative formulas).
    pub fn to_negative(self) -> Self {
        match self {
            BoundFormula::Theorem1 => BoundFormula::Thm1Negative,
            BoundFormula::Corollary1 => BoundFormula::Cor1Negative,
            BoundFormula::Corollary2 => BoundFormula::Cor2Negative,
            other => other,
        }
    }

    /// Closed form of the formula on the given norms. `dplus_frob` is
    /// `||D_-||_F` for the negative variants.
    pub fn evaluate(self, residual_frob: f64, cross_term_frob: f64, dplus_frob: f64) -> Result<f64> {
        match self {
            BoundFormula::Theorem1 | BoundFormula::Thm1Negative => {
                theorem1_bound(residual_frob, cross_term_frob, dplus_frob)
            }
            BoundFormula::Corollary1 | BoundFormula::Cor1Negative => corollary1_bound(residual_frob, dplus_frob),
            BoundFormula::Corollary2 | BoundFormula::Cor2Negative => corollary2_bound(residual_frob),
        }
    }
}

impl std::str::FromStr for BoundFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "Theorem1" => BoundFormula::Theorem1,
            "Corollary1" => BoundFormula::Corollary1,
            "Corollary2" => BoundFormula::Corollary2,
            "Thm1Negative" => BoundFormula::Thm1Negative,
            "Cor1Negative" => BoundFormula::Cor1Negative,
            "Cor2Negative" => BoundFormula::Cor2Negative,
            _ => return Err(Error::InvalidArgument(format!("unknown formula {s:?}"))),
        })
    }
}

/// How the side of an automatic projection was chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideSelection {
    pub probe_size: usize,
    /// Positive values among the `probe_size` largest Ritz values of `A`.
    pub positive_probes: usize,
    /// Negative values among the `probe_size` smallest Ritz values of `A`.
    pub negative_probes: usize,
    pub trace_estimate: f64,
    pub chosen: Side,
}

/// Norms and bound for one approximate projection.
///
/// For the negative side every field refers to `-A` and the block of its
/// positive pairs: `dplus_*` then describe `D_-`, and `dplus_lambda_max` is
/// `-lambda_min` of the complement block of `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionCertificate {
    pub residual_frob: f64,
    /// `||R||_2`; diagnostic only, no spectral-norm bound is issued.
    pub residual_spec: f64,
    /// `||V_perp^T A V||_F`, equal to `||R||_F` for Rayleigh-Ritz pairs.
    pub cross_term_frob: f64,
    pub dplus_frob: f64,
    pub dplus_tag: DPlusTag,
    /// `-inf` when the complement is empty.
    pub dplus_lambda_max: f64,
    pub bound_value: f64,
    pub formula: BoundFormula,
    pub side: Side,
    /// False when the eigensolver or the `D_+` estimate did not converge.
    pub conservative: bool,
    pub n: usize,
    pub k: usize,
    pub side_selection: Option<SideSelection>,
}

impl ProjectionCertificate {
    /// Certificate for a positive-side block of `op`.
    ///
    /// The strongest formula whose hypotheses hold is chosen: Corollary 2
    /// when the complement is verified negative semidefinite
    /// (`dplus.lambda_max <= 0`), Corollary 1 for Rayleigh-Ritz values, and
    /// Theorem 1 otherwise.
    pub fn for_positive_block(op: &SymmetricOperator, rb: &RitzBlock, dplus: DPlusEstimate) -> Result<Self> {
        if rb.side() != Some(Side::Positive) {
            return Err(Error::InvalidArgument(format!(
                "a positive-side certificate needs a Positive block, got {:?}",
                rb.side()
            )));
        }
        if rb.dim() != op.dim() {
            return Err(Error::Dimension(format!("block of dimension {} for operator of dimension {}", rb.dim(), op.dim())));
        }
        let residual_frob = rb.residual_frob();
        let cross_term_frob = cross_term_frob(rb);
        let formula = if !rb.rayleigh_exact() {
            BoundFormula::Theorem1
        } else if dplus.lambda_max <= 0.0 {
            BoundFormula::Corollary2
        } else {
            BoundFormula::Corollary1
        };
        let bound_value = formula.evaluate(residual_frob, cross_term_frob, dplus.frob)?;
        Ok(Self {
            residual_frob,
            residual_spec: spectral_norm(rb.residual()),
            cross_term_frob,
            dplus_frob: dplus.frob,
            dplus_tag: dplus.tag,
            dplus_lambda_max: dplus.lambda_max,
            bound_value,
            formula,
            side: Side::Positive,
            conservative: rb.converged() && dplus.conservative,
            n: rb.dim(),
            k: rb.len(),
            side_selection: None,
        })
    }

    /// Relabels a certificate computed for `-A` as a negative-side one for `A`.
    pub(crate) fn into_negative(mut self) -> Self {
        self.formula = self.formula.to_negative();
        self.side = Side::Negative;
        self
    }

    /// Re-evaluates the closed form from the stored norms.
    pub fn recompute_bound(&self) -> Result<f64> {
        self.formula.evaluate(self.residual_frob, self.cross_term_frob, self.dplus_frob)
    }

    pub fn to_record(&self, wall_time_ms: f64) -> CertificateRecord {
        CertificateRecord {
            residual_frob: self.residual_frob,
            cross_term_frob: self.cross_term_frob,
            dplus_frob: self.dplus_frob,
            dplus_tag: self.dplus_tag,
            bound: self.bound_value,
            formula: self.formula,
            side: self.side,
            n: self.n,
            k: self.k,
            conservative: self.conservative,
            wall_time_ms,
        }
    }
}

/// `||(I - V V^T) R||_F`, which equals `||V_perp^T A V||_F`.
pub fn cross_term_frob(rb: &RitzBlock) -> f64 {
    if rb.is_empty() {
        return 0.0;
    }
    let v = rb.basis();
    let r = rb.residual();
    (r - v * v.tr_mul(r)).norm()
}

/// One JSON-lines certificate record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub residual_frob: f64,
    pub cross_term_frob: f64,
    pub dplus_frob: f64,
    pub dplus_tag: DPlusTag,
    pub bound: f64,
    pub formula: BoundFormula,
    pub side: Side,
    pub n: usize,
    pub k: usize,
    pub conservative: bool,
    pub wall_time_ms: f64,
}

impl CertificateRecord {
    pub fn recompute_bound(&self) -> Result<f64> {
        self.formula.evaluate(self.residual_frob, self.cross_term_frob, self.dplus_frob)
    }

    /// Whether the stored bound matches its formula to `rel_tol` relative.
    pub fn revalidate(&self, rel_tol: f64) -> Result<bool> {
        let b = self.recompute_bound()?;
        Ok((b - self.bound).abs() <= rel_tol * b.abs().max(self.bound.abs()).max(f64::MIN_POSITIVE))
    }
}
