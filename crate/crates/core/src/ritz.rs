//! Ritz blocks: an orthonormal basis, its Ritz values, and cached residuals.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::eigen::{scale_columns, symmetric_eigen};
use crate::error::{Error, Result};
use crate::linalg::check_orthonormal;
use crate::operator::{symmetrize, SymmetricOperator};

/// Which end of the spectrum a block approximates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Positive,
    Negative,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Positive => "positive",
            Side::Negative => "negative",
        }
    }
}

/// `k` approximate eigenpairs of `A` with their residual `R = A V - V diag(values)`.
///
/// A block produced by an eigensolver carries no side until it is split by
/// sign; a sided block satisfies the semidefiniteness of its values.
#[derive(Clone, Debug)]
pub struct RitzBlock {
    basis: DMatrix<f64>,
    values: DVector<f64>,
    side: Option<Side>,
    rayleigh_exact: bool,
    residual: DMatrix<f64>,
    residual_norms: DVector<f64>,
    converged: bool,
}

impl RitzBlock {
    /// Builds a block and computes its residual from scratch.
    ///
    /// `rayleigh_exact` is measured, not asserted: it holds when
    /// `||V^T A V - diag(values)||_F <= 10 * orth_tol * ||A||_2`.
    pub fn new(
        op: &SymmetricOperator,
        basis: DMatrix<f64>,
        values: DVector<f64>,
        side: Option<Side>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n = op.dim();
        if basis.nrows() != n || basis.ncols() != values.len() {
            return Err(Error::Dimension(format!(
                "basis is {}x{} and values have length {} for an operator of dimension {n}",
                basis.nrows(),
                basis.ncols(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("Ritz values must be finite".into()));
        }
        check_orthonormal(&basis, tol.orth_tol)?;
        check_side(&values, side)?;
        let av = op.apply_block(&basis);
        let residual = &av - scale_columns(&basis, values.as_slice());
        let projected = basis.transpose() * &av;
        let defect = (projected - DMatrix::from_diagonal(&values)).norm();
        let rayleigh_exact = defect <= 10.0 * tol.orth_tol * op.norm_estimate().max(f64::MIN_POSITIVE);
        Ok(Self::from_parts(basis, values, side, rayleigh_exact, residual, true))
    }

    fn from_parts(
        basis: DMatrix<f64>,
        values: DVector<f64>,
        side: Option<Side>,
        rayleigh_exact: bool,
        residual: DMatrix<f64>,
        converged: bool,
    ) -> Self {
        let residual_norms = DVector::from_iterator(residual.ncols(), residual.column_iter().map(|c| c.norm()));
        Self { basis, values, side, rayleigh_exact, residual, residual_norms, converged }
    }

    /// Solver output: residuals computed explicitly, values are Rayleigh
    /// quotients by construction.
    pub(crate) fn solver_block(basis: DMatrix<f64>, values: DVector<f64>, residual: DMatrix<f64>) -> Self {
        Self::from_parts(basis, values, None, true, residual, true)
    }

    /// A block with no columns.
    pub fn empty(n: usize, side: Option<Side>) -> Self {
        Self::from_parts(DMatrix::zeros(n, 0), DVector::zeros(0), side, true, DMatrix::zeros(n, 0), true)
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn side(&self) -> Option<Side> {
        self.side
    }

    pub fn rayleigh_exact(&self) -> bool {
        self.rayleigh_exact
    }

    pub fn residual(&self) -> &DMatrix<f64> {
        &self.residual
    }

    pub fn residual_norms(&self) -> &DVector<f64> {
        &self.residual_norms
    }

    /// `||R||_F`.
    pub fn residual_frob(&self) -> f64 {
        self.residual.norm()
    }

    /// Whether the producing solver met its convergence tolerance.
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn with_converged(mut self, converged: bool) -> Self {
        self.converged = converged;
        self
    }

    /// Sub-block of the given columns, in the given order. Residual columns
    /// are carried over since each depends only on its own pair.
    pub fn select(&self, indices: &[usize], side: Option<Side>) -> Result<Self> {
        let n = self.dim();
        let k = indices.len();
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::Dimension(format!("column {bad} out of range for a block of {}", self.len())));
        }
        let values = DVector::from_iterator(k, indices.iter().map(|&i| self.values[i]));
        check_side(&values, side)?;
        let basis = DMatrix::from_fn(n, k, |r, c| self.basis[(r, indices[c])]);
        let residual = DMatrix::from_fn(n, k, |r, c| self.residual[(r, indices[c])]);
        Ok(Self::from_parts(basis, values, side, self.rayleigh_exact, residual, self.converged))
    }

    /// The same pairs viewed as pairs of `-A`: values and residual negated,
    /// side flipped.
    pub fn negated(&self) -> Self {
        let side = self.side.map(|s| match s {
            Side::Positive => Side::Negative,
            Side::Negative => Side::Positive,
        });
        Self {
            basis: self.basis.clone(),
            values: -&self.values,
            side,
            rayleigh_exact: self.rayleigh_exact,
            residual: -&self.residual,
            residual_norms: self.residual_norms.clone(),
            converged: self.converged,
        }
    }

    /// `V diag(values) V^T`.
    pub fn assemble(&self) -> DMatrix<f64> {
        symmetrize(&(scale_columns(&self.basis, self.values.as_slice()) * self.basis.transpose()))
    }

    /// `||V^T V - I||_F`.
    pub fn orthonormality_defect(&self) -> f64 {
        crate::linalg::orthonormality_defect(&self.basis)
    }
}

fn check_side(values: &DVector<f64>, side: Option<Side>) -> Result<()> {
    let ok = match side {
        None => true,
        Some(Side::Positive) => values.iter().all(|&v| v >= 0.0),
        Some(Side::Negative) => values.iter().all(|&v| v <= 0.0),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "Ritz values {:?} are inconsistent with side {side:?}",
            values.as_slice()
        )))
    }
}

/// Rayleigh-Ritz extraction from the subspace spanned by `q`: eigenpairs of
/// `Q^T A Q = S Theta S^T` give the basis `Q S` and values `Theta`
/// (descending).
pub fn rayleigh_ritz(op: &SymmetricOperator, q: &DMatrix<f64>, tol: &Tolerances) -> Result<RitzBlock> {
    if q.nrows() != op.dim() {
        return Err(Error::Dimension(format!(
            "subspace basis has {} rows for an operator of dimension {}",
            q.nrows(),
            op.dim()
        )));
    }
    if q.ncols() == 0 {
        return Ok(RitzBlock::empty(op.dim(), None));
    }
    check_orthonormal(q, tol.orth_tol)?;
    let aq = op.apply_block(q);
    let projected = symmetrize(&(q.transpose() * &aq));
    let (theta, s) = symmetric_eigen(&projected);
    let basis = q * &s;
    let residual = &aq * &s - scale_columns(&basis, theta.as_slice());
    Ok(RitzBlock::from_parts(basis, theta, None, true, residual, true))
}

/// Keeps the strictly positive values (`Positive`) or the nonpositive ones
/// (`Negative`), preserving order.
pub fn split_by_sign(rb: &RitzBlock, side: Side) -> RitzBlock {
    let keep: Vec<usize> = (0..rb.len())
        .filter(|&i| match side {
            Side::Positive => rb.values[i] > 0.0,
            Side::Negative => rb.values[i] <= 0.0,
        })
        .collect();
    rb.select(&keep, Some(side)).expect("selected values satisfy the side invariant")
}
