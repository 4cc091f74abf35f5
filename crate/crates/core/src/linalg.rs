//! Norms and subspace helpers.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::eigen::symmetric_eigenvalues;
use crate::error::{Error, Result};

pub fn frobenius_norm(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.is_square() && crate::operator::max_asymmetry(m) == 0.0 {
        let ev = symmetric_eigenvalues(m);
        return ev[0].abs().max(ev[ev.len() - 1].abs());
    }
    let gram = if m.nrows() <= m.ncols() { m * m.transpose() } else { m.transpose() * m };
    let gram = crate::operator::symmetrize(&gram);
    symmetric_eigenvalues(&gram)[0].max(0.0).sqrt()
}

/// `||V^T V - I||_F`.
pub fn orthonormality_defect(v: &DMatrix<f64>) -> f64 {
    let k = v.ncols();
    (v.transpose() * v - DMatrix::<f64>::identity(k, k)).norm()
}

pub(crate) fn check_orthonormal(v: &DMatrix<f64>, orth_tol: f64) -> Result<()> {
    let defect = orthonormality_defect(v);
    if defect > orth_tol || !defect.is_finite() {
        return Err(Error::NotOrthonormal { defect, allowed: orth_tol });
    }
    Ok(())
}

/// Orthonormal basis of the nullspace of `V^T`, from a full QR factorization
/// of `V` extended with seeded Gaussian columns.
pub fn orthonormal_complement(v: &DMatrix<f64>, seed: u64, orth_tol: f64) -> Result<DMatrix<f64>> {
    let (n, k) = v.shape();
    if k > n {
        return Err(Error::Dimension(format!("basis has {k} columns but only {n} rows")));
    }
    check_orthonormal(v, orth_tol)?;
    if k == n {
        return Ok(DMatrix::zeros(n, 0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extended = DMatrix::zeros(n, n);
    extended.columns_mut(0, k).copy_from(v);
    for j in k..n {
        for i in 0..n {
            extended[(i, j)] = StandardNormal.sample(&mut rng);
        }
    }
    let q = extended.qr().q();
    Ok(q.columns(k, n - k).into_owned())
}

/// Blocks of `[V V_perp]^T A [V V_perp]` below the first `k` rows:
/// returns `(V_perp^T A V, V_perp^T A V_perp)` for the orthonormal
/// complement defined by the Householder vectors of a QR factorization of `V`.
pub fn complement_blocks(a: &DMatrix<f64>, v: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, k) = v.shape();
    if k == 0 {
        return (DMatrix::zeros(n, 0), a.clone());
    }
    let qr = v.clone().qr();
    // Q^T A
    let mut left = a.clone();
    qr.q_tr_mul(&mut left);
    // Q^T (Q^T A)^T = Q^T A Q
    let mut both = left.transpose();
    qr.q_tr_mul(&mut both);
    // V = Q_k R with R orthogonal (diagonal +-1 up to rounding)
    let cross = both.view((k, 0), (n - k, k)).into_owned() * qr.r();
    let block = crate::operator::symmetrize(&both.view((k, k), (n - k, n - k)).into_owned());
    (cross, block)
}
