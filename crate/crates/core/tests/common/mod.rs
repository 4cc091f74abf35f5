//! Dense reference computations for integration tests. Everything here uses
//! nalgebra's own eigensolver and QR, never the crate's, so checks against
//! it are independent of the code under test.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(n: usize, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, k, |_, _| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
}

pub fn random_orthonormal(n: usize, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    if k == 0 {
        return DMatrix::zeros(n, 0);
    }
    gaussian(n, k, rng).qr().q()
}

/// Eigenvalues (descending) and eigenvectors.
pub fn eig(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let se = a.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| se.eigenvalues[j].total_cmp(&se.eigenvalues[i]));
    let values = DVector::from_iterator(n, idx.iter().map(|&i| se.eigenvalues[i]));
    let vectors = DMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, idx[c])]);
    (values, vectors)
}

pub fn eigenvalues(a: &DMatrix<f64>) -> DVector<f64> {
    eig(a).0
}

pub fn pplus(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (values, vectors) = eig(a);
    let mut out = DMatrix::zeros(a.nrows(), a.ncols());
    for (i, &l) in values.iter().enumerate() {
        if l > 0.0 {
            let v = vectors.column(i);
            out += l * v * v.transpose();
        }
    }
    out
}

pub fn spectral(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.clone().svd(false, false).singular_values.max()
    }
}

/// Orthonormal basis of the orthogonal complement of `span(v)`.
pub fn complement(v: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let (n, k) = v.shape();
    if k == n {
        return DMatrix::zeros(n, 0);
    }
    let mut full = DMatrix::zeros(n, n);
    full.columns_mut(0, k).copy_from(v);
    full.columns_mut(k, n - k).copy_from(&gaussian(n, n - k, rng));
    let q = full.qr().q();
    let mut vp = q.columns(k, n - k).into_owned();
    // one projection pass for accuracy
    vp -= v * v.tr_mul(&vp);
    vp.qr().q()
}

/// Norms entering the certificates, all computed densely.
#[derive(Clone, Copy, Debug)]
pub struct Quantities {
    pub residual_frob: f64,
    pub cross_frob: f64,
    pub dplus_frob: f64,
    pub dplus_lambda_max: f64,
}

pub fn quantities(a: &DMatrix<f64>, v: &DMatrix<f64>, values: &DVector<f64>, rng: &mut ChaCha8Rng) -> Quantities {
    let r = a * v - v * DMatrix::from_diagonal(values);
    let vp = complement(v, rng);
    if vp.ncols() == 0 {
        return Quantities { residual_frob: r.norm(), cross_frob: 0.0, dplus_frob: 0.0, dplus_lambda_max: f64::NEG_INFINITY };
    }
    let cross = vp.transpose() * a * v;
    let block = vp.transpose() * a * &vp;
    let block = (&block + block.transpose()) * 0.5;
    let mu = eigenvalues(&block);
    Quantities {
        residual_frob: r.norm(),
        cross_frob: cross.norm(),
        dplus_frob: mu.iter().map(|m| m.max(0.0).powi(2)).sum::<f64>().sqrt(),
        dplus_lambda_max: mu[0],
    }
}

/// Rayleigh-Ritz on `span(q)` with nalgebra: basis and values (descending).
pub fn rayleigh_ritz(a: &DMatrix<f64>, q: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let h = q.transpose() * a * q;
    let h = (&h + h.transpose()) * 0.5;
    let (theta, s) = eig(&h);
    (q * s, theta)
}

/// Columns whose value satisfies `keep`.
pub fn select(v: &DMatrix<f64>, values: &DVector<f64>, keep: impl Fn(f64) -> bool) -> (DMatrix<f64>, DVector<f64>) {
    let idx: Vec<usize> = (0..values.len()).filter(|&i| keep(values[i])).collect();
    let basis = DMatrix::from_fn(v.nrows(), idx.len(), |r, c| v[(r, idx[c])]);
    (basis, DVector::from_iterator(idx.len(), idx.iter().map(|&i| values[i])))
}

/// A random symmetric test matrix of dimension `n` from one of several
/// families: Gaussian, prescribed spectra with clusters and tiny values,
/// nearly semidefinite, and low rank.
pub fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let kind = rng.random_range(0..5);
    let spectrum: Vec<f64> = match kind {
        0 => {
            let g = gaussian(n, n, rng);
            return (&g + g.transpose()) * 0.5;
        }
        1 => (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        2 => (0..n)
            .map(|i| {
                let mag = 10f64.powf(-rng.random_range(0.0..10.0));
                if i % 3 == 0 { mag } else { -mag }
            })
            .collect(),
        3 => (0..n).map(|i| if i < 2 { -rng.random_range(0.0..1.0) } else { rng.random_range(0.0..1.0) }).collect(),
        _ => (0..n).map(|i| if i < 3 { rng.random_range(-5.0..5.0) } else { 0.0 }).collect(),
    };
    let q = random_orthonormal(n, n, rng);
    let a = &q * DMatrix::from_diagonal(&DVector::from_vec(spectrum)) * q.transpose();
    (&a + a.transpose()) * 0.5
}

/// An orthonormal `n x k` basis: random, or a perturbation of eigenvectors
/// at either end of the spectrum.
pub fn random_basis(a: &DMatrix<f64>, k: usize, top: bool, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = a.nrows();
    if k == 0 {
        return DMatrix::zeros(n, 0);
    }
    if rng.random_range(0..3) == 0 {
        return random_orthonormal(n, k, rng);
    }
    let (_, vectors) = eig(a);
    let start = if top { 0 } else { n - k };
    let base = vectors.columns(start, k).into_owned();
    let noise = 10f64.powf(-rng.random_range(1.0..12.0));
    (base + gaussian(n, k, rng) * noise).qr().q()
}
