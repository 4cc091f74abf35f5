//! Dense symmetric eigendecomposition used as the exact oracle.
//!
//! Small matrices (`n <= 64`) use cyclic Jacobi; larger ones are reduced to
//! tridiagonal form with Householder reflections and then diagonalized by
//! implicit QL iteration with Wilkinson-type shifts.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operator::SymmetricOperator;

/// Dimension at or below which cyclic Jacobi is used.
pub const JACOBI_MAX_DIM: usize = 64;

const MAX_JACOBI_SWEEPS: usize = 100;
const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues (descending) and orthonormal eigenvectors of a symmetric matrix.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let (values, vectors) = if a.nrows() <= JACOBI_MAX_DIM {
        jacobi(a, true)
    } else {
        tridiagonal_ql(a, true)
    };
    sort_descending(values, vectors.expect("vectors requested"))
}

/// Eigenvalues only, descending.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> DVector<f64> {
    let (values, _) = if a.nrows() <= JACOBI_MAX_DIM {
        jacobi(a, false)
    } else {
        tridiagonal_ql(a, false)
    };
    let mut v: Vec<f64> = values.iter().copied().collect();
    v.sort_by(|x, y| y.total_cmp(x));
    DVector::from_vec(v)
}

fn sort_descending(values: DVector<f64>, vectors: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let sorted_values = DVector::from_fn(n, |i, _| values[order[i]]);
    let sorted_vectors = DMatrix::from_fn(vectors.nrows(), n, |r, c| vectors[(r, order[c])]);
    (sorted_values, sorted_vectors)
}

fn jacobi(a: &DMatrix<f64>, want_vectors: bool) -> (DVector<f64>, Option<DMatrix<f64>>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = want_vectors.then(|| DMatrix::<f64>::identity(n, n));
    let scale = m.norm();
    if scale == 0.0 {
        return (DVector::zeros(n), v);
    }
    for sweep in 0..MAX_JACOBI_SWEEPS {
        let mut off = 0.0;
        for q in 0..n {
            for p in 0..q {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= f64::EPSILON * 1e-3 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                let h = aqq - app;
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    (m.diagonal(), v)
}

/// Householder reduction `A = Q T Q^T` followed by implicit QL on `T`.
fn tridiagonal_ql(a: &DMatrix<f64>, want_vectors: bool) -> (DVector<f64>, Option<DMatrix<f64>>) {
    let (mut d, mut e, q) = householder_tridiagonalize(a, want_vectors);
    let mut v = q;
    tql(&mut d, &mut e, v.as_mut());
    (DVector::from_vec(d), v)
}

/// Returns the diagonal, the subdiagonal (`e[i]` couples `i` and `i+1`,
/// `e[n-1] = 0`) and optionally the accumulated orthogonal factor.
fn householder_tridiagonalize(
    a: &DMatrix<f64>,
    want_vectors: bool,
) -> (Vec<f64>, Vec<f64>, Option<DMatrix<f64>>) {
    let n = a.nrows();
    // column-major working copy
    let mut w: Vec<f64> = a.as_slice().to_vec();
    let idx = |i: usize, j: usize| i + j * n;
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n.saturating_sub(2));
    let mut e = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut v: Vec<f64> = (0..len).map(|i| w[idx(k + 1 + i, k)]).collect();
        let xnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let alpha = if v[0] >= 0.0 { -xnorm } else { xnorm };
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        let beta = if vnorm2 == 0.0 { 0.0 } else { 2.0 / vnorm2 };
        e[k] = if beta == 0.0 { w[idx(k + 1, k)] } else { alpha };
        if beta != 0.0 {
            // p = beta * A_sub * v
            let mut p = vec![0.0; len];
            for j in 0..len {
                let vj = v[j];
                if vj == 0.0 {
                    continue;
                }
                let col = &w[idx(k + 1, k + 1 + j)..idx(k + 1, k + 1 + j) + len];
                for (pi, &aij) in p.iter_mut().zip(col) {
                    *pi += aij * vj;
                }
            }
            for pi in p.iter_mut() {
                *pi *= beta;
            }
            let pv: f64 = p.iter().zip(&v).map(|(x, y)| x * y).sum();
            let half = 0.5 * beta * pv;
            let wv: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - half * vi).collect();
            for j in 0..len {
                let (vj, wj) = (v[j], wv[j]);
                let start = idx(k + 1, k + 1 + j);
                let col = &mut w[start..start + len];
                for i in 0..len {
                    col[i] -= v[i] * wj + wv[i] * vj;
                }
            }
        }
        reflectors.push((v, beta));
    }
    let d: Vec<f64> = (0..n).map(|i| w[idx(i, i)]).collect();
    if n >= 2 {
        e[n - 2] = w[idx(n - 1, n - 2)];
    }
    e[n.saturating_sub(1)] = 0.0;

    let q = want_vectors.then(|| {
        let mut q = DMatrix::<f64>::identity(n, n);
        for (k, (v, beta)) in reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let off = k + 1;
            let len = v.len();
            for j in off..n {
                let mut s = 0.0;
                for i in 0..len {
                    s += v[i] * q[(off + i, j)];
                }
                s *= beta;
                if s != 0.0 {
                    for i in 0..len {
                        q[(off + i, j)] -= s * v[i];
                    }
                }
            }
        }
        q
    });
    (d, e, q)
}

/// Implicit QL on a symmetric tridiagonal matrix; rotations are accumulated
/// into the columns of `v` when present.
fn tql(d: &mut [f64], e: &mut [f64], mut v: Option<&mut DMatrix<f64>>) {
    let n = d.len();
    if n == 0 {
        return;
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        let nr = v.nrows();
                        for k in 0..nr {
                            let vk1 = v[(k, i + 1)];
                            let vk = v[(k, i)];
                            v[(k, i + 1)] = s * vk + c * vk1;
                            v[(k, i)] = c * vk - s * vk1;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 || iter >= MAX_QL_ITERATIONS || !e[l].is_finite() {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

/// Full eigendecomposition `A = V diag(values) V^T` with values sorted
/// descending and the strictly positive ones first.
#[derive(Clone, Debug)]
pub struct ExactEigendecomposition {
    vectors: DMatrix<f64>,
    values: DVector<f64>,
    num_positive: usize,
}

impl ExactEigendecomposition {
    /// Computes the decomposition of a dense matrix (assumed symmetric).
    pub fn of_matrix(a: &DMatrix<f64>) -> Self {
        let (values, vectors) = symmetric_eigen(a);
        Self::from_parts(values, vectors)
    }

    /// Dense operators, or implicit ones no larger than `dense_threshold`.
    pub fn of_operator(op: &SymmetricOperator, dense_threshold: usize) -> Result<Self> {
        match op.as_dense() {
            Some(a) => Ok(Self::of_matrix(a)),
            None if op.dim() <= dense_threshold => Ok(Self::of_matrix(&op.to_dense())),
            None => Err(Error::Unsupported(format!(
                "exact eigendecomposition of an implicit operator with n = {} > {}",
                op.dim(),
                dense_threshold
            ))),
        }
    }

    /// Assembles a decomposition from known parts, sorting descending.
    pub fn from_parts(values: DVector<f64>, vectors: DMatrix<f64>) -> Self {
        let (values, vectors) = sort_descending(values, vectors);
        // zero eigenvalues belong to the nonpositive block
        let num_positive = values.iter().take_while(|&&v| v > 0.0).count();
        Self { vectors, values, num_positive }
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn num_positive(&self) -> usize {
        self.num_positive
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn positive_vectors(&self) -> DMatrix<f64> {
        self.vectors.columns(0, self.num_positive).into_owned()
    }

    pub fn positive_values(&self) -> DVector<f64> {
        self.values.rows(0, self.num_positive).into_owned()
    }

    /// The nonpositive eigenvalues `Lambda_-`.
    pub fn nonpositive_values(&self) -> DVector<f64> {
        self.values.rows(self.num_positive, self.dim() - self.num_positive).into_owned()
    }

    /// `V_+ Lambda_+ V_+^T`.
    pub fn positive_part(&self) -> DMatrix<f64> {
        let vp = self.positive_vectors();
        let scaled = scale_columns(&vp, self.positive_values().as_slice());
        crate::operator::symmetrize(&(scaled * vp.transpose()))
    }

    /// `V_- Lambda_- V_-^T`.
    pub fn negative_part(&self) -> DMatrix<f64> {
        let k = self.num_positive;
        let vm = self.vectors.columns(k, self.dim() - k).into_owned();
        let scaled = scale_columns(&vm, self.nonpositive_values().as_slice());
        crate::operator::symmetrize(&(scaled * vm.transpose()))
    }

    /// `||A V - V diag(values)||_F` against the given matrix.
    pub fn residual_frob(&self, a: &DMatrix<f64>) -> f64 {
        (a * &self.vectors - scale_columns(&self.vectors, self.values.as_slice())).norm()
    }
}

/// `M diag(s)`.
pub(crate) fn scale_columns(m: &DMatrix<f64>, s: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (j, &sj) in s.iter().enumerate() {
        out.column_mut(j).scale_mut(sj);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
        (&g + g.transpose()) * 0.5
    }

    fn check_decomposition(a: &DMatrix<f64>) {
        let (values, vectors) = symmetric_eigen(a);
        let n = a.nrows();
        let orth = (vectors.transpose() * &vectors - DMatrix::<f64>::identity(n, n)).norm();
        assert!(orth < 1e-12 * n as f64, "orthogonality defect {orth}");
        let res = (a * &vectors - scale_columns(&vectors, values.as_slice())).norm();
        assert!(res < 1e-12 * a.norm().max(1.0) * n as f64, "residual {res}");
        for w in values.as_slice().windows(2) {
            assert!(w[0] >= w[1]);
        }
        // independent oracle
        let mut reference: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(|x, y| y.total_cmp(x));
        for (x, y) in values.iter().zip(&reference) {
            assert!((x - y).abs() < 1e-11 * a.norm().max(1.0), "{x} vs {y}");
        }
        let only = symmetric_eigenvalues(a);
        for (x, y) in only.iter().zip(values.iter()) {
            assert!((x - y).abs() < 1e-11 * a.norm().max(1.0));
        }
    }

    #[test]
    fn jacobi_path_small_random() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (17, 4), (64, 5)] {
            check_decomposition(&random_symmetric(n, seed));
        }
    }

    #[test]
    fn tridiagonal_path_larger_random() {
        for (n, seed) in [(65, 6), (100, 7), (157, 8)] {
            check_decomposition(&random_symmetric(n, seed));
        }
    }

    #[test]
    fn diagonal_and_zero_matrices() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -5.0, 0.0, 2.0]));
        let (values, _) = symmetric_eigen(&a);
        assert_eq!(values.as_slice(), &[3.0, 2.0, 0.0, -5.0]);
        check_decomposition(&DMatrix::zeros(70, 70));
        check_decomposition(&DMatrix::zeros(3, 3));
        check_decomposition(&DMatrix::identity(80, 80));
    }

    #[test]
    fn repeated_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = DMatrix::from_fn(90, 90, |_, _| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng));
        let q = g.qr().q();
        let lam: Vec<f64> = (0..90).map(|i| if i < 45 { 1.0 } else { -1.0 }).collect();
        let a = crate::operator::symmetrize(&(scale_columns(&q, &lam) * q.transpose()));
        check_decomposition(&a);
    }

    #[test]
    fn zero_eigenvalues_go_to_nonpositive_block() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 2.0, -1.0]));
        let ed = ExactEigendecomposition::of_matrix(&a);
        assert_eq!(ed.num_positive(), 1);
        assert_eq!(ed.nonpositive_values().as_slice(), &[0.0, -1.0]);
        assert!((ed.positive_part() - DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 2.0, 0.0]))).norm() < 1e-15);
    }
}
